"""Simulation of the volatility model with scaled Student-t disturbances."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError
from .svfilter import volatility_coeffs

__all__ = ['SimConfig', 'make_stream', 'sample_scaled_t', 'simulate',
           'replication_seeds']


def make_stream(seed):
    """Counter-based generator; identical draws on every platform."""
    return np.random.Generator(np.random.Philox(seed))


def replication_seeds(seed, count):
    """Independent child seeds for parallel replications."""
    return np.random.SeedSequence(seed).spawn(count)


def sample_scaled_t(df, count, stream):
    """``count`` draws of the unit-variance Student t with ``df > 2`` dof."""
    if not df > 2:
        raise ConfigError(f"unit-variance t needs df > 2, got {df}")
    z = stream.standard_normal(count)
    chi2 = stream.chisquare(df, count)
    return z / np.sqrt(chi2 / df) * math.sqrt((df - 2) / df)


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one simulated path.

    ``v_coeffs`` defaults to ``(1 + x/(2d))^d + 0.1``.
    """

    a: float = 0.9
    psi: float = 1.0
    sigma: float = 1.0
    T: int = 100
    seed: int = 0
    n_X: int = 9
    n_W: int = 9
    n_U: int = 3
    d: int = 4
    v_coeffs: tuple = field(default=None)

    def __post_init__(self):
        if self.T < 1:
            raise ConfigError("T must be at least 1")
        if not abs(self.a) < 1:
            raise ConfigError("need |a| < 1")
        if self.psi < 0 or self.sigma < 0:
            raise ConfigError("psi and sigma must be non-negative")
        for name in ('n_X', 'n_W', 'n_U'):
            if getattr(self, name) <= 2:
                raise ConfigError(f"{name} must exceed 2")
        if self.v_coeffs is None:
            object.__setattr__(self, 'v_coeffs', tuple(volatility_coeffs(self.d)))
        else:
            object.__setattr__(self, 'v_coeffs', tuple(float(c) for c in self.v_coeffs))

    @classmethod
    def from_model(cls, model, T, seed, n_X=9, n_W=9, n_U=3):
        return cls(a=model.a, psi=model.psi, sigma=model.sigma, T=T, seed=seed,
                   n_X=n_X, n_W=n_W, n_U=n_U, v_coeffs=model.v_coeffs)


def simulate(cfg, stream=None):
    """Latent states and observations of one path.

    Returns
    -------
    xs, ys : ndarray
        Length ``cfg.T``.
    """
    if stream is None:
        stream = make_stream(cfg.seed)
    x1 = sample_scaled_t(cfg.n_X, 1, stream)[0] / math.sqrt(1.0 - cfg.a ** 2)
    w = sample_scaled_t(cfg.n_W, cfg.T - 1, stream)
    u = sample_scaled_t(cfg.n_U, cfg.T, stream)
    coeffs = np.array([cfg.psi * c * cfg.sigma ** j for j, c in enumerate(cfg.v_coeffs)])
    xs, ys = kernels.ar1_volatility_path(x1, cfg.a, w, u, coeffs)
    return np.asarray(xs), np.asarray(ys)
