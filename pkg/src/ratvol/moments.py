"""Closed-form moments of ``|Y_t|`` and the method-of-moments estimator.

Powers of the AR(1) state ``X_{t+1} = a X_t + W_t`` stacked as
``(1, X, .., X^d)`` follow a linear recursion driven by a lower triangular
matrix ``F``; this yields the mean, variance and autocovariances of
``|Y_t| = psi V(sigma X_t) |U_t|`` from the raw moments of ``W`` and ``U``.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import kernels
from .errors import ConfigError, EstimationError, MomentExistenceError

__all__ = ['MomentSpec', 'mx_recursion', 'f_matrix', 'second_moment_matrix',
           'acf_vx', 'absY_moments', 'moment_vector', 'sample_moment_vector',
           'mm_objective', 'mm_estimate', 'MMResult', 'scaled_t_moments',
           'scaled_t_abs_mean']


def scaled_t_moments(df, k_max):
    """Raw moments ``0..k_max`` of the unit-variance Student t with ``df`` dof."""
    if df <= 2:
        raise ConfigError("unit-variance scaling needs df > 2")
    if k_max >= df:
        raise MomentExistenceError(f"moment of order {k_max} does not exist for df = {df}")
    out = np.zeros(k_max + 1)
    out[0] = 1.0
    val = 1.0
    for j in range(1, k_max // 2 + 1):
        val *= (df - 2) * (2 * j - 1) / (df - 2 * j)
        out[2 * j] = val
    return out


def scaled_t_abs_mean(df):
    """``E|U|`` for the unit-variance Student t."""
    if df <= 2:
        raise ConfigError("unit-variance scaling needs df > 2")
    lg = math.lgamma((df + 1) / 2) - math.lgamma(df / 2)
    return 2 * math.sqrt(df - 2) * math.exp(lg) / (math.sqrt(math.pi) * (df - 1))


@dataclass(frozen=True)
class MomentSpec:
    """Inputs of the moment formulas.

    Attributes
    ----------
    M_W : tuple
        Raw moments ``E W^k`` for ``k = 0..m_W`` with ``m_W >= 2d``.
    M_U2 : float
        ``E U^2``.
    E_absU : float
        ``E|U|``.
    v : tuple
        Ascending coefficients of ``V`` (length ``d + 1``).
    """

    M_W: tuple
    M_U2: float
    E_absU: float
    v: tuple
    a: float
    psi: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'M_W', tuple(float(m) for m in self.M_W))
        object.__setattr__(self, 'v', tuple(float(c) for c in self.v))
        if not abs(self.a) < 1:
            raise ConfigError(f"need |a| < 1, got {self.a}")
        if len(self.M_W) - 1 < 2 * self.d:
            raise MomentExistenceError(
                f"need state-noise moments up to order {2 * self.d}, have {len(self.M_W) - 1}")

    @property
    def d(self):
        return len(self.v) - 1

    @property
    def scaled_v(self):
        """Coefficients of ``x -> V(sigma x)``."""
        return np.array([c * self.sigma ** j for j, c in enumerate(self.v)])

    @classmethod
    def scaled_t(cls, a, psi=1.0, sigma=1.0, d=4, n_W=9, n_U=3, v=None):
        from .svfilter import volatility_coeffs
        if v is None:
            v = volatility_coeffs(d)
        d = len(v) - 1
        return cls(M_W=tuple(scaled_t_moments(n_W, 2 * d)), M_U2=1.0,
                   E_absU=scaled_t_abs_mean(n_U), v=tuple(v), a=a, psi=psi, sigma=sigma)

    def with_params(self, a, psi, sigma):
        return MomentSpec(self.M_W, self.M_U2, self.E_absU, self.v, a, psi, sigma)


def mx_recursion(spec, k_max):
    """Stationary raw moments ``E X^k`` for ``k = 0..k_max``."""
    if k_max > len(spec.M_W) - 1:
        raise MomentExistenceError(f"need state-noise moments up to order {k_max}")
    a = spec.a
    mw = spec.M_W
    mx = np.empty(k_max + 1)
    mx[0] = 1.0
    for k in range(1, k_max + 1):
        acc = sum(math.comb(k, l) * a ** l * mw[k - l] * mx[l] for l in range(k))
        mx[k] = acc / (1.0 - a ** k)
    return mx


def f_matrix(spec):
    """Lower triangular ``F`` with ``E[Xvec_{t+1} | X_t] = F Xvec_t``."""
    d = spec.d
    F = np.zeros((d + 1, d + 1))
    for i in range(d + 1):
        for l in range(i + 1):
            F[i, l] = math.comb(i, l) * spec.a ** l * spec.M_W[i - l]
    return F


def second_moment_matrix(spec):
    """``E[Xvec Xvec']`` with entries ``E X^{i+j}``."""
    d = spec.d
    mx = mx_recursion(spec, 2 * d)
    idx = np.add.outer(np.arange(d + 1), np.arange(d + 1))
    return mx[idx]


def acf_vx(spec, k):
    """``Cov(V(sigma X_{t+k}), V(sigma X_t))``."""
    if k < 0:
        raise ValueError("lag must be non-negative")
    d = spec.d
    v = spec.scaled_v
    S = second_moment_matrix(spec)
    mx = S[:, 0]
    if k == 0:
        return float(v @ (S - np.outer(mx, mx)) @ v)
    G = f_matrix(spec)
    G[:, 0] -= mx
    w = S @ v
    for _ in range(k):
        w = G @ w
    return float(v @ w)


def absY_moments(spec, lags):
    """Mean, variance and autocovariances (lags ``1..lags``) of ``|Y_t|``."""
    v = spec.scaled_v
    S = second_moment_matrix(spec)
    ev = float(v @ S[:, 0])
    ev2 = float(v @ S @ v)
    psi = spec.psi
    mean = psi * ev * spec.E_absU
    var = psi ** 2 * (ev2 * spec.M_U2 - (ev * spec.E_absU) ** 2)
    acov = np.array([psi ** 2 * acf_vx(spec, k) * spec.E_absU ** 2
                     for k in range(1, lags + 1)])
    return mean, var, acov


def moment_vector(spec, lags, a=None, psi=None, sigma=None):
    """``(E|Y|, Var|Y|, Cov_1..Cov_lags)`` through the compiled kernel."""
    a = spec.a if a is None else a
    psi = spec.psi if psi is None else psi
    sigma = spec.sigma if sigma is None else sigma
    return kernels.absy_moment_vector(float(a), float(psi), float(sigma),
                                      np.asarray(spec.M_W[:2 * spec.d + 1]),
                                      np.asarray(spec.v), spec.M_U2, spec.E_absU, int(lags))


def sample_moment_vector(ys, lags):
    """Sample mean, variance and biased autocovariances of ``|y|``."""
    z = np.abs(np.asarray(ys, float))
    acov = kernels.sample_acov(z, int(lags))
    return np.concatenate(([z.mean()], acov))


A_BOUND = 0.999


def _unpack(theta):
    return A_BOUND * math.tanh(theta[0]), math.exp(theta[1]), math.exp(theta[2])


def mm_objective(spec, target, lags, a, psi, sigma):
    """Squared Euclidean distance between model and sample moments."""
    m = moment_vector(spec, lags, a, psi, sigma)
    return float(np.sum((m - target) ** 2))


@dataclass(frozen=True)
class MMResult:
    a_hat: float
    psi_hat: float
    sigma_hat: float
    objective: float
    lags: int
    n_starts: int

    def as_dict(self):
        return {'a_hat': self.a_hat, 'psi_hat': self.psi_hat, 'sigma_hat': self.sigma_hat,
                'objective': self.objective, 'lags': self.lags}


DEFAULT_GRID = {'a': (0.2, 0.5, 0.8, 0.95), 'sigma': (0.5, 1.0)}


def mm_estimate(ys, lags=10, init_grid=None, spec=None, target=None):
    """Method-of-moments fit of ``(a, psi, sigma)`` by multi-start Nelder-Mead.

    Parameters
    ----------
    ys : array_like
        Observations; ignored when ``target`` is given.
    lags : int
    init_grid : dict, optional
        Start values ``{'a': [...], 'sigma': [...]}``; ``psi`` starts at the
        value matching the sample mean.
    spec : MomentSpec, optional
        Structural constants (noise moments, ``V``); defaults to the scaled-t
        setup.
    target : array_like, optional
        Moment vector to fit instead of the sample moments of ``ys``.
    """
    if spec is None:
        spec = MomentSpec.scaled_t(0.5)
    grid = dict(DEFAULT_GRID)
    if init_grid:
        grid.update(init_grid)
    if target is None:
        ys = np.asarray(ys, float).reshape(-1)
        if ys.size <= lags + 10:
            raise EstimationError(f"series of length {ys.size} too short for {lags} lags")
        if not np.all(np.isfinite(ys)):
            raise EstimationError("series contains non-finite values")
        target = sample_moment_vector(ys, lags)
        if target[1] <= 0:
            raise EstimationError("degenerate series: |y| has zero variance")
    target = np.asarray(target, float)
    if target.size != lags + 2:
        raise ValueError("target must have length lags + 2")
    if not target[0] > 0:
        raise EstimationError("degenerate series: mean of |y| is not positive")

    def fun(theta):
        if not np.all(np.isfinite(theta)) or np.any(np.abs(theta[1:]) > 30):
            return 1e300
        a, psi, sigma = _unpack(theta)
        val = mm_objective(spec, target, lags, a, psi, sigma)
        return val if math.isfinite(val) else 1e300

    best = None
    starts = 0
    for a0 in grid['a']:
        for s0 in grid['sigma']:
            m1 = moment_vector(spec, 0, a0, 1.0, s0)[0]
            psi0 = target[0] / m1 if m1 > 0 else 1.0
            th0 = np.array([math.atanh(min(a0, 0.99 * A_BOUND) / A_BOUND),
                            math.log(psi0), math.log(s0)])
            res = optimize.minimize(fun, th0, method='Nelder-Mead',
                                    options={'xatol': 1e-8, 'fatol': 1e-14,
                                             'maxiter': 4000, 'maxfev': 8000})
            starts += 1
            if best is None or res.fun < best.fun:
                best = res
    if best is None or not math.isfinite(best.fun) or best.fun >= 1e300:
        raise EstimationError("no start produced a finite objective")
    a, psi, sigma = _unpack(best.x)
    return MMResult(a, psi, sigma, float(best.fun), int(lags), starts)
