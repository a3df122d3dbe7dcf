"""Exact recursive filter for ``X_{t+1} = a X_t + W_t``, ``Y_t = psi V(sigma X_t) U_t``.

Every conditional density of the latent state is rational and carried as a
spectral summand.  The update multiplies spectral factors, the prediction
scales and convolves summands, and balanced truncation keeps the state
dimension bounded.
"""
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np
from scipy import integrate, linalg as sla

from . import ratpdf as rp
from . import realization as rz
from . import sbt
from .errors import ConfigError, MomentExistenceError, RatvolError, StepFailure
from .realization import Realization

__all__ = ['volatility_coeffs', 'SvModel', 'StepDiagnostics', 'FilterState',
           'FilterRun', 'initial_state', 'update', 'predict', 'step', 'run',
           'update_weight_density', 'poly_eval']

MINIMAL_TOL = 1e-12


def volatility_coeffs(d, offset=Fraction(1, 10)):
    """Ascending coefficients of ``(1 + x/(2d))^d + offset``, expanded exactly."""
    d = int(d)
    if d < 0:
        raise ConfigError("degree must be non-negative")
    if d == 0:
        return [float(1 + Fraction(offset))]
    base = Fraction(1, 2 * d)
    coeffs = [Fraction(math.comb(d, j)) * base ** j for j in range(d + 1)]
    coeffs[0] += Fraction(offset)
    return [float(c) for c in coeffs]


def poly_eval(coeffs, x):
    """Evaluate the ascending-coefficient polynomial at ``x``."""
    return np.polynomial.polynomial.polyval(x, np.asarray(coeffs, float))


def _check_positive_poly(coeffs):
    c = np.trim_zeros(np.asarray(coeffs, float), 'b')
    if c.size == 0:
        raise ConfigError("volatility polynomial is identically zero")
    if c.size == 1:
        if c[0] <= 0:
            raise ConfigError("volatility polynomial must be positive")
        return
    roots = np.polynomial.polynomial.polyroots(c)
    scale = max(1.0, np.abs(roots).max())
    if np.any(np.abs(roots.imag) <= 1e-10 * scale) or c[0] <= 0:
        raise ConfigError("volatility polynomial has real roots; V must be positive on R")


def _abs_mean(pdf):
    """``E|U|`` by quadrature, ``inf`` when it diverges."""
    if pdf.codegree < 3:
        return math.inf
    f = lambda u: abs(u) * rp.pdf_eval(pdf, u)
    val, _ = integrate.quad(f, -np.inf, np.inf, limit=200, epsabs=1e-13, epsrel=1e-11)
    return val


@dataclass(frozen=True, eq=False)
class SvModel:
    """Stochastic volatility model with rational disturbance densities.

    Parameters
    ----------
    a : float
        AR coefficient, ``0 < |a| < 1``.
    psi, sigma : float
        Output scale and volatility-argument scale.
    v_coeffs : sequence of float
        Ascending coefficients of ``V``; ``V > 0`` on the real line.
    pdf_W, pdf_U, pdf_X1 : RationalPdf
        Densities of the state noise, observation noise and initial state.
    abs_mean_U : float, optional
        ``E|U|``; computed by quadrature when omitted.
    """

    a: float
    psi: float
    sigma: float
    v_coeffs: tuple
    pdf_W: rp.RationalPdf
    pdf_U: rp.RationalPdf
    pdf_X1: rp.RationalPdf
    abs_mean_U: float = None

    def __post_init__(self):
        if not (0 < abs(self.a) < 1):
            raise ConfigError(f"need 0 < |a| < 1, got a = {self.a}")
        if not self.psi > 0:
            raise ConfigError(f"psi must be positive, got {self.psi}")
        if not self.sigma >= 0:
            raise ConfigError(f"sigma must be non-negative, got {self.sigma}")
        coeffs = tuple(float(c) for c in self.v_coeffs)
        _check_positive_poly(coeffs)
        object.__setattr__(self, 'v_coeffs', coeffs)
        if self.abs_mean_U is None:
            object.__setattr__(self, 'abs_mean_U', _abs_mean(self.pdf_U))

    @property
    def d(self):
        return len(self.v_coeffs) - 1

    @property
    def k_W(self):
        return self.pdf_W.codegree

    def scaled_coeffs(self):
        """Coefficients of ``psi * V(sigma x)`` with trailing zeros removed."""
        c = np.array([self.psi * v * self.sigma ** j for j, v in enumerate(self.v_coeffs)])
        return np.trim_zeros(c, 'b') if np.any(c) else c[:1]

    @classmethod
    def scaled_t(cls, a=0.9, psi=2.0, sigma=1.5, d=4, n_W=9, n_U=3, n_X=9):
        """Scaled-t disturbances and ``V(x) = (1 + x/(2d))^d + 0.1``."""
        from .moments import scaled_t_abs_mean
        return cls(a=a, psi=psi, sigma=sigma, v_coeffs=volatility_coeffs(d),
                   pdf_W=rp.make_scaled_t_odd(n_W), pdf_U=rp.make_scaled_t_odd(n_U),
                   pdf_X1=rp.make_scaled_t_odd(n_X, 1.0 / (1.0 - a * a)),
                   abs_mean_U=scaled_t_abs_mean(n_U))

    def with_params(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True, eq=False)
class StepDiagnostics:
    """Per-step record; ``full_predictive`` is kept only on request."""

    t: int
    y: float
    c_t: float
    loglik: float
    k_pred: int
    k_post: int
    k_next: int
    n_full: int
    m_reduced: int
    bound: float
    sigma: np.ndarray = field(repr=False)
    mean_x: float = math.nan
    mean_v: float = math.nan
    forecast_absY: float = math.nan
    k_post_staircase: int = None
    k_next_staircase: int = None
    full_predictive: rp.SpectralSummand = field(default=None, repr=False)
    reduced_predictive: rp.SpectralSummand = field(default=None, repr=False)

    def as_record(self):
        out = {'t': self.t, 'y': self.y, 'c_t': self.c_t, 'loglik': self.loglik,
               'k_pred': self.k_pred, 'k_post': self.k_post, 'k_next': self.k_next,
               'n_full': self.n_full, 'm_reduced': self.m_reduced, 'bound': self.bound,
               'mean_x': self.mean_x, 'mean_v': self.mean_v,
               'forecast_absY': self.forecast_absY}
        if self.sigma is not None:
            c = int(np.sum(self.sigma >= 1.0 - sbt.UNIT_TOL))
            out['sigma_tail'] = [float(s) for s in self.sigma[max(c, self.m_reduced):][:5]]
        return out


@dataclass(frozen=True, eq=False)
class FilterState:
    """Predictive density of ``X_t`` given ``Y_1..Y_{t-1}``."""

    predictive: rp.RationalPdf
    t: int = 1
    loglik: float = 0.0
    diagnostics: tuple = ()


def initial_state(model):
    p = model.pdf_X1
    z = rp.normalized(p.summand)
    return FilterState(rp.RationalPdf(z, 1.0, p.codegree), 1, 0.0, ())


# ---------------------------------------------------------------------------
# update

def _inverse_poly_realization(coeffs):
    """Realization of ``i / q(-i s)`` for real ascending ``coeffs`` of ``q``."""
    c = np.asarray(coeffs, complex)
    d = c.size - 1
    # q(-i s) = sum_j c_j (-i)^j s^j
    pc = c * (-1j) ** np.arange(d + 1)
    lead = pc[-1]
    monic = pc / lead
    A = np.zeros((d, d), complex)
    A[:-1, 1:] = np.eye(d - 1)
    A[-1, :] = -monic[:-1]
    B = np.zeros((d, 1), complex)
    B[-1, 0] = 1.0
    C = np.zeros((1, d), complex)
    C[0, 0] = 1.0
    # diagonal scaling tames the companion form for large d
    _, (sc, _) = sla.matrix_balance(A, permute=False, separate=True)
    A = A * sc[None, :] / sc[:, None]
    B = B / sc[:, None]
    C = C * sc[None, :]
    return Realization(A, B, C * (1j / lead), 0)


def update_weight_density(model, y):
    """Spectral density of ``x -> p_U(y / V~(x)) / V~(x)``, ``V~ = psi V(sigma .)``.

    Returns ``None`` when the weight is constant (``V~`` of degree zero)
    together with that constant.
    """
    coeffs = model.scaled_coeffs()
    if coeffs.size == 1:
        v0 = coeffs[0]
        return None, rp.pdf_eval(model.pdf_U, y / v0) / v0
    g2 = _inverse_poly_realization(coeffs)
    if y == 0.0:
        # weight p_U(0) / V~(x) = -i p_U(0) g2(ix)
        r = rz.scale_output(g2, -1j * rp.pdf_eval(model.pdf_U, 0.0))
    else:
        phi_u = rp.density_from_summand(model.pdf_U.summand).realization
        phi_u = rz.scale_output(phi_u, 1.0 / model.pdf_U.norm_const)
        g1 = rz.scale_output(rz.arg_scale_times_s(phi_u, y), -1j)
        r = rp.compose(g1, g2)
    scale = np.abs(r.C).max() * np.abs(r.B).max()
    if np.abs(r.D).max() > 1e-8 * max(scale, 1.0):
        raise RatvolError("update weight is not strictly proper")
    r = Realization(r.A, r.B, r.C, 0)
    r = rz.minimal_reduce(r, MINIMAL_TOL)
    return rp.SpectralDensity(r.A, r.B, r.C), None


def update(state, y, model):
    """Bayes step: posterior of ``X_t`` given ``Y_1..Y_t`` and ``c_t``.

    Returns
    -------
    posterior : RationalPdf
        Normalized; ``codegree`` follows the bookkeeping rule.
    c_t : float
        One-step predictive likelihood ``p(y_t | y_1..y_{t-1})``.
    """
    pred = state.predictive
    phi_w, const = update_weight_density(model, float(y))
    if phi_w is None:
        z = pred.summand
        c_t = float(const) * 2 * math.pi * z.cm.real
        return rp.RationalPdf(rp.normalized(z), 1.0, pred.codegree), c_t
    d_eff = model.scaled_coeffs().size - 1
    k1, _ = rp.factor_from_summand(pred.summand, 'min_phase', codegree=pred.codegree)
    z2 = rp.summand_from_density(phi_w)
    k2, _ = rp.factor_from_summand(z2, 'min_phase')
    prod = rz.multiply(k1.realization, k2.realization)
    kf = rp.SpectralFactor(prod.A, prod.B, prod.C)
    zpost = rp.summand_from_factor(kf)
    c_t = 2 * math.pi * zpost.cm.real
    if not c_t > 0:
        raise RatvolError(f"non-positive normalization constant {c_t}")
    kappa = 1.0 / math.sqrt(c_t)
    kf = rp.SpectralFactor(kf.A, kf.B * kappa, kf.C)
    return rp.RationalPdf(rp.normalized(zpost), 1.0, pred.codegree + d_eff, kf), c_t


# ---------------------------------------------------------------------------
# prediction

def predict(posterior, model):
    """Predictive density of ``a X_t + W_t``; co-degree ``min(k_post, k_W)``."""
    zs = rp.scale_rv(posterior.summand, model.a)
    zw = rp.normalized(model.pdf_W.summand)
    z = rp.normalized(rp.convolve(zs, zw))
    return rp.RationalPdf(z, 1.0, min(posterior.codegree, model.k_W))


def _minimal(z):
    r = rz.minimal_reduce(z.realization, MINIMAL_TOL)
    return rp.SpectralSummand(r.A, r.B, r.C)


def _moments(z, codegree, d):
    if codegree - 2 < max(d, 1):
        return None
    return rp.normalize_and_moments(z, max(d, 1), codegree)[1].real


def _v_mean(model, mom):
    if mom is None:
        return math.nan
    return float(sum(v * model.sigma ** j * mom[j] for j, v in enumerate(model.v_coeffs)))


def step(state, y, model, tau=0.02, keep_full=False, check_codegree=False):
    """One update, prediction and reduction; returns the next state."""
    t = state.t
    try:
        pred = state.predictive
        mom = _moments(pred.summand, pred.codegree, model.d)
        mean_v = _v_mean(model, mom)
        forecast = model.psi * model.abs_mean_U * mean_v
        post, c_t = update(state, y, model)
        nxt = predict(post, model)
        zfull = _minimal(nxt.summand)
        if tau is None or tau >= 1.0:
            zred, bound, m, sig = zfull, 0.0, zfull.n, None
        else:
            zred, bound, m, bal = sbt.truncate_to_tolerance(zfull, tau)
            sig = bal.all_sigma
        zred = rp.normalized(zred)
        kps = kns = None
        if check_codegree:
            kps = rp.summand_codegree(post.summand)
            kns = rp.summand_codegree(zred)
        mom_next = _moments(zred, nxt.codegree, model.d)
    except RatvolError as exc:
        raise StepFailure(t, exc) from exc
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise StepFailure(t, exc) from exc
    loglik = state.loglik + math.log(c_t)
    diag = StepDiagnostics(
        t=t, y=float(y), c_t=c_t, loglik=loglik, k_pred=pred.codegree,
        k_post=post.codegree, k_next=nxt.codegree, n_full=zfull.n, m_reduced=m,
        bound=bound, sigma=sig,
        mean_x=math.nan if mom_next is None else float(mom_next[1]),
        mean_v=_v_mean(model, mom_next), forecast_absY=forecast,
        k_post_staircase=kps, k_next_staircase=kns,
        full_predictive=rp.normalized(zfull) if keep_full else None,
        reduced_predictive=zred if keep_full else None)
    new_pred = rp.RationalPdf(zred, 1.0, nxt.codegree)
    return FilterState(new_pred, t + 1, loglik, state.diagnostics + (diag,))


@dataclass(frozen=True, eq=False)
class FilterRun:
    states: tuple
    loglik: float
    forecasts: np.ndarray

    @property
    def diagnostics(self):
        return self.states[-1].diagnostics if self.states else ()


def run(model, ys, tau=0.02, forecast=True, keep_full=False, check_codegree=False,
        state=None, callback=None):
    """Filter a whole series.

    Parameters
    ----------
    forecast : bool
        Require ``E|Y_t | past|`` forecasts; raises at setup when the moments
        they need do not exist.
    state : FilterState, optional
        Resume from a checkpointed state instead of the initial density.
    callback : callable, optional
        Called with each new state.
    """
    ys = np.asarray(ys, float).reshape(-1)
    if not np.all(np.isfinite(ys)):
        raise ConfigError("observations must be finite")
    if forecast:
        if not math.isfinite(model.abs_mean_U):
            raise MomentExistenceError("E|U| does not exist; run with forecast=False")
        if min(model.pdf_X1.codegree, model.k_W) - 2 < model.d:
            raise MomentExistenceError(
                f"forecasts need moments up to order {model.d}; "
                f"state noise has co-degree {model.k_W}")
    st = initial_state(model) if state is None else state
    states = [st]
    for y in ys:
        st = step(st, y, model, tau, keep_full=keep_full, check_codegree=check_codegree)
        states.append(st)
        if callback is not None:
            callback(st)
    fc = np.array([dg.forecast_absY for dg in st.diagnostics[-len(ys):]]) if len(ys) else np.zeros(0)
    return FilterRun(tuple(states), st.loglik, fc)
