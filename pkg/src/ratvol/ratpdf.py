"""Rational probability densities in density / summand / factor form.

A non-normalized rational density ``rho`` is identified with the spectral
density ``Phi`` through ``rho(x) = Phi(ix)``.  ``Phi = Z + Z^* = K K^*`` where
the summand ``Z = [A, M, C]`` and the factor ``K = [A, B, C]`` are stable and
strictly proper.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from . import realization as rz
from .errors import (AxisPoleError, FactorizationError, InvalidSummandError,
                     MomentExistenceError, StabilityError, ZeroFunctionError)
from .realization import Realization

__all__ = ['SpectralSummand', 'SpectralFactor', 'SpectralDensity', 'RationalPdf',
           'density_from_summand', 'density_from_factor', 'summand_from_factor',
           'summand_from_density', 'factor_from_summand', 'normalize_and_moments',
           'scale_rv', 'convolve', 'compose', 'make_cauchy', 'make_scaled_t_odd',
           'pdf_eval', 'pdf_eval_factor', 'summand_codegree', 'normalized',
           'rescale_mass', 'scale_pdf', 'lmi_matrix', 'pdf_to_json_dict',
           'pdf_from_json_dict']


CM_IMAG_TOL = 1e-6


def _is_stable(A):
    return A.shape[0] == 0 or np.all(np.linalg.eigvals(A).real < 0)


@dataclass(frozen=True, eq=False)
class SpectralSummand:
    """Stable summand ``Z(s) = C (sI - A)^{-1} M``."""

    A: np.ndarray
    M: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        r = Realization(self.A, self.M, self.C, 0)
        object.__setattr__(self, 'A', r.A)
        object.__setattr__(self, 'M', r.B)
        object.__setattr__(self, 'C', r.C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def realization(self):
        return Realization(self.A, self.M, self.C, 0)

    @property
    def cm(self):
        return complex((self.C @ self.M)[0, 0])

    def validate(self):
        if not _is_stable(self.A):
            raise StabilityError("spectral summand must have a Hurwitz A")
        cm = self.cm
        if cm.real <= 0 or abs(cm.imag) > CM_IMAG_TOL * abs(cm):
            raise InvalidSummandError(f"CM must be real and positive, got {cm}")
        return self


@dataclass(frozen=True, eq=False)
class SpectralFactor:
    """Stable factor ``K(s) = C (sI - A)^{-1} B``; ``min_phase`` records the zero side."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    min_phase: bool = True

    def __post_init__(self):
        r = Realization(self.A, self.B, self.C, 0)
        object.__setattr__(self, 'A', r.A)
        object.__setattr__(self, 'B', r.B)
        object.__setattr__(self, 'C', r.C)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def realization(self):
        return Realization(self.A, self.B, self.C, 0)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """Spectral density ``Phi(s) = H (sI - F)^{-1} G``."""

    F: np.ndarray
    G: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        r = Realization(self.F, self.G, self.H, 0)
        object.__setattr__(self, 'F', r.A)
        object.__setattr__(self, 'G', r.B)
        object.__setattr__(self, 'H', r.C)

    @classmethod
    def from_realization(cls, r):
        if r.shape != (1, 1):
            raise ValueError("spectral densities are scalar")
        if np.any(np.abs(r.D) > 0):
            raise ValueError("spectral densities are strictly proper")
        return cls(r.A, r.B, r.C)

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def realization(self):
        return Realization(self.F, self.G, self.H, 0)


@dataclass(frozen=True, eq=False)
class RationalPdf:
    """Probability density ``(Z(ix) + Z^*(ix)) / norm_const``."""

    summand: SpectralSummand
    norm_const: float
    codegree: int
    factor: SpectralFactor = field(default=None, repr=False)

    @property
    def n(self):
        return self.summand.n

    def __call__(self, x):
        return pdf_eval(self, x)

    def moments(self, max_l):
        return normalize_and_moments(self.summand, max_l, self.codegree)[1]


# ---------------------------------------------------------------------------
# representation changes

def density_from_summand(z):
    """``Phi = Z + Z^*`` realized as ``[blkdiag(A, -A^*), [M; C^*], [C, -M^*]]``."""
    n = z.n
    F = np.zeros((2 * n, 2 * n), complex)
    F[:n, :n] = z.A
    F[n:, n:] = -z.A.conj().T
    G = np.vstack([z.M, z.C.conj().T])
    H = np.hstack([z.C, -z.M.conj().T])
    return SpectralDensity(F, G, H)


def density_from_factor(k):
    """``Phi = K K^*`` realized as ``[[A, -BB^*], [0, -A^*]], [0; C^*], [C, 0]``."""
    n = k.n
    F = np.zeros((2 * n, 2 * n), complex)
    F[:n, :n] = k.A
    F[:n, n:] = -k.B @ k.B.conj().T
    F[n:, n:] = -k.A.conj().T
    G = np.vstack([np.zeros((n, 1)), k.C.conj().T])
    H = np.hstack([k.C, np.zeros((1, n))])
    return SpectralDensity(F, G, H)


def summand_from_factor(k):
    """Summand ``[A, P C^*, C]`` with ``A P + P A^* + B B^* = 0``."""
    P = nx.solve_lyapunov(k.A, k.B @ k.B.conj().T)
    return SpectralSummand(k.A, P @ k.C.conj().T, k.C)


def summand_from_density(phi):
    """Stable additive part of ``Phi`` via ordered Schur form plus Sylvester."""
    F, G, H = phi.F, phi.G, phi.H
    N = F.shape[0]
    if N % 2:
        raise AxisPoleError("density realization must have even dimension")
    V, T, k = nx.schur_ordered(F, lambda z: z.real < 0)
    d = np.diag(T)
    scale = max(1.0, np.abs(d).max(initial=0.0))
    if np.any(np.abs(d.real) <= 1e-12 * scale):
        raise AxisPoleError("density has poles on the imaginary axis")
    if 2 * k != N:
        raise AxisPoleError(f"expected {N // 2} stable poles, found {k}")
    n = k
    P = nx.solve_sylvester(-T[:n, :n], T[n:, n:], T[:n, n:])
    Gt = V.conj().T @ G
    M = Gt[:n] + P @ Gt[n:]
    C = (H @ V)[:, :n]
    return SpectralSummand(T[:n, :n], M, C)


def summand_codegree(z, tol=None):
    """Co-degree of ``Z + Z^*`` through the staircase sweep."""
    return rz.staircase_codegree(density_from_summand(z).realization, tol).codegree


def _fix_phase(B):
    b = B.reshape(-1)
    mags = np.abs(b)
    idx = int(np.argmax(mags > 1e-12 * mags.max()))
    ph = b[idx] / mags[idx]
    return B / ph


def factor_from_summand(z, side='min_phase', codegree=None, tol=None,
                        axis_tol=nx.AXIS_TOL):
    """Rank-one solution of the positive-real LMI through a deflating subspace.

    Parameters
    ----------
    z : SpectralSummand
    side : {'min_phase', 'max_phase'}
        ``'min_phase'`` puts the zeros of ``K`` in the left half plane and
        returns the minimal LMI solution; ``'max_phase'`` the maximal one.
    codegree : int, optional
        Known co-degree of ``Z + Z^*``; replaces the staircase rank decisions.

    Returns
    -------
    k : SpectralFactor
    P : ndarray
        Hermitian LMI solution with ``L(P) = [B; 0][B; 0]^*``.
    """
    if side not in ('min_phase', 'max_phase'):
        raise ValueError("side must be 'min_phase' or 'max_phase'")
    A, M, C = z.A, z.M, z.C
    n = z.n
    phi = density_from_summand(z)
    F, G, H = phi.F, phi.G, phi.H
    try:
        k, Qk, nxt, alpha, beta = rz.krylov_deflation(F, G, H, tol, codegree)
    except ZeroFunctionError as exc:
        raise FactorizationError(f"co-degree sweep failed: {exc}") from exc
    if k % 2:
        raise FactorizationError(f"odd co-degree {k}; Z + Z^* is not a spectral density")
    c = k // 2
    dim = 2 * n + 1
    E = np.zeros((dim, dim), complex)
    E[:2 * n, :2 * n] = np.eye(2 * n)
    Nm = np.zeros((dim, dim), complex)
    Nm[:2 * n, :2 * n] = F
    Nm[:2 * n, 2 * n:] = -G
    Nm[2 * n:, :2 * n] = H

    # deflating subspace of the whole infinite elementary divisor (size k+1)
    Xinf = np.zeros((dim, k + 1), complex)
    Xinf[2 * n, 0] = 1.0
    Xinf[:2 * n, 1:] = Qk
    Yinf = np.zeros((dim, k + 1), complex)
    Yinf[:2 * n, :k] = Qk
    last = np.zeros(dim, complex)
    if nxt is not None:
        last[:2 * n] = beta * nxt
    last[2 * n] = alpha
    Yinf[:, k] = last / np.linalg.norm(last)
    Zfull = rz._complete_basis(Xinf, dim)
    Qfull = rz._complete_basis(Yinf, dim)
    Xp = Zfull[:, k + 1:]
    Yp = Qfull[:, k + 1:]

    nfin = n - c
    if nfin > 0:
        E22 = Yp.conj().T @ E @ Xp
        N22 = Yp.conj().T @ Nm @ Xp
        if side == 'min_phase':
            sel = lambda lam: np.isfinite(lam) and lam.real > 0
        else:
            sel = lambda lam: np.isfinite(lam) and lam.real < 0
        Q2, Z2, E2, N2, nsel = nx.qz_ordered(E22, N22, sel)
        lam = np.diag(N2) / np.diag(E2)
        scale = max(np.abs(np.linalg.eigvals(A)).max(), 1e-300)
        if np.any(~np.isfinite(lam)):
            raise FactorizationError("finite block has infinite eigenvalues; "
                                     "co-degree detection is inconsistent")
        if np.min(np.abs(lam.real)) < axis_tol * scale:
            raise FactorizationError(
                "spectral density has zeros too close to the imaginary axis "
                f"(min |Re| = {np.min(np.abs(lam.real)):.3e})")
        if nsel != nfin:
            raise FactorizationError(
                f"selected {nsel} pencil eigenvalues, expected {nfin}")
        W = Z2[:, :nfin]
        S = np.linalg.solve(E2[:nfin, :nfin], N2[:nfin, :nfin])
        E11 = Yinf.conj().T @ E @ Xinf
        N11 = Yinf.conj().T @ Nm @ Xinf
        E12 = Yinf.conj().T @ E @ Xp
        N12 = Yinf.conj().T @ Nm @ Xp
        # decouple: R - J R S = N11^{-1} (E12 W S - N12 W), J nilpotent
        J = np.linalg.solve(N11, E11)
        rhs = np.linalg.solve(N11, E12 @ W @ S - N12 @ W)
        kron = np.eye((k + 1) * nfin, dtype=complex) - np.kron(S.T, J)
        R = np.linalg.solve(kron, rhs.reshape(-1, order='F')).reshape(
            (k + 1, nfin), order='F')
        Xsub = np.hstack([Xinf[:, :c + 1], Xinf @ R + Xp @ W])
    else:
        Xsub = Xinf[:, :c + 1]

    X1 = Xsub[:n]
    X23 = Xsub[n:]
    try:
        sol = np.linalg.solve(X23.T, X1.T).T
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("deflating subspace is not a graph") from exc
    P = sol[:, :n]
    P = 0.5 * (P + P.conj().T)
    Lq = -A @ P - P @ A.conj().T
    Lq = 0.5 * (Lq + Lq.conj().T)
    w, v = np.linalg.eigh(Lq)
    if w[-1] <= 0:
        raise FactorizationError("LMI block -AP-PA^* has no positive eigenvalue")
    B = _fix_phase(np.sqrt(w[-1]) * v[:, -1:])
    return SpectralFactor(A, B, C, min_phase=(side == 'min_phase')), P


def lmi_matrix(z, P):
    """``L(P)`` of the positive-real lemma."""
    A, M, C = z.A, z.M, z.C
    n = z.n
    L = np.zeros((n + 1, n + 1), complex)
    L[:n, :n] = -A @ P - P @ A.conj().T
    L[:n, n:] = M - P @ C.conj().T
    L[n:, :n] = L[:n, n:].conj().T
    return L


# ---------------------------------------------------------------------------
# normalization, moments, scaling, convolution

def normalize_and_moments(z, max_l, codegree=None):
    """Normalization constant ``2 pi C M`` and moments ``(-i)^l C A^l M / CM``.

    Returns
    -------
    norm_const : float
    moments : ndarray of complex, length ``max_l + 1``
    """
    cm = z.cm
    if not cm.real > 0 or abs(cm.imag) > CM_IMAG_TOL * abs(cm):
        raise InvalidSummandError(f"CM must be real and positive, got {cm}")
    if codegree is None:
        codegree = summand_codegree(z)
    if max_l > codegree - 2:
        raise MomentExistenceError(
            f"moments exist up to order {codegree - 2}, requested {max_l}")
    out = np.empty(max_l + 1, complex)
    v = z.M.reshape(-1)
    c = z.C.reshape(-1)
    for l in range(max_l + 1):
        out[l] = (-1j) ** l * (c @ v) / cm.real
        v = z.A @ v
    return 2 * math.pi * cm.real, out


def normalized(z):
    """Rescale ``M`` so that ``2 pi C M = 1``."""
    cm = z.cm.real
    return SpectralSummand(z.A, z.M / (2 * math.pi * cm), z.C)


def rescale_mass(z, kappa):
    return SpectralSummand(z.A, z.M * kappa, z.C)


def scale_rv(z, a):
    """Summand of ``a X`` given the summand of ``X``."""
    a = float(a)
    if a == 0.0:
        raise ValueError("scaling by zero is degenerate")
    if a > 0:
        return SpectralSummand(a * z.A, z.M, z.C)
    return SpectralSummand(-a * z.A.conj().T, z.C.conj().T, z.M.conj().T)


def convolve(z1, z2):
    """Summand of the convolution of two densities (Kronecker sum of states).

    Masses multiply: ``2 pi C M`` of the result is the product of the inputs'.
    """
    n1, n2 = z1.n, z2.n
    A = np.kron(z1.A, np.eye(n2)) + np.kron(np.eye(n1), z2.A)
    M = 2 * math.pi * np.kron(z1.M, z2.M)
    return SpectralSummand(A, M, np.kron(z1.C, z2.C))


def compose(g1, g2):
    """Realization of ``G1(g2(s))`` for proper ``G1`` and scalar proper ``g2``."""
    if g2.shape != (1, 1):
        raise ValueError("inner function must be scalar")
    d2 = complex(g2.D[0, 0])
    n1, n2 = g1.n, g2.n
    if n1 == 0:
        return rz.constant(g1.D, g1.shape[1], g1.shape[0])
    shifted = g1.A - d2 * np.eye(n1)
    ev = np.linalg.eigvals(g1.A)
    if np.min(np.abs(ev - d2)) <= 1e-12 * max(1.0, np.abs(ev).max()):
        raise ValueError("feedthrough of the inner function is a pole of the outer one")
    Sinv_B = np.linalg.solve(shifted, g1.B)
    C_Sinv = np.linalg.solve(shifted.T, g1.C.T).T
    D = g1.D - g1.C @ Sinv_B
    if n2 == 0:
        return rz.constant(D, g1.shape[1], g1.shape[0])
    Sinv = np.linalg.inv(shifted)
    b2, c2 = g2.B, g2.C
    A = np.kron(np.eye(n1), g2.A) + np.kron(Sinv, b2 @ c2)
    B = -np.kron(Sinv_B, b2)
    C = np.kron(C_Sinv, c2)
    return Realization(A, B, C, D)


# ---------------------------------------------------------------------------
# constructors and evaluation

def _pdf_from_factor(k, codegree):
    z = summand_from_factor(k)
    z = normalized(z)
    kappa = 1.0 / math.sqrt(2 * math.pi * summand_from_factor(k).cm.real)
    kf = SpectralFactor(k.A, k.B * kappa, k.C, k.min_phase)
    return RationalPdf(z, 1.0, codegree, kf)


def make_cauchy(scale=1.0, location=0.0):
    """Cauchy density ``scale / (pi ((x - location)^2 + scale^2))``."""
    if not scale > 0:
        raise ValueError("Cauchy scale must be positive")
    A = np.array([[-scale + 1j * location]])
    z = SpectralSummand(A, [[1.0 / (2 * math.pi)]], [[1.0]])
    kf = SpectralFactor(A, [[math.sqrt(scale / math.pi)]], [[1.0]])
    return RationalPdf(z, 1.0, 2, kf)


def make_scaled_t_odd(df, variance=1.0):
    """Student t with odd ``df`` rescaled to the given variance."""
    if int(df) != df or df < 3 or df % 2 == 0:
        raise ValueError(f"unsupported t density: df must be odd and >= 3, got {df}")
    df = int(df)
    r = (df + 1) // 2
    beta = math.sqrt(df - 2)
    # unit-variance pdf: c (1 + u^2/(df-2))^(-r) = c beta^(2r) / ((beta - s)(beta + s))^r
    const = math.exp(math.lgamma(r) - math.lgamma(df / 2)) / math.sqrt((df - 2) * math.pi)
    kappa = const * beta ** (2 * r)
    A = -beta * np.eye(r) + np.diag(np.ones(r - 1), -1)
    B = np.zeros((r, 1))
    B[0, 0] = math.sqrt(kappa)
    C = np.zeros((1, r))
    C[0, -1] = 1.0
    k = SpectralFactor(A, B, C)
    p = _pdf_from_factor(k, df + 1)
    if variance != 1.0:
        p = scale_pdf(p, math.sqrt(variance))
    return p


def scale_pdf(p, a):
    """Density of ``a X`` as a :class:`RationalPdf`."""
    z = scale_rv(p.summand, a)
    kf = None
    if p.factor is not None and a > 0:
        kf = SpectralFactor(a * p.factor.A, p.factor.B * math.sqrt(a), p.factor.C,
                            p.factor.min_phase)
    return RationalPdf(z, p.norm_const, p.codegree, kf)


def pdf_eval(p, x):
    """``(Z(ix) + Z^*(ix)) / norm_const`` on real ``x`` (scalar or array)."""
    x_arr = np.asarray(x, float)
    vals = rz.evaluate(p.summand.realization, 1j * x_arr.reshape(-1))[:, 0, 0]
    out = 2.0 * vals.real / p.norm_const
    out = np.where((out < 0) & (out > -1e-12), 0.0, out)
    if x_arr.ndim == 0:
        return float(out[0])
    return out.reshape(x_arr.shape)


def pdf_eval_factor(k, x, norm_const=1.0):
    """``|K(ix)|^2 / norm_const``; free of the cancellation in ``2 Re Z``."""
    x_arr = np.asarray(x, float)
    vals = rz.evaluate(k.realization, 1j * x_arr.reshape(-1))[:, 0, 0]
    out = np.abs(vals) ** 2 / norm_const
    if x_arr.ndim == 0:
        return float(out[0])
    return out.reshape(x_arr.shape)


# ---------------------------------------------------------------------------
# JSON

def pdf_to_json_dict(p):
    z = p.summand
    return {'kind': 'rational_pdf', 'norm_const': float(p.norm_const),
            'codegree': int(p.codegree),
            'summand': rz.to_json_dict(Realization(z.A, z.M, z.C, 0))}


def pdf_from_json_dict(d):
    if d.get('kind') != 'rational_pdf':
        raise ValueError("not a rational_pdf document")
    r = rz.from_json_dict(d['summand'])
    z = SpectralSummand(r.A, r.B, r.C)
    return RationalPdf(z, float(d['norm_const']), int(d['codegree']))
