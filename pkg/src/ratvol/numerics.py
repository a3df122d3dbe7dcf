"""Dense complex linear-algebra kernels.

Thin, contract-checking wrappers around LAPACK (through scipy.linalg).
Every routine works in complex arithmetic; real input is promoted.
"""
import os
import warnings

import numpy as np
import scipy.linalg as sla

from .errors import (DegeneratePencilError, KernelFailure,
                     SingularEquationError, StabilityError)

__all__ = ['as_cmatrix', 'rank_tol', 'svd', 'schur_ordered', 'qz_ordered',
           'solve_sylvester', 'solve_lyapunov', 'numerical_rank',
           'hermitian_sqrt', 'NearAxisWarning']

DEFAULT_RANK_TOL = 1e-10
AXIS_TOL = 1e-8


class NearAxisWarning(RuntimeWarning):
    """Pencil eigenvalues close to the imaginary axis."""


def rank_tol():
    """Relative rank tolerance; ``RATVOL_RANK_TOL`` overrides the default."""
    val = os.environ.get('RATVOL_RANK_TOL')
    if val is None:
        return DEFAULT_RANK_TOL
    tol = float(val)
    if not 0.0 < tol < 1.0:
        raise ValueError(f"RATVOL_RANK_TOL must lie in (0, 1), got {val!r}")
    return tol


def as_cmatrix(m, rows=None, cols=None, name='matrix'):
    """Return `m` as a finite 2-D complex array, optionally checking shape."""
    a = np.array(m, dtype=complex, copy=True)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise ValueError(f"{name} must have {rows} rows, got {a.shape[0]}")
    if cols is not None and a.shape[1] != cols:
        raise ValueError(f"{name} must have {cols} columns, got {a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} has non-finite entries")
    return a


def svd(m):
    """Full SVD ``m = U @ diag(S) @ V^*`` with S descending.

    Returns
    -------
    U, S, V : ndarray
        Unitary ``U``, singular values ``S``, unitary ``V`` (not ``V^*``).
    """
    a = as_cmatrix(m)
    try:
        u, s, vh = sla.svd(a, lapack_driver='gesdd')
    except np.linalg.LinAlgError:
        try:
            u, s, vh = sla.svd(a, lapack_driver='gesvd')
        except np.linalg.LinAlgError as exc:
            raise KernelFailure(f"SVD did not converge: {exc}", a.shape) from exc
    return u, s, vh.conj().T


def schur_ordered(m, select):
    """Complex Schur form with selected eigenvalues leading.

    Parameters
    ----------
    m : (n, n) array_like
    select : callable
        Predicate on a complex eigenvalue; selected ones are moved to the
        leading block.

    Returns
    -------
    V : (n, n) ndarray
        Unitary, ``V^* m V = T``.
    T : (n, n) ndarray
        Upper triangular.
    k : int
        Number of selected eigenvalues.
    """
    a = as_cmatrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError("schur_ordered needs a square matrix")
    if a.shape[0] == 0:
        return a.copy(), a.copy(), 0
    try:
        t, v, k = sla.schur(a, output='complex', sort=lambda z: bool(select(z)))
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise KernelFailure(f"Schur decomposition failed: {exc}", a.shape) from exc
    return v, t, int(k)


def qz_ordered(e, n, select):
    """Ordered generalized Schur form of the pencil ``lambda*e - n``.

    ``select`` receives the generalized eigenvalue ``n_ii / e_ii`` (``inf``
    when ``e_ii`` vanishes) and chosen eigenvalues are moved to the front.

    Returns
    -------
    Q, Z : ndarray
        Unitary with ``Q @ e @ Z = E'`` and ``Q @ n @ Z = N'``.
    E1, N1 : ndarray
        Upper triangular.
    k : int
        Number of selected eigenvalues.
    """
    ee = as_cmatrix(e, name='e')
    nn = as_cmatrix(n, rows=ee.shape[0], cols=ee.shape[1], name='n')
    if ee.shape[0] != ee.shape[1]:
        raise ValueError("qz_ordered needs square matrices")
    if ee.shape[0] == 0:
        z = np.zeros((0, 0), complex)
        return z, z, z, z, 0

    def _sel(alpha, beta):
        if np.ndim(alpha) == 0:
            return bool(select(_ratio(alpha, beta)))
        return np.array([bool(select(_ratio(a, b))) for a, b in zip(alpha, beta)])

    try:
        nn1, ee1, alpha, beta, q, z = sla.ordqz(nn, ee, sort=_sel, output='complex')
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise KernelFailure(f"QZ failed: {exc}", ee.shape) from exc
    scale = max(np.linalg.norm(ee), np.linalg.norm(nn), 1e-300)
    tiny = 100 * np.finfo(float).eps * scale
    if np.any((np.abs(alpha) < tiny) & (np.abs(beta) < tiny)):
        raise DegeneratePencilError("pencil is singular (0/0 generalized eigenvalue)")
    k = sum(_sel(a, b) for a, b in zip(alpha, beta))
    return q.conj().T, z, ee1, nn1, int(k)


def _ratio(alpha, beta):
    if beta == 0:
        return complex(np.inf, 0.0)
    return complex(alpha / beta)


def solve_sylvester(a, b, c):
    """Solve ``a X + X b + c = 0``."""
    aa = as_cmatrix(a, name='a')
    bb = as_cmatrix(b, name='b')
    cc = as_cmatrix(c, rows=aa.shape[0], cols=bb.shape[0], name='c')
    if aa.size == 0 or bb.size == 0:
        return np.zeros(cc.shape, complex)
    ea = np.linalg.eigvals(aa)
    eb = np.linalg.eigvals(bb)
    gap = np.min(np.abs(ea[:, None] + eb[None, :]))
    scale = np.linalg.norm(aa, 2) + np.linalg.norm(bb, 2)
    if gap <= 1e3 * np.finfo(float).eps * max(scale, 1e-300):
        raise SingularEquationError(
            f"spectra of a and -b overlap (separation {gap:.3e})")
    try:
        x = sla.solve_sylvester(aa, bb, -cc)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise KernelFailure(f"Sylvester solver failed: {exc}", cc.shape) from exc
    return x


def solve_lyapunov(a, q):
    """Solve ``a P + P a^* + q = 0`` for Hurwitz ``a`` and hermitian ``q``."""
    aa = as_cmatrix(a, name='a')
    qq = as_cmatrix(q, rows=aa.shape[0], cols=aa.shape[0], name='q')
    if aa.shape[0] == 0:
        return np.zeros((0, 0), complex)
    ev = np.linalg.eigvals(aa)
    if np.any(ev.real >= 0):
        raise StabilityError(
            f"Lyapunov operator needs a stable matrix; max Re(eig) = {ev.real.max():.3e}")
    qq = 0.5 * (qq + qq.conj().T)
    try:
        p = sla.solve_continuous_lyapunov(aa, -qq)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise KernelFailure(f"Lyapunov solver failed: {exc}", aa.shape) from exc
    return 0.5 * (p + p.conj().T)


def numerical_rank(m, rel_tol=None):
    """Count singular values above ``rel_tol`` times the largest one."""
    if rel_tol is None:
        rel_tol = rank_tol()
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    a = as_cmatrix(m)
    if a.size == 0:
        return 0
    s = sla.svdvals(a)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def hermitian_sqrt(p, clip=1e-14):
    """Square-root factor ``L`` with ``p ~= L @ L^*`` for hermitian PSD ``p``.

    Eigenvalues below ``clip * max_eig`` are clipped to that floor so the
    factor stays invertible.
    """
    pp = as_cmatrix(p)
    pp = 0.5 * (pp + pp.conj().T)
    w, v = np.linalg.eigh(pp)
    top = max(w.max(initial=0.0), 0.0)
    floor = clip * top if top > 0 else clip
    w = np.maximum(w, floor)
    return v * np.sqrt(w)


def warn_near_axis(eigs, scale, what='pencil'):
    """Emit :class:`NearAxisWarning` if any eigenvalue hugs the imaginary axis."""
    eigs = np.asarray(eigs)
    finite = eigs[np.isfinite(eigs)]
    if finite.size and np.min(np.abs(finite.real)) < AXIS_TOL * max(scale, 1e-300):
        warnings.warn(f"{what} has eigenvalues within {AXIS_TOL:g}*scale of the "
                      "imaginary axis", NearAxisWarning, stacklevel=3)
        return True
    return False
