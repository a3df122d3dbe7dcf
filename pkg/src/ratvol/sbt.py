"""Positive-real balanced truncation of spectral summands.

The extremal solutions of the positive-real LMI are balanced so that
``Pmin = Pmax^{-1} = diag(sigma)``; states with small ``sigma`` are cut and
the relative error of ``Z + Z^*`` is bounded by the discarded ``sigma``.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics as nx
from .errors import RatvolError
from .ratpdf import SpectralSummand, factor_from_summand, summand_codegree

__all__ = ['BalancedSummand', 'ConditioningError', 'extremal_gramians', 'lmi_pair',
           'dual_summand', 'balance',
           'truncate', 'relative_error_bound', 'pdf_error_bound',
           'truncate_to_tolerance', 'UNIT_TOL']

UNIT_TOL = 1e-8


class ConditioningError(RatvolError):
    """The maximal LMI solution is numerically singular."""


@dataclass(frozen=True, eq=False)
class BalancedSummand:
    """Summand in balanced coordinates with its LMI singular values.

    Attributes
    ----------
    summand : SpectralSummand
    sigma : ndarray
        Descending singular values of the kept states; the leading
        ``codegree_half`` of them equal one up to roundoff.
    codegree_half : int
        Number of unit ``sigma`` (half the co-degree of ``Z + Z^*``).
    dropped : ndarray
        Negligible values (below ``PRE_TOL``) whose states were removed while
        balancing; they still enter the error bound.
    """

    summand: SpectralSummand
    sigma: np.ndarray
    codegree_half: int
    dropped: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def all_sigma(self):
        return np.concatenate([self.sigma, self.dropped])


def dual_summand(z):
    """``[A^*, C^*, M^*]``; its LMI solutions are the inverses of those of ``z``."""
    return SpectralSummand(z.A.conj().T, z.C.conj().T, z.M.conj().T)


def extremal_gramians(z, codegree=None):
    """Minimal and maximal rank-one solutions ``(Pmin, Pmax)`` of the LMI."""
    _, pmin = factor_from_summand(z, 'min_phase', codegree=codegree)
    _, pmax = factor_from_summand(z, 'max_phase', codegree=codegree)
    return pmin, pmax


def lmi_pair(z, codegree=None):
    """``(Pmin, Qmin)`` with ``Qmin = Pmax^{-1}`` taken from the dual summand.

    Both factors stay bounded, unlike ``Pmax`` itself when the realization is
    close to non-minimal.
    """
    _, pmin = factor_from_summand(z, 'min_phase', codegree=codegree)
    _, qmin = factor_from_summand(dual_summand(z), 'min_phase', codegree=codegree)
    return pmin, qmin


def _project(z, pmin, qmin, keep_tol):
    """Square-root balancing of ``(pmin, qmin)`` keeping ``sigma > keep_tol``."""
    lp = nx.hermitian_sqrt(pmin, clip=0.0)
    lq = nx.hermitian_sqrt(qmin, clip=0.0)
    U, s, V = nx.svd(lq.conj().T @ lp)
    r = int(np.sum(s > keep_tol))
    if r == 0:
        raise ConditioningError("all LMI singular values vanish")
    sr = 1.0 / np.sqrt(s[:r])
    T = (sr[:, None] * U[:, :r].conj().T) @ lq.conj().T
    Ti = lp @ V[:, :r] * sr[None, :]
    return SpectralSummand(T @ z.A @ Ti, T @ z.M, z.C @ Ti), s[:r], s[r:]


PRE_TOL = 1e-10


def _count_units(sigma):
    return int(np.sum(np.asarray(sigma) >= 1.0 - UNIT_TOL))


def balance(z, codegree=None):
    """Balanced realization with ``Pmin = Pmax^{-1} = diag(sigma)``.

    A first sweep balances approximately and removes states with negligible
    ``sigma``; a second sweep recomputes both LMI solutions in these well
    scaled coordinates, which pins the unit values to roundoff. The
    co-degree is detected once on ``z`` and reused in the second sweep.
    """
    if codegree is None:
        codegree = summand_codegree(z)
    pmin, qmin = lmi_pair(z, codegree)
    z1, _, drop1 = _project(z, pmin, qmin, PRE_TOL)
    pmin, qmin = lmi_pair(z1, codegree)
    zb, s, drop2 = _project(z1, pmin, qmin, PRE_TOL)
    dropped = np.sort(np.concatenate([drop1, drop2]))[::-1]
    return BalancedSummand(zb, s, _count_units(s), dropped)


def truncate(b, m):
    """Leading ``m``-state block of a balanced summand."""
    c = b.codegree_half
    n = b.summand.n
    if m < c:
        raise ValueError(f"order {m} below half co-degree {c}: error bound is infinite")
    m = min(int(m), n)
    z = b.summand
    return SpectralSummand(z.A[:m, :m], z.M[:m], z.C[:, :m])


def relative_error_bound(sigma, m):
    """Relative error bound for ``Z + Z^*`` after keeping ``m`` states.

    Returns ``inf`` when a discarded value equals one.
    """
    tail = np.asarray(sigma, float)[int(m):]
    if tail.size == 0:
        return 0.0
    if np.any(tail >= 1.0 - UNIT_TOL):
        return math.inf
    return float(np.prod(((1.0 + tail) / (1.0 - tail)) ** 2) - 1.0)


def pdf_error_bound(tau):
    """Relative pdf error implied by a relative spectral error ``tau``."""
    if not 0.0 <= tau < 1.0:
        if tau == math.inf or tau >= 1.0:
            return math.inf
        raise ValueError("tau must lie in [0, 1)")
    return 2.0 * tau / (1.0 - tau)


def _select_order(sigma, n, c, tau):
    for m in range(c, n + 1):
        bound = pdf_error_bound(relative_error_bound(sigma, m))
        if bound <= tau:
            return m, bound
    return n, pdf_error_bound(relative_error_bound(sigma, n))


def truncate_to_tolerance(z, tau, codegree=None):
    """Smallest balanced truncation whose pdf error bound is at most ``tau``.

    Returns
    -------
    reduced : SpectralSummand
    bound : float
        Achieved relative pdf error bound.
    m : int
    balanced : BalancedSummand
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    b = balance(z, codegree)
    m, bound = _select_order(b.all_sigma, b.summand.n, b.codegree_half, tau)
    return truncate(b, m), bound, m, b
