"""State-space realizations ``C (sI - A)^{-1} B + D`` and their algebra."""
import json
from dataclasses import dataclass

import numpy as np

from . import numerics as nx
from .errors import DimensionError, PoleEvaluationError, ZeroFunctionError

__all__ = ['Realization', 'CoDegreeReport', 'evaluate', 'adjoint', 'add',
           'multiply', 'scale_output', 'arg_scale_times_s', 'constant',
           'transform', 'staircase_codegree', 'markov_codegree',
           'minimal_reduce', 'krylov_deflation', 'to_json_dict',
           'from_json_dict']


@dataclass(frozen=True, eq=False)
class Realization:
    """Proper rational matrix function ``C (sI - A)^{-1} B + D``."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = _mat(self.A)
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionError(f"A must be square, got {A.shape}")
        D = _mat(self.D)
        p, m = D.shape
        B = _mat(self.B, (n, m))
        C = _mat(self.C, (p, n))
        for name, val in zip('ABCD', (A, B, C, D)):
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{name} has non-finite entries")
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def shape(self):
        """``(p, m)`` = (outputs, inputs)."""
        return self.D.shape

    def __call__(self, s):
        return evaluate(self, s)

    def __repr__(self):
        p, m = self.shape
        return f"Realization(n={self.n}, p={p}, m={m})"


def _mat(x, shape=None):
    a = np.array(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if shape is not None:
        if a.size == 0 and 0 in shape:
            a = a.reshape(shape)
        if a.shape != shape:
            raise DimensionError(f"expected shape {shape}, got {a.shape}")
    return a


@dataclass(frozen=True, eq=False)
class CoDegreeReport:
    """Outcome of the staircase reduction of ``[[sI - A, B], [-C, D]]``.

    ``basis`` spans the ``(c + 1)``-dimensional deflating subspace of the
    infinite elementary divisor; ``Q @ (s E - N) @ Z`` is block upper
    triangular with that divisor leading.
    """

    codegree: int
    basis: np.ndarray
    staircase_Q: np.ndarray
    staircase_Z: np.ndarray


def constant(value, n_in=1, n_out=1):
    """Zero-state realization of a constant matrix."""
    d = np.broadcast_to(np.asarray(value, complex), (n_out, n_in)).copy()
    return Realization(np.zeros((0, 0)), np.zeros((0, n_in)),
                       np.zeros((n_out, 0)), d)


def evaluate(r, s):
    """Evaluate ``r`` at a complex scalar or an array of points.

    Scalar ``s`` yields a ``(p, m)`` array; an array of shape ``S`` yields
    ``S + (p, m)``.
    """
    s_arr = np.asarray(s, dtype=complex)
    pts = s_arr.reshape(-1)
    n = r.n
    p, m = r.shape
    if n == 0:
        out = np.broadcast_to(r.D, (pts.size, p, m)).copy()
    else:
        eig = np.linalg.eigvals(r.A)
        scale = max(1.0, np.max(np.abs(eig)))
        gap = np.min(np.abs(pts[:, None] - eig[None, :]), axis=1)
        if np.any(gap <= 1e-13 * scale):
            bad = pts[np.argmin(gap)]
            raise PoleEvaluationError(f"evaluation at pole s={bad}")
        eye = np.eye(n, dtype=complex)
        lhs = pts[:, None, None] * eye - r.A
        rhs = np.broadcast_to(r.B, (pts.size, n, m))
        x = np.linalg.solve(lhs, rhs)
        out = r.C @ x + r.D
    if s_arr.ndim == 0:
        return out[0]
    return out.reshape(s_arr.shape + (p, m))


def adjoint(r):
    """Para-hermitian adjoint ``G^*(s) = G(-conj(s))^*``."""
    return Realization(-r.A.conj().T, r.C.conj().T, -r.B.conj().T, r.D.conj().T)


def add(r1, r2):
    """Parallel connection ``G1 + G2``."""
    if r1.shape != r2.shape:
        raise DimensionError(f"cannot add shapes {r1.shape} and {r2.shape}")
    n1, n2 = r1.n, r2.n
    A = np.zeros((n1 + n2, n1 + n2), complex)
    A[:n1, :n1] = r1.A
    A[n1:, n1:] = r2.A
    return Realization(A, np.vstack([r1.B, r2.B]), np.hstack([r1.C, r2.C]),
                       r1.D + r2.D)


def multiply(r1, r2):
    """Series connection ``G1 G2`` (``G2`` acts first)."""
    if r1.shape[1] != r2.shape[0]:
        raise DimensionError(f"cannot multiply shapes {r1.shape} and {r2.shape}")
    n1, n2 = r1.n, r2.n
    A = np.zeros((n1 + n2, n1 + n2), complex)
    A[:n1, :n1] = r1.A
    A[:n1, n1:] = r1.B @ r2.C
    A[n1:, n1:] = r2.A
    B = np.vstack([r1.B @ r2.D, r2.B])
    C = np.hstack([r1.C, r1.D @ r2.C])
    return Realization(A, B, C, r1.D @ r2.D)


def scale_output(r, k):
    """``k * G``."""
    k = complex(k)
    return Realization(r.A, r.B, k * r.C, k * r.D)


def transform(r, T, Tinv=None):
    """State-space similarity ``[T A T^-1, T B, C T^-1, D]``."""
    T = np.asarray(T, complex)
    if Tinv is None:
        Tinv = np.linalg.inv(T)
    return Realization(T @ r.A @ Tinv, T @ r.B, r.C @ Tinv, r.D)


def arg_scale_times_s(r, y):
    """Realization of ``G(y s) * s`` for strictly proper ``G``.

    Uses ``[A/y, A B / y^2, C, C B / y]``; the result is strictly proper
    exactly when ``C B = 0``.
    """
    y = complex(y)
    if y == 0:
        raise ValueError("arg_scale_times_s needs y != 0")
    if np.any(r.D != 0):
        raise ValueError("arg_scale_times_s needs a strictly proper realization")
    return Realization(r.A / y, r.A @ r.B / y ** 2, r.C, r.C @ r.B / y)


def krylov_deflation(A, B, C, tol=None, codegree=None):
    """Arnoldi/staircase sweep on ``(A, B)`` probing ``C``.

    Returns the co-degree ``c`` together with the orthonormal Krylov
    vectors ``q_1..q_c`` (columns of ``Qk``), the next Arnoldi vector and
    the two pivots ``alpha = C q_c`` and ``beta`` (sub-diagonal entry coupling
    ``q_c`` to ``q_{c+1}``; zero when the Krylov space is exhausted).

    A known ``codegree`` skips the rank decisions on the leading Markov
    parameters, which roundoff can blur after an ill-conditioned change of
    basis; only the pivot at that depth is required to be nonzero.
    """
    if tol is None:
        tol = nx.rank_tol()
    A = np.asarray(A, complex)
    b = np.asarray(B, complex).reshape(-1)
    c = np.asarray(C, complex).reshape(-1)
    n = A.shape[0]
    nb = np.linalg.norm(b)
    nc = np.linalg.norm(c)
    na = max(np.linalg.norm(A, 2), 1e-300)
    if n == 0 or nb == 0.0 or nc == 0.0:
        raise ZeroFunctionError("zero input or output map")
    qs = [b / nb]
    for j in range(n):
        q = qs[-1]
        alpha = c @ q
        if codegree is not None and j + 1 < codegree:
            hit = False
        elif codegree is not None:
            if not abs(alpha) > tol * nc:
                raise ZeroFunctionError(f"Markov parameter {j} vanishes; co-degree is not {codegree}")
            hit = True
        else:
            hit = abs(alpha) > tol * nc
        if hit:
            w = A @ q
            for _ in range(2):
                for qq in qs:
                    w = w - qq * (qq.conj() @ w)
            beta = np.linalg.norm(w)
            nxt = w / beta if beta > tol * na and len(qs) < n else None
            if nxt is None:
                beta = 0.0
            return j + 1, np.column_stack(qs), nxt, alpha, beta
        w = A @ q
        for _ in range(2):
            for qq in qs:
                w = w - qq * (qq.conj() @ w)
        beta = np.linalg.norm(w)
        if beta <= tol * na or len(qs) == n:
            break
        qs.append(w / beta)
    raise ZeroFunctionError("Markov parameters vanish on the reachable subspace")


def staircase_codegree(r, tol=None):
    """Co-degree of a scalar strictly proper realization via the staircase form.

    Rank decisions are relative to ``tol`` (default :func:`numerics.rank_tol`).
    """
    if r.shape != (1, 1):
        raise DimensionError("staircase_codegree handles scalar functions only")
    if np.any(r.D != 0):
        raise ValueError("staircase_codegree needs a strictly proper realization")
    n = r.n
    c, Qk, nxt, alpha, beta = krylov_deflation(r.A, r.B, r.C, tol)
    # unitary completion of the Krylov basis
    U = _complete_basis(Qk if nxt is None else np.column_stack([Qk, nxt]), n)
    Z = np.zeros((n + 1, n + 1), complex)
    Z[n, 0] = 1.0
    Z[:n, 1:] = U
    basis = Z[:, :c + 1].copy()
    # left subspace: E*basis and N*basis span [q_1..q_c; 0] and [beta q_{c+1}; alpha]
    y_last = np.zeros(n + 1, complex)
    if nxt is not None:
        y_last[:n] = beta * nxt
    y_last[n] = alpha
    Y = np.zeros((n + 1, c + 1), complex)
    Y[:n, :c] = Qk
    Y[:, c] = y_last / np.linalg.norm(y_last)
    Q = _complete_basis(Y, n + 1).conj().T
    return CoDegreeReport(c, basis, Q, Z)


def markov_codegree(r, tol=None):
    """Co-degree by brute force on the Markov parameters ``C A^{i-1} B``."""
    if tol is None:
        tol = nx.rank_tol()
    nC = np.linalg.norm(r.C)
    v = r.B.reshape(-1)
    for i in range(1, r.n + 1):
        nv = np.linalg.norm(v)
        if nv == 0.0:
            break
        v = v / nv
        if abs((r.C @ v)[0]) > tol * nC:
            return i
        v = r.A @ v
    raise ZeroFunctionError("all Markov parameters vanish")


def _complete_basis(Q, n):
    """Extend orthonormal columns ``Q`` (n x k) to an n x n unitary."""
    k = Q.shape[1]
    if k == n:
        return Q.copy()
    full, _ = np.linalg.qr(np.hstack([Q, np.eye(n, dtype=complex)]))
    # first k columns of `full` span Q; keep Q itself to preserve phases
    return np.hstack([Q, full[:, k:n]])


def _split_stable(A, B, C):
    """Block-diagonalize ``A`` into Hurwitz and anti-Hurwitz parts."""
    n = A.shape[0]
    V, T, k = nx.schur_ordered(A, lambda z: z.real < 0)
    if np.any(np.abs(np.diag(T).real) < 1e-14 * max(1.0, np.abs(np.diag(T)).max())):
        return None
    X = nx.solve_sylvester(-T[:k, :k], T[k:, k:], T[:k, k:]) if 0 < k < n \
        else np.zeros((k, n - k), complex)
    # [I, X; 0, I] decouples the triangular blocks
    Bt = V.conj().T @ B
    Ct = C @ V
    Bs = Bt[:k] + X @ Bt[k:]
    Cs = Ct[:, :k]
    Bu = Bt[k:]
    Cu = Ct[:, k:] - Ct[:, :k] @ X
    return (T[:k, :k], Bs, Cs), (T[k:, k:], Bu, Cu)


def _balanced_trunc(A, B, C, rel_tol, ref=None):
    """Square-root balanced truncation of a Hurwitz triple."""
    n = A.shape[0]
    if n == 0:
        return A, B, C, np.zeros(0)
    Wc = nx.solve_lyapunov(A, B @ B.conj().T)
    Wo = nx.solve_lyapunov(A.conj().T, C.conj().T @ C)
    Lc = nx.hermitian_sqrt(Wc, clip=0.0)
    Lo = nx.hermitian_sqrt(Wo, clip=0.0)
    U, s, V = nx.svd(Lo.conj().T @ Lc)
    top = s[0] if ref is None else ref
    r = int(np.sum(s > rel_tol * top))
    if r == n:
        return A, B, C, s
    if r == 0:
        return (np.zeros((0, 0), complex), np.zeros((0, B.shape[1]), complex),
                np.zeros((C.shape[0], 0), complex), s)
    sr = 1.0 / np.sqrt(s[:r])
    T = (sr[:, None] * U[:, :r].conj().T) @ Lo.conj().T
    Ti = Lc @ V[:, :r] * sr[None, :]
    return T @ A @ Ti, T @ B, C @ Ti, s


def hankel_singular_values(r):
    """Hankel singular values of a Hurwitz realization."""
    return _balanced_trunc(r.A, r.B, r.C, 0.5)[3]


def _krylov_basis(A, B, tol):
    """Orthonormal basis of the Krylov space of ``(A, B)`` (block Arnoldi)."""
    n = A.shape[0]
    na = max(np.linalg.norm(A, 2), 1e-300)
    basis = np.zeros((n, 0), complex)
    block = B.copy()
    while basis.shape[1] < n and block.shape[1]:
        block = block - basis @ (basis.conj().T @ block)
        block = block - basis @ (basis.conj().T @ block)
        u, s, _ = np.linalg.svd(block, full_matrices=False)
        ref = na if basis.shape[1] else max(s.max(initial=0.0), 1e-300)
        keep = int(np.sum(s > tol * ref))
        if keep == 0:
            break
        new = u[:, :keep]
        basis = np.hstack([basis, new])
        block = A @ new
    return basis[:, :n]


def minimal_reduce(r, rel_tol=1e-12):
    """Strip uncontrollable and unobservable states (Arnoldi staircase).

    A direction is dropped when its Arnoldi residual falls below
    ``rel_tol * ||A||``.  Weakly contributing but exactly reachable states
    are kept, so low-order Markov parameters and pole structure survive.
    """
    if r.n == 0:
        return r
    Qc = _krylov_basis(r.A, r.B, rel_tol)
    A, B, C = Qc.conj().T @ r.A @ Qc, Qc.conj().T @ r.B, r.C @ Qc
    Qo = _krylov_basis(A.conj().T, C.conj().T, rel_tol)
    A, B, C = Qo.conj().T @ A @ Qo, Qo.conj().T @ B, C @ Qo
    if A.shape[0] == r.n:
        return r
    return Realization(A, B, C, r.D)


def _pack(m):
    m = np.asarray(m, complex)
    return {'re': m.real.reshape(-1).tolist(), 'im': m.imag.reshape(-1).tolist()}


def _unpack(d, shape):
    re = np.asarray(d['re'], float)
    im = np.asarray(d.get('im', np.zeros_like(re)), float)
    return (re + 1j * im).reshape(shape)


def to_json_dict(r):
    """JSON-ready dict: ``n, m, p`` and flat row-major ``re``/``im`` arrays."""
    p, m = r.shape
    return {'n': r.n, 'm': m, 'p': p, 'A': _pack(r.A), 'B': _pack(r.B),
            'C': _pack(r.C), 'D': _pack(r.D)}


def from_json_dict(d):
    n, m, p = int(d['n']), int(d['m']), int(d['p'])
    return Realization(_unpack(d['A'], (n, n)), _unpack(d['B'], (n, m)),
                       _unpack(d['C'], (p, n)), _unpack(d['D'], (p, m)))


def dumps(r):
    return json.dumps(to_json_dict(r), sort_keys=True, indent=2)


def loads(text):
    return from_json_dict(json.loads(text))
