"""Pure numpy implementations of the hot loops (fallback for the extension)."""
import numpy as np
from scipy.signal import lfilter

IMPLEMENTATION = 'python'


def ar1_volatility_path(x1, a, w, u, coeffs):
    """Latent AR(1) path and observations ``y_t = V~(x_t) u_t``.

    ``coeffs`` are ascending coefficients of ``V~`` (already scaled).
    """
    w = np.asarray(w, float)
    u = np.asarray(u, float)
    drive = np.concatenate(([float(x1)], w[:u.size - 1]))
    x = lfilter([1.0], [1.0, -float(a)], drive)
    vol = np.polynomial.polynomial.polyval(x, np.asarray(coeffs, float))
    return x, vol * u


def sample_acov(z, max_lag):
    """Biased (1/T) autocovariances of ``z`` at lags ``0..max_lag``."""
    z = np.asarray(z, float)
    T = z.size
    zc = z - z.mean()
    out = np.empty(max_lag + 1)
    for k in range(max_lag + 1):
        out[k] = zc[k:] @ zc[:T - k] / T if k < T else 0.0
    return out


def absy_moment_vector(a, psi, sigma, mw, v, eu2, eabsu, lags):
    """``(E|Y|, Var|Y|, Cov_1..Cov_lags)`` in closed form.

    ``mw`` holds raw state-noise moments ``0..2d``; ``v`` the ascending
    coefficients of ``V``.
    """
    v = np.asarray(v, float)
    mw = np.asarray(mw, float)
    d = v.size - 1
    vt = v * sigma ** np.arange(d + 1)
    mx = np.empty(2 * d + 1)
    mx[0] = 1.0
    for k in range(1, 2 * d + 1):
        acc = 0.0
        binom = 1.0
        al = 1.0
        for l in range(k):
            acc += binom * al * mw[k - l] * mx[l]
            binom = binom * (k - l) / (l + 1)
            al *= a
        mx[k] = acc / (1.0 - a ** k)
    S = np.empty((d + 1, d + 1))
    for i in range(d + 1):
        S[i] = mx[i:i + d + 1]
    F = np.zeros((d + 1, d + 1))
    for i in range(d + 1):
        binom = 1.0
        for l in range(i + 1):
            F[i, l] = binom * a ** l * mw[i - l]
            binom = binom * (i - l) / (l + 1)
    G = F.copy()
    G[:, 0] -= mx[:d + 1]
    ev = vt @ mx[:d + 1]
    ev2 = vt @ S @ vt
    out = np.empty(lags + 2)
    out[0] = psi * ev * eabsu
    out[1] = psi * psi * (ev2 * eu2 - (ev * eabsu) ** 2)
    w = S @ vt
    for k in range(1, lags + 1):
        w = G @ w
        out[k + 1] = psi * psi * (vt @ w) * eabsu * eabsu
    return out
