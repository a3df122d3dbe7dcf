import sys

import numpy as np
import pytest

from ratvol import ratpdf as rp


def random_stable(n, rng, margin=0.3):
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    shift = np.max(np.linalg.eigvals(A).real) + margin
    return A - shift * np.eye(n)


def random_factor(n, half_codegree, rng):
    """Stable factor of order ``n`` whose first ``half_codegree - 1`` Markov parameters vanish."""
    A = random_stable(n, rng)
    B = rng.normal(size=(n, 1)) + 1j * rng.normal(size=(n, 1))
    C = rng.normal(size=(1, n)) + 1j * rng.normal(size=(1, n))
    if half_codegree > 1:
        K0 = np.hstack([np.linalg.matrix_power(A, j) @ B for j in range(half_codegree - 1)])
        C = C - (C @ K0) @ np.linalg.pinv(K0)
    return rp.SpectralFactor(A, B, C)


def random_density_summand(n, codegree, rng):
    """Normalized summand of ``|K|^2`` with the given co-degree."""
    k = random_factor(n, codegree // 2, rng)
    return rp.normalized(rp.summand_from_factor(k)), k


def factor_zeros(k, degree):
    """Zeros of a scalar factor from its numerator ``K(s) det(sI - A)``.

    The numerator is sampled on a circle and its ``degree + 1`` coefficients
    are recovered by FFT, independently of any pencil computation.
    """
    n = k.n
    radius = max(1.0, np.abs(np.linalg.eigvals(k.A)).max())
    pts = radius * np.exp(2j * np.pi * (np.arange(n + 1) + 0.5) / (n + 1))
    vals = np.array([(k.C @ np.linalg.solve(s * np.eye(n) - k.A, k.B))[0, 0]
                     * np.linalg.det(s * np.eye(n) - k.A) for s in pts])
    shift = np.exp(2j * np.pi * 0.5 * np.arange(n + 1) / (n + 1))
    coef = np.fft.fft(vals) / (n + 1)
    coef = coef / shift / radius ** np.arange(n + 1)
    return np.roots(coef[:degree + 1][::-1])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get('test_acceptance')
    lines = getattr(mod, 'RESULTS', None)
    if lines:
        terminalreporter.section('acceptance criteria')
        for line in sorted(lines, key=lambda l: int(l.split('criterion')[1].split(':')[0])):
            terminalreporter.write_line(line)
