import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from ratvol import _pykernels, kernels
from ratvol.moments import MomentSpec

try:
    from ratvol import _ckernels
except ImportError:
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason='compiled extension not built')


def test_selection_reports_implementation():
    assert kernels.IMPLEMENTATION in ('cython', 'python')
    if _ckernels is not None and os.environ.get('RATVOL_PURE_PYTHON', '') in ('', '0'):
        assert kernels.IMPLEMENTATION == 'cython'


def test_env_forces_fallback():
    code = 'from ratvol import kernels; print(kernels.IMPLEMENTATION)'
    env = dict(os.environ, RATVOL_PURE_PYTHON='1')
    out = subprocess.run([sys.executable, '-c', code], env=env, capture_output=True, text=True)
    assert out.stdout.strip() == 'python'


@needs_ext
def test_path_kernels_agree():
    rng = np.random.default_rng(0)
    w, u = rng.normal(size=999), rng.normal(size=1000)
    coeffs = np.array([1.1, 0.5, 0.1])
    a = _ckernels.ar1_volatility_path(0.4, 0.9, w, u, coeffs)
    b = _pykernels.ar1_volatility_path(0.4, 0.9, w, u, coeffs)
    assert np.allclose(a[0], b[0], rtol=1e-14) and np.allclose(a[1], b[1], rtol=1e-13)


@needs_ext
@pytest.mark.parametrize('T,lags', [(1, 3), (5, 10), (1000, 10)])
def test_acov_kernels_agree(T, lags):
    z = np.random.default_rng(T).random(T)
    assert np.allclose(_ckernels.sample_acov(z, lags), _pykernels.sample_acov(z, lags),
                       rtol=1e-12, atol=1e-15)


@needs_ext
def test_moment_kernels_agree():
    spec = MomentSpec.scaled_t(0.9, 1.0, 1.0)
    args = (np.asarray(spec.M_W), np.asarray(spec.v), 1.0, spec.E_absU, 10)
    for a, psi, s in [(0.9, 1.0, 1.0), (0.2, 0.5, 2.0), (-0.6, 1.0, 0.3)]:
        c = _ckernels.absy_moment_vector(a, psi, s, *args)
        p = _pykernels.absy_moment_vector(a, psi, s, *args)
        assert np.allclose(c, p, rtol=1e-12, atol=1e-15)
