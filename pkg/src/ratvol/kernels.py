"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``RATVOL_PURE_PYTHON=1`` to force the numpy implementation.
"""
import os

from . import _pykernels

if os.environ.get('RATVOL_PURE_PYTHON', '') not in ('', '0'):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

IMPLEMENTATION = _impl.IMPLEMENTATION
ar1_volatility_path = _impl.ar1_volatility_path
sample_acov = _impl.sample_acov
absy_moment_vector = _impl.absy_moment_vector

__all__ = ['IMPLEMENTATION', 'ar1_volatility_path', 'sample_acov', 'absy_moment_vector']
