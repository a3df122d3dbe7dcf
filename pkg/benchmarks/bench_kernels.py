"""Timing of the compiled kernels against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from ratvol import _pykernels
from ratvol.moments import MomentSpec
from ratvol.svfilter import volatility_coeffs

try:
    from ratvol import _ckernels
except ImportError:
    _ckernels = None


def cases():
    rng = np.random.Generator(np.random.Philox(0))
    T = 1_000_000
    w = rng.standard_normal(T - 1)
    u = rng.standard_normal(T)
    coeffs = np.asarray(volatility_coeffs(4), float)
    z = np.abs(rng.standard_normal(T))
    spec = MomentSpec.scaled_t(0.9)
    mw = np.asarray(spec.M_W)
    v = np.asarray(spec.v)
    return {
        'ar1_volatility_path (T=1e6)':
            lambda k: k.ar1_volatility_path(0.3, 0.9, w, u, coeffs),
        'sample_acov (T=1e6, 10 lags)':
            lambda k: k.sample_acov(z, 10),
        'absy_moment_vector (10 lags) x1000':
            lambda k: [k.absy_moment_vector(0.9, 1.0, 1.0, mw, v, 1.0, spec.E_absU, 10)
                       for _ in range(1000)],
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument('--repeat', type=int, default=3)
    args = ap.parse_args(argv)
    impls = [('python', _pykernels)]
    if _ckernels is not None:
        impls.insert(0, ('cython', _ckernels))
    else:
        print('compiled extension not built; timing the fallback only')
    print(f"{'kernel':38s}" + ''.join(f'{n:>12s}' for n, _ in impls) + '     speedup')
    for name, fn in cases().items():
        times = [min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
                 for _, k in impls]
        line = f'{name:38s}' + ''.join(f'{t * 1e3:10.1f}ms' for t in times)
        if len(times) == 2:
            line += f'{times[1] / times[0]:11.1f}x'
        print(line)


if __name__ == '__main__':
    main()
