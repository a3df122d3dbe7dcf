"""Acceptance criteria with pinned tolerances.

Each test records one ``PASS``/``FAIL`` line; the lines are repeated in the
terminal summary.  Run standalone with ``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest

from ratvol import moments as mo
from ratvol import ratpdf as rp
from ratvol import realization as rz
from ratvol import numerics as nx
from ratvol import sim
from ratvol import svfilter as sf
from ratvol import cli

from conftest import factor_zeros, random_density_summand, random_stable

RESULTS = []

TABLE1 = [  # (a, sigma) at psi = 1 -> E|Y|, Var|Y|, Corr_1
    ((0.5, 0.5), (0.7202, 0.8506, 0.0209)),
    ((0.5, 1.0), (0.7809, 1.3303, 0.0619)),
    ((0.9, 0.5), (0.7797, 1.2994, 0.1133)),
    ((0.9, 1.0), (1.0279, 4.3120, 0.2270)),
]


def report(num, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {title}: {detail}"
    RESULTS.append(line)
    print(line)
    return ok


# ---------------------------------------------------------------------------
# 1. closed-form moment table through the command line

def test_c01_table1_closed_form(capsys):
    import json
    t0 = time.perf_counter()
    worst = 0.0
    for (a, s), want in TABLE1:
        assert cli.main(['moments', '--a', str(a), '--sigma', str(s), '--psi', '1']) == 0
        doc = json.loads(capsys.readouterr().out)
        got = (doc['mean_absY'], doc['var_absY'], doc['corr_absY'][0])
        worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
    dt = time.perf_counter() - t0
    ok = worst <= 5e-4 and dt < 1.0
    with capsys.disabled():
        report(1, '|Y| moments, closed form', ok,
               f'max |err| = {worst:.2e} (tol 5e-4), runtime {dt:.3f} s (limit 1 s)')
    assert ok


# ---------------------------------------------------------------------------
# 2. simulation bridge

def _absy_stats(z):
    m = z.mean()
    zc = z - m
    v = np.mean(zc ** 2)
    return np.array([m, v, np.mean(zc[1:] * zc[:-1]) / v])


def test_c02_table1_simulation(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    n_batches = 100
    for (a, s), want in TABLE1:
        _, ys = sim.simulate(sim.SimConfig(a=a, psi=1.0, sigma=s, T=10 ** 6, seed=0))
        z = np.abs(ys)
        est = _absy_stats(z)
        batches = np.array([_absy_stats(b) for b in z.reshape(n_batches, -1)])
        se = batches.std(axis=0, ddof=1) / math.sqrt(n_batches)
        worst = max(worst, float(np.max(np.abs(est - np.array(want)) / se)))
    dt = time.perf_counter() - t0
    ok = worst <= 3.0 and dt < 60.0
    with capsys.disabled():
        report(2, '|Y| moments, simulated path (T=1e6, seed 0)', ok,
               f'max |z| = {worst:.2f} batch-means SE (limit 3), runtime {dt:.1f} s (limit 60 s)')
    assert ok


# ---------------------------------------------------------------------------
# 3. composition oracle

def test_c03_composition(capsys):
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        n1, n2 = rng.integers(1, 7, size=2)
        g1 = rz.Realization(random_stable(n1, rng), rng.normal(size=(n1, 1)),
                            rng.normal(size=(1, n1)), rng.normal())
        A2 = random_stable(n2, rng)
        d2 = rng.normal() + 1j * rng.normal()
        ev = np.linalg.eigvals(g1.A)
        while np.min(np.abs(ev - d2)) < 1e-3:
            d2 = d2 + 0.1
        g2 = rz.Realization(A2, rng.normal(size=(n2, 1)), rng.normal(size=(1, n2)), d2)
        s = rng.normal(size=30) * 3 + 1j * rng.normal(size=30) * 3
        want = g1(g2(s)[:, 0, 0])[:, 0, 0]
        got = rp.compose(g1, g2)(s)[:, 0, 0]
        worst = max(worst, float(np.max(np.abs(got - want) / np.abs(want))))
    ok = worst <= 1e-9
    with capsys.disabled():
        report(3, 'composition oracle', ok, f'max rel err = {worst:.2e} over 50x30 (tol 1e-9)')
    assert ok


# ---------------------------------------------------------------------------
# 4. factorization oracle

def test_c04_factorization(capsys):
    rng = np.random.default_rng(4)
    x = np.linspace(-20, 20, 200)
    err = zero = rank = 0.0
    bad_rank = 0
    for i in range(50):
        codegree = (2, 4, 6)[i % 3]
        n = int(rng.integers(codegree // 2 + 1, 13))
        z, _ = random_density_summand(n, codegree, rng)
        k, P = rp.factor_from_summand(z, 'min_phase')
        phi = rp.RationalPdf(z, 1.0, codegree)(x)
        err = max(err, float(np.max(np.abs(rp.pdf_eval_factor(k, x) / phi - 1))))
        scale = np.abs(np.linalg.eigvals(z.A)).max()
        zr = factor_zeros(k, n - codegree // 2)
        if zr.size:
            zero = max(zero, float(zr.real.max() / scale))
        L = rp.lmi_matrix(z, P)
        w = np.linalg.eigvalsh(L)
        rank = max(rank, float(-w.min() / w.max()))
        bad_rank += nx.numerical_rank(L, 1e-8) != 1
    ok = err <= 1e-8 and zero <= 1e-8 and rank <= 1e-8 and bad_rank == 0
    with capsys.disabled():
        report(4, 'factorization oracle', ok,
               f'max rel |K|^2 err = {err:.2e} (tol 1e-8), max Re(zero)/scale = {zero:.2e} '
               f'(tol 1e-8), min eig L(P)/max = {-rank:.2e}, rank != 1 in {bad_rank}/50')
    assert ok


# ---------------------------------------------------------------------------
# 5, 6, 8 share one filter run on the reference configuration

@pytest.fixture(scope='module')
def reference_run():
    model = sf.SvModel.scaled_t(a=0.9, psi=2.0, sigma=1.5, d=4, n_W=9, n_U=3, n_X=9)
    _, ys = sim.simulate(sim.SimConfig.from_model(model, 100, 7))
    t0 = time.perf_counter()
    res = sf.run(model, ys, tau=0.02, keep_full=True, check_codegree=True)
    return model, res, time.perf_counter() - t0


def test_c05_truncation_bound(capsys, reference_run):
    model, res, _ = reference_run
    x = np.linspace(-20, 20, 400)
    c = model.k_W // 2
    worst_ratio = 0.0
    unit_lo, unit_hi = 1.0, 1.0
    violations = 0
    for dg in res.diagnostics:
        kfull, _ = rp.factor_from_summand(dg.full_predictive, codegree=dg.k_next)
        kred, _ = rp.factor_from_summand(dg.reduced_predictive, codegree=dg.k_next)
        f = rp.pdf_eval_factor(kfull, x)
        g = rp.pdf_eval_factor(kred, x)
        e = float(np.max(np.abs(g / f - 1)))
        worst_ratio = max(worst_ratio, e / dg.bound if dg.bound > 0 else (math.inf if e > 0 else 0))
        violations += e > dg.bound
        unit_lo = min(unit_lo, float(dg.sigma[:c].min()))
        unit_hi = max(unit_hi, float(dg.sigma[:c].max()))
    ok = violations == 0 and unit_lo >= 1 - 1e-8 and unit_hi <= 1 + 1e-10
    with capsys.disabled():
        report(5, 'truncation bound validity', ok,
               f'{violations}/100 steps exceed the bound (max err/bound = {worst_ratio:.3f}); '
               f'unit sigma in [1{unit_lo - 1:+.1e}, 1{unit_hi - 1:+.1e}] '
               f'(need [1-1e-8, 1+1e-10]), c = {c}')
    assert ok


def test_c06_order_reduction(capsys, reference_run):
    model, res, dt = reference_run
    late = res.diagnostics[50:]
    ns = [dg.n_full for dg in late]
    ms = [dg.m_reduced for dg in late]
    worst = 0.0
    for dg in res.diagnostics:
        mf = rp.normalize_and_moments(dg.full_predictive, model.d, dg.k_next)[1].real
        mr = rp.normalize_and_moments(dg.reduced_predictive, model.d, dg.k_next)[1].real
        vf = sum(v * model.sigma ** j * mf[j] for j, v in enumerate(model.v_coeffs))
        vr = sum(v * model.sigma ** j * mr[j] for j, v in enumerate(model.v_coeffs))
        worst = max(worst, abs(mr[1] - mf[1]) / abs(mf[1]), abs(vr - vf) / abs(vf))
    ok = (70 <= min(ns) and max(ns) <= 110 and 7 <= min(ms) and max(ms) <= 14
          and worst <= 1e-8 and dt < 600)
    with capsys.disabled():
        report(6, 'order reduction on the reference run', ok,
               f'late n in [{min(ns)}, {max(ns)}] (need [70, 110]), m in [{min(ms)}, {max(ms)}] '
               f'(need [7, 14]), full vs reduced moment rel diff {worst:.1e} (tol 1e-8), '
               f'runtime {dt:.0f} s (limit 600 s)')
    assert ok


def test_c08_codegree_ledger(capsys, reference_run):
    model, res, _ = reference_run
    bad = 0
    for dg in res.diagnostics:
        bad += not (dg.k_post == dg.k_pred + model.d == dg.k_post_staircase)
        bad += not (dg.k_next == min(dg.k_post, model.k_W) == dg.k_next_staircase)
    ok = bad == 0
    with capsys.disabled():
        report(8, 'co-degree ledger', ok,
               f'{bad} mismatches over {len(res.diagnostics)} steps (staircase-checked)')
    assert ok


# ---------------------------------------------------------------------------
# 7. likelihood oracle

def _grid_likelihood(model, ys, x1_scale, n):
    """Product of one-step likelihoods by tan-mapped Gauss-Legendre recursion."""
    th, wt = np.polynomial.legendre.leggauss(n)
    th, wt = th * math.pi / 2, wt * math.pi / 2
    sc = 3.0
    x = sc * np.tan(th)
    jw = wt * sc / np.cos(th) ** 2
    cauchy = lambda u, s=1.0: s / (math.pi * (u * u + s * s))
    vol = model.psi * sf.poly_eval(model.v_coeffs, model.sigma * x)
    w = lambda y: cauchy(y / vol) / vol
    f = cauchy(x, x1_scale) * w(ys[0])
    total = np.sum(f * jw)
    f = f / total
    out = total
    K = cauchy(x[:, None] - model.a * x[None, :])
    for y in ys[1:]:
        f = (K @ (f * jw)) * w(y)
        c = np.sum(f * jw)
        out *= c
        f = f / c
    return out


def test_c07_likelihood(capsys):
    a = 0.7
    c = rp.make_cauchy(1.0)
    model = sf.SvModel(a=a, psi=1.0, sigma=0.8, v_coeffs=sf.volatility_coeffs(4), pdf_W=c,
                       pdf_U=c, pdf_X1=rp.make_cauchy(1 / (1 - a)))
    ys = [0.8, -2.5, 0.3]
    got = math.exp(sf.run(model, ys, tau=None, forecast=False).loglik)
    refs = [_grid_likelihood(model, ys, 1 / (1 - a), n) for n in (2000, 4000)]
    spread = abs(refs[1] - refs[0]) / refs[1]
    err = abs(got - refs[1]) / refs[1]
    ok = err <= 1e-6 and spread <= 1e-9
    with capsys.disabled():
        report(7, 'likelihood oracle (T=3, Cauchy noises)', ok,
               f'prod c_t = {got:.12e}, quadrature {refs[1]:.12e}, rel err {err:.1e} (tol 1e-6), '
               f'quadrature self-consistency {spread:.1e}')
    assert ok


# ---------------------------------------------------------------------------
# 9. estimator dispersion

def _mm_errors(a, psi, s, seed, reps=200):
    spec = mo.MomentSpec.scaled_t(0.5)
    out = []
    for sd in sim.replication_seeds(seed, reps):
        _, ys = sim.simulate(sim.SimConfig(a=a, psi=psi, sigma=s, T=1000), sim.make_stream(sd))
        out.append(mo.mm_estimate(ys, 10, spec=spec).a_hat - a)
    return np.array(out)


def test_c09_estimator(capsys):
    t0 = time.perf_counter()
    e1 = _mm_errors(0.9, 1.0, 1.0, seed=99)
    e2 = _mm_errors(0.5, 1.0, 0.5, seed=99)
    dt = time.perf_counter() - t0
    m1, s1, m2 = e1.mean(), e1.std(ddof=1), e2.mean()
    ok = abs(m1) <= 0.02 and 0.04 <= s1 <= 0.09 and m2 < -0.15 and dt < 1800
    with capsys.disabled():
        report(9, 'estimator dispersion (200 reps, T=1000)', ok,
               f'(0.9,1,1): mean err {m1:+.4f} (need |.| <= 0.02), std {s1:.4f} (need [0.04, 0.09]); '
               f'(0.5,1,0.5): mean err {m2:+.4f} (need < -0.15); runtime {dt:.0f} s')
    assert ok


# ---------------------------------------------------------------------------
# 10. white-noise band test

def _band_pass_rate(a, psi, s, reps=200, T=1000, lags=10):
    band = 3 / math.sqrt(T)
    hits = 0
    for sd in sim.replication_seeds(10, reps):
        _, ys = sim.simulate(sim.SimConfig(a=a, psi=psi, sigma=s, T=T), sim.make_stream(sd))
        yc = ys - ys.mean()
        g = np.array([yc[k:] @ yc[:T - k] for k in range(lags + 1)])
        hits += np.all(np.abs(g[1:] / g[0]) <= band)
    return hits / reps


@pytest.mark.xfail(strict=True, reason='the +-3/sqrt(T) band assumes finite E V(sigma X)^4, '
                   'which is infinite for t9 state noise and a quartic V; see README')
def test_c10_white_noise(capsys):
    rate = _band_pass_rate(0.9, 1.0, 1.0)
    others = {cfg: _band_pass_rate(*cfg) for cfg in [(0.5, 1.0, 0.5), (0.9, 2.0, 1.5)]}
    ok = rate >= 0.95
    extra = ', '.join(f'{cfg}: {r:.1%}' for cfg, r in others.items())
    with capsys.disabled():
        report(10, 'white-noise band test at (0.9, 1, 1), T=1000', ok,
               f'pass rate {rate:.1%} (need >= 95%); other configurations {extra}')
    assert ok


if __name__ == '__main__':
    sys.exit(pytest.main([__file__, '-q', '-p', 'no:cacheprovider']))
