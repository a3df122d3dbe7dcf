import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from ratvol import ratpdf as rp
from ratvol import realization as rz
from ratvol.errors import AxisPoleError, FactorizationError, MomentExistenceError

from conftest import factor_zeros, random_density_summand, random_stable


def unit_t_pdf(df, x):
    s = math.sqrt((df - 2) / df)
    return stats.t.pdf(x / s, df) / s


def test_cauchy_matches_closed_form():
    p = rp.make_cauchy(2.0, 0.5)
    x = np.linspace(-10, 10, 41)
    want = 2.0 / (math.pi * ((x - 0.5) ** 2 + 4.0))
    assert np.allclose(p(x), want, rtol=1e-13)
    assert np.allclose(rp.pdf_eval_factor(p.factor, x), want, rtol=1e-13)
    assert p.codegree == 2


@pytest.mark.parametrize('df', [3, 5, 9, 15])
def test_scaled_t_matches_scipy(df):
    p = rp.make_scaled_t_odd(df)
    x = np.linspace(-8, 8, 33)
    assert np.allclose(p(x), unit_t_pdf(df, x), rtol=1e-10)
    assert p.codegree == df + 1
    _, mom = rp.normalize_and_moments(p.summand, 2, p.codegree)
    assert mom[1].real == pytest.approx(0.0, abs=1e-12)
    assert mom[2].real == pytest.approx(1.0, rel=1e-10)


def test_scaled_t_variance_and_errors():
    p = rp.make_scaled_t_odd(9, variance=4.0)
    _, mom = rp.normalize_and_moments(p.summand, 2, p.codegree)
    assert mom[2].real == pytest.approx(4.0, rel=1e-10)
    for bad in (4, 1, 2.5):
        with pytest.raises(ValueError):
            rp.make_scaled_t_odd(bad)


def test_normalization_integrates_to_one(rng):
    z, _ = random_density_summand(4, 4, rng)
    p = rp.RationalPdf(z, 1.0, 4)
    mass, _ = integrate.quad(lambda x: p(x), -np.inf, np.inf, limit=200)
    assert mass == pytest.approx(1.0, rel=1e-8)


def test_moments_need_codegree():
    p = rp.make_scaled_t_odd(3)
    with pytest.raises(MomentExistenceError):
        rp.normalize_and_moments(p.summand, 3, p.codegree)


def test_moments_by_quadrature(rng):
    z, _ = random_density_summand(6, 8, rng)
    p = rp.RationalPdf(z, 1.0, 8)
    _, mom = rp.normalize_and_moments(z, 3, 8)
    for l in range(4):
        m, _ = integrate.quad(lambda x: x ** l * p(x), -np.inf, np.inf, limit=400)
        assert mom[l].real == pytest.approx(m, rel=1e-6, abs=1e-9)
        assert abs(mom[l].imag) < 1e-8 * (1 + abs(mom[l]))


def test_density_representations_agree(rng):
    z, k = random_density_summand(4, 2, rng)
    s = 1j * np.linspace(-3, 3, 7)
    via_sum = rz.evaluate(rp.density_from_summand(z).realization, s)[:, 0, 0]
    kk = rp.SpectralFactor(k.A, k.B / math.sqrt(2 * math.pi * rp.summand_from_factor(k).cm.real), k.C)
    via_fac = rz.evaluate(rp.density_from_factor(kk).realization, s)[:, 0, 0]
    assert np.allclose(via_sum, via_fac, rtol=1e-10)
    back = rp.summand_from_density(rp.density_from_summand(z))
    assert np.allclose(rz.evaluate(back.realization, s), rz.evaluate(z.realization, s), rtol=1e-9)


def test_summand_from_density_axis_pole():
    phi = rp.SpectralDensity(np.array([[1j, 0], [0, -1.0]]), [[1.0], [1.0]], [[1.0, 1.0]])
    with pytest.raises(AxisPoleError):
        rp.summand_from_density(phi)


@pytest.mark.parametrize('codegree', [2, 4, 6])
@pytest.mark.parametrize('side', ['min_phase', 'max_phase'])
def test_factor_reproduces_density(rng, codegree, side):
    z, _ = random_density_summand(7, codegree, rng)
    k, P = rp.factor_from_summand(z, side)
    x = np.linspace(-10, 10, 101)
    phi = rp.RationalPdf(z, 1.0, codegree)(x)
    got = rp.pdf_eval_factor(k, x)
    assert np.max(np.abs(got / phi - 1)) < 1e-8
    zr = factor_zeros(k, 7 - codegree // 2)
    scale = np.abs(np.linalg.eigvals(z.A)).max()
    if side == 'min_phase':
        assert np.all(zr.real <= 1e-8 * scale)
    else:
        assert np.all(zr.real >= -1e-8 * scale)
    sv = np.linalg.svd(rp.lmi_matrix(z, P), compute_uv=False)
    assert sv[1] <= 1e-8 * sv[0]
    assert np.linalg.eigvalsh(rp.lmi_matrix(z, P)).min() >= -1e-8 * sv[0]


def test_factor_known_codegree_mismatch(rng):
    z, _ = random_density_summand(5, 4, rng)
    with pytest.raises(FactorizationError):
        rp.factor_from_summand(z, codegree=6)


def test_factor_min_and_max_bracket(rng):
    z, _ = random_density_summand(5, 2, rng)
    _, pmin = rp.factor_from_summand(z, 'min_phase')
    _, pmax = rp.factor_from_summand(z, 'max_phase')
    assert np.linalg.eigvalsh(pmax - pmin).min() >= -1e-8 * np.linalg.norm(pmax)


def test_scale_rv_and_convolution():
    c1 = rp.normalized(rp.make_cauchy(1.0).summand)
    c2 = rp.normalized(rp.make_cauchy(2.0).summand)
    conv = rp.convolve(c1, c2)
    assert 2 * math.pi * conv.cm.real == pytest.approx(1.0)
    p = rp.RationalPdf(conv, 1.0, 2)
    x = np.linspace(-6, 6, 13)
    assert np.allclose(p(x), stats.cauchy.pdf(x, scale=3.0), rtol=1e-12)
    for a in (0.5, -2.0):
        q = rp.RationalPdf(rp.scale_rv(c2, a), 1.0, 2)
        assert np.allclose(q(x), stats.cauchy.pdf(x, scale=2.0 * abs(a)), rtol=1e-12)


def test_convolution_of_t_by_quadrature():
    p1 = rp.make_scaled_t_odd(3)
    p2 = rp.make_scaled_t_odd(5, 2.0)
    conv = rp.RationalPdf(rp.convolve(p1.summand, p2.summand), 1.0, 4)
    for x in (0.0, 1.3, -4.0):
        want, _ = integrate.quad(lambda u: p1(u) * p2(x - u), -np.inf, np.inf, limit=400)
        assert conv(x) == pytest.approx(want, rel=1e-8)


def test_compose_simple():
    g1 = rz.Realization([[-1.0]], [[1.0]], [[1.0]], 0)  # 1/(s+1)
    g2 = rz.Realization([[-2.0]], [[1.0]], [[3.0]], 0.5)  # 3/(s+2) + 0.5
    s = np.array([0.3j, 1.0 + 1j, 2.0])
    h = rp.compose(g1, g2)
    inner = 3 / (s + 2) + 0.5
    assert np.allclose(h(s)[:, 0, 0], 1 / (inner + 1), rtol=1e-13)


def test_compose_rejects_pole_feedthrough():
    g1 = rz.Realization([[-1.0]], [[1.0]], [[1.0]], 0)
    g2 = rz.constant(-1.0)
    with pytest.raises(ValueError):
        rp.compose(g1, g2)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_compose_property(n1, n2, seed):
    rng = np.random.default_rng(seed)
    g1 = rz.Realization(random_stable(n1, rng), rng.normal(size=(n1, 1)), rng.normal(size=(1, n1)),
                        rng.normal())
    g2 = rz.Realization(random_stable(n2, rng), rng.normal(size=(n2, 1)), rng.normal(size=(1, n2)),
                        rng.normal() + 3.0)
    s = rng.normal(size=4) + 1j * rng.normal(size=4) + 2.0
    inner = g2(s)[:, 0, 0]
    want = g1(inner)[:, 0, 0]
    got = rp.compose(g1, g2)(s)[:, 0, 0]
    assert np.allclose(got, want, rtol=1e-8, atol=1e-10)


def test_json_round_trip():
    p = rp.make_scaled_t_odd(5)
    q = rp.pdf_from_json_dict(rp.pdf_to_json_dict(p))
    assert q.codegree == p.codegree
    x = np.linspace(-3, 3, 5)
    assert np.array_equal(p(x), q(x))
    with pytest.raises(ValueError):
        rp.pdf_from_json_dict({'kind': 'other'})


def test_summand_validate():
    z = rp.SpectralSummand([[1.0]], [[1.0]], [[1.0]])
    with pytest.raises(Exception):
        z.validate()
    assert rp.make_cauchy().summand.validate() is not None
