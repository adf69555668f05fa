import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_trig
from fibred_flower.series import FibreSeries, binom_coeff
from fibred_flower.trigpoly import TrigPoly


def _rand_series(rng, order, start=1, lead=None):
    cs = [TrigPoly.zero()] * start + [random_trig(rng, 2, scale=0.5) for _ in range(order + 1 - start)]
    if lead is not None:
        cs[start] = TrigPoly.constant(lead)
    return FibreSeries(cs)


def _grid(rng, n=16, r=1e-3):
    th = rng.random(n)
    z = r * np.exp(2j * np.pi * rng.random(n))
    return th, z


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_product_and_composition_pointwise(seed):
    rng = np.random.default_rng(seed)
    N = 6
    a, b = _rand_series(rng, N, 0), _rand_series(rng, N, 1)
    th, z = _grid(rng)
    # truncation leaves O(z^(N+1)) with |z| = 1e-3
    assert np.max(np.abs((a * b)(th, z) - a(th, z) * b(th, z))) < 1e-15
    assert np.max(np.abs(a.compose(b)(th, z) - a(th, b(th, z)))) < 1e-15


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reversion_and_reciprocal(seed):
    rng = np.random.default_rng(seed)
    N = 7
    f = _rand_series(rng, N, 1, lead=1.0 + 0.5j)
    g = f.reversion()
    # inverse coefficients grow fast; compare relative to their size
    scale = max(1.0, max(p.strip_norm(0) for p in g.c))
    assert f.compose(g).distance(FibreSeries.identity(N)) < 1e-13 * scale
    assert g.compose(f).distance(FibreSeries.identity(N)) < 1e-13 * scale
    u = _rand_series(rng, N, 0, lead=2.0)
    assert (u * u.reciprocal()).distance(FibreSeries.monomial(0, 1, N)) < 1e-12


def test_fractional_power_cubes_back(rng):
    u = _rand_series(rng, 6, 0, lead=1.0)
    r = u.fractional_power(1 / 3)
    assert (r ** 3).distance(u) < 1e-12


def test_binomial_matches_integer_case():
    assert [binom_coeff(4, i) for i in range(6)] == [1, 4, 6, 4, 1, 0]
    assert binom_coeff(-0.5, 2) == 0.375


def test_shift_and_valuation():
    s = FibreSeries([0, 0, TrigPoly.sin(), 1])
    assert s.valuation() == 2
    assert s.shift(-2).valuation() == 0
    assert s.shift(1)[3].allclose(TrigPoly.sin())
