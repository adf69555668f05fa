import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fibred_flower import config
from fibred_flower.rotation import RotationNumber
from fibred_flower.trigpoly import TrigPoly

coef = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
polys = st.dictionaries(st.integers(-4, 4), coef, max_size=6).map(TrigPoly.from_modes)


def test_sin_squared_modes():
    # hand convolution of sin = (-i/2) e_1 + (i/2) e_-1
    p = TrigPoly.sin() * TrigPoly.sin()
    assert p.coeff(0) == pytest.approx(0.5)
    assert p.coeff(2) == pytest.approx(-0.25)
    assert p.coeff(-2) == pytest.approx(-0.25)
    assert p.coeff(1) == 0 and p.coeff(-1) == 0


def test_trivial_products():
    p = TrigPoly.from_modes({-1: 1 + 2j, 3: -0.5j})
    assert (p * TrigPoly.constant(1)).allclose(p)
    assert (TrigPoly.constant(2) * TrigPoly.constant(3)).allclose(TrigPoly.constant(6))


def test_rotate_examples(golden):
    assert TrigPoly.constant(3 + 1j).rotate(golden).allclose(TrigPoly.constant(3 + 1j))
    e1 = TrigPoly.mode(1).rotate(golden)
    assert e1.coeff(1) == pytest.approx(complex(np.exp(2j * math.pi * float(golden))), abs=1e-15)
    p = TrigPoly.from_modes({-2: 1, 1: 2j, 3: 0.25})
    assert p.rotate(golden).rotate(-golden).allclose(p, tol=1e-14)


def test_means():
    assert TrigPoly.sin().mean() == 0
    assert (TrigPoly.sin() ** 2).mean() == pytest.approx(0.5)
    assert TrigPoly.constant(7.5).mean() == 7.5


def test_eval_examples():
    assert complex(TrigPoly.sin()(0.25)) == pytest.approx(1.0)
    assert complex(TrigPoly.constant(2 - 1j)(0.3)) == 2 - 1j


def test_strip_norm_examples():
    assert TrigPoly.constant(-3).strip_norm(0.7) == pytest.approx(3)
    assert TrigPoly.mode(1).strip_norm(0.2) == pytest.approx(math.exp(2 * math.pi * 0.2))
    assert TrigPoly.sin().strip_norm(0) == pytest.approx(1.0)


def test_records_roundtrip():
    p = TrigPoly.from_modes({-2: 1 - 1j, 0: 0.5, 5: 3j})
    assert TrigPoly.from_records(p.to_records()).allclose(p, tol=0)


def test_extended_matches_double():
    p = TrigPoly.from_modes({-1: 0.3 + 1j, 2: -2})
    with config.precision("extended"):
        q = p.to_extended()
        r = (q * q).rotate(RotationNumber.golden())
    assert r.to_double().allclose((p * p).rotate(RotationNumber.golden()), tol=1e-13)


@settings(max_examples=60, deadline=None)
@given(polys, polys)
def test_mean_of_product_is_mode_zero_convolution(p, q):
    conv = sum(p.coeff(n) * q.coeff(-n) for n in range(-8, 9))
    assert abs(complex((p * q).mean()) - conv) <= 1e-12 * max(1.0, abs(conv))


@settings(max_examples=60, deadline=None)
@given(polys, st.floats(0, 1, allow_nan=False))
def test_rotate_preserves_mean(p, a):
    alpha = RotationNumber.from_float(math.sqrt(2) - 1 + 1e-3 * a)
    assert complex(p.rotate(alpha).mean()) == complex(p.mean())


@settings(max_examples=40, deadline=None)
@given(polys, polys, st.integers(0, 2**32 - 1))
def test_eval_of_product_is_pointwise(p, q, seed):
    th = np.random.default_rng(seed).random(64)
    lhs = np.asarray((p * q)(th), dtype=complex)
    rhs = np.asarray(p(th), dtype=complex) * np.asarray(q(th), dtype=complex)
    scale = max(1.0, p.strip_norm(0) * q.strip_norm(0))
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * scale


@settings(max_examples=60, deadline=None)
@given(polys, polys, st.floats(0, 0.5), st.floats(0, 0.5))
def test_strip_norm_monotone_and_submultiplicative(p, q, d1, d2):
    lo, hi = sorted((d1, d2))
    assert p.strip_norm(lo) <= p.strip_norm(hi) * (1 + 1e-12)
    assert (p * q).strip_norm(hi) <= p.strip_norm(hi) * q.strip_norm(hi) * (1 + 1e-12) + 1e-12
