import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_trig
from fibred_flower.cohomology import (birkhoff_diagnostic, birkhoff_sums, lemma4_constant, solve_exact)
from fibred_flower.errors import IllConditionedWarning, ResonanceError
from fibred_flower.rotation import DiophantineParams, RotationNumber, diophantine_check, small_divisor
from fibred_flower.trigpoly import TrigPoly


def test_constant_data(golden):
    sol = solve_exact(TrigPoly.constant(2.5 - 1j), golden)
    assert sol.c.is_zero() and sol.k == 2.5 - 1j


def test_single_mode(golden):
    sol = solve_exact(TrigPoly.mode(1), golden)
    assert sol.k == 0
    assert sol.c.allclose(TrigPoly.mode(1, -1 / small_divisor(golden, 1)), tol=1e-15)


def test_sine_residual(golden):
    g = TrigPoly.sin()
    sol = solve_exact(g, golden)
    assert set(sol.c.modes()) == {-1, 1}
    th = np.random.default_rng(0).random(256)
    assert sol.residual(g, golden, th) < 1e-14


def test_rational_rejected():
    with pytest.raises(ResonanceError):
        solve_exact(TrigPoly.sin(), RotationNumber.from_fraction(1, 3))


def test_ill_conditioned_flag():
    alpha = RotationNumber.from_cf([0, 1, 10**14, 1], periodic_tail=1)
    with pytest.warns(IllConditionedWarning):
        sol = solve_exact(TrigPoly.mode(1), alpha, floor=1e-10)
    assert sol.ill_conditioned and sol.worst_divisor == (1, pytest.approx(sol.worst_divisor[1])) and sol.worst_divisor[1] < 1e-10
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        solve_exact(TrigPoly.mode(1), RotationNumber.golden())


def test_birkhoff_constant_is_zero(golden):
    assert np.all(birkhoff_sums(TrigPoly.constant(3), golden, 0.1, 100) == 0)


def test_birkhoff_sine_bounded(golden):
    g = TrigPoly.sin()
    rep = birkhoff_diagnostic(g, golden, 0.3, 10**5)
    c = solve_exact(g, golden).c
    assert rep.max_abs <= 2 * c.strip_norm(0) + 1e-9
    assert rep.bounded


@pytest.mark.parametrize("alpha", [RotationNumber.from_float(np.sqrt(2) - 1),
                                   RotationNumber.from_cf([0, 3, 7, 1, 2], periodic_tail=2)])
def test_birkhoff_bounded_any_irrational(alpha):
    rep = birkhoff_diagnostic(TrigPoly.sin(), alpha, 0.0, 10**5)
    assert rep.max_abs <= 2 * solve_exact(TrigPoly.sin(), alpha).c.strip_norm(0) + 1e-9


def test_telescoping_identity(golden, rng):
    g = random_trig(rng, 3)
    sol = solve_exact(g, golden)
    n = 10**5
    S = birkhoff_sums(g, golden, 0.2, n)
    ms = np.array([1, 10, 1000, n])
    th = np.mod(0.2 + golden.frac_multiple(ms), 1.0)
    # sum_{j<m} (g - k)(theta0 + j alpha) = c(theta0) - c(theta0 + m alpha) with c(t+a) - c(t) = -(g - k)
    rhs = complex(sol.c(0.2)) - np.asarray(sol.c(th), dtype=complex)
    assert np.max(np.abs(S[ms - 1] - rhs)) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linearity(seed):
    rng = np.random.default_rng(seed)
    alpha = RotationNumber.golden()
    g1, g2 = random_trig(rng), random_trig(rng)
    lhs = solve_exact(g1 + g2, alpha).c
    rhs = solve_exact(g1, alpha).c + solve_exact(g2, alpha).c
    assert lhs.allclose(rhs, tol=1e-12)


@pytest.mark.parametrize("d", [0.1, 0.2])
def test_lemma4_majorant(golden, rng, d):
    delta = 0.5
    rep = diophantine_check(golden, DiophantineParams(tau=0), 10**4)
    C = lemma4_constant(rep.worst_ratio, 0.0, delta)
    for _ in range(20):
        g = random_trig(rng, 6, mean_zero=True)
        c = solve_exact(g, golden).c
        assert c.strip_norm(delta - d) <= C * g.strip_norm(delta) / d ** 3
