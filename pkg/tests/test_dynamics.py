import warnings

import mpmath
import numpy as np
import pytest

from fibred_flower import catalog
from fibred_flower.cohomology import solve_exact
from fibred_flower.dynamics import (base_points, cascade_simulate, escape_check, iterate_orbit,
                                    tube_permutation, verify_petal)
from fibred_flower.errors import DynamicsError, IllConditionedWarning, PreconditionError
from fibred_flower.fibredjet import FibredJet, InfinityJet, inverse_jet
from fibred_flower.petals import repulsive_directions
from fibred_flower.reduction import classify
from fibred_flower.rotation import RotationNumber
from fibred_flower.trigpoly import TrigPoly


@pytest.fixture
def parabola(golden):
    return FibredJet.from_coefficients(golden, {2: 1.0}, N=2)


def _scalar_orbit(z, n):
    for _ in range(n):
        z = z + z * z
    return z


def test_identity_orbit_is_constant(golden):
    z0 = np.array([0.1, 0.2j, -0.3 + 0.1j])
    tr = iterate_orbit(FibredJet.identity(golden, 4), np.zeros(3), z0, 500, record=True, stride=50)
    assert np.array_equal(tr.final_z, z0) and list(tr.status) == ["budget"] * 3
    assert np.all(tr.path == z0[:, None])


def test_parabola_axes(parabola):
    tr = iterate_orbit(parabola, [0.3], [-0.1], 10_000)
    assert tr.status[0] == "budget"
    assert tr.final_z[0] == pytest.approx(_scalar_orbit(-0.1 + 0j, 10_000), rel=1e-10)
    assert abs(tr.final_z[0]) < 1e-4
    tr = iterate_orbit(parabola, [0.3], [0.1], 10_000)
    assert tr.status[0] == "escaped" and tr.steps[0] < 20


def test_orbit_errors(parabola):
    with pytest.raises(PreconditionError):
        iterate_orbit(parabola, [0.0], [0.9], 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with pytest.raises(DynamicsError, match="NaN"):
            iterate_orbit(parabola, [0.0], [0.4], 2000, escape_radius=np.inf)


def test_base_exactness(golden):
    th0 = np.array([0.123456789])
    j = 10 ** 6
    got = base_points(golden, th0, j, 1)[0, 0]
    with mpmath.workdps(50):
        want = float(mpmath.frac(mpmath.mpf(0.123456789) + j * (mpmath.sqrt(5) - 1) / 2))
    assert abs(got - want) < 1e-12


def test_verify_petal_parabola(parabola):
    r = verify_petal(parabola, parabola, 1, seeds=200, radius=0.05, budget=10_000)
    (s,) = r.sectors
    assert s.direction == pytest.approx(-1)
    assert s.escaped == 0 and s.parabolic_rate == 1.0 and s.one_step_membership == 1.0
    assert r.backward_converged == 1.0


def test_verify_petal_example1(golden):
    F = catalog.example1(golden, N=6)
    v = classify(F).verdict
    r = verify_petal(F, v.reduced, 2, seeds=100, radius=0.02, budget=20_000)
    assert len(r.sectors) == 2
    assert sorted(s.direction.real for s in r.sectors) == pytest.approx([-1, 1])
    for s in r.sectors:
        assert s.escaped == 0 and s.parabolic_rate >= 0.99 and s.one_step_membership >= 0.99


def test_inverse_duality(golden):
    F = catalog.example1(golden, N=6)
    v = classify(F).verdict
    w = classify(inverse_jet(F)).verdict
    assert w.petals == v.petals and complex(w.leading_mean) == pytest.approx(-complex(v.leading_mean), abs=1e-10)
    a = repulsive_directions(v.leading_mean, v.petals)
    b = repulsive_directions(w.leading_mean, w.petals)
    # attracting directions of F are the repulsive ones of F^-1
    gap = np.abs(a.attracting[:, None] - b.repulsive[None, :]).min(axis=1)
    assert np.all(gap < 1e-9)


def _infinity(golden, *tail):
    return InfinityJet(golden, 1.0 + 0j, TrigPoly.zero(), tuple(TrigPoly.constant(b) for b in tail), 1)


def test_escape_check_examples(golden):
    rep = escape_check(_infinity(golden), 0.0, samples=32)
    assert rep.passed and rep.worst_margin == pytest.approx(0.5)
    rep = escape_check(_infinity(golden, 1.0), 20.0, Z0=20.0 + np.linspace(-5, 5, 11) * 1j)
    assert rep.passed
    rep = escape_check(_infinity(golden, -5.0), 0.5, Z0=np.array([0.6 + 0j]), n_max=5)
    assert not rep.passed and rep.witness["n"] >= 1 and rep.witness["Z0"] == [0.6, 0.0]


def test_cascade_integrable(golden):
    rep = cascade_simulate(TrigPoly.sin(), golden, 0.2, 0j, 100_000)
    c = solve_exact(TrigPoly.sin(), golden).c
    assert rep.verdict == "integrable"
    assert rep.sup_displacement <= 2 * c.strip_norm(0) + 1e-6
    assert rep.w_spread <= 1e-9


def test_cascade_trivial_and_errors(golden):
    rep = cascade_simulate(TrigPoly.zero(), golden, 0.0, 1 + 1j, 1000)
    assert np.all(rep.Z == 1 + 1j)
    with pytest.raises(PreconditionError):
        cascade_simulate(TrigPoly.sin() + 0.1, golden, 0.0, 0j, 10)


def test_cascade_small_divisor_warns():
    alpha = RotationNumber.from_cf([0, 1, 10 ** 8, 1], periodic_tail=1)
    with pytest.warns(IllConditionedWarning):
        rep = cascade_simulate(TrigPoly.sin(), alpha, 0.0, 0j, 1000)
    assert rep.verdict == "integrable (ill-conditioned)"
    assert rep.bound > 1e6 and rep.sup_displacement <= rep.bound


def test_tube_permutation_half_turn(golden):
    F = catalog.half_turn(golden)
    v = classify(F).verdict
    tp = tube_permutation(F, v.leading_mean, v.petals, seeds=40, warmup=500)
    assert tp.mapping == [1, 0] and tp.purity == 1.0
