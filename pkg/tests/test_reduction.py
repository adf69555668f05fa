import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_trig
from fibred_flower import catalog
from fibred_flower.errors import (CohomologyObstruction, PreconditionError, ResonanceError,
                                  TruncationExhausted)
from fibred_flower.fibredjet import FibredJet, conjugate, elementary_conjugate
from fibred_flower.reduction import (Flower, FlowerFound, InfinitelyReducible, Obstructed, Reduced,
                                     assemble_conjugacy, classify, conjugacy_residual, formal_scheme,
                                     loglog_slope, reduction_step)
from fibred_flower.rotation import RootOfUnity, RotationNumber
from fibred_flower.series import FibreSeries
from fibred_flower.trigpoly import TrigPoly

SIN = TrigPoly.sin()


def test_step_examples(golden):
    out = reduction_step(FibredJet.from_coefficients(golden, {2: 1.0}, N=3), 2)
    assert out == FlowerFound(petals=1, mean=1 + 0j)
    out = reduction_step(catalog.example1(golden), 2)
    assert isinstance(out, Reduced) and out.h.degree == 1
    step3 = reduction_step(out.jet, 3)
    assert isinstance(step3, FlowerFound) and step3.petals == 2
    assert step3.mean == pytest.approx(-0.5, abs=1e-12)
    el = reduction_step(catalog.example1(golden), 2, route="elementary")
    assert el.h.degree == 1
    # residual oracle: h(t + a) - h(t) = a_2 - mean(a_2)
    assert (el.h.rotate(golden) - el.h - SIN).strip_norm(0) < 1e-14


def test_step_preconditions(golden):
    with pytest.raises(PreconditionError):
        reduction_step(catalog.half_turn(golden), 2)
    with pytest.raises(PreconditionError):
        reduction_step(catalog.example1(golden), 3)
    with pytest.raises(TruncationExhausted):
        reduction_step(FibredJet.identity(golden, 3), 4)


def test_classify_example1(golden):
    c = classify(catalog.example1(golden))
    v = c.verdict
    assert isinstance(v, Flower) and v.petals == 2 and v.leading_order == 3
    assert v.leading_mean == pytest.approx(-0.5, abs=1e-10)
    assert v.reduced.coeff(3).allclose(-(SIN ** 2), tol=1e-10)
    assert not c.undetermined


def test_classify_example2(golden):
    v = classify(catalog.example2(golden)).verdict
    assert v.petals == 3 and v.leading_mean == pytest.approx(0.5, abs=1e-10)
    # engine formula: b_2 = a_4 - 2 a_2 a_3 + a_2^3 with b_1 = 0
    cos = TrigPoly.cos()
    assert v.reduced.coeff(4).allclose(cos * cos - SIN ** 3, tol=1e-10)


def test_classify_identity_and_qtwist(golden):
    c = classify(FibredJet.identity(golden, 6))
    assert c.verdict == InfinitelyReducible(6) and c.undetermined
    c = classify(catalog.qtwist(golden), max_order=10)
    assert c.verdict == InfinitelyReducible(10)
    assert c.trace.solved_orders == list(range(2, 11))


def test_classify_rejects_rational():
    F = FibredJet.from_coefficients(RotationNumber.from_cf([0, 2]), {2: SIN}, N=3)
    with pytest.raises(ResonanceError):
        classify(F)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), m=st.integers(2, 4), which=st.sampled_from(["example1", "example2"]))
def test_petal_count_invariance(seed, m, which):
    rng = np.random.default_rng(seed)
    F = getattr(catalog, which)(N=6)
    h = random_trig(rng, 2, scale=0.5)
    G = elementary_conjugate(F, h, m)
    v, w = classify(F).verdict, classify(G).verdict
    assert v.petals == w.petals
    assert complex(w.leading_mean) == pytest.approx(complex(v.leading_mean), abs=1e-9)


def test_root_of_unity_divisibility(golden):
    v = classify(catalog.half_turn(golden)).verdict
    assert v.cycle_length == 2 and v.petals % 2 == 0 and v.divisible
    for a2 in (TrigPoly.constant(0.7), SIN + 0.3):
        F = FibredJet.from_coefficients(golden, {2: a2, 3: TrigPoly.cos()}, N=7, lam=RootOfUnity(1, 2))
        v = classify(F).verdict
        assert isinstance(v, Flower) and v.petals % 2 == 0


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mean_tolerance_monotone(seed):
    rng = np.random.default_rng(seed)
    eps = 10.0 ** rng.uniform(-8, -3)
    F = FibredJet.from_coefficients(catalog.golden(), {2: random_trig(rng, 2, mean_zero=True) + eps,
                                                       3: random_trig(rng, 2)}, N=6)
    petals = []
    for tol in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10):
        v = classify(F, mean_tol=tol).verdict
        petals.append(v.petals if isinstance(v, Flower) else np.inf)
    assert all(b <= a for a, b in zip(petals, petals[1:]))
    assert petals[-1] == 1


def test_example3_alpha_dependence():
    star, star2, a4, a5 = catalog.example3_scan()
    assert star2 is not None
    assert classify(catalog.example3(star, a4, a5)).verdict.petals == 4
    assert classify(catalog.example3(star2, a4, a5)).verdict.petals == 3


def test_obstructed_via_injected_solver(golden):
    def solver(g, alpha, floor=None):
        raise CohomologyObstruction("injected")

    c = classify(catalog.example1(golden), solver=solver)
    assert c.verdict == Obstructed(2, "injected")
    trace, stop = formal_scheme(catalog.qtwist(golden), 5, solver=solver)
    assert stop.order == 2 and trace.records == []


def test_assemble_examples(golden):
    F = catalog.example1(golden)
    c = classify(F)
    H = assemble_conjugacy(c.trace, 2)
    assert H.distance(FibreSeries.identity(H.order)) == 0
    H = assemble_conjugacy(c.trace, 3)
    assert conjugate(F, H).coeff(3).allclose(-(SIN ** 2), tol=1e-12)
    with pytest.raises(ValueError):
        assemble_conjugacy(c.trace, 5)


def test_assemble_qtwist_residual(golden):
    F = catalog.qtwist(golden)
    c = classify(F, max_order=6)
    H = assemble_conjugacy(c.trace, 6)
    radii = np.geomspace(0.01, 0.05, 5)
    res = conjugacy_residual(F, H, np.linspace(0, 1, 6, endpoint=False), radii, dps=30)
    assert loglog_slope(radii, res) == pytest.approx(6, abs=0.5)


def test_formal_matches_stepwise(golden):
    for F in (catalog.example1(golden), catalog.example2(golden), catalog.qtwist(golden)):
        a = classify(F, max_order=8).verdict
        b = classify(F, max_order=8, method="formal").verdict
        assert a.kind == b.kind
        if isinstance(a, Flower):
            assert a.petals == b.petals
            assert complex(a.leading_mean) == pytest.approx(complex(b.leading_mean), abs=1e-10)
    trace, stop = formal_scheme(catalog.example1(golden), 3)
    assert stop.petals == 2 and trace.solved_orders == [2]
