"""Order-by-order reduction of a parabolic fibred jet.

At order ``k`` the leading coefficient ``A`` either has a nonzero mean
(flower with ``k - 1`` petals) or is removed by a polynomial change
``z + h z^k`` with ``h(theta + alpha) - h(theta) = A - mean(A)``. Order 2 is
removed by the Fatou-coordinate translation instead, which is the change
``z / (1 + c z)`` and keeps the next coefficient in closed form.

Trig-polynomial equations always solve, so the obstructed branch can only be
reached through an injected ``solver`` that raises
:class:`~.errors.CohomologyObstruction`.
"""

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .cohomology import DIVISOR_FLOOR, solve_exact
from .errors import CohomologyObstruction, PreconditionError, TruncationExhausted
from .fibredjet import FibredJet, conjugate, iterate, translation_change
from .series import FibreSeries
from .trigpoly import TrigPoly

MEAN_TOL = 1e-10


# -- step outcomes -----------------------------------------------------------
@dataclass(frozen=True)
class FlowerFound:
    petals: int
    mean: complex


@dataclass(frozen=True)
class Reduced:
    jet: FibredJet
    h: TrigPoly
    change: FibreSeries
    record: "StepRecord"


@dataclass(frozen=True)
class ObstructedStep:
    order: int
    reason: str


@dataclass(frozen=True)
class StepRecord:
    k: int
    rhs_mean: complex
    worst_divisor: tuple
    h: TrigPoly
    h_norm: float  # strip_norm(h, 0)
    route: str
    ill_conditioned: bool = False

    def to_dict(self):
        return {
            "order": self.k,
            "rhs_mean": [float(complex(self.rhs_mean).real), float(complex(self.rhs_mean).imag)],
            "worst_divisor": {"n": int(self.worst_divisor[0]), "abs": _finite(self.worst_divisor[1])},
            "h_strip_norm_0": self.h_norm,
            "route": self.route,
            "ill_conditioned": self.ill_conditioned,
        }


def _finite(x):
    return float(x) if math.isfinite(x) else None


@dataclass
class ReductionTrace:
    method: str
    N: int
    records: list = field(default_factory=list)
    changes: list = field(default_factory=list)  # stepwise only, one per record

    def h(self, k):
        for r in self.records:
            if r.k == k:
                return r.h
        raise KeyError(k)

    @property
    def solved_orders(self):
        return [r.k for r in self.records]

    def to_dict(self):
        return {"method": self.method, "truncation": self.N, "steps": [r.to_dict() for r in self.records]}


# -- verdicts -----------------------------------------------------------------
@dataclass(frozen=True)
class Flower:
    petals: int
    leading_order: int
    leading_mean: complex
    reduced: FibredJet | None = None
    cycle_length: int = 1  # order q of the multiplier

    kind = "flower"

    @property
    def divisible(self):
        return self.petals % self.cycle_length == 0


@dataclass(frozen=True)
class Obstructed:
    order: int
    reason: str

    kind = "obstructed"


@dataclass(frozen=True)
class InfinitelyReducible:
    checked_to: int

    kind = "infinitely_reducible"


@dataclass
class Classification:
    verdict: object
    trace: ReductionTrace
    mean_tol: float
    max_order: int

    @property
    def undetermined(self):
        """All checked means vanished: nothing is decided beyond ``checked_to``."""
        return isinstance(self.verdict, InfinitelyReducible)

    def to_dict(self):
        v = self.verdict
        out = {"kind": v.kind}
        if isinstance(v, Flower):
            m = complex(v.leading_mean)
            out.update(petals=v.petals, leading_order=v.leading_order, leading_mean=[m.real, m.imag],
                       cycle_length=v.cycle_length, petals_divisible_by_cycle=v.divisible)
            if v.reduced is not None:
                out["reduced_coefficients"] = v.reduced.coefficient_records()
        elif isinstance(v, Obstructed):
            out.update(order=v.order, reason=v.reason)
        else:
            out.update(checked_to=v.checked_to)
        return {"verdict": out, "mean_tol": self.mean_tol, "max_order": self.max_order,
                "trace": self.trace.to_dict()}


# -- the step -----------------------------------------------------------------
def _mean_vanishes(A, tol):
    return abs(complex(A.mean())) <= tol * max(1.0, A.strip_norm(0.0))


def reduction_step(F, k, mean_tol=MEAN_TOL, solver=solve_exact, route=None, floor=DIVISOR_FLOOR):
    """One pass of the algorithm at order ``k`` (see module docstring).

    ``route`` is ``"translation"`` (default at k = 2) or ``"elementary"``.
    """
    if not F.lam.is_one:
        raise PreconditionError("reduction needs multiplier 1; classify iterates first")
    if k > F.N:
        raise TruncationExhausted(f"order {k} is beyond the truncation N = {F.N}")
    lead = F.leading_order()
    if lead is not None and lead < k:
        raise PreconditionError(f"coefficient of order {lead} < {k} has not been removed")
    A = F.coeff(k)
    if not _mean_vanishes(A, mean_tol):
        return FlowerFound(petals=k - 1, mean=complex(A.mean()))
    route = route or ("translation" if k == 2 else "elementary")
    try:
        if route == "translation":
            if k != 2:
                raise ValueError("the translation route only removes order 2")
            sol = solver(A, F.alpha, floor=floor)
            h = -sol.c
            change = translation_change(sol.c, F.N)
        else:
            sol = solver(-A, F.alpha, floor=floor)
            h = sol.c
            change = FibreSeries.identity(F.N) + FibreSeries.monomial(k, h, F.N)
    except CohomologyObstruction as exc:
        return ObstructedStep(order=k, reason=str(exc))
    G = conjugate(F, change)
    # the removed coefficient equals mean(A), zero under the hypothesis
    a = list(G.a)
    a[k - 2] = TrigPoly.zero()
    G = G.with_coefficients(a)
    rec = StepRecord(k, complex(A.mean()), sol.worst_divisor, h, h.strip_norm(0.0), route, sol.ill_conditioned)
    return Reduced(jet=G, h=h, change=change, record=rec)


# -- formal scheme ---------------------------------------------------------------
def formal_scheme(F, K, mean_tol=MEAN_TOL, solver=solve_exact, floor=DIVISOR_FLOOR):
    """Solve ``h_k(theta + alpha) - h_k(theta) = RHS_k - mean(RHS_k)`` for
    ``k = 2..K`` where ``RHS_k = [F o (z + sum_{j<k} h_j z^j)]_k``.

    Stops at the first order with a nonzero mean. Returns
    ``(trace, stop)`` with ``stop`` a FlowerFound, ObstructedStep or None.
    """
    if not F.lam.is_one:
        raise PreconditionError("formal scheme needs multiplier 1")
    K = min(K, F.N)
    trace = ReductionTrace("formal", F.N)
    Fs = F.series.truncate(K)
    H = FibreSeries.identity(K)
    for k in range(2, K + 1):
        rhs = Fs.compose(H)[k]
        if not _mean_vanishes(rhs, mean_tol):
            return trace, FlowerFound(petals=k - 1, mean=complex(rhs.mean()))
        try:
            sol = solver(-rhs, F.alpha, floor=floor)
        except CohomologyObstruction as exc:
            return trace, ObstructedStep(order=k, reason=str(exc))
        H = H + FibreSeries.monomial(k, sol.c, K)
        trace.records.append(StepRecord(k, complex(rhs.mean()), sol.worst_divisor, sol.c,
                                        sol.c.strip_norm(0.0), "formal", sol.ill_conditioned))
    return trace, None


# -- driver -------------------------------------------------------------------
def classify(F, max_order=None, mean_tol=MEAN_TOL, method="stepwise", solver=solve_exact,
             floor=DIVISOR_FLOOR):
    """Run the reduction until a flower, an obstruction or the order limit.

    For a multiplier of order ``q > 1`` the iterate ``F^q`` is classified and
    its petal count is checked for divisibility by ``q``.
    """
    max_order = F.N if max_order is None else int(max_order)
    if max_order < 2:
        raise ValueError("max_order must be >= 2")
    F.alpha.require_irrational()
    q = F.lam.q
    G = iterate(F, q) if q > 1 else F
    limit = min(max_order, G.N)
    if method == "formal":
        trace, stop = formal_scheme(G, limit, mean_tol, solver, floor)
        return _finish(trace, stop, None, q, mean_tol, max_order, limit)
    if method != "stepwise":
        raise ValueError(f"unknown method {method!r}")
    trace = ReductionTrace("stepwise", G.N)
    for k in range(2, limit + 1):
        out = reduction_step(G, k, mean_tol, solver, floor=floor)
        if isinstance(out, Reduced):
            trace.records.append(out.record)
            trace.changes.append(out.change)
            G = out.jet
            continue
        return _finish(trace, out, G, q, mean_tol, max_order, limit)
    return _finish(trace, None, G, q, mean_tol, max_order, limit)


def _finish(trace, stop, jet, q, mean_tol, max_order, limit):
    if isinstance(stop, FlowerFound):
        verdict = Flower(stop.petals, stop.petals + 1, stop.mean, jet, q)
    elif isinstance(stop, ObstructedStep):
        verdict = Obstructed(stop.order, stop.reason)
    else:
        verdict = InfinitelyReducible(limit)
    return Classification(verdict, trace, mean_tol, max_order)


def assemble_conjugacy(trace, up_to):
    """The change ``H`` with ``H^-1 o F o H = F_{up_to}``.

    Stepwise traces compose their per-step changes; formal traces give
    ``z + sum_{j < up_to} h_j z^j``.
    """
    need = list(range(2, up_to))
    missing = [j for j in need if j not in trace.solved_orders]
    if missing:
        raise ValueError(f"trace has no solution for orders {missing}")
    N = trace.N
    if trace.method == "formal":
        order = max(N, up_to - 1)
        H = FibreSeries.identity(order)
        for j in need:
            H = H + FibreSeries.monomial(j, trace.h(j), order)
        return H
    H = FibreSeries.identity(N)
    for rec, change in zip(trace.records, trace.changes):
        if rec.k < up_to:
            H = H.compose(change)
    return H


# -- numeric conjugacy residual ---------------------------------------------------
def _newton_inverse(H, theta, y, tol):
    w = y
    dH = H.derivative()
    for _ in range(60):
        step = (H.eval_mp(theta, w) - y) / dH.eval_mp(theta, w)
        w -= step
        if abs(step) <= tol * abs(w):
            break
    return w


def conjugacy_residual(F, H, thetas, zs, dps=60):
    """``max |H^-1_{theta+alpha}(f_theta(H_theta(z))) - z|`` in mpmath.

    ``F`` is evaluated as the polynomial its jet defines. Returns an array of
    shape (len(zs),) with the max over ``thetas`` for each radius in ``zs``.
    """
    out = []
    with mpmath.workdps(dps):
        Fs = F.series
        alpha = F.alpha.value
        tol = mpmath.mpf(10) ** (-dps + 5)
        for z in zs:
            worst = mpmath.mpf(0)
            for th in thetas:
                th = mpmath.mpf(th)
                zz = mpmath.mpc(z)
                y = Fs.eval_mp(th, H.eval_mp(th, zz))
                w = _newton_inverse(H, th + alpha, y, tol)
                worst = max(worst, abs(w - zz))
            out.append(float(worst))
    return np.array(out)


def loglog_slope(radii, residuals):
    return float(np.polyfit(np.log(radii), np.log(residuals), 1)[0])
