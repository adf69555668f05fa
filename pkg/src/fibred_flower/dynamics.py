"""Orbit simulation on the circle times the plane, petal verification and
cylindrical-cascade diagnostics.

Base points are always ``frac(theta0 + frac(j alpha))``; they are never
accumulated step by step.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cohomology import birkhoff_diagnostic, solve_exact
from .errors import DynamicsError, IllConditionedWarning, PreconditionError
from .fibredjet import inverse_jet
from .petals import chart_inverse, flower_charts, in_petal, region_params, repulsive_directions

CONVERGE_TOL = 1e-12
ESCAPE_RADIUS = 1.0
VALIDITY_RADIUS = 0.5
CHUNK = 2048


@dataclass
class OrbitTrace:
    theta0: np.ndarray
    z0: np.ndarray
    final_z: np.ndarray
    steps: np.ndarray  # iterations performed per seed
    status: np.ndarray  # "converged" | "escaped" | "budget"
    path: np.ndarray | None = None  # (seeds, records) sampled every ``stride`` steps
    stride: int = 1
    alpha: object = None

    def rows(self, seed=0):
        """``(j, theta_j, re z_j, im z_j)`` rows of the recorded path for one seed."""
        if self.path is None:
            return []
        js = np.arange(self.path.shape[1]) * self.stride
        valid = js <= self.steps[seed]
        th = np.mod(self.theta0[seed] + self.alpha.frac_multiple(js[valid]), 1.0)
        z = self.path[seed, valid]
        return [(int(j), float(t), float(v.real), float(v.imag)) for j, t, v in zip(js[valid], th, z)]


def base_points(alpha, theta0, start, count):
    """``theta0[:, None] + frac(j alpha)`` for ``j = start..start+count-1`` (mod 1)."""
    offs = alpha.frac_multiple(np.arange(start, start + count))
    return np.mod(np.asarray(theta0, dtype=float)[:, None] + offs[None, :], 1.0)


def iterate_orbit(F, theta0, z0, N, escape_radius=ESCAPE_RADIUS, converge_tol=CONVERGE_TOL,
                  validity=VALIDITY_RADIUS, record=False, stride=1):
    """Iterate the jet from each seed until ``N`` steps, ``|z| < converge_tol``
    or ``|z| > escape_radius``. Seeds are arrays of equal length."""
    theta0 = np.atleast_1d(np.asarray(theta0, dtype=float))
    z = np.atleast_1d(np.asarray(z0, dtype=complex)).copy()
    theta0 = np.broadcast_to(theta0, z.shape).copy()
    if np.any(np.abs(z) > validity):
        raise PreconditionError(f"seed outside the validity disk |z| <= {validity}")
    S = z.size
    steps = np.zeros(S, dtype=np.int64)
    status = np.full(S, "budget", dtype=object)
    active = np.ones(S, dtype=bool)
    done_conv = np.abs(z) < converge_tol
    status[done_conv] = "converged"
    active &= ~done_conv
    series = F.series.to_double()
    nrec = N // stride + 1 if record else 0
    path = np.full((S, nrec), np.nan + 0j, dtype=complex) if record else None
    if record:
        path[:, 0] = z
    j = 0
    while j < N and active.any():
        m = min(CHUNK, N - j)
        vals = series.coefficient_values(base_points(F.alpha, theta0, j, m))  # (order+1, S, m)
        for t in range(m):
            zn = vals[series.order, :, t]
            for c in range(series.order - 1, -1, -1):
                zn = zn * z + vals[c, :, t]
            z = np.where(active, zn, z)
            steps += active
            mag = np.abs(z)
            event = active & ((mag < converge_tol) | (mag > escape_radius) | np.isnan(mag))
            if event.any():
                nan = event & np.isnan(mag)
                if nan.any():
                    bad = int(np.flatnonzero(nan)[0])
                    raise DynamicsError(f"NaN at step {j + t + 1} for seed {bad} (theta0 = {theta0[bad]})")
                status[event & (mag < converge_tol)] = "converged"
                status[event & (mag > escape_radius)] = "escaped"
                active &= ~event
            if record and (j + t + 1) % stride == 0:
                path[:, (j + t + 1) // stride] = np.where(steps == j + t + 1, z, np.nan)
            if not active.any():
                break
        j += m
    return OrbitTrace(theta0, np.atleast_1d(np.asarray(z0, dtype=complex)), z, steps, status, path, stride, F.alpha)


# -- petal verification ---------------------------------------------------------------
@dataclass
class SectorStats:
    sector: int
    direction: complex
    seeds: int
    converged: float
    escaped: float
    median_final: float
    parabolic_rate: float  # fraction with |z_N| within a factor 3 of (n |kappa| N)^(-1/n)
    one_step_membership: float
    backward_membership: float

    def to_dict(self):
        d = dict(self.__dict__)
        d["direction"] = [float(self.direction.real), float(self.direction.imag)]
        return d


@dataclass
class PetalReport:
    n: int
    kappa: complex
    sectors: list = field(default_factory=list)
    region: object = None
    converge_tol: float = CONVERGE_TOL
    budget: int = 0
    backward_converged: float = float("nan")

    @property
    def min_converged(self):
        return min((s.converged for s in self.sectors), default=float("nan"))

    @property
    def min_membership(self):
        return min((s.one_step_membership for s in self.sectors), default=float("nan"))

    def to_dict(self):
        return {
            "petals": self.n,
            "leading_mean": [float(self.kappa.real), float(self.kappa.imag)],
            "converge_tol": self.converge_tol,
            "budget": self.budget,
            "backward_converged": self.backward_converged,
            "region": None if self.region is None else dict(self.region.__dict__),
            "sectors": [s.to_dict() for s in self.sectors],
        }


def boundary_adjacent(chart, A, thetas, r_lo=1e-4, r_hi=0.05, inset=0.5, count=64):
    """Points just inside the wedge boundary whose fibre image has ``r_lo <= |z| <= r_hi``."""
    ys = np.geomspace(1.0, 1e10, 4 * count)
    ys = np.concatenate([-ys, ys])
    th = np.resize(np.asarray(thetas, dtype=float), ys.shape)
    Z = (A - np.abs(ys) + inset) + 1j * ys
    z = chart_inverse(chart, th, Z)
    keep = (np.abs(z) >= r_lo) & (np.abs(z) <= r_hi)
    return th[keep][:count * 2], z[keep][:count * 2]


def membership_fraction(jet, charts, A, thetas, **kw):
    """Fraction of boundary-adjacent petal points that one step keeps in the petal."""
    hits, total = 0, 0
    for ch in charts:
        th, z = boundary_adjacent(ch, A, thetas, **kw)
        if z.size == 0:
            continue
        th1, z1 = jet(th, z)
        hits += int(np.count_nonzero(in_petal(ch, th1, z1, A)))
        total += z.size
    return hits / total if total else float("nan")


def verify_petal(F, reduced, n, seeds=200, radius=0.02, budget=100_000, converge_tol=CONVERGE_TOL,
                 escape_radius=ESCAPE_RADIUS, rng=None, backward=True):
    """Seed each attracting sector of ``F`` near 0 and iterate; check one-step
    petal invariance on the reduced jet (forward, and for the inverse jet).

    ``reduced`` is the jet whose leading term ``A z^(n+1)`` defines the charts.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    flower = flower_charts(reduced, n)
    geom = flower.geometry
    A = max(region_params(ch.G).A for ch in flower.charts)
    report = PetalReport(n, flower.kappa, region=region_params(flower.charts[0].G),
                         converge_tol=converge_tol, budget=budget)
    fibres = (np.arange(16) + 0.5) / 16
    mem_fwd = membership_fraction(reduced, flower.charts, A, fibres)
    mem_bwd = float("nan")
    if backward:
        inv = inverse_jet(reduced)
        inv_flower = flower_charts(inv, n)
        A_inv = max(region_params(ch.G).A for ch in inv_flower.charts)
        mem_bwd = membership_fraction(inv, inv_flower.charts, A_inv, fibres)
    half_width = math.pi / (2 * n)
    all_th, all_z, owner = [], [], []
    for j, d in enumerate(geom.attracting):
        ang = np.angle(d) + rng.uniform(-0.5, 0.5, seeds) * half_width
        all_z.append(radius * np.exp(1j * ang))
        all_th.append(rng.random(seeds))
        owner.append(np.full(seeds, j))
    tr = iterate_orbit(F, np.concatenate(all_th), np.concatenate(all_z), budget,
                       escape_radius=escape_radius, converge_tol=converge_tol)
    owner = np.concatenate(owner)
    predicted = (n * abs(flower.kappa) * budget) ** (-1.0 / n)
    for j, d in enumerate(geom.attracting):
        sel = owner == j
        fin = np.abs(tr.final_z[sel])
        conv = tr.status[sel] == "converged"
        rate = (fin <= 3 * predicted) & (tr.status[sel] != "escaped")
        report.sectors.append(SectorStats(
            sector=j, direction=complex(d), seeds=int(sel.sum()),
            converged=float(conv.mean()), escaped=float((tr.status[sel] == "escaped").mean()),
            median_final=float(np.median(fin)), parabolic_rate=float(rate.mean()),
            one_step_membership=mem_fwd, backward_membership=mem_bwd))
    if backward:
        report.backward_converged = _backward_convergence(F, n, flower.kappa, seeds, radius, budget, rng)
    return report


def _backward_convergence(F, n, kappa, seeds, radius, budget, rng):
    """Repelling sectors attract under the truncated inverse jet."""
    inv = inverse_jet(F)
    dirs = repulsive_directions(-kappa, n).attracting
    th = rng.random(seeds * n)
    z = np.concatenate([radius * d * np.exp(1j * rng.uniform(-0.25, 0.25, seeds) * math.pi / n) for d in dirs])
    steps = min(budget, 10_000)
    tr = iterate_orbit(inv, th, z, steps, escape_radius=ESCAPE_RADIUS, converge_tol=CONVERGE_TOL)
    predicted = (n * abs(kappa) * steps) ** (-1.0 / n)
    ok = (np.abs(tr.final_z) <= 3 * predicted) & (tr.status != "escaped")
    return float(ok.mean())


# -- escape speed -------------------------------------------------------------
@dataclass
class EscapeReport:
    passed: bool
    worst_margin: float
    witness: dict | None
    samples: int
    n_max: int

    def to_dict(self):
        return dict(self.__dict__)


def escape_check(G, C2, samples=512, n_max=100, rng=None, width=None, Z0=None, theta0=None):
    """``Re G^n(Z0) > Re Z0 + n/2`` for ``n <= n_max`` on sampled ``Re Z0 > C2``."""
    rng = np.random.default_rng(0) if rng is None else rng
    if Z0 is None:
        w = 10.0 * max(1.0, C2) if width is None else width
        Z0 = (C2 + w * (1e-3 + rng.random(samples))) + 1j * rng.uniform(-w, w, samples)
    Z0 = np.atleast_1d(np.asarray(Z0, dtype=complex))
    th0 = rng.random(Z0.size) if theta0 is None else np.broadcast_to(np.asarray(theta0, float), Z0.shape)
    th = base_points(G.alpha, th0, 0, n_max)
    Z = Z0.copy()
    worst, witness = math.inf, None
    for n in range(1, n_max + 1):
        Z = G(th[:, n - 1], Z)
        margin = Z.real - (Z0.real + n / 2)
        i = int(np.argmin(margin))
        if margin[i] < worst:
            worst = float(margin[i])
            if worst <= 0:
                witness = {"theta0": float(th0[i]), "Z0": [float(Z0[i].real), float(Z0[i].imag)], "n": n,
                           "Re_Gn": float(Z[i].real)}
    return EscapeReport(passed=bool(worst > 0), worst_margin=worst, witness=witness, samples=int(Z0.size),
                        n_max=n_max)


# -- cylindrical cascade ------------------------------------------------------------
WARN_DIVISOR = 1e-6


@dataclass
class CascadeReport:
    Z: np.ndarray
    thetas: np.ndarray
    W: np.ndarray
    sup_displacement: float
    bound: float
    w_spread: float
    birkhoff_slope: float
    verdict: str
    worst_divisor: tuple
    recurrence_rate: float
    first_return: int | None
    projection: complex

    def to_dict(self):
        return {
            "sup_displacement": self.sup_displacement,
            "telescoping_bound": self.bound,
            "w_spread": self.w_spread,
            "birkhoff_slope": self.birkhoff_slope,
            "verdict": self.verdict,
            "worst_divisor": {"n": int(self.worst_divisor[0]), "abs": float(self.worst_divisor[1])},
            "recurrence_rate": self.recurrence_rate,
            "first_return": self.first_return,
            "projection": [self.projection.real, self.projection.imag],
            "steps": int(self.Z.size - 1),
        }


def cascade_simulate(a, alpha, theta0, Z0, N, projection=1 + 0j, mean_tol=1e-10, warn_divisor=WARN_DIVISOR,
                     ball=None):
    """Iterate ``(theta, Z) -> (theta + alpha, Z + a(theta))``.

    With ``c`` from :func:`solve_exact`, ``W_j = Z_j + c(theta_j)`` is invariant,
    so ``sup |Z_j - Z_0| <= 2 ||c||_0``. Recurrence statistics use the real
    projection ``Re(conj(p) (Z_j - Z_0))`` onto the unit direction ``p``.
    """
    if abs(complex(a.mean())) > mean_tol * max(1.0, a.strip_norm(0.0)):
        raise PreconditionError("cascade needs mean(a) = 0")
    a = a - a.mean()
    th = np.mod(theta0 + alpha.frac_multiple(np.arange(N + 1)), 1.0)
    steps = np.asarray(a.to_double()(th[:-1]), dtype=complex)
    Z = np.concatenate([[complex(Z0)], complex(Z0) + np.cumsum(steps)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IllConditionedWarning)
        sol = solve_exact(a, alpha)
    W = Z + np.asarray(sol.c.to_double()(th), dtype=complex)
    sup = float(np.max(np.abs(Z - Z[0])))
    bound = 2.0 * sol.c.strip_norm(0.0)
    if sol.worst_divisor[1] < warn_divisor:
        warnings.warn(f"cascade divisor |d_{sol.worst_divisor[0]}| = {sol.worst_divisor[1]:.3e}: "
                      "orbit bound inflated by the small divisor", IllConditionedWarning, stacklevel=2)
        verdict = "integrable (ill-conditioned)"
    else:
        verdict = "integrable"
    p = complex(projection) / abs(complex(projection))
    proj = (np.conj(p) * (Z - Z[0])).real
    r = (0.05 * max(sup, 1e-300)) if ball is None else ball
    inside = np.abs(proj[1:]) < r
    first = int(np.argmax(inside)) + 1 if inside.any() else None
    slope = birkhoff_diagnostic(a, alpha, theta0, N).slope if N >= 16 else 0.0
    return CascadeReport(Z=Z, thetas=th, W=W, sup_displacement=sup, bound=bound,
                         w_spread=float(np.max(np.abs(W - W[0]))), birkhoff_slope=slope, verdict=verdict,
                         worst_divisor=sol.worst_divisor, recurrence_rate=float(inside.mean()),
                         first_return=first, projection=p)


# -- root-of-unity multipliers ----------------------------------------------------
@dataclass
class TubePermutation:
    counts: np.ndarray  # counts[j, i]: seeds of sector j whose image under F lies in sector i
    warmup: int

    @property
    def mapping(self):
        return [int(np.argmax(row)) for row in self.counts]

    @property
    def purity(self):
        """Smallest share of a sector's seeds that land in its majority target."""
        tot = self.counts.sum(axis=1)
        return float(np.min(self.counts.max(axis=1) / np.maximum(tot, 1)))

    def to_dict(self):
        return {"mapping": self.mapping, "purity": self.purity, "warmup": self.warmup,
                "counts": self.counts.tolist()}


def tube_permutation(F, kappa, n, seeds=100, radius=0.01, warmup=2000, rng=None):
    """How one application of ``F`` permutes the attracting tubes of ``F^q``.

    ``kappa`` and ``n`` are the leading mean and petal count of the reduced
    iterate. Seeds start on the attracting directions, are pushed ``warmup``
    steps of ``F^q`` into their tube, then mapped once by ``F``; the sector of
    the image is read off the angular sectors of ``F^q``.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    q = F.lam.q
    geom = repulsive_directions(kappa, n)
    counts = np.zeros((n, n), dtype=int)
    width = math.pi / (2 * n)
    for j, d in enumerate(geom.attracting):
        z = radius * np.exp(1j * (np.angle(d) + rng.uniform(-0.5, 0.5, seeds) * width))
        th = rng.random(seeds)
        tr = iterate_orbit(F, th, z, warmup * q, converge_tol=0.0)
        alive = tr.status != "escaped"
        th_end = np.mod(th + F.alpha.frac_multiple(tr.steps), 1.0)
        _, z1 = F(th_end[alive], tr.final_z[alive])
        src = geom.sector_of(tr.final_z[alive])
        dst = geom.sector_of(z1)
        for s, t in zip(src, dst):
            counts[s, t] += 1
    return TubePermutation(counts, warmup)
