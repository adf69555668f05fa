"""Flower geometry: directions, invariant regions near infinity, petal
boundaries in the fibre, and the fundamental-domain translation model."""

import math
from dataclasses import dataclass

import numpy as np
from matplotlib.path import Path

from .errors import CertificationError, PreconditionError
from .fibredjet import fatou_chart

TAIL_BOUND = 0.5  # C is where the tail majorant equals this


@dataclass(frozen=True)
class LeadingData:
    n: int
    k: complex

    def __post_init__(self):
        if self.k == 0:
            raise PreconditionError("leading mean is zero: no flower at this order")
        if self.n < 1:
            raise ValueError("petal count must be >= 1")

    @property
    def r(self):
        return abs(self.k)

    @property
    def Theta(self):
        return math.atan2(self.k.imag, self.k.real) % (2 * math.pi)


@dataclass(frozen=True)
class PetalGeometry:
    n: int
    k: complex
    repulsive: np.ndarray  # unit vectors e_j
    attracting: np.ndarray  # bisectors, one per sector
    sectors: tuple  # (start angle, end angle) of sector j, counter-clockwise
    exterior: complex | None

    def sector_of(self, z):
        """Index of the sector containing direction ``arg z``."""
        ang = np.angle(z)
        idx = np.empty(np.shape(ang), dtype=int)
        width = 2 * math.pi / self.n
        start = self.sectors[0][0]
        idx[...] = np.floor(((ang - start) % (2 * math.pi)) / width).astype(int) % self.n
        return idx


def repulsive_directions(k, n):
    """``e_j = exp(i (2 pi j - Theta)/n)`` with ``Theta = arg k``; sector ``j``
    runs from ``e_j`` to ``e_{j+1}`` and is bisected by the attracting
    direction ``exp(i (pi - Theta + 2 pi j)/n)``."""
    lead = LeadingData(int(n), complex(k))
    th = lead.Theta
    ang = np.array([(2 * math.pi * j - th) / n for j in range(n)])
    rep = np.exp(1j * ang)
    att = np.exp(1j * (ang + math.pi / n))
    sectors = tuple((float(a), float(a + 2 * math.pi / n)) for a in ang)
    ext = complex(np.exp(-1j * th)) if n == 1 else None
    return PetalGeometry(n, complex(k), rep, att, sectors, ext)


# -- invariant regions ----------------------------------------------------------
@dataclass(frozen=True)
class InvariantRegionParams:
    C: float
    A: float
    L: float
    C2: float
    samples_checked: int


def _in_omega_plus(Z, A):
    return Z.real > A - np.abs(Z.imag)


def _tail_majorant(norms, root, R):
    return sum(b * R ** (-m / root) for m, b in enumerate(norms, start=1))


def tail_radius(G, bound=TAIL_BOUND):
    """Smallest R with ``sum_m ||b_m||_0 R^(-m/n) <= bound``."""
    norms = G.tail_norms()
    if not any(norms):
        return 0.0
    lo, hi = 0.0, 1.0
    while _tail_majorant(norms, G.root, hi) > bound:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid > 0 and _tail_majorant(norms, G.root, mid) > bound:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-12 * hi:
            break
    return hi


def wedge_boundary(A, ys):
    ys = np.asarray(ys, dtype=float)
    return (A - np.abs(ys)) + 1j * ys


def region_params(G, search_budget=20, fibres=16, per_fibre=32):
    """Certify ``C``, ``A``, ``L``, ``C2`` for a normalized jet ``G`` by sampling.

    ``A`` starts at ``max(1, sqrt(2) C)`` so that the wedge avoids ``D(0, C)``,
    and grows by 1.5 per failed attempt.
    """
    if not G.normalized or abs(complex(G.k) - 1) > 1e-9:
        raise PreconditionError("region_params needs drift 0 and k = 1; normalize first")
    C = tail_radius(G)
    A = max(1.0, math.sqrt(2.0) * C)
    thetas = (np.arange(fibres) + 0.5) / fibres
    witness = None
    for _ in range(search_budget):
        ys = np.concatenate([np.linspace(-20 * A, 20 * A, per_fibre - 2), [-1e6 * A, 1e6 * A]])
        T, Y = np.meshgrid(thetas, ys, indexing="ij")
        Z = wedge_boundary(A, Y.ravel())
        img = G(T.ravel(), Z)
        ok = _in_omega_plus(img, A) | np.isclose(img.real - (A - np.abs(img.imag)), 0, atol=1e-12 * A)
        # half speed along the wedge: Re grows by at least 1/2 per step where |Z| > C
        step_ok = (img.real - Z.real) > 0.5
        bad = ~(ok & step_ok)
        if not bad.any():
            return InvariantRegionParams(C=C, A=A, L=A + 1.0, C2=C, samples_checked=int(Z.size))
        i = int(np.argmax(bad))
        witness = {"theta": float(T.ravel()[i]), "Z": [float(Z[i].real), float(Z[i].imag)],
                   "image": [float(img[i].real), float(img[i].imag)], "A": A}
        A *= 1.5
    raise CertificationError("forward invariance of the wedge not certified within budget", witness)


# -- petals in the fibre ---------------------------------------------------------
def _branch_power(W, p, side):
    """``W**p`` with the cut on the negative axis (side +) or the positive axis (side -)."""
    W = np.asarray(W, dtype=complex)
    if side > 0:
        return W ** p
    ang = np.mod(np.angle(W), 2 * math.pi)
    return np.abs(W) ** p * np.exp(1j * p * ang)


def chart_inverse(chart, theta, Z, side=+1):
    cval = np.asarray(chart.c.to_double()(np.asarray(theta, dtype=float)), dtype=complex)
    return chart.rho * _branch_power(np.asarray(Z) - cval, -1.0 / chart.n, side)


def petal_boundary(chart, theta, side, resolution, A, z_max=None):
    """Polyline (closed at 0) bounding the petal of ``chart``'s sector.

    ``side = +1`` pulls back ``x = A - |y|``; ``side = -1`` pulls back
    ``x = -A + |y|`` with the branch cut moved so the repelling petal is
    continuous. ``z_max`` truncates the part of the boundary far from 0.
    """
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    half = max(1, resolution // 2)
    # |y| from the apex out to ~1e8 A, densest near the apex
    ys = np.concatenate([[0.0], A * np.geomspace(1e-3, 1e8, half)])
    y = np.concatenate([-ys[::-1], ys[1:]])
    Z = (side * (A - np.abs(y))) + 1j * y
    z = chart_inverse(chart, theta, Z, side)
    if z_max is not None:
        z = z[np.abs(z) <= z_max]
    return np.concatenate([[0j], z, [0j]])


def in_petal(chart, theta, z, A, side=+1):
    """Analytic membership: ``Z(z)`` lies in the wedge and ``z`` is on ``chart``'s branch."""
    z = np.asarray(z, dtype=complex)
    th = np.broadcast_to(np.asarray(theta, dtype=float), z.shape)
    Z = chart.to_Z(th, z)
    in_wedge = _in_omega_plus(Z, A) if side > 0 else (Z.real < -A + np.abs(Z.imag))
    back = chart_inverse(chart, th, Z, side)
    same_branch = np.abs(back - z) <= 1e-6 * np.maximum(np.abs(z), 1e-300)
    return in_wedge & same_branch


def in_polyline(poly, z):
    """Winding-number membership via matplotlib's path test."""
    path = Path(np.column_stack([poly.real, poly.imag]))
    z = np.asarray(z, dtype=complex)
    pts = np.column_stack([z.ravel().real, z.ravel().imag])
    return path.contains_points(pts).reshape(z.shape)


@dataclass
class Flower:
    """Per-sector Fatou charts of a reduced flower jet."""

    jet: object
    n: int
    kappa: complex
    charts: list
    geometry: PetalGeometry


def flower_charts(F, n):
    charts = [fatou_chart(F, n, j) for j in range(n)]
    kappa = charts[0].kappa
    return Flower(F, n, kappa, charts, repulsive_directions(kappa, n))


def exterior_direction(chart, theta, A, Y=1e8):
    """Bisector of the two boundary branches at 0, measured in ``w = z^n``."""
    Z = wedge_boundary(A, np.array([-Y, Y]))
    w = chart_inverse(chart, np.array([theta, theta]), Z) ** chart.n
    u = w / np.abs(w)
    return float(np.angle(u[0] + u[1]))


def angle_gap(a, b):
    return abs((a - b + math.pi) % (2 * math.pi) - math.pi)


def coverage_radius(C, kappa, n):
    """``(10 C n |kappa|)^(-1/n)``; ``(10 C |k|)^-1`` for one petal."""
    return (10.0 * max(C, 1.0) * n * abs(kappa)) ** (-1.0 / n)


def coverage_fraction(flower, theta, A, rho, grid=64):
    """Fraction of a polar grid on ``0 < |z| < rho`` inside some petal."""
    r = rho * (np.arange(1, grid + 1) / grid)
    t = 2 * math.pi * np.arange(grid) / grid
    R, T = np.meshgrid(r, t)
    z = (R * np.exp(1j * T)).ravel()
    hit = np.zeros(z.shape, dtype=bool)
    for ch in flower.charts:
        hit |= in_petal(ch, theta, z, A, +1) | in_petal(ch, theta, z, A, -1)
    return float(hit.mean())


# -- translation model ----------------------------------------------------------
@dataclass(frozen=True)
class TranslationResidual:
    L: float
    residual: float
    worst: dict
    samples: int


def seam_points(G, theta, L, ys):
    """``G_{theta}`` applied to the line ``Re Z = L``; a graph over ``y`` for large L."""
    Z = L + 1j * np.asarray(ys, dtype=float)
    return G(np.full(Z.shape, theta), Z)


def model_H(G, theta, Z, L, grid=None):
    """Horizontal-linear model ``H_theta`` on the strip between ``Re Z = L`` and
    ``G_{theta - alpha}(Re Z = L)``: the horizontal segment at height y is sent
    affinely onto ``[L, L + 1] + i y``."""
    Z = np.asarray(Z, dtype=complex)
    alpha = float(G.alpha)
    if grid is None:
        # the tail moves heights by at most 1/2 in the certified region
        lo, hi = float(np.min(Z.imag)) - 2.0, float(np.max(Z.imag)) + 2.0
        ys_src = np.linspace(lo, hi, max(201, int(hi - lo) * 4))
    else:
        ys_src = grid
    img = seam_points(G, (theta - alpha) % 1.0, L, ys_src)
    order = np.argsort(img.imag)
    right = np.interp(Z.imag, img.imag[order], img.real[order])
    s = (Z.real - L) / (right - L)
    return L + s + 1j * Z.imag


def translation_model_residual(G, L, samples=256, y_range=None, rng=None):
    """Mismatch of the model at the seam.

    The model is exact on every fundamental-domain image by construction, so
    ``H o G o H^-1 - (W + 1)`` can only be nonzero where the two boundary
    conditions meet: points ``L + i y`` go to ``G(L + i y)``, which the
    horizontal interpolation in the next fibre sends to
    ``L + 1 + i Im G(L + i y)`` instead of ``L + 1 + i y``.
    """
    if not G.normalized:
        raise PreconditionError("translation model needs a normalized jet")
    rng = np.random.default_rng(0) if rng is None else rng
    y_range = 4.0 * L if y_range is None else y_range
    th = rng.random(samples)
    ys = rng.uniform(-y_range, y_range, samples)
    Z = L + 1j * ys
    GZ = G(th, Z)
    alpha = float(G.alpha)
    worst, where = 0.0, None
    for i in range(samples):
        Hn = model_H(G, (th[i] + alpha) % 1.0, GZ[i], L)
        err = abs(Hn - (Z[i] + 1))
        if err > worst:
            worst, where = err, {"theta": float(th[i]), "y": float(ys[i])}
    return TranslationResidual(L=float(L), residual=float(worst), worst=where or {}, samples=samples)
