"""Fibred jets ``(theta, z) -> (theta + alpha, lam z + sum_j a_j(theta) z^j)``
and the coordinate changes acting on them.

Every conjugacy goes through the generic series engine in :mod:`.series`;
no closed-form coefficient tables are used here.

Conventions
-----------
* A fibre change ``H(theta, z) = (theta, h_theta(z))`` conjugates as
  ``H^-1 o F o H = (theta + alpha, h^-1_{theta+alpha}(f_theta(h_theta(z))))``.
* At infinity ``Z = -1/z``. An :class:`InfinityJet` with ``root = n`` has tail
  ``sum_m b_m(theta) Z**(-m/n)`` on the principal branch; ``root = 1`` is
  the ordinary Laurent form ``Z + k + b_1/Z + ...``.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cohomology import solve_exact
from .errors import PreconditionError
from .rotation import RootOfUnity
from .series import FibreSeries, binom_coeff
from .trigpoly import TrigPoly

# coefficients with strip norm below DUST * (largest coefficient) count as zero
DUST = 1e-13


@dataclass(frozen=True)
class FibredJet:
    alpha: object
    lam: RootOfUnity
    N: int
    a: tuple  # a_2 .. a_N

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("truncation order N must be >= 2")
        a = tuple(TrigPoly.constant(x) if not isinstance(x, TrigPoly) else x for x in self.a)
        if len(a) > self.N - 1:
            raise ValueError(f"{len(a)} coefficients exceed truncation order {self.N}")
        a = a + (TrigPoly.zero(),) * (self.N - 1 - len(a))
        object.__setattr__(self, "a", a)

    # -- construction ---------------------------------------------------
    @classmethod
    def from_coefficients(cls, alpha, coeffs, N=None, lam=None):
        """``coeffs`` maps order ``j >= 2`` to a TrigPoly (or scalar)."""
        coeffs = {int(j): v for j, v in dict(coeffs).items()}
        if any(j < 2 for j in coeffs):
            raise ValueError("orders must be >= 2")
        top = max(coeffs, default=2)
        N = top if N is None else int(N)
        if top > N:
            raise ValueError(f"order {top} exceeds truncation {N}")
        a = [coeffs.get(j, TrigPoly.zero()) for j in range(2, N + 1)]
        return cls(alpha, lam or RootOfUnity(), N, tuple(a))

    @classmethod
    def identity(cls, alpha, N):
        return cls(alpha, RootOfUnity(), N, ())

    @classmethod
    def from_series(cls, alpha, lam, series):
        s1 = series[1]
        if s1.degree != 0 or abs(complex(s1.mean()) - lam.value) > 1e-9:
            raise PreconditionError("linear coefficient is not the constant multiplier")
        if not series[0].is_zero():
            raise PreconditionError("zero section is not invariant (nonzero z^0 term)")
        return cls(alpha, lam, series.order, tuple(series.c[2:]))

    # -- structure ------------------------------------------------------
    @property
    def series(self):
        lam = TrigPoly.constant(self.lam.mp_value if self.extended else self.lam.value)
        return FibreSeries([TrigPoly.zero(), lam] + list(self.a))

    @property
    def extended(self):
        return any(p.extended for p in self.a)

    def coeff(self, j):
        if j == 1:
            return TrigPoly.constant(self.lam.value)
        if 2 <= j <= self.N:
            return self.a[j - 2]
        return TrigPoly.zero()

    def scale_of_coefficients(self):
        return max((p.strip_norm(0.0) for p in self.a), default=0.0)

    def leading_order(self, tol=DUST):
        """First ``j >= 2`` whose coefficient is not dust, else None."""
        ref = max(1.0, self.scale_of_coefficients())
        for j, p in enumerate(self.a, start=2):
            if p.strip_norm(0.0) > tol * ref:
                return j
        return None

    def with_coefficients(self, a):
        return replace(self, a=tuple(a))

    def truncate(self, N):
        return FibredJet(self.alpha, self.lam, N, self.a[:N - 1])

    def to_extended(self):
        return self.with_coefficients([p.to_extended() for p in self.a])

    def to_double(self):
        return self.with_coefficients([p.to_double() for p in self.a])

    # -- evaluation -----------------------------------------------------
    def fibre(self, theta, z, values=None):
        """``f_theta(z)`` for arrays of matching shape."""
        return self.series(theta, z, values)

    def __call__(self, theta, z):
        th = np.asarray(theta, dtype=float)
        return np.mod(th + float(self.alpha), 1.0), self.fibre(th, z)

    def coefficient_records(self):
        return [{"order": j, "modes": p.to_records()} for j, p in enumerate(self.a, start=2) if not p.is_zero()]


# -- map algebra --------------------------------------------------------------
def compose_maps(F, G):
    """``F o G`` where both are fibred jets over their own rotations."""
    series = F.series.rotate(G.alpha).compose(G.series)
    return FibredJet.from_series(F.alpha + G.alpha, F.lam * G.lam, series.truncate(min(F.N, G.N)))


def conjugate(F, h):
    """``H^-1 o F o H`` for the fibre change ``z -> h(theta, z)`` (a FibreSeries)."""
    h = h.truncate(F.N)
    inner = F.series.compose(h)
    hinv = h.reversion().rotate(F.alpha)
    return FibredJet.from_series(F.alpha, F.lam, hinv.compose(inner))


def elementary_conjugate(F, h, m):
    """Conjugate by ``H(theta, z) = (theta, z + h(theta) z^m)``."""
    if not 2 <= m <= F.N:
        raise ValueError(f"order m = {m} outside [2, {F.N}]")
    if h.is_zero():
        return F
    H = FibreSeries.identity(F.N) + FibreSeries.monomial(m, h, F.N)
    return conjugate(F, H)


def translation_change(c, N):
    """The z-series ``z / (1 + c z)``: the chart image of ``T_c`` at infinity."""
    return FibreSeries([TrigPoly.zero()] + [(-c) ** (j - 1) for j in range(1, N + 1)])


def translation_conjugate(F, c):
    """Conjugate ``F`` by ``T_c(theta, Z) = (theta, Z + c(theta))`` in Fatou
    coordinates, carried out directly on the z-jet."""
    return conjugate(F, translation_change(c, F.N))


def iterate(F, n):
    """``F^n`` with multiplier ``lam^n`` and base rotation ``n alpha``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out = F
    for j in range(1, n):
        series = F.series.rotate(F.alpha.scaled(j)).compose(out.series)
        out = FibredJet.from_series(F.alpha.scaled(j + 1), F.lam ** (j + 1), series)
    return out


def inverse_jet(F):
    """Truncated ``F^-1(theta, w) = (theta - alpha, f^-1_{theta-alpha}(w))``."""
    neg = -F.alpha
    series = F.series.reversion().rotate(neg)
    lam = RootOfUnity(-F.lam.p, F.lam.q)
    return FibredJet.from_series(neg, lam, series)


# -- Fatou coordinates ------------------------------------------------------
@dataclass(frozen=True)
class InfinityJet:
    """``Z -> Z + k + drift(theta) + sum_m b_m(theta) Z**(-m/root)``."""

    alpha: object
    k: complex
    drift: TrigPoly
    b: tuple
    root: int = 1
    tag: tuple = field(default=(), compare=False)

    @property
    def tail_length(self):
        return len(self.b)

    @property
    def normalized(self):
        return self.drift.strip_norm(0.0) <= DUST * max(1.0, abs(complex(self.k)))

    def tag_with(self, *entries):
        return replace(self, tag=self.tag + tuple(entries))

    def conjugate_translation(self, c):
        """``T_c o G o T_c^-1`` with ``T_c(theta, Z) = (theta, Z + c(theta))``.

        ``(Z - c)**(-m/n)`` is expanded as ``Z**(-m/n) sum_j C(-m/n, j) (-c/Z)**j``,
        so index ``m`` feeds indices ``m + j n`` up to the tail length.
        """
        n, T = self.root, self.tail_length
        drift = self.drift + c.rotate(self.alpha) - c
        k = self.k + drift.mean()
        drift = drift - drift.mean()
        newb = [TrigPoly.zero() for _ in range(T)]
        cpow = [TrigPoly.constant(1)]
        for m in range(1, T + 1):
            bm = self.b[m - 1]
            if bm.is_zero():
                continue
            j = 0
            while m + j * n <= T:
                while len(cpow) <= j:
                    cpow.append(cpow[-1] * (-c))
                newb[m + j * n - 1] = newb[m + j * n - 1] + bm * cpow[j] * binom_coeff(-m / n, j)
                j += 1
        return InfinityJet(self.alpha, k, drift, tuple(newb), n, self.tag + (("translation", c.to_records()),))

    def conjugate_homothety(self, kappa):
        """``A o G o A^-1`` with ``A(Z) = Z / kappa``: constant ``k -> k/kappa``,
        drift ``-> drift/kappa`` and ``b_m -> b_m / kappa**(m+1)``."""
        if kappa == 0:
            raise ValueError("homothety scale must be nonzero")
        if self.root != 1:
            raise PreconditionError("homothety is only defined for integral Laurent tails")
        b = tuple(bm * (1 / kappa ** (m + 1)) for m, bm in enumerate(self.b, start=1))
        return InfinityJet(self.alpha, self.k / kappa, self.drift * (1 / kappa), b, 1,
                           self.tag + (("homothety", complex(kappa)),))

    def tail(self, theta, Z):
        th = np.asarray(theta, dtype=float)
        Z = np.asarray(Z, dtype=complex)
        acc = np.zeros(np.broadcast_shapes(th.shape, Z.shape), dtype=complex)
        for m, bm in enumerate(self.b, start=1):
            if not bm.is_zero():
                acc = acc + np.asarray(bm.to_double()(th), dtype=complex) * Z ** (-m / self.root)
        return acc

    def __call__(self, theta, Z):
        """Fibre map ``G_theta(Z)`` (double precision, principal branch)."""
        th = np.asarray(theta, dtype=float)
        drift = np.asarray(self.drift.to_double()(th), dtype=complex)
        return np.asarray(Z, dtype=complex) + complex(self.k) + drift + self.tail(th, Z)

    def tail_norms(self):
        return [bm.strip_norm(0.0) for bm in self.b]


def to_infinity(F):
    """Laurent jet of ``I o F o I^-1`` with ``I(theta, z) = (theta, -1/z)``.

    With ``f = z u(z)``, ``G(Z) = Z v(1/Z)`` where ``v(w) = 1/u(-w)``; this gives
    ``Z + a_2 + (a_2^2 - a_3)/Z + ...`` with ``N - 2`` tail terms.
    """
    if not F.lam.is_one:
        raise PreconditionError("to_infinity needs multiplier 1; iterate the map first")
    u = F.series.shift(-1).truncate(F.N - 1)
    u_neg = FibreSeries([p * ((-1) ** j) for j, p in enumerate(u.c)])
    v = u_neg.reciprocal()
    v1 = v[1]
    k = v1.mean()
    return InfinityJet(F.alpha, k, v1 - k, tuple(v[j + 1] for j in range(1, F.N - 1)), 1,
                       (("from", "to_infinity"),))


def from_infinity(G):
    """Inverse of :func:`to_infinity` for integral tails."""
    if G.root != 1:
        raise PreconditionError("only integral Laurent tails map back to a z-jet")
    N = G.tail_length + 2
    e = [TrigPoly.constant(1), G.drift + G.k] + list(G.b)
    denom = FibreSeries([p * ((-1) ** i) for i, p in enumerate(e)])
    series = denom.reciprocal().truncate(N).shift(1)
    return FibredJet.from_series(G.alpha, RootOfUnity(), series)


@dataclass(frozen=True)
class FatouChart:
    """Normalized Fatou coordinate on one attracting sector of an n-petal flower.

    ``Z(theta, z) = c(theta) - 1/(n kappa z^n)``, inverse
    ``z = rho (Z - c(theta))**(-1/n)``; in ``Z`` the map is ``G``.
    """

    n: int
    kappa: complex
    rho: complex
    sector: int
    c: TrigPoly
    G: InfinityJet

    def to_Z(self, theta, z):
        cval = np.asarray(self.c.to_double()(np.asarray(theta, dtype=float)), dtype=complex)
        return cval - 1.0 / (self.n * self.kappa * np.asarray(z, dtype=complex) ** self.n)

    def to_z(self, theta, Z):
        cval = np.asarray(self.c.to_double()(np.asarray(theta, dtype=float)), dtype=complex)
        return self.rho * (np.asarray(Z, dtype=complex) - cval) ** (-1.0 / self.n)


def attracting_rho(kappa, n, sector):
    """``rho_j`` with ``rho_j**n = -1/(n kappa)``; its argument is the j-th
    attracting direction ``(pi - Theta + 2 pi j)/n``."""
    r, theta = abs(kappa), math.atan2(kappa.imag, kappa.real) % (2 * math.pi)
    return (n * r) ** (-1.0 / n) * complex(np.exp(1j * (math.pi - theta + 2 * math.pi * sector) / n))


def fatou_chart(F, n, sector=0):
    """Normalized Fatou chart of ``F = z + A z^(n+1) + O(z^(n+2))`` on a sector.

    With ``X = -1/(n kappa z^n)`` and ``f_m`` the coefficients of ``u^-n``
    (``f = z u``), ``X' = X + A/kappa - (1/(n kappa)) sum_i f_{n+i} rho^i X^(-i/n)``.
    The drift ``A/kappa - 1`` is then removed by ``T_c``.
    """
    if not F.lam.is_one:
        raise PreconditionError("fatou_chart needs multiplier 1")
    lead = F.leading_order()
    if lead != n + 1:
        raise PreconditionError(f"leading order is {lead}, expected {n + 1}")
    A = F.coeff(n + 1)
    kappa = complex(A.mean())
    if kappa == 0:
        raise PreconditionError("leading mean vanishes: no flower at this order")
    rho = attracting_rho(kappa, n, sector)
    u = F.series.shift(-1).truncate(F.N - 1)
    u = FibreSeries([TrigPoly.constant(1)] + list(u.c[1:]))
    f = (u.reciprocal()) ** n
    T = F.N - 1 - n
    b = tuple(f[n + i] * (-(rho ** i) / (n * kappa)) for i in range(1, T + 1))
    drift = A * (1 / kappa) - 1
    drift = drift - drift.mean()
    G0 = InfinityJet(F.alpha, 1.0 + 0j, drift, b, n, (("from", "fatou_chart"), ("sector", sector)))
    c = solve_exact(drift, F.alpha).c
    return FatouChart(n, kappa, rho, sector, c, G0.conjugate_translation(c))


# -- power fold ----------------------------------------------------------------
@dataclass(frozen=True)
class FoldedJet:
    """``w -> w (1 + sum_{m >= 1} U_m(theta) s**m)`` with ``s**n = w``.

    Only exponents ``m`` divisible by ``n`` give integral powers of ``w``.
    """

    alpha: object
    n: int
    U: FibreSeries  # the series u(s)^n in s

    def is_integral(self, tol=DUST):
        ref = max(1.0, max(p.strip_norm(0.0) for p in self.U.c))
        return all(p.strip_norm(0.0) <= tol * ref for m, p in enumerate(self.U.c) if m % self.n)

    def to_fibred_jet(self):
        if not self.is_integral():
            raise PreconditionError("folded map has fractional powers of w")
        N = 1 + self.U.order // self.n
        coeffs = {1 + m // self.n: self.U[m] for m in range(self.n, self.U.order + 1, self.n)}
        return FibredJet.from_coefficients(self.alpha, coeffs, N=N)

    def leading(self):
        """Coefficient of ``w^2``."""
        return self.U[self.n]

    def __call__(self, theta, w, s=None):
        w = np.asarray(w, dtype=complex)
        s = w ** (1.0 / self.n) if s is None else np.asarray(s, dtype=complex)
        return w * self.U(theta, s)


def power_fold(F, n):
    """The map in ``w = z^n``: ``w' = w u(z)^n`` where ``f = z u``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not F.lam.is_one:
        raise PreconditionError("power_fold needs multiplier 1")
    ref = max(1.0, F.scale_of_coefficients())
    for j in range(2, n + 1):
        if F.coeff(j).strip_norm(0.0) > DUST * ref:
            raise PreconditionError(f"coefficient a_{j} is not zero; leading order must be {n + 1}")
    u = F.series.shift(-1).truncate(F.N - 1)
    u = FibreSeries([TrigPoly.constant(1)] + [TrigPoly.zero()] * (n - 1) + list(u.c[n:]))
    return FoldedJet(F.alpha, n, u ** n)


__all__ = [
    "FibredJet", "InfinityJet", "FoldedJet", "FatouChart", "compose_maps", "conjugate",
    "elementary_conjugate", "translation_change", "translation_conjugate", "iterate",
    "inverse_jet", "to_infinity", "from_infinity", "fatou_chart", "attracting_rho",
    "power_fold",
]
