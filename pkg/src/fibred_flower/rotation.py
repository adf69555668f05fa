"""Base rotation numbers, root-of-unity multipliers and small divisors.

A :class:`RotationNumber` keeps its value mod 1 to ``config.ROTATION_DPS``
digits and a double-double split ``hi + lo`` so that ``frac(n * alpha)``
stays accurate to ~1e-16 for ``|n|`` up to ~1e8 without mpmath in the loop.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import config
from .errors import ResonanceError

# floats within this distance of p/q with q <= RATIONAL_QMAX are rational
RATIONAL_TOL = 1e-15
RATIONAL_QMAX = 10**6

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp splitter


def _split(x):
    t = _SPLIT * x
    hi = t - (t - x)
    return hi, x - hi


def _cf_value(quotients):
    with mpmath.workdps(config.ROTATION_DPS + 10):
        v = mpmath.mpf(quotients[-1])
        for a in reversed(quotients[:-1]):
            v = a + 1 / v
        return +v


@dataclass(frozen=True)
class RotationNumber:
    """Rotation number alpha in [0, 1).

    Build with :meth:`from_float`, :meth:`from_cf` or :meth:`from_fraction`.
    """

    value: mpmath.mpf
    partial_quotients: tuple = ()
    periodic_tail: int = 0
    rational: Fraction | None = None
    hi: float = field(init=False, repr=False)
    lo: float = field(init=False, repr=False)

    def __post_init__(self):
        with mpmath.workdps(config.ROTATION_DPS):
            v = self.value - mpmath.floor(self.value)
            hi = float(v)
            lo = float(v - hi)
        object.__setattr__(self, "value", v)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "lo", lo)

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_float(cls, x):
        """A double is declared rational when it sits within 1e-15 of some
        p/q with q <= 1e6; otherwise it is treated as the irrational number
        whose binary expansion it carries."""
        x = float(x)
        frac = Fraction(x).limit_denominator(RATIONAL_QMAX)
        rational = frac % 1 if abs(x - float(frac)) <= RATIONAL_TOL else None
        with mpmath.workdps(config.ROTATION_DPS):
            value = mpmath.mpf(rational.numerator) / rational.denominator if rational is not None else mpmath.mpf(x)
        return cls(value, rational=rational)

    @classmethod
    def from_fraction(cls, p, q):
        r = Fraction(p, q) % 1
        with mpmath.workdps(config.ROTATION_DPS):
            return cls(mpmath.mpf(r.numerator) / r.denominator, rational=r)

    @classmethod
    def from_cf(cls, quotients, periodic_tail=0):
        """Continued fraction ``[a0; a1, a2, ...]``.

        With ``periodic_tail = k`` the last ``k`` quotients repeat forever and
        the number is irrational; otherwise the expansion is finite (rational).
        """
        q = [int(a) for a in quotients]
        if not q:
            raise ValueError("empty continued fraction")
        if any(a < 1 for a in q[1:]):
            raise ValueError("partial quotients a_i, i >= 1, must be >= 1")
        k = int(periodic_tail)
        if k < 0 or k > len(q) - 1:
            raise ValueError("periodic_tail must lie in [0, len(quotients) - 1]")
        if k == 0:
            r = Fraction(q[-1])
            for a in reversed(q[:-1]):
                r = a + 1 / r
            return cls.from_fraction(r.numerator, r.denominator)
        expanded = list(q)
        tail = q[-k:]
        # unroll until the convergent denominators exceed 10**(dps + 10)
        den_prev, den = 0, 1
        for a in expanded[1:]:
            den_prev, den = den, a * den + den_prev
        while den < 10 ** (config.ROTATION_DPS + 10):
            for a in tail:
                expanded.append(a)
                den_prev, den = den, a * den + den_prev
        return cls(_cf_value(expanded), partial_quotients=tuple(q), periodic_tail=k)

    @classmethod
    def golden(cls):
        """(sqrt(5) - 1) / 2 = [0; 1, 1, 1, ...]."""
        return cls.from_cf([0, 1], periodic_tail=1)

    # -- queries --------------------------------------------------------
    @property
    def is_rational(self):
        return self.rational is not None

    def __float__(self):
        return self.hi

    def require_irrational(self):
        if self.is_rational:
            raise ResonanceError(f"rotation number {self.rational} is rational: resonance at n = {self.rational.denominator}")

    def frac_multiple(self, n):
        """``frac(n * alpha)`` in [0, 1) for integer ``n`` (scalar or array)."""
        n_arr = np.asarray(n, dtype=np.int64)
        if np.any(np.abs(n_arr) >= 2**26):
            with mpmath.workdps(config.ROTATION_DPS):
                vals = [float(mpmath.frac(int(m) * self.value)) for m in np.ravel(n_arr)]
            out = np.array(vals).reshape(n_arr.shape)
            return out if out.ndim else float(out)
        h1, h2 = _split(self.hi)
        nf = n_arr.astype(float)
        a = nf * h1
        a = a - np.floor(a)
        t = a + (nf * h2 + nf * self.lo)
        t = t - np.floor(t)
        t = np.where(t >= 1.0, 0.0, t)
        return t if t.ndim else float(t)

    def frac_multiple_mp(self, n):
        with mpmath.workdps(config.ROTATION_DPS):
            return mpmath.frac(int(n) * self.value)

    def orbit(self, theta0, count):
        """``theta_j = frac(theta0 + j * alpha)`` for ``j = 0..count-1``."""
        th = float(theta0) + self.frac_multiple(np.arange(count))
        return th - np.floor(th)

    def phases(self, ns, extended=None):
        """``exp(2 pi i n alpha)`` for an integer array ``ns``."""
        if extended is None:
            extended = config.is_extended()
        ns = np.asarray(ns)
        if extended:
            return np.array([mpmath.expjpi(2 * self.frac_multiple_mp(n)) for n in ns], dtype=object)
        return np.exp(2j * math.pi * self.frac_multiple(ns))

    def scaled(self, n):
        """The rotation number ``n * alpha mod 1``."""
        if self.is_rational:
            return RotationNumber.from_fraction((self.rational * n).numerator, (self.rational * n).denominator)
        with mpmath.workdps(config.ROTATION_DPS):
            return RotationNumber(mpmath.frac(int(n) * self.value))

    def __add__(self, other):
        if not isinstance(other, RotationNumber):
            return NotImplemented
        if self.is_rational and other.is_rational:
            r = self.rational + other.rational
            return RotationNumber.from_fraction(r.numerator, r.denominator)
        with mpmath.workdps(config.ROTATION_DPS):
            return RotationNumber(self.value + other.value)

    def __neg__(self):
        return self.scaled(-1)

    def __eq__(self, other):
        if not isinstance(other, RotationNumber):
            return NotImplemented
        with mpmath.workdps(config.ROTATION_DPS):
            return self.value == other.value

    def __hash__(self):
        return hash((self.hi, self.lo))

    def continued_fraction(self, depth=40):
        """Partial quotients of the cached value (exact when rational)."""
        if self.is_rational:
            out, r = [], self.rational
            while True:
                a = math.floor(r)
                out.append(int(a))
                r -= a
                if r == 0 or len(out) >= depth:
                    return out
                r = 1 / r
        out = []
        with mpmath.workdps(config.ROTATION_DPS):
            x = self.value
            for _ in range(depth):
                a = int(mpmath.floor(x))
                out.append(a)
                x -= a
                if x < mpmath.mpf(10) ** (-(config.ROTATION_DPS // 2)):
                    break
                x = 1 / x
        return out

    def convergents(self, depth=40):
        """List of ``(p_k, q_k)``."""
        out = []
        p0, q0 = 1, 0
        pm, qm = 0, 1
        for a in self.continued_fraction(depth):
            p, q = a * p0 + pm, a * q0 + qm
            out.append((p, q))
            pm, qm, p0, q0 = p0, q0, p, q
        return out

    def to_dict(self):
        if self.partial_quotients:
            d = {"cf": list(self.partial_quotients)}
            if self.periodic_tail:
                d["periodic_tail"] = self.periodic_tail
            return d
        return {"float": self.hi}


@dataclass(frozen=True)
class RootOfUnity:
    """``lambda = exp(2 pi i p / q)`` with gcd(p, q) = 1 (q = 1 means 1)."""

    p: int = 0
    q: int = 1

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("order q must be positive")
        p = self.p % self.q
        g = math.gcd(p, self.q)
        if g > 1:
            object.__setattr__(self, "p", p // g)
            object.__setattr__(self, "q", self.q // g)
        else:
            object.__setattr__(self, "p", p)

    @property
    def value(self):
        if self.q == 1:
            return 1.0 + 0j
        if self.q == 2:
            return -1.0 + 0j
        if self.q == 4:
            return 1j if self.p == 1 else -1j
        return complex(np.exp(2j * math.pi * self.p / self.q))

    @property
    def mp_value(self):
        return mpmath.expjpi(mpmath.mpf(2 * self.p) / self.q)

    @property
    def is_one(self):
        return self.q == 1

    def __pow__(self, n):
        return RootOfUnity(self.p * n, self.q)

    def __mul__(self, other):
        q = self.q * other.q // math.gcd(self.q, other.q)
        return RootOfUnity(self.p * (q // self.q) + other.p * (q // other.q), q)


@dataclass(frozen=True)
class DiophantineParams:
    """CD(c, tau): ``||n alpha|| >= c / |n|**(1 + tau)``.

    ``sigma`` is the exponent used for ``1/|exp(2 pi i n alpha) - 1| <= C |n|**sigma``;
    it defaults to ``2 + tau``.
    """

    c: float = 0.25
    tau: float = 0.0
    sigma: float | None = None

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("c must be positive")
        if self.tau < 0:
            raise ValueError("tau must be non-negative")
        if self.sigma is None:
            object.__setattr__(self, "sigma", 2.0 + self.tau)

    @property
    def divisor_constant(self):
        """C(c) implied by CD(c, tau), using ``|exp(2 pi i x) - 1| >= 4 ||x||``."""
        return 1.0 / (4.0 * self.c)


@dataclass(frozen=True)
class DiophantineReport:
    worst_n: int
    worst_ratio: float
    constant_bound: float
    empirical_c: float
    passed: bool


def small_divisor(alpha, n):
    """``exp(2 pi i n alpha) - 1`` from the reduced fractional part of ``n alpha``."""
    n = int(n)
    if n == 0:
        raise ResonanceError("small divisor at n = 0 is identically zero")
    if config.is_extended():
        x = alpha.frac_multiple_mp(n)
        return mpmath.expjpi(2 * x) - 1
    x = alpha.frac_multiple(n)
    if x > 0.5:
        x -= 1.0
    if alpha.is_rational and (alpha.rational * n).denominator == 1:
        return 0j
    # exp(2 pi i x) - 1 = 2 i sin(pi x) exp(i pi x), no cancellation
    return 2j * math.sin(math.pi * x) * complex(math.cos(math.pi * x), math.sin(math.pi * x))


def small_divisors(alpha, ns):
    """Vectorised :func:`small_divisor` (double precision)."""
    ns = np.asarray(ns)
    if np.any(ns == 0):
        raise ResonanceError("small divisor at n = 0 is identically zero")
    x = alpha.frac_multiple(ns)
    x = np.where(x > 0.5, x - 1.0, x)
    out = 2j * np.sin(np.pi * x) * np.exp(1j * np.pi * x)
    if alpha.is_rational:
        out = np.where((ns % alpha.rational.denominator) == 0, 0j, out)
    return out


def diophantine_check(alpha, params, n_max):
    """Scan ``0 < n <= n_max`` for the smallest admissible C in
    ``1/|exp(2 pi i n alpha) - 1| <= C |n|**sigma``.

    Negative ``n`` give conjugate divisors, so only positive ones are scanned.
    ``passed`` means the scan is consistent with CD(c, tau), i.e. the
    empirical constant does not exceed ``params.divisor_constant``.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    alpha.require_irrational()
    ns = np.arange(1, int(n_max) + 1)
    mags = np.abs(small_divisors(alpha, ns))
    ratios = 1.0 / (mags * ns.astype(float) ** params.sigma)
    i = int(np.argmax(ratios))
    x = alpha.frac_multiple(ns)
    dist = np.minimum(x, 1.0 - x)
    emp_c = float(np.min(dist * ns.astype(float) ** (1.0 + params.tau)))
    worst = float(ratios[i])
    return DiophantineReport(
        worst_n=int(ns[i]),
        worst_ratio=worst,
        constant_bound=params.divisor_constant,
        empirical_c=emp_c,
        passed=bool(np.isfinite(worst) and worst <= params.divisor_constant),
    )
