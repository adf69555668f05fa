"""Truncated power series in z whose coefficients are trig polynomials in theta.

``FibreSeries([c0, c1, ..., cN])`` is ``sum_j c_j(theta) z**j mod z**(N+1)``.
All fibred coordinate changes reduce to products, compositions and
reversions of these objects.
"""

import mpmath
import numpy as np

from . import config
from .trigpoly import TrigPoly


def _tp(x):
    if isinstance(x, TrigPoly):
        return x
    return TrigPoly.constant(x)


def _scalar(p):
    """Return the value of a constant TrigPoly, or None if it depends on theta."""
    if p.degree == 0:
        return p.mean()
    return None


class FibreSeries:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        cs = tuple(_tp(x) for x in coeffs)
        if not cs:
            raise ValueError("need at least one coefficient")
        self.c = cs

    # -- constructors ---------------------------------------------------
    @classmethod
    def zero(cls, order):
        return cls([TrigPoly.zero()] * (order + 1))

    @classmethod
    def identity(cls, order):
        return cls.monomial(1, 1, order)

    @classmethod
    def monomial(cls, j, coeff, order):
        out = [TrigPoly.zero()] * (order + 1)
        if j <= order:
            out[j] = _tp(coeff)
        return cls(out)

    # -- structure ------------------------------------------------------
    @property
    def order(self):
        return len(self.c) - 1

    def __getitem__(self, j):
        if 0 <= j <= self.order:
            return self.c[j]
        return TrigPoly.zero()

    def valuation(self):
        for j, p in enumerate(self.c):
            if not p.is_zero():
                return j
        return None

    def truncate(self, order):
        if order >= self.order:
            return FibreSeries(list(self.c) + [TrigPoly.zero()] * (order - self.order))
        return FibreSeries(self.c[:order + 1])

    def map(self, fn):
        return FibreSeries([fn(p) for p in self.c])

    def chop(self, tol):
        return self.map(lambda p: p.chop(tol))

    # -- arithmetic -----------------------------------------------------
    def _other(self, other):
        if isinstance(other, FibreSeries):
            return other
        return FibreSeries.monomial(0, other, self.order)

    def __add__(self, other):
        other = self._other(other)
        n = min(self.order, other.order)
        return FibreSeries([self.c[j] + other.c[j] for j in range(n + 1)])

    __radd__ = __add__

    def __sub__(self, other):
        other = self._other(other)
        n = min(self.order, other.order)
        return FibreSeries([self.c[j] - other.c[j] for j in range(n + 1)])

    def __neg__(self):
        return self.map(lambda p: -p)

    def scale(self, s):
        """Multiply every coefficient by a scalar or TrigPoly."""
        return self.map(lambda p: p * s)

    def __mul__(self, other):
        if not isinstance(other, FibreSeries):
            return self.scale(other)
        n = min(self.order, other.order)
        a = [(i, p) for i, p in enumerate(self.c[:n + 1]) if not p.is_zero()]
        b = [(j, q) for j, q in enumerate(other.c[:n + 1]) if not q.is_zero()]
        out = [TrigPoly.zero()] * (n + 1)
        for i, p in a:
            for j, q in b:
                if i + j > n:
                    break
                out[i + j] = out[i + j] + p * q
        return FibreSeries(out)

    __rmul__ = __mul__

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("use fractional_power for non-integer exponents")
        out = FibreSeries.monomial(0, 1, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def shift(self, m):
        """Multiply by ``z**m`` (m may be negative when the low terms vanish)."""
        if m >= 0:
            return FibreSeries([TrigPoly.zero()] * m + list(self.c[:self.order + 1 - m]))
        if any(not p.is_zero() for p in self.c[:-m]):
            raise ValueError("division by z would leave a pole")
        return FibreSeries(list(self.c[-m:]) + [TrigPoly.zero()] * (-m))

    def rotate(self, alpha):
        return self.map(lambda p: p.rotate(alpha))

    def derivative(self):
        return FibreSeries([self.c[j] * j for j in range(1, self.order + 1)] + [TrigPoly.zero()])

    # -- composition ----------------------------------------------------
    def compose(self, inner):
        """``self(theta, inner(theta, z))`` truncated; ``inner`` must vanish at z = 0."""
        if not inner[0].is_zero():
            raise ValueError("inner series must have zero constant term")
        n = min(self.order, inner.order)
        inner = inner.truncate(n)
        if inner.valuation() is None:
            return FibreSeries.monomial(0, self.c[0], n)
        # power sums: skip zero outer coefficients, reuse the running power
        out = FibreSeries.monomial(0, self.c[0], n)
        power = None
        v = inner.valuation()
        for j in range(1, min(self.order, n // v) + 1):
            power = inner if power is None else power * inner
            if not self.c[j].is_zero():
                out = out + power.scale(self.c[j])
        return out

    def reciprocal(self):
        """``1 / self``; the constant term must be a nonzero constant."""
        c0 = _scalar(self.c[0])
        if c0 is None or c0 == 0:
            raise ValueError("reciprocal needs a nonzero constant leading term")
        inv = 1 / c0
        r = [TrigPoly.constant(inv)]
        for n in range(1, self.order + 1):
            acc = TrigPoly.zero()
            for j in range(1, n + 1):
                if not self.c[j].is_zero() and not r[n - j].is_zero():
                    acc = acc + self.c[j] * r[n - j]
            r.append(acc * (-inv))
        return FibreSeries(r)

    def fractional_power(self, p):
        """``self**p`` for real ``p`` via the binomial series; needs constant term 1."""
        c0 = _scalar(self.c[0])
        if c0 is None or abs(c0 - 1) > 1e-14:
            raise ValueError("fractional power needs constant term 1")
        x = FibreSeries([TrigPoly.zero()] + list(self.c[1:]))
        coeffs = [binom_coeff(p, i) for i in range(self.order + 1)]
        return FibreSeries(coeffs).compose(x)

    def reversion(self):
        """Compositional inverse of ``lam z + O(z^2)`` with constant ``lam``."""
        if not self.c[0].is_zero():
            raise ValueError("reversion needs zero constant term")
        lam = _scalar(self[1])
        if lam is None or lam == 0:
            raise ValueError("reversion needs a nonzero constant linear term")
        n = self.order
        z = FibreSeries.identity(n)
        g = FibreSeries.monomial(1, 1 / lam, n)
        dself = self.derivative()
        prec = 1
        # Newton: g <- g - (f(g) - z) / f'(g); the valid order doubles each pass
        while prec < n:
            prec = min(2 * prec, n)
            gt = g.truncate(prec)
            err = self.truncate(prec).compose(gt) - z.truncate(prec)
            corr = err * dself.truncate(prec).compose(gt).reciprocal()
            g = (gt - corr).truncate(n)
        return g

    # -- evaluation -----------------------------------------------------
    def coefficient_values(self, theta):
        """Array of shape (order+1, *theta.shape) with ``c_j(theta)``."""
        th = np.asarray(theta, dtype=float)
        out = np.zeros((self.order + 1,) + th.shape, dtype=complex)
        M = max(p.degree for p in self.c)
        # one exponential per point; higher modes by repeated multiplication
        e1 = np.exp(2j * np.pi * th)
        pos = [np.ones_like(e1)]
        for _ in range(M):
            pos.append(pos[-1] * e1)
        for j, p in enumerate(self.c):
            if p.is_zero():
                continue
            cs = p.to_double().coefficients
            d = p.degree
            acc = np.full(th.shape, cs[d], dtype=complex)
            for n in range(1, d + 1):
                acc += cs[d + n] * pos[n] + cs[d - n] * np.conj(pos[n])
            out[j] = acc
        return out

    def __call__(self, theta, z, values=None):
        """Evaluate at matching arrays ``theta``, ``z`` (double precision)."""
        vals = self.coefficient_values(theta) if values is None else values
        z = np.asarray(z, dtype=complex)
        acc = np.zeros(np.broadcast_shapes(z.shape, vals.shape[1:]), dtype=complex)
        for j in range(self.order, -1, -1):
            acc = acc * z + vals[j]
        return acc

    def eval_mp(self, theta, z):
        """Scalar evaluation in mpmath at the current working precision."""
        acc = mpmath.mpc(0)
        for j in range(self.order, -1, -1):
            p = self.c[j]
            acc = acc * z + (p.to_extended()(theta) if not p.is_zero() else 0)
        return acc

    def to_extended(self):
        return self.map(TrigPoly.to_extended)

    def to_double(self):
        return self.map(TrigPoly.to_double)

    def distance(self, other):
        """Max over orders of ``strip_norm(self_j - other_j, 0)``."""
        n = max(self.order, other.order)
        return max((self[j] - other[j]).strip_norm(0.0) for j in range(n + 1))

    def __repr__(self):
        terms = [f"z^{j}: {p!r}" for j, p in enumerate(self.c) if not p.is_zero()]
        return "FibreSeries(" + ", ".join(terms) + ")"


def binom_coeff(p, i):
    """Generalised binomial coefficient ``C(p, i)`` for real ``p``."""
    if config.is_extended():
        return mpmath.binomial(p, i)
    out = 1.0
    for m in range(i):
        out *= (p - m) / (m + 1)
    return out


__all__ = ["FibreSeries", "binom_coeff"]
