"""Exact arithmetic on finite Fourier series over the circle R/Z.

A :class:`TrigPoly` is ``p(theta) = sum_{|n| <= M} c_n exp(2 pi i n theta)``.
Coefficients live in a centred numpy array (index ``n + M``), either
complex128 or, in extended precision mode, an object array of ``mpmath.mpc``.
Values are immutable; every operation returns a new polynomial.
"""

import math
from numbers import Number

import mpmath
import numpy as np

from . import config

TWO_PI = 2.0 * math.pi

# relative size below which product coefficients are treated as rounding dust
DUST = 1e-15


def _dust():
    return 10.0 ** (-(config.dps() - 5)) if config.is_extended() else DUST


def _to_mpc_array(values):
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = v if isinstance(v, mpmath.mpc) else mpmath.mpc(v)
    return out


def _is_obj(a):
    return a.dtype == object


def _prepare(values):
    arr = np.asarray(values)
    if arr.ndim != 1 or len(arr) % 2 == 0:
        raise ValueError("coefficient array must be 1-d with odd length")
    if config.is_extended() or arr.dtype == object:
        return _to_mpc_array(arr)
    return arr.astype(complex)


def _abs(arr):
    if _is_obj(arr):
        return np.array([float(abs(v)) for v in arr])
    return np.abs(arr)


def _trim(arr):
    """Drop outer mode pairs that are exactly zero."""
    nz = np.nonzero(_abs(arr))[0]
    m = (len(arr) - 1) // 2
    if len(nz) == 0:
        return arr[m:m + 1] * 0
    deg = int(max(abs(nz[0] - m), abs(nz[-1] - m)))
    return arr[m - deg:m + deg + 1]


def _promote(a, b):
    if _is_obj(a) and not _is_obj(b):
        return a, _to_mpc_array(b)
    if _is_obj(b) and not _is_obj(a):
        return _to_mpc_array(a), b
    return a, b


def _pad(arr, deg):
    m = (len(arr) - 1) // 2
    if m == deg:
        return arr
    out = np.zeros(2 * deg + 1, dtype=arr.dtype)
    if _is_obj(arr):
        out[:] = mpmath.mpc(0)
    out[deg - m:deg + m + 1] = arr
    return out


class TrigPoly:
    """Trigonometric polynomial with basis ``exp(2 pi i n theta)``."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=(0.0,)):
        arr = _trim(_prepare(coeffs))
        if not _is_obj(arr):
            arr.flags.writeable = False
        self._c = arr

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_modes(cls, modes):
        """Build from a mapping ``{frequency: coefficient}``."""
        modes = {int(n): v for n, v in dict(modes).items()}
        deg = max((abs(n) for n in modes), default=0)
        use_obj = config.is_extended() or any(isinstance(v, (mpmath.mpc, mpmath.mpf)) for v in modes.values())
        if use_obj:
            arr = np.empty(2 * deg + 1, dtype=object)
            arr[:] = mpmath.mpc(0)
            for n, v in modes.items():
                arr[n + deg] += mpmath.mpc(v)
        else:
            arr = np.zeros(2 * deg + 1, dtype=complex)
            for n, v in modes.items():
                arr[n + deg] += complex(v)
        return cls(arr)

    @classmethod
    def constant(cls, value):
        return cls.from_modes({0: value})

    @classmethod
    def zero(cls):
        return cls.from_modes({})

    @classmethod
    def mode(cls, n, value=1.0):
        """Single mode ``value * exp(2 pi i n theta)``."""
        return cls.from_modes({n: value})

    @classmethod
    def sin(cls, n=1):
        """``sin(2 pi n theta)``."""
        if config.is_extended():
            return cls.from_modes({n: mpmath.mpc(0, -0.5), -n: mpmath.mpc(0, 0.5)})
        return cls.from_modes({n: -0.5j, -n: 0.5j})

    @classmethod
    def cos(cls, n=1):
        """``cos(2 pi n theta)``."""
        return cls.from_modes({n: 0.5, -n: 0.5})

    @classmethod
    def from_records(cls, records):
        """Inverse of :meth:`to_records`; duplicated frequencies add up."""
        modes = {}
        for r in records:
            f = int(r["freq"])
            modes[f] = modes.get(f, 0) + complex(float(r["re"]), float(r["im"]))
        return cls.from_modes(modes)

    # -- structure ------------------------------------------------------
    @property
    def degree(self):
        return (len(self._c) - 1) // 2

    @property
    def coefficients(self):
        """Centred coefficient array (copy); index ``n + degree``."""
        return self._c.copy()

    @property
    def extended(self):
        return _is_obj(self._c)

    def coeff(self, n):
        m = self.degree
        if abs(n) > m:
            return mpmath.mpc(0) if self.extended else 0j
        return self._c[n + m]

    def modes(self):
        """Nonzero modes as a dict ``{n: coefficient}``."""
        m = self.degree
        return {n - m: v for n, v in enumerate(self._c) if v != 0}

    def is_zero(self):
        return self.degree == 0 and self._c[0] == 0

    def to_records(self):
        """Serialise as ``[{freq, re, im}, ...]`` sorted by frequency."""
        return [{"freq": int(n), "re": float(complex(v).real), "im": float(complex(v).imag)}
                for n, v in sorted(self.modes().items())]

    def to_double(self):
        if not self.extended:
            return self
        arr = np.array([complex(v) for v in self._c])
        with _double_mode():
            return TrigPoly(arr)

    def to_extended(self):
        if self.extended:
            return self
        return TrigPoly(_to_mpc_array(self._c))

    # -- arithmetic -----------------------------------------------------
    def _binary(self, other, op):
        a, b = _promote(self._c, other._c)
        deg = max(self.degree, other.degree)
        return TrigPoly(op(_pad(a, deg), _pad(b, deg)))

    def _coerce(self, other):
        if isinstance(other, TrigPoly):
            return other
        if isinstance(other, (Number, mpmath.mpc, mpmath.mpf)):
            return TrigPoly.constant(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other._binary(self, np.subtract)

    def __neg__(self):
        return TrigPoly(-self._c)

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return mul(self, other)
        if isinstance(other, (Number, mpmath.mpc, mpmath.mpf)):
            if self.extended:
                other = mpmath.mpc(other)
            return TrigPoly(self._c * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Number, mpmath.mpc, mpmath.mpf)):
            if self.extended:
                other = mpmath.mpc(other)
            return TrigPoly(self._c / other)
        return NotImplemented

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = TrigPoly.constant(1)
        base = self
        while k:
            if k & 1:
                out = mul(out, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return out

    def conj(self):
        """The polynomial ``theta -> conj(p(theta))`` for real theta."""
        if self.extended:
            arr = np.array([mpmath.conj(v) for v in self._c[::-1]], dtype=object)
        else:
            arr = np.conj(self._c[::-1])
        return TrigPoly(arr)

    def chop(self, tol):
        """Zero every mode with ``|c_n| <= tol``."""
        arr = self._c.copy()
        arr[_abs(arr) <= tol] = mpmath.mpc(0) if self.extended else 0
        return TrigPoly(arr)

    # -- analysis -------------------------------------------------------
    def rotate(self, alpha):
        """``theta -> p(theta + alpha)``; mode ``n`` gains ``exp(2 pi i n alpha)``."""
        ns = np.arange(-self.degree, self.degree + 1)
        if hasattr(alpha, "phases"):
            ph = alpha.phases(ns, extended=self.extended)
        elif self.extended:
            ph = np.array([mpmath.expjpi(2 * int(n) * mpmath.mpf(alpha)) for n in ns], dtype=object)
        else:
            ph = np.exp(1j * TWO_PI * ns * float(alpha))
        return TrigPoly(self._c * ph)

    def mean(self):
        return self._c[self.degree]

    def __call__(self, theta):
        return self.eval(theta)

    def eval(self, theta):
        """Evaluate at real ``theta`` (scalar or array)."""
        ns = np.arange(-self.degree, self.degree + 1)
        if self.extended:
            def one(t):
                t = mpmath.mpf(t)
                return mpmath.fsum(c * mpmath.expjpi(2 * int(n) * t) for n, c in zip(ns, self._c))
            if np.ndim(theta) == 0:
                return one(theta)
            flat = [one(t) for t in np.ravel(theta)]
            return np.array(flat, dtype=object).reshape(np.shape(theta))
        th = np.asarray(theta, dtype=float)
        ph = np.exp(1j * TWO_PI * np.multiply.outer(th, ns))
        return ph @ self._c

    def strip_norm(self, delta):
        """Majorant ``sum_n |c_n| exp(2 pi |n| delta)`` of the sup on the strip."""
        if delta < 0:
            raise ValueError("delta must be non-negative")
        ns = np.arange(-self.degree, self.degree + 1)
        return float(np.sum(_abs(self._c) * np.exp(TWO_PI * np.abs(ns) * delta)))

    def distance(self, other):
        """``strip_norm(self - other, 0)``."""
        return (self - other).strip_norm(0.0)

    def allclose(self, other, tol=1e-12):
        return self.distance(other) <= tol

    def __repr__(self):
        terms = ", ".join(f"{n}: {complex(v):.6g}" for n, v in sorted(self.modes().items()))
        return f"TrigPoly({{{terms}}})"


class _double_mode:
    def __enter__(self):
        self._old = config._state["mode"]
        config._state["mode"] = "double"

    def __exit__(self, *exc):
        config._state["mode"] = self._old


def mul(p, q):
    """Pointwise product: modes are the convolution of the inputs."""
    a, b = _promote(p._c, q._c)
    out = np.convolve(a, b)
    mags = _abs(out)
    top = mags.max() if len(mags) else 0.0
    if top > 0:
        out = out.copy()
        out[mags < _dust() * top] = mpmath.mpc(0) if _is_obj(out) else 0
    return TrigPoly(out)


def rotate(p, alpha):
    return p.rotate(alpha)


def mean(p):
    return p.mean()


def eval(p, theta):  # noqa: A001 - mirrors the operation name
    return p.eval(theta)


def strip_norm(p, delta):
    return p.strip_norm(delta)
