"""Cohomological equation ``c(theta + alpha) - c(theta) = -g(theta) + mean(g)``.

For trig-polynomial data the equation always solves mode by mode; the only
failure modes are rational rotation numbers and numerically tiny divisors.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import IllConditionedWarning
from .rotation import small_divisor
from .trigpoly import TrigPoly

DIVISOR_FLOOR = 1e-13


@dataclass(frozen=True)
class CohomSolution:
    c: TrigPoly
    k: complex
    worst_divisor: tuple  # (n, |exp(2 pi i n alpha) - 1|), (0, inf) for constants
    ill_conditioned: bool = False

    def residual(self, g, alpha, thetas):
        """``max |c(t + alpha) - c(t) + g(t) - k|`` over ``thetas``."""
        lhs = self.c.rotate(alpha)(thetas) - self.c(thetas) + g(thetas) - self.k
        return float(np.max(np.abs(np.asarray(lhs, dtype=complex))))


def solve_exact(g, alpha, floor=DIVISOR_FLOOR):
    """Fourier solution with ``mean(c) = 0``.

    Mode ``n != 0`` of ``c`` is ``-g_n / (exp(2 pi i n alpha) - 1)``. Divisors
    below ``floor`` do not abort the solve; they set ``ill_conditioned`` and
    emit :class:`IllConditionedWarning`.
    """
    alpha.require_irrational()
    k = g.mean()
    modes = {}
    worst = (0, math.inf)
    for n, gn in g.modes().items():
        if n == 0:
            continue
        d = small_divisor(alpha, n)
        mag = float(abs(d))
        if mag < worst[1]:
            worst = (n, mag)
        modes[n] = -gn / d
    bad = worst[1] < floor
    if bad:
        warnings.warn(f"small divisor |d_{worst[0]}| = {worst[1]:.3e} below floor {floor:g}",
                      IllConditionedWarning, stacklevel=2)
    c = TrigPoly.from_modes(modes) if modes else TrigPoly.zero()
    if g.extended and not c.extended:
        c = c.to_extended()
    return CohomSolution(c=c, k=k, worst_divisor=worst, ill_conditioned=bad)


@dataclass(frozen=True)
class BirkhoffReport:
    max_abs: float
    slope: float
    running_max: np.ndarray

    @property
    def bounded(self):
        return self.slope < 0.2


def birkhoff_sums(g, alpha, theta0, n):
    """``S_m = sum_{j<m} (g - mean g)(theta0 + j alpha)`` for ``m = 1..n``."""
    th = alpha.orbit(theta0, n)
    vals = (g - g.mean()).to_double()(th)
    return np.cumsum(vals)


def birkhoff_diagnostic(g, alpha, theta0, N):
    """Running max of ``|S_m|`` and a log-log slope fitted on the second half
    of a geometric grid of ``m`` (slope ~ 0 for bounded sums)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    s = np.abs(birkhoff_sums(g, alpha, theta0, N))
    run = np.maximum.accumulate(s)
    top = float(run[-1])
    if N < 16 or top == 0.0:
        return BirkhoffReport(top, 0.0, run)
    ms = np.unique(np.geomspace(1, N, 40).astype(int))
    ms = ms[len(ms) // 2:]
    y = run[ms - 1]
    if np.any(y <= 0):
        return BirkhoffReport(top, 0.0, run)
    slope = float(np.polyfit(np.log(ms), np.log(y), 1)[0])
    return BirkhoffReport(top, slope, run)


def lemma4_constant(divisor_constant, tau, delta):
    """Certified C with ``||c||_{delta-d} <= C ||g||_delta / d**(3+tau)``.

    Uses ``|c_n| <= K |n|^s |g_n|`` (s = 2+tau, K the divisor constant),
    ``|g_n| <= ||g||_delta e^{-2 pi |n| delta}``, the series bound
    ``sum_n n^s x^n <= Gamma(s+1)/(1-x)^(s+1)`` and
    ``1 - e^{-y} >= y/(1+y)`` with ``y = 2 pi d <= 2 pi delta``.
    """
    s = 2.0 + tau
    return 2.0 * divisor_constant * math.gamma(s + 1) * ((1 + 2 * math.pi * delta) / (2 * math.pi)) ** (s + 1)


def lemma5_constant(s):
    """``C(s)`` in ``sum_{n>=0} x^n n^s <= C(s)/(1-x)^(s+1)``; equals s! for integer s."""
    return math.gamma(s + 1)


__all__ = ["CohomSolution", "solve_exact", "birkhoff_sums", "birkhoff_diagnostic",
           "lemma4_constant", "lemma5_constant", "DIVISOR_FLOOR"]
