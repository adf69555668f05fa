"""Majorant sequences for the linearizing change and the convergence certificate.

All sequences are kept as exact ``Fraction`` values so the inequalities
between them are checked without rounding. Large entries are reported as
base-10 logarithms.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .cohomology import lemma4_constant, lemma5_constant
from .errors import CertificationError
from .fibredjet import FibredJet
from .reduction import FlowerFound, ObstructedStep, formal_scheme
from .rotation import DiophantineParams, diophantine_check

K_MAX = 60
TAU_RADIUS = 3.0 - 2.0 * math.sqrt(2.0)


def _frac(x):
    return x if isinstance(x, Fraction) else Fraction(x)


def _log10(x):
    x = _frac(x)
    if x <= 0:
        return -math.inf if x == 0 else math.nan
    return math.log10(x.numerator) - math.log10(x.denominator)


def eps_cap(n, nu):
    """``(2n)^nu``, exact for integer ``nu``."""
    if float(nu).is_integer():
        return Fraction(2 * n) ** int(nu)
    return Fraction((2.0 * n) ** float(nu))


# -- sequences -----------------------------------------------------------------
@dataclass(frozen=True)
class SiegelSequences:
    nu: float
    eps: tuple  # eps[n - 1] = eps_n, n = 1..K-1
    mu: tuple  # index k - 1; mu_1 is undefined and stored as 0
    theta: tuple
    tau: tuple
    gamma: tuple

    @property
    def K(self):
        return len(self.theta)

    def to_dict(self):
        return {
            "nu": self.nu,
            "K": self.K,
            "log10_eps": [_log10(e) for e in self.eps],
            "log10_theta": [_log10(t) for t in self.theta],
            "tau": [int(t) for t in self.tau],
            "log10_gamma": [_log10(g) for g in self.gamma],
        }


def _composition_sums(eps_of, K):
    """``x_1 = 1``, ``x_k = eps_of(k) * sum over compositions of k into >= 2 parts``.

    ``S(m)`` is the sum over all compositions of ``m`` (one part allowed), so
    ``x_k = eps * sum_{r<k} x_r S(k - r)`` and ``S(m) = x_m + sum_{r<m} x_r S(m - r)``.
    """
    x = [None, Fraction(1)]
    S = [None, Fraction(1)]
    for k in range(2, K + 1):
        acc = sum((x[r] * S[k - r] for r in range(1, k)), Fraction(0))
        x.append(eps_of(k) * acc)
        S.append(x[k] + acc)
    return x[1:]


def _max_partition_products(eps, K):
    """``theta`` and ``mu`` by max over unordered partitions into >= 2 parts.

    The largest part ``r`` of such a partition of ``k`` is followed by any
    partition of ``k - r``, so ``mu_k = max_r theta_r * P(k - r)`` with
    ``P(m) = max(theta_m, mu_m)`` the best product over all partitions of ``m``.
    """
    theta = [None, Fraction(1)]
    mu = [None, Fraction(0)]
    P = [None, Fraction(1)]
    for k in range(2, K + 1):
        m = max(theta[r] * P[k - r] for r in range(1, k))
        mu.append(m)
        theta.append(eps[k - 2] * m)
        P.append(max(theta[k], m))
    return theta[1:], mu[1:]


def build_sequences(nu, eps, K):
    """Sequences up to index ``K`` from ``eps_n`` (a sequence or ``n -> eps_n``).

    ``eps_n <= (2n)^nu`` is required for ``n = 1..K-1``; equality is allowed
    because the schedule produces it exactly.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    K = int(K)
    if not 1 <= K <= K_MAX:
        raise ValueError(f"K must be in 1..{K_MAX}")
    if callable(eps):
        vals = [_frac(eps(n)) for n in range(1, K)]
    else:
        if len(eps) < K - 1:
            raise ValueError(f"need eps_1..eps_{K - 1}, got {len(eps)} values")
        vals = [_frac(e) for e in list(eps)[:K - 1]]
    for n, e in enumerate(vals, start=1):
        if e < 0:
            raise CertificationError("eps must be non-negative", {"n": n, "eps": float(e)})
        if e > eps_cap(n, nu):
            raise CertificationError(f"eps_{n} exceeds (2n)^nu", {"n": n, "eps": float(e), "nu": nu})
    theta, mu = _max_partition_products(vals, K)
    tau = _composition_sums(lambda k: 1, K)
    gamma = _composition_sums(lambda k: vals[k - 2], K)
    return SiegelSequences(float(nu), tuple(vals), tuple(mu), tuple(theta), tuple(tau), tuple(gamma))


def lemma1_bound(k, nu):
    """``k^(-2 nu) 2^((5 nu + 1)(k - 1))``, exact for integer ``nu``."""
    if float(nu).is_integer():
        nu = int(nu)
        return Fraction(2) ** ((5 * nu + 1) * (k - 1)) / Fraction(k) ** (2 * nu)
    return None


def _lemma1_holds(theta_k, k, nu):
    exact = lemma1_bound(k, nu)
    if exact is not None:
        return theta_k <= exact
    with mpmath.workdps(60):
        rhs = mpmath.mpf(k) ** (-2 * nu) * mpmath.mpf(2) ** ((5 * nu + 1) * (k - 1))
        lhs = mpmath.mpf(theta_k.numerator) / theta_k.denominator
        return bool(lhs <= rhs)


def radius_estimate(seq, start=None):
    """Radius of convergence of ``sum seq_k z^k`` from a fit of
    ``log seq_k = a + b log k - k log R`` over the upper half of the indices.

    The ``log k`` term absorbs the algebraic prefactor that biases the plain
    root test at small K.
    """
    ks = np.arange(1, len(seq) + 1)
    start = len(seq) // 2 if start is None else start
    sel = [(k, _log10(v) * math.log(10)) for k, v in zip(ks, seq) if k > start and v > 0]
    if len(sel) < 3:
        return math.nan
    k = np.array([s[0] for s in sel], dtype=float)
    y = np.array([s[1] for s in sel])
    X = np.column_stack([np.ones_like(k), np.log(k), k])
    coef = np.linalg.lstsq(X, y, rcond=None)[0]
    return float(math.exp(-coef[2]))


@dataclass(frozen=True)
class BoundsReport:
    lemma1: list  # (k, holds)
    tau_radius: float
    tau_root_test: float  # plain tau_K^(-1/K)
    tau_radius_rel_error: float
    lemma3: list  # (k, holds)
    gamma_radius_closed: float
    gamma_radius_estimate: float  # gamma_K^(-1/K)

    @property
    def lemma1_ok(self):
        return all(h for _, h in self.lemma1)

    @property
    def lemma3_ok(self):
        return all(h for _, h in self.lemma3)

    @property
    def tau_radius_ok(self):
        return self.tau_radius_rel_error <= 0.10

    def to_dict(self):
        return {
            "lemma1_holds": self.lemma1_ok,
            "lemma1_failures": [k for k, h in self.lemma1 if not h],
            "tau_radius_fit": self.tau_radius,
            "tau_radius_root_test": self.tau_root_test,
            "tau_radius_reference": TAU_RADIUS,
            "tau_radius_rel_error": self.tau_radius_rel_error,
            "tau_radius_tolerance": 0.10,
            "gamma_le_theta_tau": self.lemma3_ok,
            "gamma_le_theta_tau_failures": [k for k, h in self.lemma3 if not h],
            "gamma_radius_closed_bound": self.gamma_radius_closed,
            "gamma_radius_estimate": self.gamma_radius_estimate,
        }


def verify_bounds(seqs):
    K = seqs.K
    lemma1 = [(k, _lemma1_holds(seqs.theta[k - 1], k, seqs.nu)) for k in range(1, K + 1)]
    lemma3 = [(k, seqs.gamma[k - 1] <= seqs.theta[k - 1] * seqs.tau[k - 1]) for k in range(1, K + 1)]
    R = radius_estimate(seqs.tau)
    root = math.exp(-_log10(seqs.tau[-1]) * math.log(10) / K) if K > 1 else math.nan
    rel = abs(R - TAU_RADIUS) / TAU_RADIUS if math.isfinite(R) else math.inf
    closed = TAU_RADIUS * 2.0 ** (-5.0 * seqs.nu - 1.0)
    # gamma is still accelerating at K <= 60, so only the plain root test is
    # reported; it overstates the growth rate compared to the limit
    groot = math.exp(-_log10(seqs.gamma[-1]) * math.log(10) / K) if K > 1 else math.nan
    return BoundsReport(lemma1, R, root, rel, lemma3, closed, groot)


# -- Lemma 5 ----------------------------------------------------------------
@dataclass(frozen=True)
class Lemma5Row:
    s: float
    x: float
    lhs: float
    rhs: float

    @property
    def holds(self):
        return self.lhs <= self.rhs


def lemma5_check(s_values=(1, 2, 3), x_values=(0.5, 0.9, 0.99), n_max=10**6):
    """``sum_{n <= n_max} x^n n^s`` against ``Gamma(s+1)/(1-x)^(s+1)``."""
    n = np.arange(1, int(n_max) + 1, dtype=float)
    rows = []
    for s in s_values:
        for x in x_values:
            terms = np.exp(n * math.log(x) + s * np.log(n))
            lhs = float(math.fsum(terms))
            rows.append(Lemma5Row(float(s), float(x), lhs, lemma5_constant(s) / (1.0 - x) ** (s + 1)))
    return rows


# -- schedule ------------------------------------------------------------------
@dataclass(frozen=True)
class Schedule:
    delta: float
    C: float
    tau: float
    nu: int
    K: int
    d: tuple  # d[k - 2] = d_k, k = 2..K
    deltas: tuple  # deltas[k - 1] = delta_k, k = 1..K
    eps: tuple  # eps[n - 1] = eps_n = C n / d_{n+1}^(3+tau)
    series_bound: float  # bound on the full sum over k >= 2 of d_k

    @property
    def admissible(self):
        return self.series_bound < self.delta / 2

    def to_dict(self):
        return {
            "delta": self.delta, "C": self.C, "tau": self.tau, "nu": self.nu, "K": self.K,
            "d": list(self.d), "delta_k": list(self.deltas),
            "log10_eps": [_log10(e) for e in self.eps],
            "sum_d_bound": self.series_bound, "half_delta": self.delta / 2,
            "admissible": self.admissible,
        }


def _d(m, C, tau, nu):
    # (C m / (2m)^nu)^(1/(3+tau)) in logs, so large nu does not underflow early
    s = 3.0 + tau
    return math.exp((math.log(C * m) - nu * math.log(2.0 * m)) / s)


def series_bound(C, tau, nu, M=200):
    """Upper bound on ``sum_{m >= 1} (C m / (2m)^nu)^(1/(3+tau))``.

    Direct sum to ``M`` plus the integral of the decreasing tail; infinite
    when the terms do not decay faster than ``1/m``.
    """
    s = 3.0 + tau
    p = (nu - 1.0) / s
    if p <= 1.0:
        return math.inf
    head = math.fsum(_d(m, C, tau, nu) for m in range(1, M + 1))
    tail = (C / 2.0 ** nu) ** (1.0 / s) * M ** (1.0 - p) / (p - 1.0)
    return head + tail


def minimal_nu(delta, C, tau, nu_max=400):
    """Smallest integer ``nu`` whose full series bound stays below ``delta / 2``."""
    for nu in range(1, nu_max + 1):
        if series_bound(C, tau, nu) < delta / 2:
            return nu
    raise CertificationError("no admissible nu in the search range",
                             {"delta": delta, "C": C, "tau": tau, "nu_max": nu_max})


def schedule(delta, C, tau, nu=None, K=12):
    """``d_k``, ``delta_k = delta_{k-1} - d_k`` and ``eps_{k-1} = C(k-1)/d_k^(3+tau)``.

    ``nu=None`` searches the minimal admissible integer. ``eps`` is returned
    as the exact value ``(2(k-1))^nu`` it equals algebraically.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if not C > 0:
        raise ValueError("C must be positive")
    nu = minimal_nu(delta, C, tau) if nu is None else int(nu)
    K = int(K)
    ds = tuple(_d(k - 1, C, tau, nu) for k in range(2, K + 1))
    deltas = [float(delta)]
    for d in ds:
        deltas.append(deltas[-1] - d)
    eps = tuple(eps_cap(n, nu) for n in range(1, K))
    out = Schedule(float(delta), float(C), float(tau), nu, K, ds, tuple(deltas), eps, series_bound(C, tau, nu))
    if not out.admissible:
        raise CertificationError("sum of d_k does not stay below delta/2",
                                 {"nu": nu, "bound": out.series_bound, "half_delta": delta / 2})
    return out


def lemma4_from_alpha(alpha, delta, tau=0.0, n_max=10**5):
    """Lemma-4 constant with the divisor constant measured on ``alpha``."""
    rep = diophantine_check(alpha, DiophantineParams(tau=tau), n_max)
    return lemma4_constant(rep.worst_ratio, tau, delta), rep


# -- certificate ------------------------------------------------------------------
def rescale(F, delta):
    """Conjugate by ``z -> z / a`` with ``a = max_j ||a_j||_delta^(1/(j-1))`` so that
    every coefficient has strip norm <= 1. Returns ``(G, a)``."""
    norms = [(j, F.coeff(j).strip_norm(delta)) for j in range(2, F.N + 1)]
    a = max((nm ** (1.0 / (j - 1)) for j, nm in norms if nm > 0), default=1.0)
    a = max(a, 1e-300)
    coeffs = {j: F.coeff(j) * (a ** (1 - j)) for j in range(2, F.N + 1)}
    return FibredJet.from_coefficients(F.alpha, coeffs, N=F.N, lam=F.lam), a


@dataclass(frozen=True)
class CertificateRow:
    k: int
    delta_k: float
    h_norm: float
    gamma: Fraction
    ill_conditioned: bool

    @property
    def passed(self):
        return Fraction(self.h_norm) <= self.gamma

    def to_dict(self):
        return {"order": self.k, "delta_k": self.delta_k, "h_strip_norm": self.h_norm,
                "log10_gamma": _log10(self.gamma), "passed": self.passed,
                "ill_conditioned": self.ill_conditioned}


@dataclass(frozen=True)
class Certificate:
    scale: float
    rows: list
    stop: object = None  # FlowerFound or ObstructedStep when the scheme stopped early
    schedule: Schedule | None = None
    sequences: SiegelSequences | None = None
    trace: object = field(default=None, repr=False)

    @property
    def passed(self):
        return self.stop is None and all(r.passed for r in self.rows)

    def to_dict(self):
        out = {"scale_a": self.scale, "passed": self.passed, "orders": [r.to_dict() for r in self.rows]}
        if isinstance(self.stop, FlowerFound):
            m = complex(self.stop.mean)
            out["stopped"] = {"kind": "flower", "petals": self.stop.petals, "mean": [m.real, m.imag]}
        elif isinstance(self.stop, ObstructedStep):
            out["stopped"] = {"kind": "obstructed", "order": self.stop.order, "reason": self.stop.reason}
        if self.schedule is not None:
            out["schedule"] = self.schedule.to_dict()
        return out


def certify_trace(trace, seqs, sched):
    """Compare ``strip_norm(h_k, delta_k)`` with ``gamma_k`` for every solved order."""
    rows = []
    for rec in trace.records:
        if rec.h is None:
            raise ValueError(f"trace record at order {rec.k} carries no solution")
        k = rec.k
        if k > min(seqs.K, sched.K):
            raise ValueError(f"order {k} is beyond the sequences / schedule (K = {min(seqs.K, sched.K)})")
        dk = sched.deltas[k - 1]
        rows.append(CertificateRow(k, dk, float(rec.h.strip_norm(dk)), seqs.gamma[k - 1], rec.ill_conditioned))
    return rows


def h_norm_certificate(F, delta, K=None, C=None, tau=0.0, nu=None, mean_tol=1e-10):
    """Rescale ``F``, run the formal scheme to order ``K`` and check
    ``||h_k||_{delta_k} <= gamma_k`` under the computed schedule."""
    K = F.N if K is None else min(int(K), F.N)
    if C is None:
        C, _ = lemma4_from_alpha(F.alpha, delta, tau)
    sched = schedule(delta, C, tau, nu, K)
    seqs = build_sequences(sched.nu, sched.eps, K)
    G, a = rescale(F, delta)
    trace, stop = formal_scheme(G, K, mean_tol)
    return Certificate(a, certify_trace(trace, seqs, sched), stop, sched, seqs, trace)


__all__ = ["SiegelSequences", "build_sequences", "verify_bounds", "BoundsReport", "lemma1_bound",
           "radius_estimate", "lemma5_check", "Lemma5Row", "Schedule", "schedule", "series_bound",
           "minimal_nu", "lemma4_from_alpha", "rescale", "certify_trace", "h_norm_certificate",
           "Certificate", "CertificateRow", "eps_cap", "TAU_RADIUS"]
