"""Ready-made maps used by tests, the acceptance suite and the CLI examples."""

from .fibredjet import FibredJet
from .reduction import classify
from .rotation import RootOfUnity, RotationNumber
from .trigpoly import TrigPoly


def golden():
    return RotationNumber.golden()


def example1(alpha=None, N=3):
    """``z + sin(2 pi theta) z^2``: two petals."""
    return FibredJet.from_coefficients(alpha or golden(), {2: TrigPoly.sin()}, N=N)


def example2(alpha=None, N=4):
    """``a_2 = sin``, ``a_3 = sin^2``, ``a_4 = cos^2``: three petals."""
    s = TrigPoly.sin()
    return FibredJet.from_coefficients(alpha or golden(), {2: s, 3: s * s, 4: TrigPoly.cos() ** 2}, N=N)


def scalar_parabola(alpha=None, N=2):
    """``z + z^2`` with trivial fibre dependence."""
    return FibredJet.from_coefficients(alpha or golden(), {2: 1.0}, N=N)


def qtwist(alpha=None, N=12):
    """``a_2 = exp(-2 pi i alpha) e_1``: every reduction mean vanishes."""
    alpha = alpha or golden()
    return FibredJet.from_coefficients(alpha, {2: TrigPoly.mode(1, complex(alpha.phases([-1], extended=False)[0]))}, N=N)


def cascade_map(a, alpha=None, N=6):
    """``z / (1 - a z)``, i.e. ``Z -> Z + a(theta)`` in ``Z = -1/z``."""
    return FibredJet.from_coefficients(alpha or golden(), {j: a ** (j - 1) for j in range(2, N + 1)}, N=N)


def half_turn(alpha=None, N=5):
    """Multiplier ``-1`` with ``a_2 = 1 + 0.3 cos``, ``a_3 = 0.2 sin``."""
    a2 = TrigPoly.constant(1.0) + TrigPoly.cos() * 0.3
    return FibredJet.from_coefficients(alpha or golden(), {2: a2, 3: TrigPoly.sin() * 0.2}, N=N,
                                       lam=RootOfUnity(1, 2))


# -- alpha-dependent petal count ------------------------------------------------
def example3_a2():
    """``sin(2 pi theta) + sin(4 pi theta)``.

    With ``a_2 = sin`` alone the order-4 mean does not depend on alpha: the
    products that reach mode 0 pair ``1/(e^{i phi} - 1)`` with its conjugate
    partner, whose sum is the constant -1. A second mode breaks that symmetry.
    """
    return TrigPoly.sin(1) + TrigPoly.sin(2)


def example3(alpha, a4, a5, N=5):
    a2 = example3_a2()
    a3 = (a2 * a2).mean()
    return FibredJet.from_coefficients(alpha, {2: a2, 3: a3, 4: a4, 5: a5}, N=N)


def order_mean(F, order):
    """Mean of the leading coefficient met at ``order`` (None if the flower appears earlier)."""
    c = classify(F, max_order=order, mean_tol=1e-10)
    v = c.verdict
    if getattr(v, "leading_order", None) == order:
        return complex(v.leading_mean)
    if getattr(v, "leading_order", order) < order:
        return None
    return 0j


def example3_constants(alpha_star):
    """Constants ``a_4``, ``a_5`` making ``alpha_star`` a 4-petal rotation.

    The order-4 mean is affine in the constant ``a_4``; two evaluations fix the
    root. ``a_5 = 1`` then gives a nonzero order-5 mean (checked by the caller).
    """
    m0 = order_mean(example3(alpha_star, 0.0, 0.0), 4)
    m1 = order_mean(example3(alpha_star, 1.0, 0.0), 4)
    a4 = -m0 / (m1 - m0)
    return a4, 1.0


def example3_scan(alpha_star=None, candidates=None, min_gap=1e-3):
    """Find ``alpha_**`` among quadratic irrationals ``[0; m, 1, 1, ...]`` whose
    order-4 mean for the ``alpha_star`` data exceeds ``min_gap``."""
    alpha_star = alpha_star or golden()
    a4, a5 = example3_constants(alpha_star)
    if candidates is None:
        candidates = [RotationNumber.from_cf([0, m, 1], periodic_tail=1) for m in range(2, 40)]
    for alpha in candidates:
        m = order_mean(example3(alpha, a4, a5), 4)
        if m is not None and abs(m) > min_gap:
            return alpha_star, alpha, a4, a5
    return alpha_star, None, a4, a5
