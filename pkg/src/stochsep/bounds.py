"""Closed-form separability bounds and certified sample sizes.

Everything is evaluated in log space; the ``log_*`` functions stay finite for
any dimension, while their exponentiated counterparts may underflow to 0 once
the probability drops below about ``1e-308``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext

import mpmath

from .errors import InapplicableBound, InvalidThreshold

LOG_PI = math.log(math.pi)
LOG_2PI = math.log(2.0 * math.pi)


def _check_dim(n, minimum: int = 1) -> float:
    n = float(n)
    if not n >= minimum:
        raise InapplicableBound(f"dimension must be >= {minimum}, got {n:g}")
    return n


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidThreshold(f"alpha must satisfy 0 < alpha < 1, got {alpha}")
    return alpha


# ---------------------------------------------------------------------------
# Volumes and areas


def log_ball_volume(n) -> float:
    """log of the volume of the unit ball in R^n: pi^(n/2) / Gamma(n/2 + 1)."""
    n = _check_dim(n)
    return 0.5 * n * LOG_PI - math.lgamma(0.5 * n + 1.0)


def ball_volume(n) -> float:
    return math.exp(log_ball_volume(n))


def log_sphere_area(n) -> float:
    """log of the area of the unit sphere S^(n-1) in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    n = _check_dim(n)
    return math.log(2.0) + 0.5 * n * LOG_PI - math.lgamma(0.5 * n)


def sphere_area(n) -> float:
    """Area of the unit sphere bounding the ball in R^n (``A_{n-1}``); ``sphere_area(2) = 2 pi``."""
    return math.exp(log_sphere_area(n))


# ---------------------------------------------------------------------------
# Ball-support bounds


@dataclass(frozen=True)
class BallBoundParams:
    """Parameters of the bounded-density model in the unit ball.

    Attributes:
        n: Dimension.
        b: Growth base of the sample size, ``|Y| < b^n``.
        r: Density decay base: ``rho_max < C / (r^n V_n)``.
        alpha: Separation threshold.
        C: Density constant.
    """

    n: float
    b: float
    r: float
    alpha: float
    C: float = 1.0

    def __post_init__(self):
        if not self.n >= 1:
            raise InapplicableBound(f"n must be >= 1, got {self.n}")
        if not self.C > 0:
            raise InapplicableBound(f"C must be > 0, got {self.C}")
        if not self.r > 0:
            raise InapplicableBound(f"r must be > 0, got {self.r}")
        _check_alpha(self.alpha)

    @property
    def log_ratio(self) -> float:
        """log(b / (2 r alpha))."""
        return math.log(self.b) - math.log(2.0 * self.r * self.alpha)


def theorem1_log_psi(p: BallBoundParams) -> float:
    if not p.b > 1.0:
        raise InapplicableBound(f"single-point bound requires b > 1, got b={p.b}")
    if not 2.0 * p.r * p.alpha > p.b:
        raise InapplicableBound(
            f"single-point bound requires 2*r*alpha > b, got 2*r*alpha={2 * p.r * p.alpha:.6g} <= b={p.b:.6g}"
        )
    return math.log(p.C) + p.n * p.log_ratio


def theorem1_psi(p: BallBoundParams) -> float:
    """Upper bound ``C (b / (2 r alpha))^n`` on the chance that a random point
    is not separable from a set of fewer than ``b^n`` points.

    The value is returned unclamped; read it as ``min(bound, 1)``.
    """
    return math.exp(theorem1_log_psi(p))


@dataclass(frozen=True)
class SetBound:
    """Both forms of the whole-set inseparability bound."""

    tight: float
    loose: float
    log_tight: float
    log_loose: float


def theorem2_psi(p: BallBoundParams, sample_size: int) -> SetBound:
    """Bound the chance that a sample of ``sample_size`` points is not Fisher-separable.

    ``tight = |Y| C (b / (2 r alpha))^n`` and ``loose = C (b^2 / (2 r alpha))^n``.

    Raises:
        InapplicableBound: ``2 r alpha > b^2 > 1`` fails or ``|Y| > b^n``.
    """
    if not sample_size >= 1:
        raise InapplicableBound(f"sample size must be >= 1, got {sample_size}")
    b2 = p.b * p.b
    if not b2 > 1.0:
        raise InapplicableBound(f"set bound requires b^2 > 1, got b^2={b2:.6g}")
    if not 2.0 * p.r * p.alpha > b2:
        raise InapplicableBound(
            f"set bound requires 2*r*alpha > b^2, got 2*r*alpha={2 * p.r * p.alpha:.6g} <= b^2={b2:.6g}"
        )
    log_size = math.log(sample_size)
    log_cap = p.n * math.log(p.b)
    # |Y| = b^n exactly is admitted; slack absorbs the rounding of b = |Y|^(1/n).
    if log_size > log_cap + 1e-12 * max(1.0, abs(log_cap)):
        raise InapplicableBound(
            f"set bound requires |Y| < b^n, got log|Y|={log_size:.6g} > n*log(b)={log_cap:.6g}"
        )
    log_tight = log_size + math.log(p.C) + p.n * p.log_ratio
    log_loose = math.log(p.C) + p.n * (math.log(b2) - math.log(2.0 * p.r * p.alpha))
    return SetBound(math.exp(log_tight), math.exp(log_loose), log_tight, log_loose)


# ---------------------------------------------------------------------------
# Sphere caps


def log_sphere_cap_bound_cone(n, alpha) -> float:
    n = _check_dim(n, 4)
    alpha = _check_alpha(alpha)
    # A_{n-2} / A_{n-1} = Gamma(n/2) / (sqrt(pi) Gamma((n-1)/2))
    log_area_ratio = math.lgamma(0.5 * n) - math.lgamma(0.5 * (n - 1)) - 0.5 * LOG_PI
    return (
        log_area_ratio
        + 0.5 * (n - 1) * math.log1p(-alpha * alpha)
        - math.log(alpha)
        - math.log(n - 1)
    )


def sphere_cap_bound_cone(n, alpha) -> float:
    """Cone-surface bound on the cap measure ``p_y(alpha)`` on ``S^(n-1)``.

    The cap of points not separable from ``y`` has base radius
    ``sqrt(1 - alpha^2)``; its area is below the lateral surface of the cone
    tangent to the sphere along the base rim, which normalised by the sphere
    area gives ``A_{n-2}/A_{n-1} (1 - alpha^2)^((n-1)/2) / (alpha (n - 1))``.

    Raises:
        InapplicableBound: ``n < 4``.
    """
    return math.exp(log_sphere_cap_bound_cone(n, alpha))


def log_sphere_cap_bound_elementary(n, alpha) -> float:
    n = _check_dim(n, 2)
    alpha = _check_alpha(alpha)
    return 0.5 * (n - 1) * math.log1p(-alpha * alpha) - math.log(alpha) - 0.5 * (LOG_2PI + math.log(n - 1))


def sphere_cap_bound_elementary(n, alpha) -> float:
    """``(1 - alpha^2)^((n-1)/2) / (alpha sqrt(2 pi (n-1)))``, an upper bound on ``p_y(alpha)``."""
    return math.exp(log_sphere_cap_bound_elementary(n, alpha))


def _variant_offset(variant: str) -> float:
    v = str(variant).replace("_", "-").lower()
    if v == "n":
        return 0.0
    if v in ("n-1", "n-minus-1"):
        return 1.0
    raise ValueError(f"variant must be 'n' or 'n-1', got {variant!r}")


def log_sphere_py_asymptotic(n, alpha, variant: str = "n") -> float:
    n = _check_dim(n, 2)
    alpha = _check_alpha(alpha)
    denom_n = n - _variant_offset(variant)
    return 0.5 * (n - 1) * math.log1p(-alpha * alpha) - math.log(alpha) - 0.5 * (LOG_2PI + math.log(denom_n))


def sphere_py_asymptotic(n, alpha, variant: str = "n") -> float:
    """Large-``n`` approximation of ``p_y(alpha)`` on the sphere.

    ``variant="n-1"`` uses the ``sqrt(2 pi (n-1))`` denominator (identical to
    :func:`sphere_cap_bound_elementary`); ``variant="n"`` uses ``sqrt(2 pi n)``,
    which is closer in small dimensions.
    """
    return math.exp(log_sphere_py_asymptotic(n, alpha, variant))


def sphere_cap_measure(n, alpha) -> float:
    """Exact normalised area of ``{x in S^(n-1): x_1 > alpha}``.

    Equals ``I_{1 - alpha^2}((n-1)/2, 1/2) / 2`` (regularised incomplete beta).
    """
    n = _check_dim(n, 2)
    alpha = _check_alpha(alpha)
    with mpmath.workdps(30):
        val = mpmath.betainc(0.5 * (n - 1), 0.5, 0, 1 - mpmath.mpf(alpha) ** 2, regularized=True) / 2
    return float(val)


# ---------------------------------------------------------------------------
# Certified sample sizes


@dataclass(frozen=True)
class SphereBoundParams:
    n: int
    alpha: float
    psi: float

    def __post_init__(self):
        if not self.n >= 2:
            raise InapplicableBound(f"sphere bounds need n >= 2, got {self.n}")
        _check_alpha(self.alpha)
        if not 0.0 < self.psi < 1.0:
            raise InapplicableBound(f"psi must lie in (0, 1), got {self.psi}")


def _max_count(p: SphereBoundParams, power: int) -> int:
    # Largest integer M with M^power * bound < psi, i.e. ceil((psi/bound)^(1/power)) - 1.
    with mpmath.workdps(40):
        a = mpmath.mpf(p.alpha)
        log_bound = (
            (mpmath.mpf(p.n) - 1) / 2 * mpmath.log(1 - a * a)
            - mpmath.log(a)
            - mpmath.log(2 * mpmath.pi * (p.n - 1)) / 2
        )
        x = mpmath.exp((mpmath.log(mpmath.mpf(p.psi)) - log_bound) / power)
        return max(0, int(mpmath.ceil(x)) - 1)


def max_sample_single(p: SphereBoundParams) -> int:
    """Largest ``|Y|`` with ``|Y| * bound < psi``: with probability above
    ``1 - psi`` every sample point is separable from a given point.

    0 means the bound certifies nothing.
    """
    return _max_count(p, 1)


def max_sample_mutual(p: SphereBoundParams) -> int:
    """Largest ``|Y|`` with ``|Y|^2 * bound < psi``: with probability above
    ``1 - psi`` the whole sample is Fisher-separable."""
    return _max_count(p, 2)


@dataclass(frozen=True)
class TableRow:
    n: int
    m1: int
    m2: int


def separation_table(ns, alpha: float = 0.8, psi: float = 0.01) -> list[TableRow]:
    rows = []
    for n in ns:
        p = SphereBoundParams(int(n), alpha, psi)
        rows.append(TableRow(int(n), max_sample_single(p), max_sample_mutual(p)))
    return rows


def format_sig(value: int, digits: int = 3) -> str:
    """Render counts below ``10^digits`` exactly and larger ones as ``d.dde+XX`` (half-up)."""
    value = int(value)
    if value < 10**digits:
        return str(value)
    with localcontext() as ctx:
        ctx.rounding = ROUND_HALF_UP
        return f"{Decimal(value):.{digits - 1}e}"
