"""Effective dimension from empirical Fisher separability.

The data are centered, whitened (condition number capped at 10 by default) and
projected onto the unit sphere.  For every point ``y`` the fraction ``p_y`` of
other points not separable from it is counted; the mean ``p_bar`` is matched
against the sphere formula ``p(n, alpha)``, which is strictly decreasing in
``n``, and the matching ``n`` is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import log_sphere_py_asymptotic
from .errors import DegenerateInput
from .preprocess import ConditionNumber, RetentionRule, as_data_matrix, fit_whitening
from .separability import _check_alpha, violation_matrix_blocks

N_MIN = 2.0
N_MAX = 1e6


def empirical_py(Y, alpha: float) -> np.ndarray:
    """``p_y = #{x != y : (x, y) > alpha (x, x)} / (m - 1)`` for every row ``y``."""
    alpha = _check_alpha(alpha)
    Y = as_data_matrix(Y)
    m = Y.shape[0]
    if m < 2:
        raise DegenerateInput(f"need at least 2 points, got {m}")
    counts = np.zeros(m, dtype=np.int64)
    for start, V in violation_matrix_blocks(Y, Y, alpha):
        rows = np.arange(V.shape[0])
        V[rows, start + rows] = False
        counts += V.sum(axis=0)
    return counts / (m - 1)


def sphere_normalize(Y, rule: RetentionRule | None = None) -> np.ndarray:
    """Center, whiten and project each point onto the unit sphere.

    Points that whiten to exactly zero are dropped.
    """
    Z, _ = fit_whitening(Y, rule if rule is not None else ConditionNumber(10.0))
    norms = np.sqrt(np.einsum("ij,ij->i", Z, Z))
    keep = norms > 0
    return Z[keep] / norms[keep, None]


def invert_log_sphere_formula(log_p_bar: float, alpha: float, variant: str = "n", rtol: float = 1e-12) -> float:
    """Solve ``log p(n, alpha) = log_p_bar`` for real ``n`` in ``[2, 1e6]`` by bisection.

    Callers handle targets outside the attainable range; here they are
    clamped to the bracket ends.
    """
    lo, hi = N_MIN, N_MAX
    if log_sphere_py_asymptotic(lo, alpha, variant) <= log_p_bar:
        return lo
    if log_sphere_py_asymptotic(hi, alpha, variant) >= log_p_bar:
        return hi
    while hi - lo > rtol * lo:
        mid = 0.5 * (lo + hi)
        if log_sphere_py_asymptotic(mid, alpha, variant) > log_p_bar:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def invert_sphere_formula(p_bar: float, alpha: float, variant: str = "n", rtol: float = 1e-12) -> float:
    """Solve ``p(n, alpha) = p_bar``; see :func:`invert_log_sphere_formula`."""
    if not p_bar > 0:
        raise ValueError("p_bar must be positive")
    return invert_log_sphere_formula(math.log(p_bar), alpha, variant, rtol)


def witness_limit_dimension(m: int, alpha: float, variant: str = "n") -> float:
    """Dimension ``n*`` at which ``m (m - 1) p(n*, alpha) = 1``.

    Beyond ``n*`` a sample of ``m`` points is not expected to contain a single
    violating pair, so an all-separable sample only shows ``n_eff >= n*``.
    """
    return invert_log_sphere_formula(-math.log(m) - math.log(m - 1), alpha, variant)


@dataclass
class DimensionEstimate:
    alpha: float
    p_bar: float
    n_eff: float
    per_point: np.ndarray = field(repr=False)
    variant: str = "n"
    saturated_zero: bool = False
    saturated_one: bool = False

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "p_bar": self.p_bar,
            "n_eff": self.n_eff,
            "variant": self.variant,
            "n_points": int(self.per_point.shape[0]),
            "saturated_zero": self.saturated_zero,
            "saturated_one": self.saturated_one,
        }


def estimate_from_py(per_point: np.ndarray, alpha: float, variant: str = "n") -> DimensionEstimate:
    """Turn a sample of ``p_y`` values (already on the sphere) into an estimate."""
    alpha = _check_alpha(alpha)
    per_point = np.asarray(per_point, dtype=np.float64)
    m = per_point.shape[0]
    p_bar = float(per_point.mean())
    if p_bar == 0.0:
        n_star = witness_limit_dimension(m, alpha, variant)
        return DimensionEstimate(alpha, p_bar, n_star, per_point, variant, saturated_zero=True)
    if math.log(p_bar) >= log_sphere_py_asymptotic(N_MIN, alpha, variant):
        return DimensionEstimate(alpha, p_bar, N_MIN, per_point, variant, saturated_one=True)
    n_eff = invert_sphere_formula(p_bar, alpha, variant)
    return DimensionEstimate(alpha, p_bar, n_eff, per_point, variant)


def effective_dimension(
    Y,
    alpha: float = 0.8,
    variant: str = "n",
    rule: RetentionRule | None = None,
    preprocess: bool = True,
) -> DimensionEstimate:
    """Separability-based effective dimension of the rows of ``Y``.

    Args:
        Y: Data matrix, one point per row.
        alpha: Separation threshold.
        variant: ``"n"`` for the ``sqrt(2 pi n)`` denominator, ``"n-1"`` for
            ``sqrt(2 pi (n - 1))``.
        rule: Retention rule for whitening; defaults to ``ConditionNumber(10)``.
        preprocess: Skip centering/whitening/sphere projection when ``False``
            (input must already lie on the unit sphere).

    Returns:
        A :class:`DimensionEstimate`.  If no violations are observed,
        ``saturated_zero`` is set and ``n_eff`` is the witness limit, a lower
        bound.  If ``p_bar`` reaches the ``n = 2`` value, ``saturated_one`` is
        set and ``n_eff = 2``.
    """
    Z = sphere_normalize(Y, rule) if preprocess else as_data_matrix(Y)
    if Z.shape[0] < 2:
        raise DegenerateInput("fewer than 2 usable points after preprocessing")
    return estimate_from_py(empirical_py(Z, alpha), alpha, variant)


@dataclass
class MultiAlphaEstimate:
    estimates: list[DimensionEstimate]

    @property
    def n_eff(self) -> float:
        """Mean ``n_eff`` over the thresholds that were not saturated."""
        ok = [e.n_eff for e in self.estimates if not (e.saturated_zero or e.saturated_one)]
        return float(np.mean(ok)) if ok else float("nan")

    def to_dict(self) -> dict:
        return {"n_eff": self.n_eff, "per_alpha": [e.to_dict() for e in self.estimates]}


def effective_dimension_grid(Y, alphas, variant: str = "n", rule: RetentionRule | None = None) -> MultiAlphaEstimate:
    """Run :func:`effective_dimension` at several thresholds sharing one preprocessing pass."""
    Z = sphere_normalize(Y, rule)
    return MultiAlphaEstimate([effective_dimension(Z, a, variant, preprocess=False) for a in alphas])
