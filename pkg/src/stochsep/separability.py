"""Fisher separability of points and finite sets.

A point ``x`` is Fisher-separable from a set ``Y`` with threshold ``alpha``
when ``(x, y) <= alpha * (x, x)`` for every ``y`` in ``Y``.  For a given ``y``
the violating ``x`` fill the open ball centred at ``y / (2 alpha)`` with
radius ``|y| / (2 alpha)``.

Dataset audits are exact and exhaustive: the Gram matrix is evaluated block by
block, so memory stays at ``O(block * m)`` while the work is ``O(m^2 d)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, InvalidThreshold
from .preprocess import as_data_matrix

DEFAULT_PAIR_CAP = 1000
_BLOCK = 2048
# Cap on Gram entries held at once (32 MiB of float64).
_BLOCK_ENTRIES = 1 << 22


def _block_rows(n_cols: int) -> int:
    return max(1, min(_BLOCK, _BLOCK_ENTRIES // max(1, n_cols)))


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha < 1.0:
        raise InvalidThreshold(f"alpha must satisfy 0 <= alpha < 1, got {alpha}")
    return alpha


def is_separable_point(x, Y, alpha: float) -> tuple[bool, np.ndarray]:
    """Test ``(x, y) <= alpha (x, x)`` against every row ``y`` of ``Y``.

    Returns:
        ``(separable, violators)`` where ``violators`` holds the row indices
        of ``Y`` for which the inequality fails.
    """
    alpha = _check_alpha(alpha)
    x = np.asarray(x, dtype=np.float64).ravel()
    Y = as_data_matrix(Y)
    if Y.shape[1] != x.shape[0]:
        raise DimensionMismatch(f"x has dimension {x.shape[0]}, Y has {Y.shape[1]}")
    violators = np.flatnonzero(Y @ x > alpha * (x @ x))
    return violators.size == 0, violators


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def contains(self, z) -> np.ndarray:
        """Strict-interior membership for one point or a batch of rows."""
        z = np.asarray(z, dtype=np.float64)
        diff = z - self.center
        return np.sqrt(np.sum(diff * diff, axis=-1)) < self.radius


def excluded_ball(y, alpha: float) -> Ball:
    """The open ball of points that are *not* separable from ``y``.

    Raises:
        InvalidThreshold: ``alpha`` is not in ``(0, 1)``; at ``alpha = 0`` the
            region is a half-space.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise InvalidThreshold(f"excluded ball needs 0 < alpha < 1, got {alpha}")
    y = np.asarray(y, dtype=np.float64).ravel()
    return Ball(center=y / (2.0 * alpha), radius=float(np.linalg.norm(y)) / (2.0 * alpha))


def violation_matrix_blocks(X: np.ndarray, Y: np.ndarray, alpha: float, block: int | None = None):
    """Yield ``(start, V)`` with ``V[i, j] = (x_i, y_j) > alpha (x_i, x_i)``.

    ``V`` covers rows ``start:start + block`` of ``X`` and all rows of ``Y``;
    by default ``block`` keeps each Gram block near 32 MiB.
    """
    if block is None:
        block = _block_rows(Y.shape[0])
    sq = np.einsum("ij,ij->i", X, X)
    for start in range(0, X.shape[0], block):
        stop = min(start + block, X.shape[0])
        G = X[start:stop] @ Y.T
        yield start, G > alpha * sq[start:stop, None]


def inseparability_counts(X, Y, alpha: float) -> np.ndarray:
    """For every row ``y`` of ``Y`` count the rows ``x`` of ``X`` not separable from it.

    ``X`` and ``Y`` are treated as independent sets: no pair is skipped.
    """
    alpha = _check_alpha(alpha)
    X = as_data_matrix(X)
    Y = as_data_matrix(Y)
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(f"X has dimension {X.shape[1]}, Y has {Y.shape[1]}")
    counts = np.zeros(Y.shape[0], dtype=np.int64)
    for _, V in violation_matrix_blocks(X, Y, alpha):
        counts += V.sum(axis=0)
    return counts


@dataclass
class SeparabilityReport:
    """Outcome of an exhaustive Fisher-separability audit.

    ``counts[j]`` is the number of points ``x != y_j`` that fail the
    inequality against ``y_j``; ``frequencies`` divides by ``m - 1``.
    ``violating_pairs`` lists ``(x_index, y_index)`` pairs in row-major order,
    truncated to ``pair_cap`` entries; ``n_violations`` is always exact.
    """

    alpha: float
    counts: np.ndarray
    frequencies: np.ndarray
    n_violations: int
    violating_pairs: list[tuple[int, int]] = field(default_factory=list)
    separable_points: np.ndarray | None = None
    pair_cap: int = DEFAULT_PAIR_CAP

    @property
    def fully_separable(self) -> bool:
        return self.n_violations == 0

    @property
    def n_points(self) -> int:
        return int(self.counts.shape[0])

    @property
    def fraction_separable(self) -> float:
        """Fraction of points ``x`` separable from the rest of the set."""
        return float(np.mean(self.separable_points))

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n_points": self.n_points,
            "fully_separable": self.fully_separable,
            "n_violations": self.n_violations,
            "fraction_separable": self.fraction_separable,
            "mean_frequency": float(np.mean(self.frequencies)),
            "pair_cap": self.pair_cap,
            "pairs_truncated": self.n_violations > len(self.violating_pairs),
            "violating_pairs": [list(p) for p in self.violating_pairs],
        }


def dataset_separability(Y, alpha: float, pair_cap: int = DEFAULT_PAIR_CAP) -> SeparabilityReport:
    """Audit every ordered pair ``(x, y)``, ``x != y``, of the rows of ``Y``.

    Raises:
        DegenerateInput: fewer than two rows.
    """
    alpha = _check_alpha(alpha)
    Y = as_data_matrix(Y)
    m = Y.shape[0]
    if m < 2:
        raise DegenerateInput(f"need at least 2 points, got {m}")
    counts = np.zeros(m, dtype=np.int64)
    separable = np.ones(m, dtype=bool)
    pairs: list[tuple[int, int]] = []
    total = 0
    for start, V in violation_matrix_blocks(Y, Y, alpha):
        rows = np.arange(V.shape[0])
        V[rows, start + rows] = False
        counts += V.sum(axis=0)
        separable[start:start + V.shape[0]] = ~V.any(axis=1)
        n_block = int(V.sum())
        if n_block and len(pairs) < pair_cap:
            ii, jj = np.nonzero(V)
            room = pair_cap - len(pairs)
            pairs.extend((int(i) + start, int(j)) for i, j in zip(ii[:room], jj[:room]))
        total += n_block
    return SeparabilityReport(
        alpha=alpha,
        counts=counts,
        frequencies=counts / (m - 1),
        n_violations=total,
        violating_pairs=pairs,
        separable_points=separable,
        pair_cap=pair_cap,
    )


def separability_profile(Y, alphas) -> list[tuple[float, float]]:
    """Fraction of points separable from the rest of ``Y`` at each threshold.

    One Gram evaluation serves all thresholds: a point ``x`` is separable at
    ``alpha`` iff ``max_{y != x} (x, y) <= alpha (x, x)``.
    """
    alphas = [_check_alpha(a) for a in alphas]
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise InvalidThreshold("alphas must be sorted ascending")
    Y = as_data_matrix(Y)
    m = Y.shape[0]
    if m < 2:
        raise DegenerateInput(f"need at least 2 points, got {m}")
    sq = np.einsum("ij,ij->i", Y, Y)
    worst = np.empty(m)
    block = _block_rows(m)
    for start in range(0, m, block):
        stop = min(start + block, m)
        G = Y[start:stop] @ Y.T
        rows = np.arange(stop - start)
        G[rows, start + rows] = -np.inf
        worst[start:stop] = G.max(axis=1)
    curve = []
    for a in alphas:
        # Same comparison as the pairwise audit: (x, y) > a (x, x) fails.
        ok = ~(worst > a * sq)
        curve.append((a, float(np.mean(ok))))
    return curve
