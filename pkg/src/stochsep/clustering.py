"""Cluster overlap geometry and a seeded centroid clustering.

Two clusters are summarised by the RMS point-to-centroid radii ``r1``, ``r2``
and the centroid distance ``rho``.  When the balls intersect with the
intersection sphere's centre lying between the two centroids, the lens is
contained in a ball of radius ``R`` and

    gamma = (R / r1)^n + (R / r2)^n

bounds the fraction of each ball's volume inside the lens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInput, DisjointClusters, EngulfedCluster
from .preprocess import as_data_matrix


def overlap_radius(r1: float, r2: float, rho: float) -> float:
    """Radius of the ball enclosing the intersection of two balls.

    Raises:
        DisjointClusters: ``rho >= r1 + r2``.
        EngulfedCluster: ``rho^2 <= |r1^2 - r2^2|``.
    """
    if min(r1, r2, rho) < 0:
        raise ValueError("radii and distance must be nonnegative")
    if rho >= r1 + r2:
        raise DisjointClusters(f"rho={rho:.6g} >= r1 + r2={r1 + r2:.6g}; balls do not overlap")
    d2 = r1 * r1 - r2 * r2
    if rho * rho <= abs(d2):
        raise EngulfedCluster(
            f"rho^2={rho * rho:.6g} <= |r1^2 - r2^2|={abs(d2):.6g}; "
            "the larger ball holds more than half of the smaller one"
        )
    R2 = 0.5 * (r1 * r1 + r2 * r2) - 0.25 * rho * rho - d2 * d2 / (4.0 * rho * rho)
    return math.sqrt(max(R2, 0.0))


@dataclass(frozen=True)
class ClusterPairStats:
    r1: float
    r2: float
    rho: float
    n: float


def cluster_goodness(stats: ClusterPairStats) -> float:
    """``(R / r1)^n + (R / r2)^n``; disjoint clusters score 0.

    Raises:
        EngulfedCluster: propagated from :func:`overlap_radius`.
    """
    try:
        R = overlap_radius(stats.r1, stats.r2, stats.rho)
    except DisjointClusters:
        return 0.0
    if R == 0.0:
        return 0.0
    return math.exp(stats.n * math.log(R / stats.r1)) + math.exp(stats.n * math.log(R / stats.r2))


# ---------------------------------------------------------------------------
# Clustering


@dataclass
class Clustering:
    assignments: np.ndarray
    centroids: np.ndarray
    radii: np.ndarray
    n_iter: int

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d = (
        np.einsum("ij,ij->i", X, X)[:, None]
        - 2.0 * X @ C.T
        + np.einsum("ij,ij->i", C, C)[None, :]
    )
    return np.maximum(d, 0.0)


def farthest_point_init(X: np.ndarray, k: int, seed: int = 0) -> np.ndarray:
    """Seeded first centre, then repeatedly the point farthest from all chosen centres."""
    rng = np.random.default_rng(seed)
    chosen = [int(rng.integers(X.shape[0]))]
    d = _sq_dists(X, X[chosen])[:, 0]
    for _ in range(1, k):
        nxt = int(np.argmax(d))
        chosen.append(nxt)
        d = np.minimum(d, _sq_dists(X, X[[nxt]])[:, 0])
    return X[chosen].copy()


def cluster_points(X, k: int, seed: int = 0, max_iter: int = 100, tol: float = 1e-6) -> Clustering:
    """Centroid clustering (Lloyd iterations) from farthest-point seeding.

    Iteration stops after ``max_iter`` rounds or once no centroid moves more
    than ``tol`` times the data scale.  An emptied cluster is re-seeded at the
    point farthest from its current centroid.  Ties go to the lowest index, so
    results depend only on ``(X, k, seed)``.
    """
    X = as_data_matrix(X)
    m = X.shape[0]
    if not 1 <= k <= m:
        raise DegenerateInput(f"k must lie in [1, {m}], got {k}")
    C = farthest_point_init(X, k, seed)
    scale = max(float(np.sqrt(np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1)))), 1e-300)
    labels = np.argmin(_sq_dists(X, C), axis=1)
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        new_C = C.copy()
        for j in range(k):
            members = labels == j
            if members.any():
                new_C[j] = X[members].mean(axis=0)
            else:
                d = _sq_dists(X, C[j:j + 1])[:, 0]
                new_C[j] = X[int(np.argmax(d))]
        shift = float(np.max(np.sqrt(np.sum((new_C - C) ** 2, axis=1))))
        C = new_C
        labels = np.argmin(_sq_dists(X, C), axis=1)
        if shift <= tol * scale:
            break
    # Final centroids are exact means of the final partition.
    for j in range(k):
        members = labels == j
        if members.any():
            C[j] = X[members].mean(axis=0)
    return Clustering(labels, C, rms_radii(X, labels, C), n_iter)


def rms_radii(X: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    radii = np.zeros(centroids.shape[0])
    for j in range(centroids.shape[0]):
        members = X[labels == j]
        if members.shape[0]:
            radii[j] = math.sqrt(float(np.mean(np.sum((members - centroids[j]) ** 2, axis=1))))
    return radii


# ---------------------------------------------------------------------------
# All-pairs goodness


OK, DISJOINT, ENGULFED, SELF = "ok", "disjoint", "engulfed", "self"


@dataclass
class PairwiseGoodness:
    """gamma for every pair of clusters.

    ``status[i][j]`` is one of ``ok``, ``disjoint`` (gamma = 0), ``engulfed``
    (no bound; gamma stored as ``inf``, ``null`` in JSON) or ``self`` on the
    diagonal.
    """

    labels: list
    gamma: np.ndarray
    status: list[list[str]]
    radii: np.ndarray
    centroid_distance: np.ndarray
    n: float

    def to_dict(self) -> dict:
        def cell(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "labels": [int(l) for l in self.labels],
            "n": self.n,
            "radii": self.radii.tolist(),
            "centroid_distance": self.centroid_distance.tolist(),
            "gamma": [[cell(v) for v in row] for row in self.gamma],
            "status": self.status,
        }


def pairwise_goodness(X, assignments, n_override: float | None = None) -> PairwiseGoodness:
    """Apply the overlap/gamma computation to every pair of clusters in a labelling.

    ``n`` defaults to the column count of ``X``; pass ``n_override`` to use an
    effective or retained dimension instead.
    """
    X = as_data_matrix(X)
    assignments = np.asarray(assignments)
    if assignments.shape[0] != X.shape[0]:
        raise DegenerateInput("one assignment per row is required")
    labels = sorted(set(assignments.tolist()))
    K = len(labels)
    centroids = np.array([X[assignments == l].mean(axis=0) for l in labels])
    lab_idx = np.searchsorted(labels, assignments)
    radii = rms_radii(X, lab_idx, centroids)
    # Direct differences: identical clusters must give rho == 0 exactly.
    rho = np.linalg.norm(centroids[:, None, :] - centroids[None, :, :], axis=-1)
    n = float(X.shape[1] if n_override is None else n_override)
    gamma = np.zeros((K, K))
    status = [[OK] * K for _ in range(K)]
    for i in range(K):
        for j in range(K):
            if i == j:
                gamma[i, j], status[i][j] = math.inf, SELF
                continue
            try:
                gamma[i, j] = cluster_goodness(ClusterPairStats(radii[i], radii[j], rho[i, j], n))
            except EngulfedCluster:
                gamma[i, j], status[i][j] = math.inf, ENGULFED
                continue
            if rho[i, j] >= radii[i] + radii[j]:
                status[i][j] = DISJOINT
    return PairwiseGoodness(labels, gamma, status, radii, rho, n)
