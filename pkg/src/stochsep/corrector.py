"""One-shot linear correctors for mistakes of a legacy classifier.

A corrector is a linear functional with a threshold acting on whitened
coordinates: a situation ``z`` is flagged high-risk when
``(w, whiten(z)) > threshold``.  Training is closed-form; nothing iterates.

Three constructions are provided:

* :func:`train_single` separates one mistake ``x`` by the Fisher-separability
  inequality, ``w = x`` and ``threshold = alpha (x, x)``;
* :func:`train_fisher` uses the difference of class means (the Fisher
  direction once the within-class covariance is the identity);
* :func:`train_clustered` clusters the mistakes and trains one Fisher
  corrector per cluster, combined by OR.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .clustering import cluster_points
from .errors import DegenerateInput, DimensionMismatch, InvalidThreshold
from .preprocess import WhiteningModel, as_data_matrix

HIGH_RISK = "high_risk"
NORMAL = "normal"

KINDS = ("single_point", "fisher", "cluster_centroid")


@dataclass(frozen=True, eq=False)
class Corrector:
    weights: np.ndarray
    threshold: float
    kind: str
    whitening: WhiteningModel | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown corrector kind {self.kind!r}")
        if not np.any(self.weights):
            raise DegenerateInput("corrector weights are all zero")

    @property
    def dim(self) -> int:
        """Dimension of the raw input expected by :meth:`fires`."""
        return self.whitening.input_dim if self.whitening is not None else self.weights.shape[0]

    def project(self, Z) -> np.ndarray:
        Z = as_data_matrix(Z)
        if Z.shape[1] != self.dim:
            raise DimensionMismatch(f"corrector expects dimension {self.dim}, got {Z.shape[1]}")
        if self.whitening is not None:
            Z = self.whitening.transform(Z)
        return Z @ self.weights

    def fires(self, Z) -> np.ndarray:
        """Boolean flag per row of ``Z`` (raw coordinates if a whitening model is attached)."""
        return self.project(Z) > self.threshold

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "weights": self.weights.tolist(),
            "threshold": _enc(self.threshold),
            "whitening": None if self.whitening is None else self.whitening.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, whitening: WhiteningModel | None = None) -> "Corrector":
        wm = whitening
        if wm is None and data.get("whitening") is not None:
            wm = WhiteningModel.from_dict(data["whitening"])
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            threshold=float(data["threshold"]),
            kind=data["kind"],
            whitening=wm,
        )


def _enc(x: float):
    return x if np.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass(frozen=True, eq=False)
class CorrectorEnsemble:
    """Members combined by OR: a situation is high-risk when any member fires."""

    members: tuple[Corrector, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise DegenerateInput("an ensemble needs at least one corrector")

    def __len__(self) -> int:
        return len(self.members)

    def firing_matrix(self, Z) -> np.ndarray:
        """``(rows, members)`` boolean matrix of individual decisions."""
        Z = as_data_matrix(Z)
        return np.column_stack([c.fires(Z) for c in self.members])

    def fires(self, Z) -> np.ndarray:
        return self.firing_matrix(Z).any(axis=1)

    def extended(self, *correctors: Corrector) -> "CorrectorEnsemble":
        return CorrectorEnsemble(self.members + tuple(correctors))

    def to_dict(self) -> dict:
        # One shared whitening model is stored once at the top level.
        shared = self.members[0].whitening
        same = all(c.whitening is shared for c in self.members)
        members = []
        for c in self.members:
            d = c.to_dict()
            if same:
                d.pop("whitening")
            members.append(d)
        return {
            "combination": "or",
            "whitening": shared.to_dict() if (same and shared is not None) else None,
            "members": members,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorrectorEnsemble":
        shared = WhiteningModel.from_dict(data["whitening"]) if data.get("whitening") else None
        return cls(tuple(Corrector.from_dict(m, whitening=shared) for m in data["members"]))


def as_ensemble(model: Corrector | CorrectorEnsemble) -> CorrectorEnsemble:
    return model if isinstance(model, CorrectorEnsemble) else CorrectorEnsemble((model,))


# ---------------------------------------------------------------------------
# Training


def train_single(x_err, alpha: float = 0.8, whitening: WhiteningModel | None = None) -> Corrector:
    """Corrector flagging exactly the excluded ball of the mistake ``x_err``.

    ``x_err`` is in whitened coordinates.  ``z`` is flagged iff
    ``(x_err, z) > alpha (x_err, x_err)``.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidThreshold(f"alpha must satisfy 0 < alpha < 1, got {alpha}")
    x = np.asarray(x_err, dtype=np.float64).ravel()
    sq = float(x @ x)
    if sq == 0.0:
        raise DegenerateInput("a zero vector cannot be separated")
    return Corrector(weights=x.copy(), threshold=alpha * sq, kind="single_point", whitening=whitening)


def train_fisher(
    errors,
    normals,
    quantile: float | None = None,
    whitening: WhiteningModel | None = None,
    kind: str = "fisher",
) -> Corrector:
    """Fisher corrector from whitened error and normal samples.

    ``w = mean(errors) - mean(normals)``.  The threshold is the midpoint of the
    projected class means, or, when ``quantile`` is given, the ``quantile``-th
    quantile of the projected normals so that at most ``1 - quantile`` of the
    training normals are flagged.
    """
    E = as_data_matrix(errors)
    N = as_data_matrix(normals)
    if E.shape[1] != N.shape[1]:
        raise DimensionMismatch(f"errors have dimension {E.shape[1]}, normals {N.shape[1]}")
    mu_e, mu_n = E.mean(axis=0), N.mean(axis=0)
    w = mu_e - mu_n
    if np.linalg.norm(w) <= 1e-12:
        raise DegenerateInput("class means coincide; no discriminating direction")
    if quantile is None:
        threshold = 0.5 * float(mu_e @ w + mu_n @ w)
    else:
        if not 0.0 <= quantile <= 1.0:
            raise ValueError(f"quantile must lie in [0, 1], got {quantile}")
        threshold = float(np.quantile(N @ w, quantile))
    return Corrector(weights=w, threshold=threshold, kind=kind, whitening=whitening)


def train_clustered(
    errors,
    normals,
    k: int,
    alpha: float | None = None,
    seed: int = 0,
    quantile: float | None = None,
    whitening: WhiteningModel | None = None,
) -> CorrectorEnsemble:
    """Cluster the mistakes into ``k`` groups; one Fisher corrector per group.

    With ``k = 1`` this is exactly :func:`train_fisher`.  If ``alpha`` is
    given, single-point clusters get :func:`train_single` correctors instead.
    """
    E = as_data_matrix(errors)
    if k == 1:
        return CorrectorEnsemble((train_fisher(E, normals, quantile, whitening),))
    clus = cluster_points(E, k, seed=seed)
    members = []
    for j in range(clus.k):
        part = E[clus.assignments == j]
        if part.shape[0] == 0:
            continue
        if part.shape[0] == 1 and alpha is not None:
            members.append(train_single(part[0], alpha, whitening))
        else:
            members.append(train_fisher(part, normals, quantile, whitening, kind="cluster_centroid"))
    return CorrectorEnsemble(tuple(members))


def train_per_point(errors, alpha: float = 0.8, whitening: WhiteningModel | None = None) -> CorrectorEnsemble:
    """One :func:`train_single` corrector per mistake."""
    E = as_data_matrix(errors)
    return CorrectorEnsemble(tuple(train_single(x, alpha, whitening) for x in E))


# ---------------------------------------------------------------------------
# Use


@dataclass(frozen=True)
class Decision:
    label: str
    firing: tuple[int, ...]

    @property
    def high_risk(self) -> bool:
        return self.label == HIGH_RISK


def apply(model: Corrector | CorrectorEnsemble, z) -> Decision:
    """Classify one situation; ``firing`` lists the members that fired."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise DimensionMismatch(f"apply takes a single vector, got shape {z.shape}")
    row = as_ensemble(model).firing_matrix(z[None, :])[0]
    firing = tuple(int(i) for i in np.flatnonzero(row))
    return Decision(HIGH_RISK if firing else NORMAL, firing)


def apply_batch(model: Corrector | CorrectorEnsemble, Z) -> list[Decision]:
    F = as_ensemble(model).firing_matrix(Z)
    out = []
    for row in F:
        firing = tuple(int(i) for i in np.flatnonzero(row))
        out.append(Decision(HIGH_RISK if firing else NORMAL, firing))
    return out


@dataclass(frozen=True)
class EvaluationReport:
    """Flag rates on held-out mistakes and normal situations.

    ``overlaps`` counts situations (of either set) on which more than one
    member fired: places where correctors could conflict.
    """

    n_errors: int
    n_normals: int
    errors_flagged: int
    normals_flagged: int
    overlaps: int

    @property
    def errors_corrected(self) -> float:
        return self.errors_flagged / self.n_errors if self.n_errors else 0.0

    @property
    def damage(self) -> float:
        return self.normals_flagged / self.n_normals if self.n_normals else 0.0

    def to_dict(self) -> dict:
        return {
            "n_errors": self.n_errors,
            "n_normals": self.n_normals,
            "errors_flagged": self.errors_flagged,
            "normals_flagged": self.normals_flagged,
            "errors_corrected": self.errors_corrected,
            "damage": self.damage,
            "overlaps": self.overlaps,
        }


def evaluate(model: Corrector | CorrectorEnsemble, test_errors, test_normals) -> EvaluationReport:
    ens = as_ensemble(model)
    FE = ens.firing_matrix(test_errors)
    FN = ens.firing_matrix(test_normals)
    overlaps = int((FE.sum(axis=1) > 1).sum() + (FN.sum(axis=1) > 1).sum())
    return EvaluationReport(
        n_errors=FE.shape[0],
        n_normals=FN.shape[0],
        errors_flagged=int(FE.any(axis=1).sum()),
        normals_flagged=int(FN.any(axis=1).sum()),
        overlaps=overlaps,
    )
