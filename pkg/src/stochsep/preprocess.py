"""Centering, PCA, whitening and component-retention rules.

All routines take a data matrix of shape ``(m, d)``: one point per row.
Covariances use the unbiased ``m - 1`` divisor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, SingularComponent

# Retained eigenvalues below this fraction of the largest are treated as zero.
RIDGE_FLOOR = 1e-12


def as_data_matrix(X, min_rows: int = 1) -> np.ndarray:
    """Validate ``X`` and return it as a 2-D float64 array.

    A 1-D input is read as a single point.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[np.newaxis, :]
    if X.ndim != 2:
        raise DegenerateInput(f"expected a 2-D data matrix, got shape {X.shape}")
    m, d = X.shape
    if d < 1:
        raise DegenerateInput("data matrix has no columns")
    if m < min_rows:
        raise DegenerateInput(f"need at least {min_rows} rows, got {m}")
    if not np.all(np.isfinite(X)):
        bad = np.argwhere(~np.isfinite(X))[0]
        raise DegenerateInput(f"non-finite entry at row {bad[0]}, column {bad[1]}")
    return X


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Mean and eigendecomposition of a sample covariance.

    Attributes:
        mean: Sample mean, shape ``(d,)``.
        eigvecs: Orthonormal eigenvectors as columns, shape ``(d, d)``.
        eigvals: Eigenvalues sorted descending, all ``>= 0``.
    """

    mean: np.ndarray
    eigvecs: np.ndarray
    eigvals: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def covariance(self) -> np.ndarray:
        """Rebuild the covariance matrix ``V diag(lambda) V^T``."""
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    # Largest-magnitude entry of every column made positive; first index wins ties.
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def fit_pca(X) -> SpectralModel:
    """Fit the mean and covariance eigendecomposition of ``X``.

    Raises:
        DegenerateInput: fewer than two rows or a non-finite entry.
    """
    X = as_data_matrix(X, min_rows=2)
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    cov = 0.5 * (cov + cov.T)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    vecs = _fix_signs(vecs[:, order])
    return SpectralModel(mean=mean, eigvecs=vecs, eigvals=vals)


# ---------------------------------------------------------------------------
# Retention rules


@dataclass(frozen=True)
class Kaiser:
    """Keep components whose eigenvalue is at least ``threshold`` times the mean.

    On a correlation matrix the mean eigenvalue is 1, so this is the classical
    ``lambda >= 1`` rule (or ``lambda >= threshold``).
    """

    threshold: float = 1.0


@dataclass(frozen=True)
class VarianceFraction:
    """Keep the fewest leading components explaining ``fraction`` of the variance."""

    fraction: float

    def __post_init__(self):
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in (0, 1], got {self.fraction}")


@dataclass(frozen=True)
class ConditionNumber:
    """Keep components with ``lambda >= lambda_max / kappa``."""

    kappa: float = 10.0

    def __post_init__(self):
        if not self.kappa >= 1.0:
            raise ValueError(f"kappa must be >= 1, got {self.kappa}")


RetentionRule = Union[Kaiser, VarianceFraction, ConditionNumber]


def select_components(model: SpectralModel, rule: RetentionRule) -> int:
    """Number of leading components kept by ``rule`` (always at least 1)."""
    lam = np.asarray(model.eigvals, dtype=np.float64)
    if lam.size == 0 or lam[0] <= 0.0:
        raise DegenerateInput("all eigenvalues are zero")
    if isinstance(rule, Kaiser):
        k = int(np.count_nonzero(lam >= rule.threshold * lam.mean()))
    elif isinstance(rule, VarianceFraction):
        cum = np.cumsum(lam)
        k = int(np.searchsorted(cum, rule.fraction * cum[-1], side="left")) + 1
    elif isinstance(rule, ConditionNumber):
        k = int(np.count_nonzero(lam >= lam[0] / rule.kappa))
    else:
        raise TypeError(f"unknown retention rule {rule!r}")
    return max(1, min(k, lam.size))


# ---------------------------------------------------------------------------
# Whitening


@dataclass(frozen=True, eq=False)
class WhiteningModel:
    """Projection onto the leading ``retained`` components scaled to unit variance."""

    spectral: SpectralModel
    retained: int
    kappa: float

    @property
    def input_dim(self) -> int:
        return self.spectral.dim

    @property
    def matrix(self) -> np.ndarray:
        """The ``(d, k)`` map applied to centered rows."""
        k = self.retained
        return self.spectral.eigvecs[:, :k] / np.sqrt(self.spectral.eigvals[:k])

    def transform(self, X) -> np.ndarray:
        X = as_data_matrix(X)
        if X.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"model expects {self.input_dim} columns, got {X.shape[1]}"
            )
        return (X - self.spectral.mean) @ self.matrix

    def to_dict(self) -> dict:
        return {
            "mean": self.spectral.mean.tolist(),
            "eigvals": self.spectral.eigvals.tolist(),
            "eigvecs": self.spectral.eigvecs.tolist(),
            "retained": self.retained,
            "kappa": self.kappa,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WhiteningModel":
        spectral = SpectralModel(
            mean=np.asarray(data["mean"], dtype=np.float64),
            eigvecs=np.asarray(data["eigvecs"], dtype=np.float64),
            eigvals=np.asarray(data["eigvals"], dtype=np.float64),
        )
        return cls(spectral=spectral, retained=int(data["retained"]), kappa=float(data["kappa"]))


def make_whitening(model: SpectralModel, k: int) -> WhiteningModel:
    """Build a whitening model keeping the first ``k`` components.

    Raises:
        SingularComponent: a retained eigenvalue is below the ridge floor.
    """
    d = model.dim
    if not 1 <= k <= d:
        raise DimensionMismatch(f"k must lie in [1, {d}], got {k}")
    lam = model.eigvals
    floor = RIDGE_FLOOR * lam[0]
    bad = np.flatnonzero(lam[:k] <= floor) if lam[0] > 0 else np.arange(k)
    if bad.size:
        i = int(bad[0])
        raise SingularComponent(
            f"component {i} has eigenvalue {lam[i]:.3e} <= ridge floor {floor:.3e}; retain fewer components"
        )
    return WhiteningModel(spectral=model, retained=k, kappa=float(lam[0] / lam[k - 1]))


def whiten(X, model: SpectralModel, k: int) -> tuple[np.ndarray, WhiteningModel]:
    """Whiten ``X`` with the leading ``k`` components of ``model``.

    When ``model`` was fitted on ``X`` the output has zero mean and identity
    sample covariance.
    """
    wm = make_whitening(model, k)
    return wm.transform(X), wm


def fit_whitening(X, rule: RetentionRule | None = None) -> tuple[np.ndarray, WhiteningModel]:
    """fit_pca + select_components + whiten in one call (default rule: kappa = 10)."""
    model = fit_pca(X)
    k = select_components(model, rule if rule is not None else ConditionNumber(10.0))
    return whiten(X, model, k)


# ---------------------------------------------------------------------------
# Wide data (m < d)


def _gram_blocked(Xc: np.ndarray, block: int = 65536) -> np.ndarray:
    m, d = Xc.shape
    G = np.zeros((m, m))
    for start in range(0, d, block):
        chunk = Xc[:, start:start + block]
        G += chunk @ chunk.T
    return G


def gram_preprocess(X, correlation: bool = False) -> np.ndarray:
    """Replace a wide ``m x d`` matrix (``m < d``) by its ``m x m`` Gram matrix.

    Entry ``(i, j)`` is the inner product of rows ``i`` and ``j`` after
    subtracting the column means. With ``correlation=True`` it is instead the
    Pearson correlation coefficient between rows ``i`` and ``j``.
    """
    X = as_data_matrix(X)
    m, d = X.shape
    if m >= d:
        raise DegenerateInput(f"Gram preprocessing expects m < d, got m={m}, d={d}")
    if correlation:
        Xc = X - X.mean(axis=1, keepdims=True)
        norms = np.sqrt(np.einsum("ij,ij->i", Xc, Xc))
        if np.any(norms == 0):
            raise DegenerateInput("a constant row has no defined correlation")
        Xc = Xc / norms[:, None]
    else:
        Xc = X - X.mean(axis=0)
    G = _gram_blocked(Xc)
    # Exact symmetry: the blocked product is only symmetric up to rounding.
    iu = np.triu_indices(m, 1)
    G[(iu[1], iu[0])] = G[iu]
    return G


def gram_project(X_new, X_train, correlation: bool = False) -> np.ndarray:
    """Represent new points by their inner products with the training rows.

    Uses the training column mean for centering (or row-wise Pearson
    correlation), matching :func:`gram_preprocess`, so a training row maps to
    its own row of the Gram matrix.
    """
    X_train = as_data_matrix(X_train)
    X_new = as_data_matrix(X_new)
    if X_new.shape[1] != X_train.shape[1]:
        raise DimensionMismatch(
            f"new points have {X_new.shape[1]} columns, training data has {X_train.shape[1]}"
        )
    if correlation:
        def _unit(A):
            Ac = A - A.mean(axis=1, keepdims=True)
            n = np.sqrt(np.einsum("ij,ij->i", Ac, Ac))
            if np.any(n == 0):
                raise DegenerateInput("a constant row has no defined correlation")
            return Ac / n[:, None]
        return _unit(X_new) @ _unit(X_train).T
    mu = X_train.mean(axis=0)
    return (X_new - mu) @ (X_train - mu).T
