"""Seeded generators for the reference distributions.

Points are generated in fixed blocks of ``BLOCK_ROWS`` rows.  Each block draws
from its own Philox (counter-based) stream keyed by ``(seed, kind, n, block)``,
so any block can be produced independently and the output never depends on
how the work is split.  A sample of ``m`` points is a prefix of any larger
sample with the same seed, kind and dimension.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegenerateInput
from .preprocess import as_data_matrix

KINDS = ("uniform_ball", "uniform_sphere", "isotropic_gaussian", "product_uniform_cube")
BLOCK_ROWS = 4096


@dataclass(frozen=True)
class SampleSpec:
    kind: str
    n: int
    m: int
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.n < 1 or self.m < 1:
            raise ValueError(f"n and m must be >= 1, got n={self.n}, m={self.m}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def to_dict(self) -> dict:
        return asdict(self)


def _block_rng(spec: SampleSpec, block: int) -> np.random.Generator:
    key = np.random.SeedSequence([spec.seed, KINDS.index(spec.kind), spec.n, block])
    return np.random.Generator(np.random.Philox(key))


def _block(spec: SampleSpec, rng: np.random.Generator, rows: int) -> np.ndarray:
    n = spec.n
    if spec.kind == "product_uniform_cube":
        return rng.random((rows, n))
    g = rng.standard_normal((rows, n))
    if spec.kind == "isotropic_gaussian":
        return g
    norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    # A Gaussian row of exact zeros has probability 0; redraw defensively.
    while np.any(norms == 0):
        bad = norms == 0
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        norms = np.sqrt(np.einsum("ij,ij->i", g, g))
    g /= norms[:, None]
    if spec.kind == "uniform_sphere":
        return g
    radii = rng.random(rows) ** (1.0 / n)
    return g * radii[:, None]


def sample(spec: SampleSpec) -> np.ndarray:
    """Draw ``spec.m`` points of dimension ``spec.n`` from ``spec.kind``.

    ``uniform_sphere`` normalises isotropic Gaussian draws, ``uniform_ball``
    scales a sphere draw by ``U^(1/n)``, ``product_uniform_cube`` has
    independent ``U[0, 1)`` coordinates.
    """
    out = np.empty((spec.m, spec.n))
    for block, start in enumerate(range(0, spec.m, BLOCK_ROWS)):
        full = _block(spec, _block_rng(spec, block), BLOCK_ROWS)
        stop = min(start + BLOCK_ROWS, spec.m)
        out[start:stop] = full[: stop - start]
    return out


def uniform_ball(n: int, m: int, seed: int = 0) -> np.ndarray:
    return sample(SampleSpec("uniform_ball", n, m, seed))


def uniform_sphere(n: int, m: int, seed: int = 0) -> np.ndarray:
    return sample(SampleSpec("uniform_sphere", n, m, seed))


def isotropic_gaussian(n: int, m: int, seed: int = 0) -> np.ndarray:
    return sample(SampleSpec("isotropic_gaussian", n, m, seed))


@dataclass(frozen=True)
class AngleStats:
    mean_abs_cos: float
    max_abs_cos: float


def pairwise_angle_stats(X) -> AngleStats:
    """Mean and max of ``|cos|`` over all unordered pairs of distinct rows."""
    X = as_data_matrix(X, min_rows=2)
    norms = np.sqrt(np.einsum("ij,ij->i", X, X))
    if np.any(norms == 0):
        raise DegenerateInput(f"row {int(np.flatnonzero(norms == 0)[0])} is zero; angle undefined")
    U = X / norms[:, None]
    m = U.shape[0]
    total, worst = 0.0, 0.0
    for start in range(0, m, 2048):
        stop = min(start + 2048, m)
        C = np.abs(U[start:stop] @ U.T)
        # Keep pairs (i, j) with j > i only.
        mask = np.arange(m)[None, :] > np.arange(start, stop)[:, None]
        vals = C[mask]
        if vals.size:
            total += float(vals.sum())
            worst = max(worst, float(vals.max()))
    n_pairs = m * (m - 1) // 2
    return AngleStats(mean_abs_cos=total / n_pairs, max_abs_cos=min(worst, 1.0))
