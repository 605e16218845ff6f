"""Exception types shared across the package."""

from __future__ import annotations


class StochSepError(ValueError):
    """Base class for every validation error raised by stochsep."""


class DegenerateInput(StochSepError):
    """Input is too small, non-finite, or otherwise carries no usable signal."""


class DimensionMismatch(StochSepError):
    """Two arrays that must share a dimension do not."""


class SingularComponent(StochSepError):
    """A retained principal component is (numerically) zero."""


class InvalidThreshold(StochSepError):
    """Threshold alpha outside the range an operation accepts."""


class InapplicableBound(StochSepError):
    """The hypotheses of a closed-form bound do not hold for the given parameters."""


class OverlapOutcome(StochSepError):
    """Two balls are in a configuration where the overlap radius is undefined."""


class DisjointClusters(OverlapOutcome):
    """rho >= r1 + r2: the balls do not intersect."""


class EngulfedCluster(OverlapOutcome):
    """rho^2 <= |r1^2 - r2^2|: the bigger ball holds more than half of the smaller one."""
