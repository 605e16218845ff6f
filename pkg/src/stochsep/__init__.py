"""Stochastic separation toolkit.

Fisher separability audits, closed-form separation bounds, separability-based
effective dimension, cluster overlap quality and one-shot linear correctors.
"""

from .bounds import (
    BallBoundParams,
    SphereBoundParams,
    ball_volume,
    max_sample_mutual,
    max_sample_single,
    separation_table,
    sphere_area,
    sphere_cap_bound_cone,
    sphere_cap_bound_elementary,
    sphere_py_asymptotic,
    theorem1_psi,
    theorem2_psi,
)
from .clustering import ClusterPairStats, cluster_goodness, cluster_points, overlap_radius, pairwise_goodness
from .corrector import (
    Corrector,
    CorrectorEnsemble,
    apply,
    evaluate,
    train_clustered,
    train_fisher,
    train_per_point,
    train_single,
)
from .dimension import effective_dimension, empirical_py
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    DisjointClusters,
    EngulfedCluster,
    InapplicableBound,
    InvalidThreshold,
    SingularComponent,
    StochSepError,
)
from .preprocess import (
    ConditionNumber,
    Kaiser,
    SpectralModel,
    VarianceFraction,
    WhiteningModel,
    fit_pca,
    gram_preprocess,
    select_components,
    whiten,
)
from .sampling import SampleSpec, pairwise_angle_stats, sample
from .separability import dataset_separability, excluded_ball, is_separable_point, separability_profile

__version__ = "0.1.0"
