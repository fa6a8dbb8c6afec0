"""Scale-dependent homology of finite metric spaces and entropy of sampled maps."""

from .complex import (
    ChainVector,
    HomologyError,
    HomologyGroup,
    ScaleComplex,
    boundary_matrix,
    build_complex,
    homology,
    long_exact_rank_check,
    relative_homology,
    subcomplex_homology,
)
from .entropy import (
    EntropyEstimate,
    EntropySaturationError,
    OrbitMetricContext,
    bowen_distance,
    estimate_entropy,
    exact_separated_number,
    exact_spanning_number,
    separated_count,
    spanning_count,
)
from .harness import (
    BoundVerdict,
    ExperimentConfig,
    axiom_suite,
    builtin_system,
    default_config,
    verify_entropy_bound,
)
from .linalg import RationalMatrix, SparseMatrix
from .maps import (
    InducedMatrix,
    MapTooExpansiveError,
    SampledSelfMap,
    chain_map,
    characteristic_polynomial,
    induced_on_homology,
    spectral_radius,
)
from .metric import (
    FiniteMetricSpace,
    MetricError,
    Net,
    diameter,
    disjoint_union,
    from_distance_matrix,
    from_point_cloud,
    greedy_net,
    validate,
)
from .tower import (
    ScaleTower,
    StabilityReport,
    UnstableTowerError,
    build_tower,
    cohomology_rank,
    connecting_map,
    detect_stability,
    geometric_scales,
    lc_betti,
)

__version__ = "0.1.0"
