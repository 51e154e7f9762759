"""Pairwise (bivariate marginal) likelihood estimation for spatial error
regression: pair coding, closed-form estimation, Fisher inference, Monte
Carlo validation and coding-based resampling."""

from .core import (
    NeighborGraph,
    PairCoding,
    PairSample,
    SpatialDataset,
    build_lattice_graph,
    center_dataset,
    code_pairs,
    enumerate_codings,
    extract_pair_sample,
    read_edge_list,
)
from .estimator import (
    EstimateReport,
    SolverOptions,
    SufficientStats,
    Theta,
    compute_stats,
    estimate,
    log_likelihood,
    residual_cross_moments,
    score,
)
from .inference import (
    FisherInfo,
    InferenceReport,
    confidence_intervals,
    fisher_information,
    hessian,
    spillover_decomposition,
    wald_test_psi,
)
from .oracle import OracleResult, brute_force_maximize
from .resample import BootstrapReport, besag_average, coding_bootstrap
from .simulate import (
    DgpConfig,
    MonteCarloReport,
    generate_lattice_sem,
    generate_pair_sample,
    run_monte_carlo,
)

__version__ = "0.1.0"

__all__ = [
    "NeighborGraph",
    "PairCoding",
    "PairSample",
    "SpatialDataset",
    "build_lattice_graph",
    "center_dataset",
    "code_pairs",
    "enumerate_codings",
    "extract_pair_sample",
    "read_edge_list",
    "EstimateReport",
    "SolverOptions",
    "SufficientStats",
    "Theta",
    "compute_stats",
    "estimate",
    "log_likelihood",
    "residual_cross_moments",
    "score",
    "FisherInfo",
    "InferenceReport",
    "confidence_intervals",
    "fisher_information",
    "hessian",
    "spillover_decomposition",
    "wald_test_psi",
    "OracleResult",
    "brute_force_maximize",
    "BootstrapReport",
    "besag_average",
    "coding_bootstrap",
    "DgpConfig",
    "MonteCarloReport",
    "generate_lattice_sem",
    "generate_pair_sample",
    "run_monte_carlo",
]
