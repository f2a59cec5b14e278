"""Gacs-Korner common information, approximate decompositions and
helper-assisted distributed compression."""

__version__ = "0.1.0"

from .components import connected_components, gk_common_information, gk_labelings
from .dist import (
    DistributionError,
    JointDistribution,
    binary_entropy,
    conditional_entropy,
    entropy,
    load_distribution,
    save_distribution,
)
from .labeling import LabelingPair, load_labeling
from .network import CapacitatedNetwork, FeasibilityReport, check_feasibility, check_feasibility_limited, min_cut
from .objectives import (
    DecompositionReport,
    RateRegion,
    cut_sets,
    decomposition_report,
    disagreement_probability,
    helper_rate_binary,
    helper_rate_general,
    lagrangian_objective,
    rate_region_binary,
    rate_region_general,
)
from .search import (
    Objective,
    SearchResult,
    brute_force_constrained,
    brute_force_lagrangian,
    lambda_max_estimate,
    recursive_spectral,
    spectral_threshold_search,
    tradeoff_sweep,
)
from .spectral import SpectralSummary, spectral_summary, verify_laplacian_identity

__all__ = [name for name in dir() if not name.startswith("_")]
