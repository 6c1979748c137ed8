"""Topological entropy bounds and estimates for non-autonomous interval maps."""

from .coding import Coder, CodedPoint, Itinerary, NestedRefinement
from .coupled_expansion import (
    CoverConfig,
    ExpansionReport,
    derive_matrix,
    estimate_constants,
    lower_bound,
    upper_bound,
    verify_exact_covering,
    verify_expansion,
)
from .entropy_estimator import EstimatorConfig, bowen_distance, estimate_entropy, separated_count
from .subshift import SymbolSequence, metric, parse_sequence, random_sequence, shift
from .system_model import Interval, PiecewiseLinearMap, SystemModel, centered_tent_system, tent_system
from .transition_matrix import (
    TransitionMatrix,
    entrywise_norm,
    enumerate_allowable_words,
    gelfand_estimate,
    has_branching,
    is_irreducible,
    matrix_power,
    nu_bound,
    spectral_radius,
    validate,
)

__version__ = "0.1.0"
