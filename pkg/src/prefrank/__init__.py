"""Rank objects from partial preferences revealed by ranked application lists."""

__version__ = "0.1.0"

from ._validation import check_preference_matrix
from .axioms import (
    Axiom,
    AxiomVerdict,
    BridgeWitness,
    ClonePair,
    Perturbation,
    check_axiom,
    make_scaled_clone,
    run_trials,
    verdict_grid,
    verify_bridge_witness,
)
from .estimators import (
    LeastSquaresRanker,
    NormalizedRowSumRanker,
    PreferenceAggregator,
    RowSumRanker,
)
from .exceptions import IsolatedObjectError, ParseError, PrefrankError, SolverError, ValidationError
from .graph import ComponentPartition, DerivedMatrices, RankingProblem, components, derive
from .metrics import ContradictionReport, CorrelationReport, contradictions, kendall
from .preferences import (
    ApplicationRecord,
    Granularity,
    StudentPreferenceList,
    WeightingScheme,
    aggregate,
    derive_preferences,
    derive_preferences_adjusted,
)
from .scoring import (
    METHODS,
    RankingTable,
    ScoreVector,
    least_squares,
    normalized_row_sum,
    rank,
    row_sum,
)

__all__ = [
    "METHODS",
    "ApplicationRecord",
    "Axiom",
    "AxiomVerdict",
    "BridgeWitness",
    "ClonePair",
    "ComponentPartition",
    "ContradictionReport",
    "CorrelationReport",
    "DerivedMatrices",
    "Granularity",
    "IsolatedObjectError",
    "LeastSquaresRanker",
    "NormalizedRowSumRanker",
    "ParseError",
    "Perturbation",
    "PreferenceAggregator",
    "PrefrankError",
    "RankingProblem",
    "RankingTable",
    "RowSumRanker",
    "ScoreVector",
    "SolverError",
    "StudentPreferenceList",
    "ValidationError",
    "WeightingScheme",
    "aggregate",
    "check_axiom",
    "check_preference_matrix",
    "components",
    "contradictions",
    "derive",
    "derive_preferences",
    "derive_preferences_adjusted",
    "kendall",
    "least_squares",
    "make_scaled_clone",
    "normalized_row_sum",
    "rank",
    "row_sum",
    "run_trials",
    "verdict_grid",
    "verify_bridge_witness",
]
