"""Bounded-confidence opinion dynamics with live invariant checking.

Agents hold opinions in a bounded convex region; at each step a random edge
of a (possibly time-varying) social graph is selected and the two endpoints
move toward each other by a rate mu(t) in [0, 1/2], but only when their
opinions are within the confidence range epsilon.  The package simulates
the process, audits its contraction and potential invariants on the fly,
tracks stopping times, and estimates the consensus probability against a
closed-form lower bound.
"""

from .errors import BoundInapplicableError, ConfigurationError, InvariantViolation
from .geometry import (
    Ball,
    BallSpace,
    Box,
    Interval,
    OpinionSpace,
    PointCloud,
    chebyshev_center,
    diameter,
    distance_potential,
    expected_center_distance,
    minimum_enclosing_ball,
)
from .graphs import (
    ALL_PAIRS,
    ConstantGraph,
    CyclicGraph,
    EdgeSet,
    ErdosRenyiGraph,
    GraphSchedule,
    PiecewiseGraph,
    complete_edges,
    connected_components,
    evaluate_schedule,
    is_connected,
    is_delta_trivial,
    opinion_graph,
    path_edges,
    profile,
)
from .invariants import (
    ContractionObserver,
    ContractionReport,
    DiameterMonotoneObserver,
    MonotoneResult,
    OpinionGraphChangeCounter,
    StoppingTimeRecord,
    StoppingTimeTracker,
    UpdateIdentityObserver,
    check_potential_monotone,
    lattice_points,
    pair_contraction_slacks,
    potential_drop_slack,
    settle_time,
)
from .model import (
    ConstantMu,
    ModelParams,
    MuSchedule,
    OpinionState,
    SequenceMu,
    StepEvent,
    Trajectory,
    TrajectoryObserver,
    UniformMu,
    opinion_distance,
    run_trajectory,
    select_pair,
    step,
)
from .montecarlo import (
    BoundReport,
    ConsensusEstimate,
    EnsembleResult,
    OutcomeClassifier,
    TrialConfig,
    TrialOutcome,
    TrialResult,
    TrialRow,
    Verdict,
    bound_comparison_report,
    certified_hull_gap,
    classify_outcome,
    estimate_consensus_probability,
    run_ensemble,
    run_trial,
    theoretical_lower_bound,
    wilson_interval,
)
from .norms import NORMS, cross_distances, distances_to_point, rowwise_norm, vector_norm

__version__ = "0.1.0"

__all__ = [
    "ALL_PAIRS",
    "Ball",
    "BallSpace",
    "BoundInapplicableError",
    "BoundReport",
    "Box",
    "ConfigurationError",
    "ConsensusEstimate",
    "ConstantGraph",
    "ConstantMu",
    "ContractionObserver",
    "ContractionReport",
    "CyclicGraph",
    "DiameterMonotoneObserver",
    "EdgeSet",
    "EnsembleResult",
    "ErdosRenyiGraph",
    "GraphSchedule",
    "Interval",
    "InvariantViolation",
    "ModelParams",
    "MonotoneResult",
    "MuSchedule",
    "NORMS",
    "OpinionGraphChangeCounter",
    "OpinionSpace",
    "OpinionState",
    "OutcomeClassifier",
    "PiecewiseGraph",
    "PointCloud",
    "SequenceMu",
    "StepEvent",
    "StoppingTimeRecord",
    "StoppingTimeTracker",
    "Trajectory",
    "TrajectoryObserver",
    "TrialConfig",
    "TrialOutcome",
    "TrialResult",
    "TrialRow",
    "UniformMu",
    "UpdateIdentityObserver",
    "Verdict",
    "bound_comparison_report",
    "certified_hull_gap",
    "chebyshev_center",
    "check_potential_monotone",
    "classify_outcome",
    "complete_edges",
    "connected_components",
    "cross_distances",
    "diameter",
    "distance_potential",
    "distances_to_point",
    "estimate_consensus_probability",
    "evaluate_schedule",
    "expected_center_distance",
    "is_connected",
    "is_delta_trivial",
    "lattice_points",
    "minimum_enclosing_ball",
    "opinion_distance",
    "opinion_graph",
    "pair_contraction_slacks",
    "path_edges",
    "potential_drop_slack",
    "profile",
    "rowwise_norm",
    "run_ensemble",
    "run_trajectory",
    "run_trial",
    "select_pair",
    "settle_time",
    "step",
    "theoretical_lower_bound",
    "vector_norm",
    "wilson_interval",
]
