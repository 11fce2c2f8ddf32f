"""Stay/travel mobility inference for temporally sparse trajectories.

The package infers, per GPS record, whether a device was staying at a
location or traveling through it, while abstaining whenever the sampling is
too sparse to certify either. It ships the sliding-window inference, an
exhaustive reference oracle, a random-walk simulator with continuous ground
truth, an evaluation harness, and two classic baselines, all behind a
deterministic batch CLI.
"""

from .baselines import (
    BucketConfig,
    HmmModel,
    SpatioTemporalBin,
    VotingModel,
    grid_index,
    hmm_predict,
    hmm_train,
    hour_index,
    minute_index,
    observations,
    spatiotemporal_bin,
    viterbi,
    voting_predict,
    voting_train,
)
from .core import (
    DenseSegment,
    GeoPoint,
    LABEL_STAY,
    LABEL_TRAVEL,
    LABEL_UNLABELED,
    MetricUndefinedError,
    MobilityLabel,
    MobilityParams,
    Trajectory,
    TrajectoryRecord,
    codes_to_letters,
    global_sparsity,
    letters_to_codes,
    local_coverage,
    planar_distance,
    project_to_meters,
    segment_bounds,
)
from .evaluate import (
    ConfusionCounts,
    ExperimentConfig,
    LocalConsistencyResult,
    MetricsReport,
    RateOutcome,
    SparsityReport,
    compute_metrics,
    device_stats,
    f1_score,
    harmonic_mean,
    local_consistency_check,
    prop1_violation_rate,
    resampling_experiment,
    sparsity_report,
)
from .oracle import (
    OracleLabels,
    OracleLimitError,
    dense_stay_membership,
    exact_label,
    travel_condition,
)
from .sds import (
    LabeledTrajectory,
    RecallBounds,
    detect_stays,
    detect_travels,
    recall_lower_bounds,
    sds_label,
    stay_flags_at,
    travel_flags_at,
)
from .simulate import (
    CtrwConfig,
    GroundTruthPath,
    StayPeriod,
    TravelLeg,
    check_supports,
    continuous_labels,
    fit_power_law_exponent,
    generate_ctrw,
    observe,
    resample,
    resample_labeled,
    sample_at,
    sample_truncated_power_law,
    synth_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "BucketConfig",
    "ConfusionCounts",
    "CtrwConfig",
    "DenseSegment",
    "ExperimentConfig",
    "GeoPoint",
    "GroundTruthPath",
    "HmmModel",
    "LABEL_STAY",
    "LABEL_TRAVEL",
    "LABEL_UNLABELED",
    "LabeledTrajectory",
    "LocalConsistencyResult",
    "MetricUndefinedError",
    "MetricsReport",
    "MobilityLabel",
    "MobilityParams",
    "OracleLabels",
    "OracleLimitError",
    "RateOutcome",
    "RecallBounds",
    "SparsityReport",
    "SpatioTemporalBin",
    "StayPeriod",
    "Trajectory",
    "TrajectoryRecord",
    "TravelLeg",
    "VotingModel",
    "check_supports",
    "codes_to_letters",
    "compute_metrics",
    "continuous_labels",
    "dense_stay_membership",
    "detect_stays",
    "detect_travels",
    "device_stats",
    "exact_label",
    "f1_score",
    "fit_power_law_exponent",
    "generate_ctrw",
    "global_sparsity",
    "grid_index",
    "harmonic_mean",
    "hmm_predict",
    "hmm_train",
    "hour_index",
    "letters_to_codes",
    "local_consistency_check",
    "local_coverage",
    "minute_index",
    "observations",
    "observe",
    "planar_distance",
    "project_to_meters",
    "prop1_violation_rate",
    "recall_lower_bounds",
    "resample",
    "resample_labeled",
    "resampling_experiment",
    "sample_at",
    "sample_truncated_power_law",
    "sds_label",
    "segment_bounds",
    "sparsity_report",
    "spatiotemporal_bin",
    "stay_flags_at",
    "synth_schedule",
    "travel_condition",
    "travel_flags_at",
    "viterbi",
    "voting_predict",
    "voting_train",
]
