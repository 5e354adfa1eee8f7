"""ahpi: outcome-based ranking from asymmetric, heterogeneous pairwise interactions.

A Bradley-Terry-style two-stage model (favored side, then a valence coin)
with per-type privilege for the defendant side, fitted by Bayesian EM
under logistic priors, plus the supporting pipeline: entity-name
canonicalization, dense-core network trimming, synthetic ground-truth
recovery studies, and out-of-sample calibration/accuracy evaluation.
"""

from .em import FitConfig, FitTrace, fit, posterior_stance, stance_posteriors
from .errors import (
    AhpiError,
    ConfigError,
    EmptyOutputError,
    FileFormatError,
    InfeasibleTargetError,
    InvalidArgumentError,
    MalformedHeaderError,
    NumericalFailureError,
    UndefinedResultError,
    UnknownReferenceError,
)
from .evaluate import (
    CalibrationBin,
    CalibrationReport,
    ExternalRanking,
    balanced_accuracy,
    calibration_report,
    kendall_tau,
    predict_defendant_propensity,
    temporal_split,
)
from .model import (
    EntityId,
    InteractionRecord,
    InteractionType,
    ModelParams,
    Winner,
    favored_probability,
    log_posterior,
    symmetry_map,
    win_probability,
)
from .names import ClusterAssignment, agglomerate, cluster_distance, levenshtein
from .network import InteractionNetwork, QReport, q_factor, trim_to_q
from .synth import SynthConfig, generate, litigation_config, q_sweep, recovery_experiment

__version__ = "0.1.0"

__all__ = [
    "AhpiError",
    "CalibrationBin",
    "CalibrationReport",
    "ClusterAssignment",
    "ConfigError",
    "EmptyOutputError",
    "EntityId",
    "ExternalRanking",
    "FileFormatError",
    "FitConfig",
    "FitTrace",
    "InfeasibleTargetError",
    "InteractionNetwork",
    "InteractionRecord",
    "InteractionType",
    "InvalidArgumentError",
    "MalformedHeaderError",
    "ModelParams",
    "NumericalFailureError",
    "QReport",
    "SynthConfig",
    "UndefinedResultError",
    "UnknownReferenceError",
    "Winner",
    "agglomerate",
    "balanced_accuracy",
    "calibration_report",
    "cluster_distance",
    "favored_probability",
    "fit",
    "generate",
    "kendall_tau",
    "levenshtein",
    "litigation_config",
    "log_posterior",
    "posterior_stance",
    "predict_defendant_propensity",
    "q_factor",
    "q_sweep",
    "recovery_experiment",
    "stance_posteriors",
    "symmetry_map",
    "temporal_split",
    "trim_to_q",
    "win_probability",
    "__version__",
]
