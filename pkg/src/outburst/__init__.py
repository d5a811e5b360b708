"""Continuum growth and competition simulator.

One or two types grow in R^d by spherical outbursts driven by a shared
marked point field, so runs with different starting configurations are
pathwise comparable. The package provides the event engine, passage times
with certified coverage, subadditivity audits, time-constant estimation,
two-type coexistence experiments, an independent rejection-based validator,
and a command-line interface.
"""

from ._kernels import BACKEND as kernel_backend
from .compete import (
    CoexistenceEstimate,
    CoexistenceRow,
    CompeteConfig,
    CompeteOutcome,
    default_seeds,
    estimate_coexistence,
    frozen_check,
    run_compete,
)
from .engine import (
    Budget,
    Engine,
    GrowthBall,
    History,
    PendingEvent,
    PointLabel,
    classify_point,
    run,
)
from .env import (
    EnvConfig,
    LawReport,
    MarkedPoint,
    RadiusLaw,
    points_in,
    validate_law,
)
from .errors import ConfigError, OutburstError, ParameterError, UnboundedLawError
from .eventlog import read_event_log, write_event_log
from .geom import (
    AxisBox,
    Ball,
    BallIndex,
    VolumeEstimate,
    Witness,
    ball_fully_covered,
    ball_volume,
    contains_point,
    find_uncovered,
    volume_estimate,
)
from .oracle import (
    CompareReport,
    CompareScenario,
    OracleRun,
    compare_with_engine,
    first_event_time,
    run_oracle,
)
from .passage import (
    CoverageTracker,
    DiffExperimentConfig,
    DiffResult,
    MuEstimate,
    PassageResult,
    TelescopeReport,
    TripleResult,
    coupled_triple,
    diff_expectation,
    estimate_mu,
    passage_time,
    telescoping_identity,
    translation_samples,
)
from .stats import (
    KsResult,
    ProportionInterval,
    batch_means,
    kolmogorov_sf,
    ks_test,
    normal_quantile,
    normal_sf,
    quantile,
    two_proportion_test,
    wilson_interval,
)

__version__ = "0.1.0"

__all__ = [
    "AxisBox",
    "Ball",
    "BallIndex",
    "Budget",
    "CoexistenceEstimate",
    "CoexistenceRow",
    "CompareReport",
    "CompareScenario",
    "CompeteConfig",
    "CompeteOutcome",
    "ConfigError",
    "CoverageTracker",
    "DiffExperimentConfig",
    "DiffResult",
    "Engine",
    "EnvConfig",
    "GrowthBall",
    "History",
    "KsResult",
    "LawReport",
    "MarkedPoint",
    "MuEstimate",
    "OracleRun",
    "OutburstError",
    "ParameterError",
    "PassageResult",
    "PendingEvent",
    "PointLabel",
    "ProportionInterval",
    "RadiusLaw",
    "TelescopeReport",
    "TripleResult",
    "UnboundedLawError",
    "VolumeEstimate",
    "Witness",
    "ball_fully_covered",
    "ball_volume",
    "batch_means",
    "classify_point",
    "compare_with_engine",
    "contains_point",
    "coupled_triple",
    "default_seeds",
    "diff_expectation",
    "estimate_coexistence",
    "estimate_mu",
    "find_uncovered",
    "first_event_time",
    "frozen_check",
    "kernel_backend",
    "kolmogorov_sf",
    "ks_test",
    "normal_quantile",
    "normal_sf",
    "passage_time",
    "points_in",
    "quantile",
    "read_event_log",
    "run",
    "run_compete",
    "run_oracle",
    "telescoping_identity",
    "translation_samples",
    "two_proportion_test",
    "validate_law",
    "volume_estimate",
    "wilson_interval",
    "write_event_log",
]
