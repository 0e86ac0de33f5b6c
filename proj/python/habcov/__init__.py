"""Multi-agent high-altitude balloon area-coverage toolkit.

Thin package wrapper around the compiled extension: wind-field models, the
cooperative coverage environment, the QMIX trainer, the Voronoi baseline, and
the evaluation metrics.
"""

from habcov._core import (  # noqa: F401
    AgentState,
    BaselineConfig,
    ConfigError,
    EnvConfig,
    Environment,
    EpisodeTrace,
    QmixLearner,
    TraceParseError,
    TrainConfig,
    WindModel,
    WindParseError,
    WindSample,
    WindSpec,
    accumulate_heatmap,
    build_forecast_wind,
    build_truth_wind,
    compute_reward,
    compute_separation,
    compute_twr,
    epsilon_at,
    load_gridded_wind,
    lloyd_relax,
    run_baseline_episode,
    run_random_policy_episode,
    verify_replay,
)

__all__ = [
    "AgentState",
    "BaselineConfig",
    "ConfigError",
    "EnvConfig",
    "Environment",
    "EpisodeTrace",
    "QmixLearner",
    "TraceParseError",
    "TrainConfig",
    "WindModel",
    "WindParseError",
    "WindSample",
    "WindSpec",
    "accumulate_heatmap",
    "build_forecast_wind",
    "build_truth_wind",
    "compute_reward",
    "compute_separation",
    "compute_twr",
    "epsilon_at",
    "load_gridded_wind",
    "lloyd_relax",
    "run_baseline_episode",
    "run_random_policy_episode",
    "verify_replay",
]
