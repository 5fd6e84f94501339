"""Distribution-aware rollout rewards: CRPS scoring, leave-one-out credit, toy grid-policy training."""

import json as _json

from ._core import (
    ConfigError,
    DataError,
    DegenerateSetError,
    GridPolicy,
    calibration_fit,
    crps_empirical,
    crps_integral_oracle,
    dar_rewards,
    format_prediction,
    grpo_advantages,
    make_dataset,
    mixture_params,
    mse_reward,
    mse_rewards,
    neg_crps_score,
    parse_prediction,
    quantile,
    regression_metrics,
    true_mean,
    wis,
)
from ._core import run_command as _run_command


def run_command(command, **overrides):
    """Run a CLI command in-process. Returns (exit_code, log_text)."""
    return _run_command(command, _json.dumps(overrides))


__all__ = [
    "ConfigError",
    "DataError",
    "DegenerateSetError",
    "GridPolicy",
    "calibration_fit",
    "crps_empirical",
    "crps_integral_oracle",
    "dar_rewards",
    "format_prediction",
    "grpo_advantages",
    "make_dataset",
    "mixture_params",
    "mse_reward",
    "mse_rewards",
    "neg_crps_score",
    "parse_prediction",
    "quantile",
    "regression_metrics",
    "run_command",
    "true_mean",
    "wis",
]
