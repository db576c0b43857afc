"""
Protocole d'évaluation des prévisions et métriques.
"""

from .baselines import BASELINES, constant_forecast, last_value_forecast, seasonal_naive_forecast
from .metrics import METRIC_NAMES, MetricAccumulator, metrics
from .protocol import (
    EVAL_PRESETS,
    SPLIT_PRESETS,
    EvalData,
    EvalSpec,
    eval_window_starts,
    evaluate_forecaster,
    load_eval_data,
    model_predictor,
    naive_baselines,
    rolling_eval,
    split_bounds,
)
from .report import MetricTable
from .scaling import run_scaling_probe

__all__ = [
    "BASELINES",
    "EVAL_PRESETS",
    "METRIC_NAMES",
    "SPLIT_PRESETS",
    "EvalData",
    "EvalSpec",
    "MetricAccumulator",
    "MetricTable",
    "constant_forecast",
    "eval_window_starts",
    "evaluate_forecaster",
    "last_value_forecast",
    "load_eval_data",
    "metrics",
    "model_predictor",
    "naive_baselines",
    "rolling_eval",
    "run_scaling_probe",
    "seasonal_naive_forecast",
    "split_bounds",
]
