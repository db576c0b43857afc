"""
Prévision sans réentraînement à partir d'un checkpoint.
"""

from .forecast import (
    EquivarianceReport,
    ForecastRequest,
    ForecastResult,
    affine_equivariance_check,
    forecast,
    forecast_arrays,
    forecast_channels,
)
from .revin import RevinStats, revin_denormalize, revin_normalize, truncate_context, zero_pad

__all__ = [
    "EquivarianceReport",
    "ForecastRequest",
    "ForecastResult",
    "RevinStats",
    "affine_equivariance_check",
    "forecast",
    "forecast_arrays",
    "forecast_channels",
    "revin_denormalize",
    "revin_normalize",
    "truncate_context",
    "zero_pad",
]
