"""
Réseau de prévision : configuration, paramètres, couches et passe avant.
"""

from .config import PRESETS, ModelConfig, get_preset
from .layers import LayerView, encoder_layer, mha, patch_embed, positional_encoding
from .network import ForwardBatch, ForwardOutput, forward, masked_mae_loss
from .params import HEAD_NAMES, ModelParams, is_decayed, param_count, parameter_shapes

__all__ = [
    "HEAD_NAMES",
    "PRESETS",
    "ForwardBatch",
    "ForwardOutput",
    "LayerView",
    "ModelConfig",
    "ModelParams",
    "encoder_layer",
    "forward",
    "get_preset",
    "is_decayed",
    "masked_mae_loss",
    "mha",
    "param_count",
    "parameter_shapes",
    "patch_embed",
    "positional_encoding",
]
