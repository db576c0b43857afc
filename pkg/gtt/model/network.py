"""
Passe avant complète et perte MAE masquée.
"""

import logging
from dataclasses import dataclass
from typing import Optional
import numpy as np
from ..exceptions import DimensionError
from ..numerics import Tensor
from .layers import LayerView, encoder_layer, patch_embed

logger = logging.getLogger(__name__)


@dataclass
class ForwardBatch:
    """
    Lot d'entrée du modèle.

    Attributs :
        inputs (numpy.ndarray) : [B × T × C]
        channel_valid (numpy.ndarray) : [B × C]
        target (numpy.ndarray | None) : [B × P × C]
        n_targets (int) : Nombre O de canaux cibles, placés en tête
    """

    inputs: np.ndarray
    channel_valid: np.ndarray
    target: Optional[np.ndarray] = None
    n_targets: Optional[int] = None

    def __post_init__(self):
        if self.n_targets is None:
            self.n_targets = self.inputs.shape[2]

    def validate(self, config):
        B, T, C = self.inputs.shape
        if T != config.context_len:
            raise DimensionError(f"Lot de longueur {T}, le modèle attend {config.context_len}")
        if self.channel_valid.shape != (B, C):
            raise DimensionError(f"channel_valid {self.channel_valid.shape}, attendu {(B, C)}")
        if self.target is not None and self.target.shape != (B, config.patch_size, C):
            raise DimensionError(f"target {self.target.shape}, attendu {(B, config.patch_size, C)}")
        if not 1 <= self.n_targets <= C:
            raise DimensionError(f"n_targets={self.n_targets} hors de [1, {C}]")
        return self


@dataclass
class ForwardOutput:
    """Prévisions de tous les canaux [B × P × C] et des seules cibles [B × P × O]."""

    predictions: Tensor
    targets: Tensor


def forward(batch, params, config):
    """
    Plongement des patchs, N couches d'encodeur, dernier jeton, tête linéaire partagée.

    Args:
        batch (ForwardBatch): Lot
        params (ModelParams): Paramètres
        config (ModelConfig): Configuration

    Returns:
        ForwardOutput: Prévisions [B × P × C] et cibles [B × P × O]
    """
    batch.validate(config)
    dtype = params["head.weight"].dtype
    x = Tensor(np.asarray(batch.inputs, dtype=dtype), dtype=dtype)
    B, _, C = x.shape
    M, D, P = config.n_patches, config.embed_dim, config.patch_size

    z = patch_embed(x, params, config)
    for layer in range(config.n_layers):
        z = encoder_layer(z, LayerView(params, layer), B, C, config.n_heads)
    last = z[:, M - 1, :]
    y = last @ params["head.weight"] + params["head.bias"]
    predictions = y.reshape(B, C, P).transpose(0, 2, 1)
    targets = predictions[:, :, : batch.n_targets]
    return ForwardOutput(predictions=predictions, targets=targets)


def masked_mae_loss(predictions, target, channel_valid):
    """
    Erreur absolue moyenne sur les seuls canaux valides.

    Args:
        predictions (Tensor): [B × P × C]
        target (numpy.ndarray): [B × P × C]
        channel_valid (numpy.ndarray): [B × C]

    Returns:
        Tensor: Perte scalaire ; 0 (et gradients nuls) si aucun canal n'est valide
    """
    target = np.asarray(target)
    if predictions.shape != target.shape:
        raise DimensionError(
            f"Prévisions {predictions.shape} et cibles {target.shape} de formes différentes"
        )
    B, P, C = predictions.shape
    if np.shape(channel_valid) != (B, C):
        raise DimensionError(f"channel_valid {np.shape(channel_valid)}, attendu {(B, C)}")
    mask = np.asarray(channel_valid, dtype=predictions.dtype)[:, None, :]
    n_valid = float(mask.sum()) * P
    if n_valid == 0:
        logger.warning("Lot sans canal valide: perte définie à 0")
        scale = 0.0
    else:
        scale = 1.0 / n_valid
    errors = (predictions - target.astype(predictions.dtype)).abs() * mask
    return errors.sum() * scale
