"""
Écrêtage global des gradients et pas AdamW à décroissance découplée.
"""

import logging
from dataclasses import dataclass, field
import numpy as np
from ..exceptions import NonFiniteError
from ..model.params import is_decayed

logger = logging.getLogger(__name__)


@dataclass
class OptimizerState:
    """
    État de l'optimiseur.

    Attributs :
        step (int) : Nombre de pas effectués
        m (dict) : Premiers moments par paramètre
        v (dict) : Seconds moments par paramètre
    """

    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_params(cls, params):
        """État initial (moments nuls) pour les paramètres entraînables."""
        return cls(
            step=0,
            m={name: np.zeros_like(t.data) for name, t in params.trainable()},
            v={name: np.zeros_like(t.data) for name, t in params.trainable()},
        )


def global_grad_norm(params):
    """Norme L2 de l'ensemble des gradients des paramètres entraînables."""
    total = 0.0
    for _, t in params.trainable():
        total += float(np.sum(np.square(t.grad, dtype=np.float64)))
    return float(np.sqrt(total))


def clip_gradients(params, clip_norm):
    """
    Ramène la norme globale des gradients à `clip_norm` si elle la dépasse.

    Args:
        params (ModelParams): Paramètres dont les gradients sont remplis
        clip_norm (float): Norme maximale

    Returns:
        float: Facteur appliqué (1 si aucun écrêtage)

    Raises:
        NonFiniteError: Si un gradient contient NaN ou Inf
    """
    for name, t in params.trainable():
        if not np.all(np.isfinite(t.grad)):
            raise NonFiniteError(f"Gradient non fini pour {name}")
    norm = global_grad_norm(params)
    if norm <= clip_norm:
        return 1.0
    scale = clip_norm / norm
    for _, t in params.trainable():
        t.grad *= t.grad.dtype.type(scale)
    return scale


def adamw_step(params, state, lr, betas=(0.9, 0.999), eps=1e-8, weight_decay=0.0):
    """
    Pas AdamW : p ← p − lr·(wd·p + m̂ / (√v̂ + eps)).

    La décroissance ne s'applique qu'aux paramètres pour lesquels
    `is_decayed` est vrai (ni biais ni LayerNorm).

    Args:
        params (ModelParams): Paramètres (modifiés sur place)
        state (OptimizerState): État (modifié sur place)
        lr (float): Taux d'apprentissage
        betas (tuple): Coefficients des moments
        eps (float): Terme de stabilité
        weight_decay (float): Coefficient de décroissance découplée
    """
    beta1, beta2 = betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step
    for name, t in params.trainable():
        g = t.grad
        m = state.m.setdefault(name, np.zeros_like(t.data))
        v = state.v.setdefault(name, np.zeros_like(t.data))
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        update = (m / correction1) / (np.sqrt(v / correction2) + eps)
        if weight_decay and is_decayed(name):
            update = update + weight_decay * t.data
        t.data -= (lr * update).astype(t.data.dtype, copy=False)
