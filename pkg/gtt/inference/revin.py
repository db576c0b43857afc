"""
Normalisation d'instance réversible (RevIN) et complément de zéros du contexte.
"""

import logging
from dataclasses import dataclass
import numpy as np
from ..datapipe.samples import NORM_EPS
from ..exceptions import DimensionError

logger = logging.getLogger(__name__)


@dataclass
class RevinStats:
    """
    Statistiques par canal, sur l'axe temporel (avant-dernier axe).

    Attributs :
        mean (numpy.ndarray) : [..., C]
        std (numpy.ndarray) : [..., C] écart-type de population (0 pour un canal constant)
    """

    mean: np.ndarray
    std: np.ndarray

    def select(self, channels):
        return RevinStats(mean=self.mean[..., channels], std=self.std[..., channels])


def revin_normalize(context, eps=NORM_EPS):
    """
    Standardise chaque canal avec la moyenne et l'écart-type de son contexte.

    Args:
        context (numpy.ndarray): Contexte [..., L × C], L >= 1
        eps (float): Terme ajouté à l'écart-type

    Returns:
        tuple: (contexte normalisé, RevinStats)
    """
    x = np.asarray(context, dtype=np.float64)
    if x.ndim < 2 or x.shape[-2] < 1:
        raise DimensionError(f"revin_normalize: contexte [L × C] attendu, reçu {x.shape}")
    first = np.take(x, [0], axis=-2)
    constant = np.all(x == first, axis=-2)
    mean = np.where(constant, first[..., 0, :], x.mean(axis=-2))
    std = np.where(constant, 0.0, x.std(axis=-2))
    normalized = (x - mean[..., None, :]) / (std[..., None, :] + eps)
    return normalized, RevinStats(mean=mean, std=std)


def revin_denormalize(y, stats, eps=NORM_EPS):
    """
    Inverse de revin_normalize : y·(σ + ε) + μ.

    Args:
        y (numpy.ndarray): Valeurs normalisées [..., H × C]
        stats (RevinStats): Statistiques du contexte

    Returns:
        numpy.ndarray: Valeurs à l'échelle d'origine (float64)
    """
    y = np.asarray(y, dtype=np.float64)
    return y * (stats.std[..., None, :] + eps) + stats.mean[..., None, :]


def zero_pad(normalized, length=1024):
    """
    Place le contexte à la fin d'une fenêtre de `length` lignes, précédé de zéros.

    Un contexte plus long est tronqué à ses `length` lignes les plus récentes.

    Args:
        normalized (numpy.ndarray): Contexte [..., L × C]
        length (int): Longueur de la fenêtre

    Returns:
        numpy.ndarray: Fenêtre [..., length × C]
    """
    x = np.asarray(normalized)
    L = x.shape[-2]
    if L > length:
        logger.warning(f"Contexte de {L} points tronqué aux {length} plus récents")
        return x[..., L - length:, :].copy()
    out = np.zeros(x.shape[:-2] + (length, x.shape[-1]), dtype=x.dtype)
    out[..., length - L:, :] = x
    return out


def truncate_context(context, length=1024):
    """Conserve les `length` lignes les plus récentes, avec un avertissement."""
    x = np.asarray(context)
    if x.shape[-2] > length:
        logger.warning(f"Contexte de {x.shape[-2]} points tronqué aux {length} plus récents")
        return x[..., x.shape[-2] - length:, :]
    return x
