"""
Prévision sans réentraînement : RevIN, complément de zéros, déroulé
autorégressif par blocs de P pas, puis dénormalisation.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional
import numpy as np
import pandas as pd
from ..datapipe.packing import MAX_CHANNELS, channel_groups
from ..datapipe.series import ChannelRole
from ..datapipe.time_features import N_TIME_FEATURES, encode_time_features, extrapolate_timestamps
from ..event_logging import log_pipeline_step
from ..exceptions import ConfigurationError, DataError
from ..model import ForwardBatch, forward
from .revin import revin_denormalize, revin_normalize, truncate_context, zero_pad

logger = logging.getLogger(__name__)


@dataclass
class ForecastRequest:
    """
    Demande de prévision.

    Attributs :
        context (numpy.ndarray) : Contexte brut [L × C]
        horizon (int) : Nombre H de pas à prévoir
        timestamps (pandas.DatetimeIndex | None) : Horodatages du contexte
        channel_roles (list[str]) : Rôle de chaque canal (cibles par défaut)
        channel_names (list[str]) : Noms des canaux
    """

    context: np.ndarray
    horizon: int
    timestamps: Optional[pd.DatetimeIndex] = None
    channel_roles: List[str] = field(default_factory=list)
    channel_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.context = np.asarray(self.context, dtype=np.float64)
        if self.context.ndim == 1:
            self.context = self.context[:, None]
        n = self.context.shape[1]
        if not self.channel_roles:
            self.channel_roles = [ChannelRole.TARGET] * n
        if not self.channel_names:
            self.channel_names = [f"ch{i}" for i in range(n)]

    def validate(self):
        if self.horizon < 1:
            raise ConfigurationError(f"L'horizon doit être >= 1 (reçu {self.horizon})")
        if self.context.ndim != 2 or self.context.shape[0] < 1:
            raise DataError(f"Contexte [L × C] attendu, forme reçue {self.context.shape}")
        if not np.all(np.isfinite(self.context)):
            raise DataError("Le contexte contient des valeurs manquantes ou non finies")
        if ChannelRole.TARGET not in self.channel_roles:
            raise DataError("Aucun canal cible dans la demande de prévision")
        if self.timestamps is not None and len(self.timestamps) != self.context.shape[0]:
            raise DataError("Horodatages et contexte de longueurs différentes")
        return self


@dataclass
class ForecastResult:
    """
    Prévisions dénormalisées des canaux cibles.

    Attributs :
        predictions (numpy.ndarray) : [H × O]
        target_names (list[str]) : Noms des canaux cibles
        mean (numpy.ndarray) : μ utilisé par canal cible
        std (numpy.ndarray) : σ utilisé par canal cible
        blocks_used (int) : ceil(H / P)
        timestamps (pandas.DatetimeIndex | None) : Horodatages futurs extrapolés
    """

    predictions: np.ndarray
    target_names: List[str]
    mean: np.ndarray
    std: np.ndarray
    blocks_used: int
    timestamps: Optional[pd.DatetimeIndex] = None


def forecast_arrays(
    params,
    config,
    contexts,
    n_targets,
    horizon,
    context_time_feats=None,
    future_time_feats=None,
    renormalize_each_block=False,
):
    """
    Cœur de la prévision, par lot.

    Les C canaux de données (cibles en tête) sont normalisés par RevIN, placés
    en fin de fenêtre, suivis des canaux calendaires non normalisés lorsqu'ils
    sont fournis. À chaque bloc, les P lignes prédites sont ajoutées à la
    fenêtre qui glisse de P lignes.

    Les échantillons du corpus standardisent les canaux calendaires comme les
    autres canaux ; ici ils gardent leurs valeurs sin/cos dans [-1, 1]. Leur
    échelle diffère donc de celle vue à l'entraînement : écart-type de l'ordre
    de 0,7 au lieu de 1 pour l'heure et le jour, et un canal du mois presque
    constant et non centré au lieu d'un canal centré.

    Args:
        params (ModelParams): Paramètres
        config (ModelConfig): Configuration
        contexts (numpy.ndarray): Contextes bruts [B × L × C]
        n_targets (int): Nombre O de canaux cibles en tête
        horizon (int): H
        context_time_feats (numpy.ndarray, optional): [B × L × 6]
        future_time_feats (numpy.ndarray, optional): [B × H' × 6] exacts pour les
            pas futurs (H' >= blocs · P) ; sinon les prévisions du modèle sont conservées
        renormalize_each_block (bool): Recalcule les statistiques avant chaque bloc

    Returns:
        tuple: (prévisions brutes [B × H × O], RevinStats initiales [B × C], nombre de blocs)
    """
    T, P = config.context_len, config.patch_size
    contexts = truncate_context(np.asarray(contexts, dtype=np.float64), T)
    B, L, C = contexts.shape
    has_time = context_time_feats is not None
    width = C + (N_TIME_FEATURES if has_time else 0)
    if width > max(MAX_CHANNELS, config.max_channels):
        raise DataError(
            f"{width} canaux dépassent la capacité d'un échantillon ({MAX_CHANNELS})"
        )
    n_channels = max(width, config.max_channels)
    blocks = math.ceil(horizon / P)

    normalized, stats = revin_normalize(contexts)
    initial_stats = stats
    window = np.zeros((B, T, n_channels), dtype=np.float64)
    window[:, :, :C] = zero_pad(normalized, T)
    if has_time:
        window[:, :, C:width] = zero_pad(truncate_context(context_time_feats, T)[:, -L:], T)
    real_rows = L
    channel_valid = np.zeros((B, n_channels), dtype=bool)
    channel_valid[:, :width] = True

    dtype = params["head.weight"].dtype
    outputs = []
    for block in range(blocks):
        if renormalize_each_block and block > 0:
            n_real = min(real_rows, T)
            raw = revin_denormalize(window[:, T - n_real:, :C], stats)
            renormalized, stats = revin_normalize(raw)
            window[:, T - n_real:, :C] = renormalized
        batch = ForwardBatch(
            inputs=window.astype(dtype),
            channel_valid=channel_valid,
            n_targets=n_targets,
        )
        predicted = forward(batch, params, config).predictions.data.astype(np.float64)
        target_stats = stats.select(slice(0, n_targets))
        outputs.append(revin_denormalize(predicted[:, :, :n_targets], target_stats))
        new_rows = np.zeros((B, P, n_channels), dtype=np.float64)
        new_rows[:, :, :C] = predicted[:, :, :C]
        if has_time:
            if future_time_feats is not None:
                new_rows[:, :, C:width] = future_time_feats[:, block * P:(block + 1) * P]
            else:
                new_rows[:, :, C:width] = predicted[:, :, C:width]
        window = np.concatenate([window[:, P:], new_rows], axis=1)
        real_rows += P

    predictions = np.concatenate(outputs, axis=1)[:, :horizon]
    return predictions, initial_stats, blocks


def forecast_channels(
    params,
    config,
    contexts,
    n_targets,
    horizon,
    context_time_feats=None,
    future_time_feats=None,
    renormalize_each_block=False,
):
    """
    Comme forecast_arrays, mais pour un nombre quelconque de canaux.

    Les canaux (cibles en tête) sont découpés en groupes consécutifs de la
    capacité d'un échantillon, comme lors de la préparation du corpus ; les
    groupes sans cible sont ignorés.

    Returns:
        tuple: (prévisions [B × H × O], μ [B × O], σ [B × O], nombre de blocs)
    """
    contexts = np.asarray(contexts, dtype=np.float64)
    predictions, means, stds, blocks_used = [], [], [], 0
    for group in channel_groups(contexts.shape[-1], context_time_feats is not None):
        group_targets = int(np.sum(group < n_targets))
        if group_targets == 0:
            continue
        preds, stats, blocks_used = forecast_arrays(
            params,
            config,
            contexts[:, :, group],
            group_targets,
            horizon,
            context_time_feats=context_time_feats,
            future_time_feats=future_time_feats,
            renormalize_each_block=renormalize_each_block,
        )
        predictions.append(preds)
        means.append(stats.mean[:, :group_targets])
        stds.append(stats.std[:, :group_targets])
    return (
        np.concatenate(predictions, axis=-1),
        np.concatenate(means, axis=-1),
        np.concatenate(stds, axis=-1),
        blocks_used,
    )


def _ordered_request(request):
    order = [i for i, r in enumerate(request.channel_roles) if r == ChannelRole.TARGET]
    order += [i for i, r in enumerate(request.channel_roles) if r != ChannelRole.TARGET]
    return request.context[:, order], [request.channel_names[i] for i in order], len(
        [r for r in request.channel_roles if r == ChannelRole.TARGET]
    )


@log_pipeline_step("forecast")
def forecast(checkpoint, request, renormalize_each_block=False):
    """
    Prévoit les H prochains pas des canaux cibles.

    Au-delà de la capacité d'un échantillon, les canaux sont découpés en
    groupes consécutifs comme lors de la préparation du corpus.

    Args:
        checkpoint (Checkpoint | tuple): Checkpoint, ou couple (ModelParams, ModelConfig)
        request (ForecastRequest): Demande
        renormalize_each_block (bool): Recalcule RevIN avant chaque bloc

    Returns:
        ForecastResult: Prévisions à l'échelle d'origine
    """
    request.validate()
    if isinstance(checkpoint, tuple):
        params, config = checkpoint
    else:
        params, config = checkpoint.model_params(requires_grad=False), checkpoint.model_config
    values, names, n_targets = _ordered_request(request)

    context_feats = future_feats = future_stamps = None
    timestamps = request.timestamps
    if timestamps is not None:
        timestamps = pd.DatetimeIndex(timestamps)
        context_feats = encode_time_features(timestamps)[None]
        blocks = math.ceil(request.horizon / config.patch_size)
        future_stamps = extrapolate_timestamps(timestamps, blocks * config.patch_size)
        if future_stamps is not None:
            future_feats = encode_time_features(future_stamps)[None]
            future_stamps = future_stamps[: request.horizon]

    predictions, mean, std, blocks_used = forecast_channels(
        params,
        config,
        values[None],
        n_targets,
        request.horizon,
        context_time_feats=context_feats,
        future_time_feats=future_feats,
        renormalize_each_block=renormalize_each_block,
    )
    result = ForecastResult(
        predictions=predictions[0],
        target_names=names[:n_targets],
        mean=mean[0],
        std=std[0],
        blocks_used=blocks_used,
        timestamps=future_stamps,
    )
    if not np.all(np.isfinite(result.predictions)):
        raise DataError("Prévisions non finies")
    return result


@dataclass
class EquivarianceReport:
    """Écart entre forecast(a·x + b) et a·forecast(x) + b."""

    a: float
    b: float
    max_rel_error: float
    passed: bool


def affine_equivariance_check(checkpoint, context, a, b, horizon=64, tol=1e-4):
    """
    Vérifie forecast(a·x + b) == a·forecast(x) + b à `tol` près (erreur relative).

    L'erreur est rapportée à max(|attendu|, a·σ) par canal, σ étant l'écart-type
    du contexte d'origine.

    Args:
        checkpoint: Checkpoint, ou couple (ModelParams, ModelConfig)
        context (numpy.ndarray): Contexte [L × C]
        a (float): Facteur (> 0)
        b (float): Décalage
        horizon (int): H
        tol (float): Tolérance

    Returns:
        EquivarianceReport: Rapport
    """
    if a <= 0:
        raise ConfigurationError("Le facteur a doit être strictement positif")
    context = np.asarray(context, dtype=np.float64)
    base = forecast(checkpoint, ForecastRequest(context=context, horizon=horizon))
    moved = forecast(checkpoint, ForecastRequest(context=a * context + b, horizon=horizon))
    expected = a * base.predictions + b
    scale = np.maximum(np.abs(expected), a * np.maximum(base.std, 1e-12))
    rel = float(np.max(np.abs(moved.predictions - expected) / scale))
    return EquivarianceReport(a=a, b=b, max_rel_error=rel, passed=rel <= tol)
