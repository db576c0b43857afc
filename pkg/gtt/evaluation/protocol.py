"""
Protocole d'évaluation glissante sur la partie test d'un jeu de référence.

Chaque fenêtre de test (pas de 1 par défaut) fournit un contexte de longueur
fixe ; la prévision est faite une fois jusqu'au plus grand horizon, les
horizons plus courts en sont des préfixes. Les erreurs de toutes les fenêtres
et de tous les canaux cibles sont regroupées par horizon.
"""

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Tuple
import numpy as np
import pandas as pd
from ..datapipe.series import ChannelRole, RawSeries, read_series_csv
from ..datapipe.time_features import encode_time_features, extrapolate_timestamps
from ..event_logging import log_pipeline_step
from ..exceptions import ConfigurationError, DataError
from ..inference.forecast import forecast_channels
from .baselines import BASELINES
from .metrics import MetricAccumulator
from .report import MetricTable

logger = logging.getLogger(__name__)

# Longueurs (train, validation, test) des jeux de référence usuels
SPLIT_PRESETS = {
    "ettm": (34465, 11521, 11521),
    "etth": (8545, 2881, 2881),
    "electricity": (18317, 2633, 5261),
    "traffic": (12185, 1757, 3509),
    "weather": (36792, 5271, 10540),
    "ili": (617, 74, 170),
}

EVAL_PRESETS = {
    "default": {"context_len": 1024, "horizons": (96, 192, 336, 720)},
    "ili": {"context_len": 128, "horizons": (24, 36, 48, 60)},
}

DEFAULT_FRACTIONS = (0.7, 0.1, 0.2)
SPACES = ("raw", "standardized")


@dataclass
class EvalSpec:
    """
    Paramètres d'une évaluation.

    Attributs :
        dataset (str | None) : Fichier CSV du jeu de données
        context_len (int) : Longueur du contexte fourni au prévisionniste
        horizons (tuple[int]) : Horizons évalués
        targets (list[str]) : Canaux cibles (rôles du fichier si vide)
        split (str | None) : Nom d'un découpage de référence (voir SPLIT_PRESETS)
        fractions (tuple[float]) : Découpage train/validation/test sinon
        stride (int) : Pas entre deux fenêtres
        borrow_context (bool) : Le premier contexte peut empiéter sur la validation
        univariate (bool) : Chaque canal cible est prévu seul
        space (str) : raw ou standardized (statistiques de la partie train)
        season_period (int) : Période de la référence saisonnière naïve
        batch_size (int) : Fenêtres par appel au modèle
        dump_windows (bool) : Conserve les erreurs par fenêtre
        renormalize_each_block (bool) : Voir inference.forecast
        roles (dict) : Rôle par nom de colonne
    """

    dataset: Optional[str] = None
    context_len: int = 1024
    horizons: Tuple[int, ...] = (96, 192, 336, 720)
    targets: List[str] = field(default_factory=list)
    split: Optional[str] = None
    fractions: Tuple[float, float, float] = DEFAULT_FRACTIONS
    stride: int = 1
    borrow_context: bool = False
    univariate: bool = False
    space: str = "raw"
    season_period: int = 24
    batch_size: int = 64
    dump_windows: bool = False
    renormalize_each_block: bool = False
    roles: dict = field(default_factory=dict)

    def __post_init__(self):
        self.horizons = tuple(int(h) for h in self.horizons)
        self.fractions = tuple(float(f) for f in self.fractions)

    @classmethod
    def from_preset(cls, name="default", **overrides):
        """
        Configuration initialisée depuis un préréglage (default ou ili).

        Raises:
            ConfigurationError: Préréglage inconnu
        """
        if name not in EVAL_PRESETS:
            raise ConfigurationError(
                f"Préréglage d'évaluation inconnu '{name}' (choix: {', '.join(EVAL_PRESETS)})"
            )
        return cls(**{**EVAL_PRESETS[name], **overrides})

    @property
    def max_horizon(self):
        return max(self.horizons)

    def validate(self):
        if not self.horizons or min(self.horizons) < 1:
            raise ConfigurationError(
                f"Les horizons doivent être strictement positifs (reçus {list(self.horizons)})"
            )
        if self.context_len < 1 or self.stride < 1 or self.batch_size < 1:
            raise ConfigurationError(
                "context_len, stride et batch_size doivent être strictement positifs"
            )
        if self.split is not None and self.split not in SPLIT_PRESETS:
            raise ConfigurationError(
                f"Découpage inconnu '{self.split}' (choix: {', '.join(SPLIT_PRESETS)})"
            )
        if len(self.fractions) != 3 or min(self.fractions) < 0 or sum(self.fractions) > 1 + 1e-9:
            raise ConfigurationError(
                f"Fractions train/validation/test invalides: {list(self.fractions)}"
            )
        if self.fractions[2] <= 0:
            raise ConfigurationError("La fraction de test doit être strictement positive")
        if self.space not in SPACES:
            raise ConfigurationError(
                f"Espace d'évaluation inconnu '{self.space}' (choix: {', '.join(SPACES)})"
            )
        if self.season_period < 1:
            raise ConfigurationError("season_period doit être strictement positif")
        return self

    def to_dict(self):
        data = asdict(self)
        data["horizons"] = list(self.horizons)
        data["fractions"] = list(self.fractions)
        return data


def split_bounds(n_rows, spec):
    """
    Plages [début, fin) train, validation et test, disjointes et ordonnées.

    Un découpage de référence prend ses longueurs depuis le début de la série ;
    sinon test = ⌊f_test·T⌋, train = ⌊f_train·T⌋ et la validation prend le reste.

    Returns:
        dict: split -> (début, fin)

    Raises:
        DataError: Série trop courte pour le découpage demandé
    """
    if spec.split is not None:
        n_train, n_val, n_test = SPLIT_PRESETS[spec.split]
        if n_train + n_val + n_test > n_rows:
            raise DataError(
                f"Le découpage '{spec.split}' demande {n_train + n_val + n_test} lignes, "
                f"la série en a {n_rows}"
            )
    else:
        f_train, f_val, f_test = spec.fractions
        n_train = int(math.floor(f_train * n_rows))
        n_test = int(math.floor(f_test * n_rows))
        if f_train + f_val + f_test >= 1 - 1e-9:
            n_val = n_rows - n_train - n_test
        else:
            n_val = int(math.floor(f_val * n_rows))
    return {
        "train": (0, n_train),
        "validation": (n_train, n_train + n_val),
        "test": (n_train + n_val, n_train + n_val + n_test),
    }


def eval_window_starts(test_range, context_len, max_horizon, stride=1, borrow_context=False):
    """
    Débuts de contexte s des fenêtres d'évaluation.

    s parcourt first, first + stride, … tant que s + context_len + max_horizon
    ne dépasse pas la fin du test ; first est le début du test, ou
    max(0, début − context_len) si le contexte peut empiéter sur la validation.

    Returns:
        numpy.ndarray: Débuts (int64), éventuellement vide
    """
    start, end = test_range
    first = max(0, start - context_len) if borrow_context else start
    last = end - context_len - max_horizon
    if last < first:
        return np.zeros(0, dtype=np.int64)
    return np.arange(first, last + 1, stride, dtype=np.int64)


@dataclass
class EvalData:
    """
    Série prête pour l'évaluation : cibles en tête, espace choisi appliqué.

    Attributs :
        values (numpy.ndarray) : [T × C]
        n_targets (int) : Nombre O de cibles
        target_names (list[str]) : Noms des cibles
        timestamps (pandas.DatetimeIndex | None) : Horodatages
        bounds (dict) : Plages train/validation/test
    """

    values: np.ndarray
    n_targets: int
    target_names: List[str]
    timestamps: Optional[pd.DatetimeIndex]
    bounds: dict


def load_eval_data(spec, series=None):
    """
    Prépare la série à évaluer.

    Args:
        spec (EvalSpec): Protocole d'évaluation
        series (RawSeries, optional): Série déjà chargée, sinon spec.dataset est lu

    Returns:
        EvalData: Données prêtes

    Raises:
        ConfigurationError: Aucun jeu de données ou cible inconnue
        DataError: Fichier illisible, aucune cible
    """
    spec.validate()
    if series is None:
        if not spec.dataset:
            raise ConfigurationError("Aucun jeu de données à évaluer (eval.dataset)")
        series = read_series_csv(spec.dataset, roles=spec.roles or None)
    if spec.targets:
        unknown = set(spec.targets) - set(series.channel_names)
        if unknown:
            raise ConfigurationError(f"Cibles absentes du jeu de données: {sorted(unknown)}")
        roles = [
            ChannelRole.TARGET if n in spec.targets else ChannelRole.COVARIATE
            for n in series.channel_names
        ]
        series = RawSeries(
            id=series.id,
            values=series.values,
            timestamps=series.timestamps,
            channel_roles=roles,
            channel_names=series.channel_names,
        )
    series = series.ordered()
    if series.n_targets == 0:
        raise DataError(f"Série {series.id}: aucun canal cible à évaluer")

    bounds = split_bounds(series.length, spec)
    values = series.values
    if spec.space == "standardized":
        lo, hi = bounds["train"]
        if hi <= lo:
            raise DataError("Partie train vide: impossible de standardiser")
        mean = np.nanmean(values[lo:hi], axis=0)
        std = np.nanstd(values[lo:hi], axis=0)
        values = (values - mean) / np.where(std > 0, std, 1.0)
    return EvalData(
        values=values,
        n_targets=series.n_targets,
        target_names=series.channel_names[: series.n_targets],
        timestamps=series.timestamps,
        bounds=bounds,
    )


def _usable_starts(data, spec):
    starts = eval_window_starts(
        data.bounds["test"], spec.context_len, spec.max_horizon, spec.stride, spec.borrow_context
    )
    if len(starts) == 0:
        lo, hi = data.bounds["test"]
        raise DataError(
            f"Partie test de {hi - lo} lignes trop courte pour un contexte de {spec.context_len} "
            f"et un horizon de {spec.max_horizon}"
        )
    missing = np.concatenate([[0], np.cumsum(np.isnan(data.values).any(axis=1))])
    span = spec.context_len + spec.max_horizon
    clean = missing[starts + span] - missing[starts] == 0
    if not np.all(clean):
        logger.warning(
            f"{int(np.sum(~clean))} fenêtres d'évaluation ignorées (valeurs manquantes)"
        )
    starts = starts[clean]
    if len(starts) == 0:
        raise DataError("Aucune fenêtre d'évaluation complète dans la partie test")
    return starts


def evaluate_forecaster(data, spec, name, predict):
    """
    Applique le protocole glissant à un prévisionniste quelconque.

    Args:
        data (EvalData): Données
        spec (EvalSpec): Protocole d'évaluation
        name (str): Nom du tableau
        predict (callable): predict(starts, contexts [B × L × C]) -> [B × max(H) × O]

    Returns:
        MetricTable: Une ligne par horizon

    Raises:
        DataError: Partie test trop courte
    """
    starts = _usable_starts(data, spec)
    L, H, O = spec.context_len, spec.max_horizon, data.n_targets
    accumulators = {h: MetricAccumulator() for h in spec.horizons}
    windows = [] if spec.dump_windows else None

    for lo in range(0, len(starts), spec.batch_size):
        batch = starts[lo:lo + spec.batch_size]
        contexts = data.values[batch[:, None] + np.arange(L)]
        truth = data.values[batch[:, None] + L + np.arange(H)][:, :, :O]
        predicted = np.asarray(predict(batch, contexts), dtype=np.float64)
        if predicted.shape != truth.shape:
            raise DataError(f"Prévisions de forme {predicted.shape}, attendue {truth.shape}")
        for h in spec.horizons:
            accumulators[h].update(truth[:, :h], predicted[:, :h])
        if windows is not None:
            for i, s in enumerate(batch):
                for h in spec.horizons:
                    err = truth[i, :h] - predicted[i, :h]
                    windows.append({
                        "window": lo + i,
                        "start": int(s),
                        "horizon": h,
                        "MSE": float(np.mean(err * err)),
                        "MAE": float(np.mean(np.abs(err))),
                    })

    rows = {h: accumulators[h].result() for h in spec.horizons}
    return MetricTable(name=name, rows=rows, n_windows=len(starts), windows=windows)


def _time_features(data, padding):
    if data.timestamps is None:
        return None
    future = extrapolate_timestamps(data.timestamps, padding)
    stamps = data.timestamps if future is None else data.timestamps.append(future)
    return encode_time_features(stamps)


def model_predictor(params, config, data, spec):
    """
    Prévisionniste fondé sur le modèle, pour evaluate_forecaster.

    Les canaux calendaires futurs sont calculés à partir des horodatages
    réels (prolongés au-delà de la série si nécessaire).
    """
    L = min(spec.context_len, config.context_len)
    if L < spec.context_len:
        logger.warning(
            f"Contexte d'évaluation de {spec.context_len} points "
            f"réduit à {L} (capacité du modèle)"
        )
    blocks = math.ceil(spec.max_horizon / config.patch_size)
    feats = _time_features(data, blocks * config.patch_size)
    O = data.n_targets

    def predict(starts, contexts):
        contexts = contexts[:, -L:]
        ctx_feats = fut_feats = None
        if feats is not None:
            ctx_feats = feats[starts[:, None] + spec.context_len - L + np.arange(L)]
            future = np.arange(blocks * config.patch_size)
            fut_feats = feats[starts[:, None] + spec.context_len + future]
        n_targets = O
        if spec.univariate:
            B = contexts.shape[0]
            contexts = contexts[:, :, :O].transpose(0, 2, 1).reshape(B * O, L, 1)
            if feats is not None:
                ctx_feats = np.repeat(ctx_feats, O, axis=0)
                fut_feats = np.repeat(fut_feats, O, axis=0)
            n_targets = 1
        predictions, _, _, _ = forecast_channels(
            params,
            config,
            contexts,
            n_targets,
            spec.max_horizon,
            context_time_feats=ctx_feats,
            future_time_feats=fut_feats,
            renormalize_each_block=spec.renormalize_each_block,
        )
        if spec.univariate:
            predictions = predictions[:, :, 0].reshape(-1, O, spec.max_horizon).transpose(0, 2, 1)
        return predictions

    return predict


@log_pipeline_step("rolling_eval")
def rolling_eval(checkpoint, spec, series=None, name="model"):
    """
    Évalue un checkpoint selon le protocole glissant.

    Args:
        checkpoint (Checkpoint | tuple): Checkpoint, ou couple (ModelParams, ModelConfig)
        spec (EvalSpec): Protocole d'évaluation
        series (RawSeries, optional): Série déjà chargée
        name (str): Nom du tableau

    Returns:
        MetricTable: Lignes par horizon et ligne moyenne
    """
    if isinstance(checkpoint, tuple):
        params, config = checkpoint
    else:
        params, config = checkpoint.model_params(requires_grad=False), checkpoint.model_config
    data = load_eval_data(spec, series)
    table = evaluate_forecaster(data, spec, name, model_predictor(params, config, data, spec))
    logger.info(
        f"Évaluation '{name}': {table.n_windows} fenêtres, "
        f"MAE moyen {table.mean_row()['MAE']:.6f}"
    )
    return table


def naive_baselines(spec, series=None, names=("last_value", "seasonal_naive")):
    """
    Références naïves évaluées selon le même protocole.

    Args:
        spec (EvalSpec): Protocole d'évaluation (season_period pour la référence saisonnière)
        series (RawSeries, optional): Série déjà chargée
        names (iterable[str]): Références à évaluer (voir BASELINES)

    Returns:
        dict: nom -> MetricTable
    """
    data = load_eval_data(spec, series)
    tables = {}
    for name in names:
        if name not in BASELINES:
            raise ConfigurationError(
                f"Référence inconnue '{name}' (choix: {', '.join(BASELINES)})"
            )
        baseline = BASELINES[name]

        def predict(starts, contexts, baseline=baseline):
            return baseline(contexts, spec.max_horizon, data.n_targets, period=spec.season_period)

        tables[name] = evaluate_forecaster(data, spec, name, predict)
    return tables
