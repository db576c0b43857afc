"""
Génération de séries synthétiques.

Ce module produit des jeux de données représentatifs pour les tests et les
démonstrations : mélanges de sinusoïdes, tendance plus saisonnalité et marches
aléatoires. Chaque série est écrite dans un CSV horodaté, et les paramètres
réellement tirés sont consignés dans `synth_params.yaml`.
"""

import logging
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Tuple
import numpy as np
import pandas as pd
import yaml
from .exceptions import ConfigurationError, DataError
from .seeding import substream

logger = logging.getLogger(__name__)

PARAMS_NAME = "synth_params.yaml"


class Generator:
    """
    Générateurs disponibles.
    """

    SINE_MIXTURE = "sine-mixture"
    TREND_SEASON = "trend+season"
    RANDOM_WALK = "random-walk"

    @classmethod
    def choices(cls):
        """
        Retourne la liste des générateurs disponibles.

        Returns:
            list: Liste des générateurs
        """
        return [cls.SINE_MIXTURE, cls.TREND_SEASON, cls.RANDOM_WALK]


@dataclass
class SyntheticSpec:
    """
    Description d'un jeu synthétique.

    Attributs :
        generator (str) : sine-mixture, trend+season ou random-walk
        n_series (int) : Nombre de séries (fichiers)
        length (int) : Nombre de points par série
        channels (int) : Nombre de canaux par série
        n_components (int) : Sinusoïdes par canal (sine-mixture)
        amplitude (tuple) : Bornes de l'amplitude
        period (tuple) : Bornes de la période, en pas
        phase (tuple) : Bornes de la phase, en radians
        trend (tuple) : Bornes de la pente par pas (trend+season)
        level (tuple) : Bornes du niveau initial
        noise (float) : Écart-type du bruit gaussien (pas de la marche aléatoire)
        start (str) : Premier horodatage
        freq (str) : Fréquence pandas des horodatages
        seed (int) : Graine
    """

    generator: str = Generator.SINE_MIXTURE
    n_series: int = 4
    length: int = 3500
    channels: int = 1
    n_components: int = 2
    amplitude: Tuple[float, float] = (0.5, 2.0)
    period: Tuple[float, float] = (16.0, 256.0)
    phase: Tuple[float, float] = (0.0, 2 * math.pi)
    trend: Tuple[float, float] = (-0.001, 0.001)
    level: Tuple[float, float] = (-1.0, 1.0)
    noise: float = 0.0
    start: str = "2020-01-01"
    freq: str = "h"
    seed: int = 0

    def __post_init__(self):
        for name in ("amplitude", "period", "phase", "trend", "level"):
            setattr(self, name, tuple(float(v) for v in getattr(self, name)))

    def validate(self):
        """
        Vérifie la configuration du générateur.

        Raises:
            ConfigurationError: Générateur inconnu, tailles négatives ou bornes inversées
        """
        if self.generator not in Generator.choices():
            raise ConfigurationError(
                f"Générateur inconnu '{self.generator}' (choix: {', '.join(Generator.choices())})"
            )
        if self.n_series < 0 or self.length < 1 or self.channels < 1 or self.n_components < 1:
            raise ConfigurationError(
                "n_series >= 0, length >= 1, channels >= 1 et n_components >= 1 sont requis"
            )
        for name in ("amplitude", "period", "phase", "trend", "level"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ConfigurationError(f"Bornes de '{name}' inversées: {lo} > {hi}")
        if self.period[0] <= 0:
            raise ConfigurationError("La période doit être strictement positive")
        if self.noise < 0:
            raise ConfigurationError("Le bruit doit être positif ou nul")
        return self

    def to_dict(self):
        data = asdict(self)
        for name in ("amplitude", "period", "phase", "trend", "level"):
            data[name] = list(data[name])
        return data


def _uniform(rng, bounds):
    return float(rng.uniform(bounds[0], bounds[1]))


def _sine_mixture(spec, rng, t):
    values, params = [], []
    for _ in range(spec.channels):
        components = [
            {"amplitude": _uniform(rng, spec.amplitude), "period": _uniform(rng, spec.period),
             "phase": _uniform(rng, spec.phase)}
            for _ in range(spec.n_components)
        ]
        signal = sum(
            c["amplitude"] * np.sin(2 * np.pi * t / c["period"] + c["phase"]) for c in components
        )
        values.append(signal)
        params.append({"components": components})
    return values, params


def _trend_season(spec, rng, t):
    values, params = [], []
    for _ in range(spec.channels):
        p = {
            "level": _uniform(rng, spec.level),
            "slope": _uniform(rng, spec.trend),
            "amplitude": _uniform(rng, spec.amplitude),
            "period": _uniform(rng, spec.period),
            "phase": _uniform(rng, spec.phase),
        }
        season = p["amplitude"] * np.sin(2 * np.pi * t / p["period"] + p["phase"])
        values.append(p["level"] + p["slope"] * t + season)
        params.append(p)
    return values, params


def _random_walk(spec, rng, t):
    values, params = [], []
    step = spec.noise if spec.noise > 0 else 1.0
    for _ in range(spec.channels):
        level = _uniform(rng, spec.level)
        increments = rng.normal(0.0, step, size=len(t))
        increments[0] = 0.0
        values.append(level + np.cumsum(increments))
        params.append({"level": level, "step_std": step})
    return values, params


_GENERATORS = {
    Generator.SINE_MIXTURE: _sine_mixture,
    Generator.TREND_SEASON: _trend_season,
    Generator.RANDOM_WALK: _random_walk,
}


def generate_series(spec, index):
    """
    Génère la série numéro `index`.

    Args:
        spec (SyntheticSpec): Paramètres du générateur
        index (int): Numéro de la série (clé du sous-flux aléatoire)

    Returns:
        tuple: (pandas.DataFrame avec une colonne timestamp, paramètres tirés)
    """
    rng = substream(spec.seed, "synth", index)
    t = np.arange(spec.length, dtype=np.float64)
    values, params = _GENERATORS[spec.generator](spec, rng, t)
    matrix = np.stack(values, axis=1)
    if spec.noise > 0 and spec.generator != Generator.RANDOM_WALK:
        matrix = matrix + rng.normal(0.0, spec.noise, size=matrix.shape)
    frame = pd.DataFrame(matrix, columns=[f"ch{k}" for k in range(spec.channels)])
    frame.insert(0, "timestamp", pd.date_range(spec.start, periods=spec.length, freq=spec.freq))
    return frame, {"channels": params}


def write_synthetic(spec, out_dir):
    """
    Écrit les séries synthétiques et leurs paramètres.

    Args:
        spec (SyntheticSpec): Paramètres du générateur
        out_dir (str | Path): Répertoire de sortie

    Returns:
        list[pathlib.Path]: Fichiers CSV écrits (vide si n_series = 0)

    Raises:
        DataError: Si l'écriture échoue
    """
    spec.validate()
    out_dir = Path(out_dir)
    paths, ground_truth = [], {}
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for index in range(spec.n_series):
            frame, params = generate_series(spec, index)
            path = out_dir / f"series_{index:04d}.csv"
            frame.to_csv(path, index=False, date_format="%Y-%m-%dT%H:%M:%S", float_format="%.10g")
            paths.append(path)
            ground_truth[path.name] = params
        if spec.n_series:
            with open(out_dir / PARAMS_NAME, "w", encoding="utf-8") as fh:
                yaml.safe_dump({"spec": spec.to_dict(), "series": ground_truth}, fh, sort_keys=True)
    except OSError as e:
        raise DataError(f"{out_dir}: écriture des séries synthétiques impossible ({e})") from e
    logger.info(f"{len(paths)} séries synthétiques '{spec.generator}' écrites dans {out_dir}")
    return paths
