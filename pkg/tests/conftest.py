"""
Configuration pytest pour GTT.

Ce module configure l'environnement de test avant tout import du paquet et
fournit des objets préfabriqués : générateur aléatoire, petite configuration
de modèle, paramètres en double précision et séries sinusoïdales.
"""

import os
import sys
import numpy as np
import pandas as pd
import pytest

# Définir l'environnement de test pour désactiver Sentry
os.environ["GTT_ENV"] = "test"
os.environ["SENTRY_DSN"] = ""

# Ajouter le répertoire parent au sys.path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

# Import après avoir configuré l'environnement
from gtt.datapipe.series import ChannelRole, RawSeries  # noqa: E402
from gtt.model.config import ModelConfig  # noqa: E402
from gtt.model.params import ModelParams  # noqa: E402


def sine_values(length, period=48.0, amplitude=1.0, phase=0.0, offset=0.0):
    """Sinusoïde échantillonnée sur `length` pas."""
    t = np.arange(length, dtype=np.float64)
    return offset + amplitude * np.sin(2.0 * np.pi * t / period + phase)


def make_series(values, names=None, n_targets=None, freq="h", series_id="s0", with_timestamps=True):
    """
    Construit une RawSeries horodatée.

    Args:
        values (numpy.ndarray): [T] ou [T × C]
        names (list[str], optional): Noms des canaux
        n_targets (int, optional): Nombre de cibles en tête (toutes par défaut)
        with_timestamps (bool): Horodatages horaires à partir du 2021-01-01
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[:, None]
    T, C = values.shape
    names = names or [f"c{i}" for i in range(C)]
    n_targets = C if n_targets is None else n_targets
    roles = [ChannelRole.TARGET] * n_targets + [ChannelRole.COVARIATE] * (C - n_targets)
    timestamps = pd.date_range("2021-01-01", periods=T, freq=freq) if with_timestamps else None
    return RawSeries(
        id=series_id,
        values=values,
        channel_names=list(names),
        channel_roles=roles,
        timestamps=timestamps,
    )


@pytest.fixture
def rng():
    """Générateur déterministe."""
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config():
    """
    Modèle minuscule (contexte de 64 pas) pour les vérifications de gradient.
    """
    config = ModelConfig(
        n_layers=1, embed_dim=8, n_heads=2, mlp_dim=16, patch_size=16, context_len=64
    )
    return config.validate()


@pytest.fixture
def tiny_params64(tiny_config):
    """Paramètres du modèle minuscule en double précision."""
    return ModelParams.init_params(tiny_config, np.random.default_rng(7), dtype=np.float64)


@pytest.fixture
def sine_series():
    """Série univariée de 3500 pas, période 48."""
    return make_series(sine_values(3500, period=48.0), names=["y"])


@pytest.fixture
def write_csv(tmp_path):
    """
    Écrit un DataFrame en CSV dans le répertoire temporaire et retourne son chemin.
    """

    def _write(frame, name="series.csv"):
        path = tmp_path / name
        frame.to_csv(path, index=False)
        return path

    return _write


@pytest.fixture(name="make_series")
def make_series_fixture():
    """Fabrique de RawSeries horodatées (voir make_series)."""
    return make_series


@pytest.fixture(name="sine_values")
def sine_values_fixture():
    """Fabrique de sinusoïdes (voir sine_values)."""
    return sine_values
