"""
Encodage calendaire des horodatages en 6 canaux sinus/cosinus.
"""

import numpy as np
import pandas as pd

N_TIME_FEATURES = 6
SECONDS_PER_DAY = 86400.0


def encode_time_features(timestamps):
    """
    Encode seconde du jour, jour de la semaine et mois de l'année.

    Colonnes, dans l'ordre : sin/cos(2π·s/86400), sin/cos(2π·j/7),
    sin/cos(2π·(mois−1)/12), avec lundi = 0.

    Args:
        timestamps: Horodatages (tout ce que pandas.DatetimeIndex accepte)

    Returns:
        numpy.ndarray: Matrice [T × 6] en float64
    """
    index = pd.DatetimeIndex(timestamps)
    seconds = (index - index.normalize()).total_seconds().to_numpy(dtype=np.float64)
    day = index.dayofweek.to_numpy(dtype=np.float64)
    month = index.month.to_numpy(dtype=np.float64) - 1.0
    phases = (
        2.0 * np.pi * seconds / SECONDS_PER_DAY,
        2.0 * np.pi * day / 7.0,
        2.0 * np.pi * month / 12.0,
    )
    out = np.empty((len(index), N_TIME_FEATURES), dtype=np.float64)
    for i, phase in enumerate(phases):
        out[:, 2 * i] = np.sin(phase)
        out[:, 2 * i + 1] = np.cos(phase)
    return out


def extrapolate_timestamps(timestamps, horizon):
    """
    Prolonge des horodatages de `horizon` pas à l'intervalle médian.

    Args:
        timestamps: Horodatages du contexte (au moins deux)
        horizon (int): Nombre de pas futurs

    Returns:
        pandas.DatetimeIndex | None: Horodatages futurs, None si moins de deux points
    """
    index = pd.DatetimeIndex(timestamps)
    if len(index) < 2:
        return None
    step = pd.Timedelta(int(np.median(np.diff(index.asi8))), unit="ns")
    return pd.DatetimeIndex([index[-1] + step * (k + 1) for k in range(horizon)])
