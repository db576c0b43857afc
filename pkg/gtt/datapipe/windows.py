"""
Extraction des fenêtres glissantes sans valeur manquante.
"""

import numpy as np
from ..exceptions import ConfigurationError

CONTEXT_LEN = 1024
TARGET_LEN = 64
WINDOW_LEN = CONTEXT_LEN + TARGET_LEN
DEFAULT_STRIDE = 16
SERIES_CAP = 60000


def window_starts(
    value_range, stride, missing_rows, cap=SERIES_CAP, rng=None, window_len=WINDOW_LEN
):
    """
    Indices de début des fenêtres complètes d'une plage.

    Les débuts suivent la grille start, start+stride, ... ; une fenêtre est
    retenue si elle tient dans la plage et ne contient aucune ligne manquante.
    Au-delà de `cap` fenêtres, un sous-ensemble uniforme de taille `cap` est tiré.

    Args:
        value_range (tuple): Plage [start, stop)
        stride (int): Pas entre deux débuts
        missing_rows (numpy.ndarray): Masque booléen des lignes manquantes (série entière)
        cap (int): Nombre maximal de fenêtres
        rng (numpy.random.Generator, optional): Générateur pour le sous-échantillonnage
        window_len (int): Longueur d'une fenêtre

    Returns:
        numpy.ndarray: Débuts retenus, triés
    """
    if stride < 1:
        raise ConfigurationError(f"Le pas des fenêtres doit être >= 1 (reçu {stride})")
    start, stop = value_range
    if stop - start < window_len:
        return np.empty(0, dtype=np.int64)
    candidates = np.arange(start, stop - window_len + 1, stride, dtype=np.int64)
    missing = np.concatenate([[0], np.cumsum(np.asarray(missing_rows, dtype=np.int64))])
    clean = missing[candidates + window_len] - missing[candidates] == 0
    starts = candidates[clean]
    if len(starts) > cap:
        if rng is None:
            raise ConfigurationError(
                "Un générateur est requis pour plafonner le nombre de fenêtres"
            )
        keep = rng.choice(len(starts), size=cap, replace=False)
        starts = starts[np.sort(keep)]
    return starts


def extract_windows(series, value_range, stride=DEFAULT_STRIDE, cap=SERIES_CAP, rng=None):
    """
    Extrait les fenêtres brutes [1088 × C] d'une plage de la série.

    Args:
        series (RawSeries): Série source
        value_range (tuple): Plage [start, stop)
        stride (int): Pas entre deux fenêtres
        cap (int): Nombre maximal de fenêtres
        rng (numpy.random.Generator, optional): Générateur pour le plafonnement

    Returns:
        list[numpy.ndarray]: Fenêtres, dans l'ordre temporel
    """
    starts = window_starts(value_range, stride, series.missing_rows(), cap, rng)
    return [series.values[s:s + WINDOW_LEN] for s in starts]
