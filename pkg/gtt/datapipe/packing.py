"""
Répartition des canaux d'une fenêtre sur des échantillons à 32 canaux.

Disposition d'un échantillon : canaux de données (cibles puis covariables),
puis les 6 canaux calendaires lorsque des horodatages existent, puis des
canaux nuls complémentaires.
"""

from dataclasses import dataclass
import numpy as np
from .time_features import N_TIME_FEATURES

MAX_CHANNELS = 32


@dataclass
class PackedWindow:
    """
    Fenêtre à 32 canaux.

    Attributs :
        values (numpy.ndarray) : Valeurs [T × 32]
        channel_valid (numpy.ndarray) : Masque booléen [32] des canaux réels
        data_channels (numpy.ndarray) : Index d'origine des canaux de données placés en tête
    """

    values: np.ndarray
    channel_valid: np.ndarray
    data_channels: np.ndarray

    @property
    def n_data(self):
        return len(self.data_channels)


def packing_capacity(has_time_features):
    """Nombre de canaux de données par échantillon."""
    return MAX_CHANNELS - N_TIME_FEATURES if has_time_features else MAX_CHANNELS


def channel_groups(n_channels, has_time_features):
    """
    Découpe des canaux en groupes consécutifs de taille au plus la capacité.

    Returns:
        list[numpy.ndarray]: Index des canaux de chaque groupe
    """
    capacity = packing_capacity(has_time_features)
    return [np.arange(lo, min(lo + capacity, n_channels)) for lo in range(0, n_channels, capacity)]


def pack_channels(window, time_feats=None):
    """
    Complète ou découpe une fenêtre en échantillons à 32 canaux.

    Args:
        window (numpy.ndarray): Fenêtre [T × C]
        time_feats (numpy.ndarray, optional): Canaux calendaires [T × 6], recopiés
            dans chaque groupe

    Returns:
        list[PackedWindow]: Une fenêtre par groupe de canaux
    """
    window = np.asarray(window, dtype=np.float64)
    has_time = time_feats is not None
    length = window.shape[0]
    packed = []
    for group in channel_groups(window.shape[1], has_time):
        values = np.zeros((length, MAX_CHANNELS), dtype=np.float64)
        valid = np.zeros(MAX_CHANNELS, dtype=bool)
        n = len(group)
        values[:, :n] = window[:, group]
        valid[:n] = True
        if has_time:
            values[:, n:n + N_TIME_FEATURES] = time_feats
            valid[n:n + N_TIME_FEATURES] = True
        packed.append(PackedWindow(values=values, channel_valid=valid, data_channels=group))
    return packed
