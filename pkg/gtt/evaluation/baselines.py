"""
Prévisionnistes naïfs servant de points de comparaison.

Chacun reçoit des contextes [B × L × C] (cibles en tête) et retourne des
prévisions [B × H × O].
"""

import numpy as np
from ..exceptions import ConfigurationError


def last_value_forecast(contexts, horizon, n_targets, **_):
    """Répète la dernière valeur observée de chaque cible."""
    last = np.asarray(contexts, dtype=np.float64)[:, -1:, :n_targets]
    return np.repeat(last, horizon, axis=1)


def seasonal_naive_forecast(contexts, horizon, n_targets, period=24, **_):
    """
    Répète la dernière période observée : ŷ[t] = x[L − p + (t mod p)].

    Raises:
        ConfigurationError: Période plus longue que le contexte
    """
    contexts = np.asarray(contexts, dtype=np.float64)
    L = contexts.shape[1]
    if period < 1 or period > L:
        raise ConfigurationError(
            f"Période saisonnière {period} incompatible avec un contexte de {L} points"
        )
    index = L - period + np.arange(horizon) % period
    return contexts[:, index, :n_targets]


def constant_forecast(contexts, horizon, n_targets, value=0.0, **_):
    """Prévoit une constante."""
    return np.full((np.shape(contexts)[0], horizon, n_targets), float(value))


BASELINES = {
    "last_value": last_value_forecast,
    "seasonal_naive": seasonal_naive_forecast,
    "constant": constant_forecast,
}
