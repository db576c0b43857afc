"""
Métriques de prévision ponctuelle : MSE, MAE, NRMSE et WAPE.
"""

import math
from dataclasses import dataclass
import numpy as np
from ..exceptions import DimensionError

METRIC_NAMES = ("MSE", "MAE", "NRMSE", "WAPE")


@dataclass
class MetricAccumulator:
    """
    Sommes nécessaires aux quatre métriques, cumulées fenêtre après fenêtre.

    Les erreurs de toutes les fenêtres et de tous les canaux cibles sont
    regroupées avant le calcul des métriques.
    """

    count: int = 0
    sq_error: float = 0.0
    abs_error: float = 0.0
    abs_target: float = 0.0

    def update(self, y, y_hat):
        y = np.asarray(y, dtype=np.float64)
        y_hat = np.asarray(y_hat, dtype=np.float64)
        if y.shape != y_hat.shape:
            raise DimensionError(f"metrics: formes différentes {y.shape} et {y_hat.shape}")
        err = y - y_hat
        self.count += err.size
        self.sq_error += float(np.sum(err * err))
        self.abs_error += float(np.sum(np.abs(err)))
        self.abs_target += float(np.sum(np.abs(y)))
        return self

    def result(self):
        """
        Calcule les métriques.

        Returns:
            dict: MSE, MAE, NRMSE, WAPE ; NRMSE et WAPE valent None si Σ|y| = 0
        """
        if self.count == 0:
            raise DimensionError("metrics: aucune valeur à évaluer")
        mse = self.sq_error / self.count
        mae = self.abs_error / self.count
        if self.abs_target == 0.0:
            nrmse = wape = None
        else:
            nrmse = math.sqrt(mse) / (self.abs_target / self.count)
            wape = self.abs_error / self.abs_target
        return {"MSE": mse, "MAE": mae, "NRMSE": nrmse, "WAPE": wape}


def metrics(y, y_hat):
    """
    Métriques ponctuelles entre vérité terrain et prévision.

    Args:
        y (numpy.ndarray): Vérité terrain [n × O]
        y_hat (numpy.ndarray): Prévision [n × O]

    Returns:
        dict: MSE, MAE, NRMSE = √MSE / moyenne|y|, WAPE = Σ|y − ŷ| / Σ|y|

    Raises:
        DimensionError: Formes différentes ou aucune valeur
    """
    return MetricAccumulator().update(y, y_hat).result()
