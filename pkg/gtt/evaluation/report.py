"""
Tableaux de métriques par horizon et leur export.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional
import numpy as np
import pandas as pd
from ..exceptions import DataError
from .metrics import METRIC_NAMES

logger = logging.getLogger(__name__)

MEAN_ROW = "mean"


@dataclass
class MetricTable:
    """
    Une ligne de métriques par horizon, plus la ligne moyenne.

    Attributs :
        name (str) : Nom du prévisionniste (model, last_value, ...)
        rows (dict) : horizon -> {MSE, MAE, NRMSE, WAPE}
        n_windows (int) : Nombre de fenêtres évaluées
        windows (list[dict]) : Erreurs par fenêtre, si demandées
    """

    name: str
    rows: Dict[int, dict]
    n_windows: int = 0
    windows: Optional[List[dict]] = field(default=None, repr=False)

    @property
    def horizons(self):
        return sorted(self.rows)

    def mean_row(self):
        """Moyenne arithmétique des lignes par horizon (None si une valeur manque)."""
        mean = {}
        for metric in METRIC_NAMES:
            values = [self.rows[h][metric] for h in self.horizons]
            mean[metric] = None if any(v is None for v in values) else float(np.mean(values))
        return mean

    def to_frame(self):
        records = [{"horizon": str(h), **self.rows[h]} for h in self.horizons]
        records.append({"horizon": MEAN_ROW, **self.mean_row()})
        frame = pd.DataFrame.from_records(records, columns=["horizon", *METRIC_NAMES])
        return frame.set_index("horizon").astype(float)

    def to_text(self):
        """Tableau aligné en texte brut."""
        body = self.to_frame().to_string(float_format=lambda v: f"{v:.6f}", na_rep="-")
        return f"[{self.name}] {self.n_windows} fenêtres\n{body}\n"

    def write(self, out_dir):
        """
        Écrit metrics_<nom>.csv, metrics_<nom>.txt et, le cas échéant, windows_<nom>.csv.

        Returns:
            list[pathlib.Path]: Fichiers écrits

        Raises:
            DataError: Si l'écriture échoue
        """
        out_dir = Path(out_dir)
        paths = [out_dir / f"metrics_{self.name}.csv", out_dir / f"metrics_{self.name}.txt"]
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            self.to_frame().to_csv(paths[0], float_format="%.10g")
            paths[1].write_text(self.to_text(), encoding="utf-8")
            if self.windows is not None:
                paths.append(out_dir / f"windows_{self.name}.csv")
                frame = pd.DataFrame.from_records(self.windows)
                frame.to_csv(paths[-1], index=False, float_format="%.10g")
        except OSError as e:
            raise DataError(f"{out_dir}: écriture des métriques impossible ({e})") from e
        logger.info(f"Métriques '{self.name}' écrites dans {out_dir}")
        return paths
