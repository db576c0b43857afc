"""
Séries brutes et lecture des fichiers CSV.

Une série brute est une matrice [T × C] de réels (NaN marque une valeur
manquante), éventuellement accompagnée d'horodatages, dont chaque canal porte
un rôle : cible ou covariable.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional
import numpy as np
import pandas as pd
import yaml
from ..exceptions import ConfigurationError, DataError

logger = logging.getLogger(__name__)

TIMESTAMP_HEADERS = ("date", "timestamp", "time")
TRAIN_FRACTION = 0.9


class ChannelRole:
    """
    Rôles possibles d'un canal.
    """

    TARGET = "target"
    COVARIATE = "covariate"

    @classmethod
    def choices(cls):
        """
        Retourne la liste des rôles disponibles.

        Returns:
            list: Liste des rôles
        """
        return [cls.TARGET, cls.COVARIATE]


@dataclass
class RawSeries:
    """
    Série multivariée brute.

    Attributs :
        id (str) : Identifiant de la série
        values (numpy.ndarray) : Matrice [T × C], NaN pour les valeurs manquantes
        timestamps (pandas.DatetimeIndex | None) : Horodatages strictement croissants
        channel_roles (list[str]) : Rôle de chaque canal
        channel_names (list[str]) : Nom de chaque canal
    """

    id: str
    values: np.ndarray
    timestamps: Optional[pd.DatetimeIndex] = None
    channel_roles: List[str] = field(default_factory=list)
    channel_names: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.values.ndim != 2 or self.values.shape[1] < 1:
            raise DataError(
                f"Série {self.id}: matrice [T × C] attendue, forme reçue {self.values.shape}"
            )
        n_channels = self.values.shape[1]
        if not self.channel_roles:
            self.channel_roles = [ChannelRole.TARGET] * n_channels
        if not self.channel_names:
            self.channel_names = [f"ch{i}" for i in range(n_channels)]
        if len(self.channel_roles) != n_channels or len(self.channel_names) != n_channels:
            raise DataError(
                f"Série {self.id}: {n_channels} canaux mais rôles/noms de longueur différente"
            )
        for role in self.channel_roles:
            if role not in ChannelRole.choices():
                raise DataError(f"Série {self.id}: rôle inconnu '{role}'")
        if self.timestamps is not None:
            self.timestamps = pd.DatetimeIndex(self.timestamps)
            if len(self.timestamps) != self.values.shape[0]:
                raise DataError(
                    f"Série {self.id}: {len(self.timestamps)} horodatages "
                    f"pour {self.values.shape[0]} lignes"
                )
            if len(self.timestamps) > 1 and not np.all(np.diff(self.timestamps.asi8) > 0):
                raise DataError(f"Série {self.id}: horodatages non strictement croissants")

    @property
    def length(self):
        return self.values.shape[0]

    @property
    def n_channels(self):
        return self.values.shape[1]

    @property
    def n_targets(self):
        return sum(1 for role in self.channel_roles if role == ChannelRole.TARGET)

    def ordered(self):
        """
        Retourne la série avec les canaux cibles placés avant les covariables.

        L'ordre relatif à l'intérieur de chaque groupe est conservé.

        Returns:
            RawSeries: Série réordonnée
        """
        order = [i for i, r in enumerate(self.channel_roles) if r == ChannelRole.TARGET]
        order += [i for i, r in enumerate(self.channel_roles) if r == ChannelRole.COVARIATE]
        return RawSeries(
            id=self.id,
            values=self.values[:, order],
            timestamps=self.timestamps,
            channel_roles=[self.channel_roles[i] for i in order],
            channel_names=[self.channel_names[i] for i in order],
        )

    def missing_rows(self):
        """Masque booléen [T] des lignes contenant au moins une valeur manquante."""
        return np.isnan(self.values).any(axis=1)


def load_roles_sidecar(csv_path):
    """
    Lit le fichier de rôles associé à un CSV (`<csv>.roles.yaml`), s'il existe.

    Args:
        csv_path (str | Path): Chemin du CSV

    Returns:
        dict | None: Rôle par nom de colonne
    """
    sidecar = Path(f"{csv_path}.roles.yaml")
    if not sidecar.exists():
        return None
    try:
        with open(sidecar, encoding="utf-8") as fh:
            roles = yaml.safe_load(fh) or {}
    except (OSError, yaml.YAMLError) as e:
        raise DataError(f"{sidecar}: lecture impossible ({e})") from e
    if not isinstance(roles, dict):
        raise ConfigurationError(f"{sidecar}: un dictionnaire colonne -> rôle est attendu")
    return roles


def _looks_like_timestamps(column):
    if column.name.strip().lower() in TIMESTAMP_HEADERS:
        return True
    if pd.api.types.is_numeric_dtype(column):
        return False
    try:
        pd.to_datetime(column.dropna().head(5))
    except (ValueError, TypeError):
        return False
    return True


def read_series_csv(path, roles=None, series_id=None):
    """
    Lit une série depuis un fichier CSV.

    La première colonne est interprétée comme un horodatage ISO-8601 si son
    en-tête vaut date/timestamp/time ou si ses valeurs sont des dates. Les
    cellules vides deviennent NaN. Les colonnes absentes de `roles` sont des
    cibles.

    Args:
        path (str | Path): Fichier CSV avec une ligne d'en-tête
        roles (dict, optional): Rôle par nom de colonne ; à défaut le fichier
            `<csv>.roles.yaml` est consulté
        series_id (str, optional): Identifiant (nom du fichier par défaut)

    Returns:
        RawSeries: Série lue

    Raises:
        DataError: Fichier illisible ou cellule non numérique
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"{path}: lecture impossible ({e})") from e
    if frame.shape[1] == 0:
        raise DataError(f"{path}: aucune colonne")

    timestamps = None
    if _looks_like_timestamps(frame.iloc[:, 0]):
        try:
            timestamps = pd.DatetimeIndex(pd.to_datetime(frame.iloc[:, 0]))
        except (ValueError, TypeError) as e:
            raise DataError(
                f"{path}: horodatages illisibles dans '{frame.columns[0]}' ({e})"
            ) from e
        frame = frame.iloc[:, 1:]
    if frame.shape[1] == 0:
        raise DataError(f"{path}: aucune colonne numérique")

    columns = []
    for name in frame.columns:
        try:
            columns.append(pd.to_numeric(frame[name], errors="raise").to_numpy(dtype=np.float64))
        except (ValueError, TypeError) as e:
            raise DataError(f"{path}: valeur non numérique dans la colonne '{name}'") from e

    if roles is None:
        roles = load_roles_sidecar(path) or {}
    unknown = set(roles) - set(str(c) for c in frame.columns)
    if unknown:
        logger.warning(f"{path}: rôles déclarés pour des colonnes absentes: {sorted(unknown)}")
    names = [str(c) for c in frame.columns]
    return RawSeries(
        id=series_id or path.stem,
        values=np.stack(columns, axis=1),
        timestamps=timestamps,
        channel_roles=[roles.get(name, ChannelRole.TARGET) for name in names],
        channel_names=names,
    )


def split_train_val(series, train_fraction=TRAIN_FRACTION):
    """
    Sépare l'axe temporel en plages d'entraînement et de validation.

    Args:
        series (RawSeries | int): Série, ou sa longueur
        train_fraction (float): Fraction des premiers points réservée à l'entraînement

    Returns:
        tuple: ((0, cut), (cut, T)) avec cut = floor(train_fraction · T)
    """
    length = series if isinstance(series, (int, np.integer)) else series.length
    cut = int(np.floor(train_fraction * length))
    return (0, cut), (cut, int(length))
