"""
Normalisation, filtrage et masquage des échantillons d'entraînement.
"""

from dataclasses import dataclass, replace
import numpy as np
from ..exceptions import InvariantViolation
from .packing import MAX_CHANNELS
from .windows import CONTEXT_LEN, TARGET_LEN

NORM_EPS = 1e-8
EXTREME_LIMIT = 9.0
MASK_PROB = 0.1
MAX_MASKED_ROWS = 960


@dataclass
class TrainingSample:
    """
    Échantillon normalisé : 1024 pas de contexte et 64 pas cibles sur 32 canaux.

    Attributs :
        context (numpy.ndarray) : [1024 × 32]
        target (numpy.ndarray) : [64 × 32]
        channel_valid (numpy.ndarray) : [32] booléens, faux pour les canaux complémentaires
        context_valid_from (int) : Premier indice de contexte non masqué
        norm_mean (numpy.ndarray) : [32] moyennes utilisées
        norm_std (numpy.ndarray) : [32] écarts-types utilisés
    """

    context: np.ndarray
    target: np.ndarray
    channel_valid: np.ndarray
    context_valid_from: int
    norm_mean: np.ndarray
    norm_std: np.ndarray

    def validate(self, mean_tol=1e-5, std_tol=1e-3):
        """
        Vérifie les invariants de l'échantillon.

        Raises:
            InvariantViolation: Si un invariant n'est pas respecté
        """
        if (
            self.context.shape != (CONTEXT_LEN, MAX_CHANNELS)
            or self.target.shape != (TARGET_LEN, MAX_CHANNELS)
        ):
            raise InvariantViolation(
                f"Formes inattendues {self.context.shape} / {self.target.shape}"
            )
        invalid = ~self.channel_valid
        if np.any(self.context[:, invalid]) or np.any(self.target[:, invalid]):
            raise InvariantViolation("Un canal complémentaire contient des valeurs non nulles")
        peak = max(np.max(np.abs(self.context)), np.max(np.abs(self.target)))
        if peak > EXTREME_LIMIT:
            raise InvariantViolation(f"Valeur extrême {peak} > {EXTREME_LIMIT}")
        region = self.context[self.context_valid_from:, self.channel_valid].astype(np.float64)
        if np.any(self.context[: self.context_valid_from]):
            raise InvariantViolation("La zone masquée du contexte n'est pas nulle")
        for column in region.T:
            std = column.std()
            if std == 0.0:
                if np.any(column):
                    raise InvariantViolation("Canal constant non nul après normalisation")
                continue
            if abs(column.mean()) >= mean_tol or abs(std - 1.0) >= std_tol:
                raise InvariantViolation(
                    f"Statistiques hors tolérance: moyenne {column.mean()}, écart-type {std}"
                )
        return self


@dataclass(frozen=True)
class Discard:
    """Échantillon rejeté (valeur renvoyée à la place d'un TrainingSample)."""

    reason: str
    max_abs: float = 0.0


def normalize_sample(window, channel_valid, context_valid_from=0):
    """
    Standardise une fenêtre [1088 × 32] à partir des statistiques de son contexte.

    Pour chaque canal valide, μ et σ (écart-type de population) sont calculés
    sur les lignes [context_valid_from, 1024) ; contexte et cible sont divisés
    par σ + ε. Les lignes [0, context_valid_from) sont mises à zéro.

    Args:
        window (numpy.ndarray): Fenêtre brute [1088 × 32]
        channel_valid (numpy.ndarray): Masque [32] des canaux réels
        context_valid_from (int): Nombre de lignes masquées en tête de contexte

    Returns:
        TrainingSample | Discard: Échantillon, ou rejet si |valeur| > 9
    """
    window = np.asarray(window, dtype=np.float64)
    channel_valid = np.asarray(channel_valid, dtype=bool)
    m = int(context_valid_from)
    stats_region = window[m:CONTEXT_LEN]
    # un canal constant est centré exactement sur sa valeur
    constant = np.ptp(stats_region, axis=0) == 0
    mean = np.where(constant, stats_region[0], stats_region.mean(axis=0))
    std = np.where(constant, 0.0, stats_region.std(axis=0))
    mean = np.where(channel_valid, mean, 0.0)
    std = np.where(channel_valid, std, 0.0)
    normalized = np.where(channel_valid, (window - mean) / (std + NORM_EPS), 0.0)
    normalized[:m] = 0.0

    peak = float(np.max(np.abs(normalized))) if normalized.size else 0.0
    if peak > EXTREME_LIMIT:
        return Discard(reason="extreme_value", max_abs=peak)
    return TrainingSample(
        context=normalized[:CONTEXT_LEN].astype(np.float32),
        target=normalized[CONTEXT_LEN:].astype(np.float32),
        channel_valid=channel_valid.copy(),
        context_valid_from=m,
        norm_mean=mean.astype(np.float32),
        norm_std=std.astype(np.float32),
    )


def draw_mask_start(rng, prob=MASK_PROB):
    """
    Tire le nombre de lignes masquées : 0 avec probabilité 1 − prob,
    sinon uniforme dans [1, 960].

    Deux tirages sont toujours consommés, de sorte que la suite aléatoire ne
    dépend pas des décisions précédentes.
    """
    coin = rng.random()
    m = int(rng.integers(1, MAX_MASKED_ROWS + 1))
    return m if coin < prob else 0


def apply_context_mask(sample, rng, prob=MASK_PROB, mask_stats_over_unmasked=True, mask_start=None):
    """
    Masque le début du contexte d'un échantillon normalisé.

    Avec `mask_stats_over_unmasked`, les valeurs brutes sont reconstruites à
    partir des statistiques stockées puis re-standardisées sur [m, 1024) ;
    sinon seules les lignes [0, m) sont mises à zéro.

    Args:
        sample (TrainingSample): Échantillon normalisé non masqué
        rng (numpy.random.Generator): Générateur du sous-flux "mask"
        prob (float): Probabilité de masquage
        mask_stats_over_unmasked (bool): Recalcule les statistiques sur la zone conservée
        mask_start (int, optional): Force le nombre de lignes masquées

    Returns:
        TrainingSample | Discard: Échantillon masqué (ou inchangé)
    """
    m = draw_mask_start(rng, prob) if mask_start is None else int(mask_start)
    if m == 0:
        return replace(sample, context_valid_from=0)
    if not mask_stats_over_unmasked:
        context = sample.context.copy()
        context[:m] = 0.0
        return replace(sample, context=context, context_valid_from=m)

    scale = sample.norm_std.astype(np.float64) + NORM_EPS
    raw = np.concatenate([sample.context, sample.target]).astype(np.float64)
    raw = raw * scale + sample.norm_mean
    raw[:, ~sample.channel_valid] = 0.0
    return normalize_sample(raw, sample.channel_valid, context_valid_from=m)
