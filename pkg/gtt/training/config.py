"""
Paramètres d'entraînement et de réglage fin.
"""

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Tuple
from ..exceptions import ConfigurationError

# Taux d'apprentissage initial, taille de lot et échauffement par préréglage
TRAIN_PRESETS = {
    "large": {"initial_lr": 3e-4, "batch_size": 1024, "warmup_steps": 2048},
    "small": {"initial_lr": 6e-4, "batch_size": 2048, "warmup_steps": 2048},
    "tiny": {"initial_lr": 1e-3, "batch_size": 4096, "warmup_steps": 2048},
    "micro": {"initial_lr": 1e-3, "batch_size": 32, "warmup_steps": 100},
    "micro-wide": {"initial_lr": 1e-3, "batch_size": 32, "warmup_steps": 100},
}


def _or(value, default):
    return default if value is None else value


@dataclass
class TrainConfig:
    """
    Recette d'entraînement.

    Les champs laissés à None prennent la valeur du préréglage ; total_steps
    vaut par défaut le nombre de pas de max_epochs époques.
    """

    preset: str = "micro"
    initial_lr: Optional[float] = None
    weight_decay: float = 0.004
    clip_norm: float = 1.0
    warmup_steps: Optional[int] = None
    batch_size: Optional[int] = None
    total_steps: Optional[int] = None
    max_epochs: int = 100
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    seed: int = 0
    early_stop_patience: int = 3
    log_every: int = 10

    def resolve(self, n_train=None):
        """
        Matérialise les valeurs par défaut.

        Args:
            n_train (int, optional): Nombre d'échantillons d'entraînement (pour total_steps)

        Returns:
            TrainConfig: Copie complète

        Raises:
            ConfigurationError: Valeurs incohérentes
        """
        preset = TRAIN_PRESETS.get(self.preset)
        if preset is None and None in (self.initial_lr, self.batch_size, self.warmup_steps):
            raise ConfigurationError(f"Préréglage d'entraînement inconnu '{self.preset}'")
        preset = preset or {}
        resolved = replace(
            self,
            initial_lr=_or(self.initial_lr, preset["initial_lr"]),
            batch_size=_or(self.batch_size, preset["batch_size"]),
            warmup_steps=_or(self.warmup_steps, preset["warmup_steps"]),
            betas=tuple(self.betas),
        )
        if resolved.total_steps is None and n_train is not None:
            steps_per_epoch = max(1, math.ceil(n_train / resolved.batch_size))
            resolved = replace(
                resolved,
                total_steps=max(resolved.max_epochs * steps_per_epoch, resolved.warmup_steps + 1),
            )
        return resolved.validate()

    def validate(self):
        if self.initial_lr is not None and self.initial_lr <= 0:
            raise ConfigurationError("initial_lr doit être strictement positif")
        if self.warmup_steps is not None and self.warmup_steps < 0:
            raise ConfigurationError("warmup_steps doit être positif ou nul")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigurationError("batch_size doit être >= 1")
        if self.clip_norm <= 0:
            raise ConfigurationError("clip_norm doit être strictement positif")
        if self.early_stop_patience < 1:
            raise ConfigurationError("early_stop_patience doit être >= 1")
        return self

    def to_dict(self):
        data = asdict(self)
        data["betas"] = list(self.betas)
        return data


@dataclass
class FinetuneConfig:
    """
    Réglage fin de la tête : Adam sans décroissance des poids, taux constant.
    """

    lr: float = 1e-3
    epochs_cap: int = 20
    batch_size: int = 32
    clip_norm: float = 1.0
    betas: Tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    early_stop_patience: int = 3
    seed: int = 0
    trainable: Tuple[str, ...] = field(default=("head.bias", "head.weight"))

    def to_dict(self):
        data = asdict(self)
        data["betas"] = list(self.betas)
        data["trainable"] = list(self.trainable)
        return data
