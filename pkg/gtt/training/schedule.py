"""
Taux d'apprentissage : échauffement linéaire puis décroissance cosinus.
"""

import math
from ..exceptions import ConfigurationError


def lr_schedule(step, cfg):
    """
    Taux d'apprentissage au pas `step` (compté à partir de 0).

    Args:
        step (int): Pas courant
        cfg (TrainConfig): Configuration résolue (initial_lr, warmup_steps, total_steps)

    Returns:
        float: Taux d'apprentissage

    Raises:
        ConfigurationError: Si total_steps <= warmup_steps
    """
    if cfg.total_steps is None or cfg.total_steps <= cfg.warmup_steps:
        raise ConfigurationError(
            f"total_steps ({cfg.total_steps}) doit dépasser warmup_steps ({cfg.warmup_steps})"
        )
    if step < cfg.warmup_steps:
        return cfg.initial_lr * (step + 1) / cfg.warmup_steps
    progress = (step - cfg.warmup_steps) / (cfg.total_steps - cfg.warmup_steps)
    progress = min(max(progress, 0.0), 1.0)
    return max(0.0, cfg.initial_lr * 0.5 * (1.0 + math.cos(math.pi * progress)))
