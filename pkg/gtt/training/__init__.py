"""
Entraînement : recette AdamW, arrêt anticipé, checkpoints et réglage fin.
"""

from .checkpoint import (
    Checkpoint,
    CheckpointDiff,
    decode_checkpoint,
    diff_checkpoints,
    encode_checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from .config import TRAIN_PRESETS, FinetuneConfig, TrainConfig
from .loop import EarlyStopping, TrainLog, epoch_order, evaluate_loss, fine_tune, train, train_step
from .optim import OptimizerState, adamw_step, clip_gradients, global_grad_norm
from .schedule import lr_schedule

__all__ = [
    "TRAIN_PRESETS",
    "Checkpoint",
    "CheckpointDiff",
    "EarlyStopping",
    "FinetuneConfig",
    "OptimizerState",
    "TrainConfig",
    "TrainLog",
    "adamw_step",
    "clip_gradients",
    "decode_checkpoint",
    "diff_checkpoints",
    "encode_checkpoint",
    "epoch_order",
    "evaluate_loss",
    "fine_tune",
    "global_grad_norm",
    "load_checkpoint",
    "lr_schedule",
    "save_checkpoint",
    "train",
    "train_step",
]
