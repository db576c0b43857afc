"""
Boucle d'entraînement, arrêt anticipé et réglage fin de la tête de prévision.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional
import numpy as np
from ..event_logging import log_pipeline_step
from ..exceptions import DataError, DimensionError
from ..model import ForwardBatch, ModelParams, forward, masked_mae_loss
from ..numerics import GradTape, backward
from ..seeding import substream
from .checkpoint import Checkpoint, save_checkpoint
from .optim import OptimizerState, adamw_step, clip_gradients, global_grad_norm
from .schedule import lr_schedule

logger = logging.getLogger(__name__)

TRAIN_LOG_NAME = "train_log.jsonl"
BEST_NAME = "best.ckpt"
LAST_NAME = "last.ckpt"


@dataclass
class EarlyStopping:
    """
    Arrêt après `patience` hausses consécutives de la perte de validation.

    Une perte égale à la précédente interrompt la série de hausses.
    """

    patience: int = 3
    best_val_loss: float = math.inf
    best_epoch: int = 0
    last_val_loss: Optional[float] = None
    increase_count: int = 0

    def observe(self, loss, epoch):
        """
        Enregistre la perte d'une époque.

        Args:
            loss (float): Perte de validation
            epoch (int): Numéro de l'époque (à partir de 1)

        Returns:
            bool: Vrai s'il faut arrêter l'entraînement
        """
        if loss < self.best_val_loss:
            self.best_val_loss = loss
            self.best_epoch = epoch
        if self.last_val_loss is not None and loss > self.last_val_loss:
            self.increase_count += 1
        else:
            self.increase_count = 0
        self.last_val_loss = loss
        return self.increase_count >= self.patience

    @classmethod
    def from_checkpoint(cls, ckpt, patience):
        return cls(
            patience=patience,
            best_val_loss=ckpt.best_val_loss,
            best_epoch=ckpt.best_epoch,
            last_val_loss=ckpt.last_val_loss,
            increase_count=ckpt.increase_count,
        )


class TrainLog:
    """Journal d'entraînement en lignes JSON, recopié dans le logger au niveau INFO."""

    def __init__(self, path=None, append=False):
        self.path = Path(path) if path else None
        self._fh = None
        if self.path is not None:
            try:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                self._fh = open(self.path, "a" if append else "w", encoding="utf-8")
            except OSError as e:
                raise DataError(f"{self.path}: ouverture du journal impossible ({e})") from e

    def write(self, event, **fields):
        line = json.dumps({"event": event, **fields}, sort_keys=True)
        if self._fh is not None:
            self._fh.write(line + "\n")
            self._fh.flush()
        logger.info(line)

    def close(self):
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


def epoch_order(shard_counts, rng):
    """
    Ordre de parcours d'une époque : permutation des shards puis des
    échantillons à l'intérieur de chaque shard.

    Args:
        shard_counts (list[int]): Nombre d'échantillons par shard
        rng (numpy.random.Generator): Générateur du sous-flux "shuffle" de l'époque

    Returns:
        numpy.ndarray: Index globaux
    """
    offsets = np.concatenate([[0], np.cumsum(shard_counts)]).astype(np.int64)
    order = rng.permutation(len(shard_counts))
    parts = [offsets[i] + rng.permutation(shard_counts[i]) for i in order]
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def _batch(arrays, index):
    return ForwardBatch(
        inputs=arrays["context"][index],
        channel_valid=arrays["channel_valid"][index],
        target=arrays["target"][index],
    )


def evaluate_loss(params, config, arrays, batch_size):
    """
    Perte MAE masquée moyenne sur un split, pondérée par le nombre d'éléments valides.

    Returns:
        float: Perte moyenne (nan si le split est vide)
    """
    n = len(arrays["context"])
    total, weight = 0.0, 0.0
    for start in range(0, n, batch_size):
        batch = _batch(arrays, np.arange(start, min(start + batch_size, n)))
        out = forward(batch, params, config)
        loss = masked_mae_loss(out.predictions, batch.target, batch.channel_valid)
        valid = float(batch.channel_valid.sum()) * config.patch_size
        total += float(loss.item()) * valid
        weight += valid
    return total / weight if weight else math.nan


def train_step(params, config, batch, clip_norm):
    """
    Passe avant, perte, rétropropagation et écrêtage sur un lot.

    Returns:
        tuple: (perte, norme avant écrêtage, facteur d'écrêtage)
    """
    params.zero_grad()
    with GradTape() as tape:
        out = forward(batch, params, config)
        loss = masked_mae_loss(out.predictions, batch.target, batch.channel_valid)
    loss.check_finite("loss")
    backward(loss, tape)
    norm = global_grad_norm(params)
    scale = clip_gradients(params, clip_norm)
    return float(loss.item()), norm, scale


def _check_compatible(arrays, config):
    shape = arrays["context"].shape
    if len(shape) != 3 or shape[1] != config.context_len:
        raise DimensionError(
            f"Corpus de contexte {shape[1:]} incompatible avec context_len={config.context_len}"
        )
    if arrays["target"].shape[1] != config.patch_size:
        raise DimensionError(
            f"Corpus de cible {arrays['target'].shape[1]} "
            f"incompatible avec patch_size={config.patch_size}"
        )


def _fit(
    params,
    model_config,
    corpus,
    *,
    lr_fn,
    weight_decay,
    betas,
    adam_eps,
    clip_norm,
    batch_size,
    max_epochs,
    total_steps,
    seed,
    train_config,
    state,
    early,
    start_epoch,
    best,
    out_dir,
    log_every,
    append_log,
):
    train_arrays = corpus.load_arrays("train")
    if len(train_arrays["context"]) == 0:
        raise DataError(f"{corpus.root}: le split d'entraînement est vide")
    _check_compatible(train_arrays, model_config)
    val_arrays = corpus.load_arrays("validation")
    if len(val_arrays["context"]) == 0:
        logger.warning(
            "Split de validation vide: l'arrêt anticipé utilise la perte d'entraînement"
        )
        val_arrays = train_arrays
    shard_counts = [s["count"] for s in corpus.manifest["shards"] if s["split"] == "train"]

    ckpt_dir = Path(out_dir) / "checkpoints" if out_dir else None
    log_path = Path(out_dir) / TRAIN_LOG_NAME if out_dir else None

    def snapshot(epoch):
        return Checkpoint(
            model_config=model_config,
            params=params.to_arrays(),
            train_config=train_config,
            adam_m={k: v.copy() for k, v in state.m.items()},
            adam_v={k: v.copy() for k, v in state.v.items()},
            step=state.step,
            epoch=epoch,
            best_val_loss=early.best_val_loss,
            best_epoch=early.best_epoch,
            last_val_loss=early.last_val_loss,
            increase_count=early.increase_count,
            rng_state={"seed": int(seed), "stream": "shuffle", "next_epoch": epoch + 1},
        )

    epoch = start_epoch
    reason = "max_epochs"
    with TrainLog(log_path, append=append_log) as log:
        while True:
            if epoch >= max_epochs:
                reason = "max_epochs"
                break
            if total_steps is not None and state.step >= total_steps:
                reason = "total_steps"
                break
            epoch += 1
            order = epoch_order(shard_counts, substream(seed, "shuffle", epoch))
            for start in range(0, len(order), batch_size):
                if total_steps is not None and state.step >= total_steps:
                    break
                batch = _batch(train_arrays, np.sort(order[start:start + batch_size]))
                lr = lr_fn(state.step)
                loss, norm, scale = train_step(params, model_config, batch, clip_norm)
                adamw_step(params, state, lr, betas=betas, eps=adam_eps, weight_decay=weight_decay)
                if state.step == 1 or state.step % log_every == 0:
                    log.write(
                        "step",
                        step=state.step,
                        epoch=epoch,
                        lr=lr,
                        train_loss=loss,
                        grad_norm=norm,
                        clipped_norm=norm * scale,
                    )

            val_loss = evaluate_loss(params, model_config, val_arrays, batch_size)
            improved = val_loss < early.best_val_loss
            stop = early.observe(val_loss, epoch)
            log.write(
                "epoch",
                epoch=epoch,
                step=state.step,
                val_loss=val_loss,
                best_val_loss=early.best_val_loss,
                best_epoch=early.best_epoch,
                increase_count=early.increase_count,
            )
            current = snapshot(epoch)
            if improved or best is None:
                best = current
            if ckpt_dir is not None:
                save_checkpoint(current, ckpt_dir / LAST_NAME)
                if improved:
                    save_checkpoint(current, ckpt_dir / BEST_NAME)
            if stop:
                reason = "early_stop"
                break
        log.write("stop", reason=reason, epoch=epoch, step=state.step, best_epoch=early.best_epoch)

    if best is None:
        best = snapshot(epoch)
    logger.info(f"Entraînement terminé ({reason}); meilleure époque {early.best_epoch}")
    return best


@log_pipeline_step("train")
def train(corpus, model_config, cfg, out_dir=None, resume=None, resume_best=None, params=None):
    """
    Entraîne le modèle sur un corpus.

    Args:
        corpus (SampleCorpus): Corpus (split train non vide)
        model_config (ModelConfig): Architecture
        cfg (TrainConfig): Recette
        out_dir (str | Path, optional): Répertoire du journal et des checkpoints
        resume (Checkpoint, optional): Dernier checkpoint d'une exécution interrompue
        resume_best (Checkpoint, optional): Meilleur checkpoint de cette exécution
        params (ModelParams, optional): Paramètres initiaux (tirés du sous-flux "init" sinon)

    Returns:
        Checkpoint: Meilleur checkpoint (perte de validation minimale)
    """
    cfg = cfg.resolve(corpus.count("train"))
    if resume is not None:
        params = resume.model_params()
        state = OptimizerState(step=resume.step, m=dict(resume.adam_m), v=dict(resume.adam_v))
        early = EarlyStopping.from_checkpoint(resume, cfg.early_stop_patience)
        start_epoch = resume.epoch
        best = resume_best or resume
        logger.info(f"Reprise à l'époque {start_epoch + 1} (pas {state.step})")
    else:
        if params is None:
            params = ModelParams.init_params(model_config, substream(cfg.seed, "init"))
        state = OptimizerState.for_params(params)
        early = EarlyStopping(patience=cfg.early_stop_patience)
        start_epoch = 0
        best = None

    return _fit(
        params,
        model_config,
        corpus,
        lr_fn=lambda step: lr_schedule(step, cfg),
        weight_decay=cfg.weight_decay,
        betas=cfg.betas,
        adam_eps=cfg.adam_eps,
        clip_norm=cfg.clip_norm,
        batch_size=cfg.batch_size,
        max_epochs=cfg.max_epochs,
        total_steps=cfg.total_steps,
        seed=cfg.seed,
        train_config=cfg.to_dict(),
        state=state,
        early=early,
        start_epoch=start_epoch,
        best=best,
        out_dir=out_dir,
        log_every=cfg.log_every,
        append_log=resume is not None,
    )


@log_pipeline_step("fine_tune")
def fine_tune(checkpoint, corpus, ft_cfg, out_dir=None):
    """
    Règle la seule tête de prévision ; les autres paramètres restent gelés.

    Adam sans décroissance des poids, taux constant, même règle d'arrêt.

    Args:
        checkpoint (Checkpoint): Modèle pré-entraîné
        corpus (SampleCorpus): Corpus de la tâche cible
        ft_cfg (FinetuneConfig): Recette
        out_dir (str | Path, optional): Répertoire du journal et des checkpoints

    Returns:
        Checkpoint: Meilleur checkpoint réglé
    """
    params = checkpoint.model_params()
    params.set_trainable(ft_cfg.trainable)
    state = OptimizerState.for_params(params)
    train_config = {"finetune": ft_cfg.to_dict(), "pretrain": checkpoint.train_config}
    if ft_cfg.epochs_cap <= 0:
        return Checkpoint(
            model_config=checkpoint.model_config,
            params=params.to_arrays(),
            train_config=train_config,
        )
    return _fit(
        params,
        checkpoint.model_config,
        corpus,
        lr_fn=lambda step: ft_cfg.lr,
        weight_decay=0.0,
        betas=ft_cfg.betas,
        adam_eps=ft_cfg.adam_eps,
        clip_norm=ft_cfg.clip_norm,
        batch_size=ft_cfg.batch_size,
        max_epochs=ft_cfg.epochs_cap,
        total_steps=None,
        seed=ft_cfg.seed,
        train_config=train_config,
        state=state,
        early=EarlyStopping(patience=ft_cfg.early_stop_patience),
        start_epoch=0,
        best=None,
        out_dir=out_dir,
        log_every=10,
        append_log=False,
    )
