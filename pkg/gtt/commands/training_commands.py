"""
Commandes CLI d'entraînement.

Ce module regroupe le pré-entraînement (train), le réglage fin de la tête de
prévision (finetune) et la comparaison de checkpoints (diff-checkpoints).
"""

from pathlib import Path
import click
from ..datapipe.corpus import SampleCorpus
from ..exceptions import ConfigurationError
from ..training.checkpoint import diff_checkpoints, load_checkpoint, save_checkpoint
from ..training.loop import BEST_NAME, LAST_NAME, fine_tune
from ..training.loop import train as run_training
from . import resolve_run_config
from .corpus_commands import CORPUS_DIR

CHECKPOINT_DIR = "checkpoints"
FINETUNE_DIR = "finetune"
FINETUNED_NAME = "finetuned.ckpt"


@click.command()
@click.option("--preset", help="Préréglage du modèle et de la recette (micro, tiny, ...)")
@click.option(
    "--corpus",
    "corpus_dir",
    type=click.Path(),
    help="Répertoire du corpus (défaut: <out>/corpus)",
)
@click.option("--resume", is_flag=True, help="Reprendre depuis <out>/checkpoints/last.ckpt")
@click.option("--total-steps", type=int, help="Nombre maximal de pas d'optimisation")
@click.pass_context
def train(ctx, preset, corpus_dir, resume, total_steps):
    """
    Entraîner le modèle sur un corpus.

    Le journal est écrit dans <out>/train_log.jsonl et les checkpoints dans
    <out>/checkpoints (last.ckpt à chaque époque, best.ckpt à chaque amélioration).

    Exemple:
        python -m gtt.cli --out runs/demo train --preset micro
    """
    config = resolve_run_config(
        ctx,
        model={"preset": preset},
        train={"preset": preset, "total_steps": total_steps},
    )
    corpus = SampleCorpus.open(Path(corpus_dir) if corpus_dir else config.out_dir / CORPUS_DIR)
    model_config = config.model_config()

    last = best = None
    if resume:
        ckpt_dir = config.out_dir / CHECKPOINT_DIR
        last = load_checkpoint(ckpt_dir / LAST_NAME)
        if (ckpt_dir / BEST_NAME).exists():
            best = load_checkpoint(ckpt_dir / BEST_NAME)
        if last.model_config != model_config:
            raise ConfigurationError(
                "Le checkpoint à reprendre a une architecture différente de la configuration"
            )

    result = run_training(
        corpus,
        model_config,
        config.train,
        out_dir=config.out_dir,
        resume=last,
        resume_best=best,
    )
    click.echo(
        f"Meilleure époque: {result.best_epoch} "
        f"(perte de validation {result.best_val_loss:.6f})"
    )
    click.echo(f"Checkpoints écrits dans {config.out_dir / CHECKPOINT_DIR}")


@click.command()
@click.option("--checkpoint", type=click.Path(), required=True, help="Checkpoint pré-entraîné")
@click.option(
    "--corpus",
    "corpus_dir",
    type=click.Path(),
    help="Corpus de la tâche (défaut: <out>/corpus)",
)
@click.option("--epochs", type=int, help="Nombre maximal d'époques")
@click.pass_context
def finetune(ctx, checkpoint, corpus_dir, epochs):
    """
    Régler la seule tête de prévision sur un corpus.

    Les autres paramètres restent identiques au bit près, ce que la commande
    diff-checkpoints permet de vérifier.

    Exemple:
        python -m gtt.cli --out runs/ft finetune --checkpoint runs/demo/checkpoints/best.ckpt
    """
    config = resolve_run_config(ctx, finetune={"epochs_cap": epochs})
    base = load_checkpoint(checkpoint)
    corpus = SampleCorpus.open(Path(corpus_dir) if corpus_dir else config.out_dir / CORPUS_DIR)
    out_dir = config.out_dir / FINETUNE_DIR
    result = fine_tune(base, corpus, config.finetune, out_dir=out_dir)
    path = save_checkpoint(result, out_dir / FINETUNED_NAME)
    click.echo(f"Checkpoint réglé écrit dans {path}")


@click.command(name="diff-checkpoints")
@click.argument("first", type=click.Path())
@click.argument("second", type=click.Path())
@click.option(
    "--exclude-prefix", multiple=True, help="Ignorer les paramètres de ce préfixe (ex: head.)"
)
@click.option("--optimizer", is_flag=True, help="Comparer aussi les moments de l'optimiseur")
@click.pass_context
def diff_checkpoints_command(ctx, first, second, exclude_prefix, optimizer):
    """
    Comparer deux checkpoints tenseur par tenseur, au bit près.

    Exemple:
        python -m gtt.cli diff-checkpoints base.ckpt finetuned.ckpt --exclude-prefix head.
    """
    resolve_run_config(ctx)
    report = diff_checkpoints(
        load_checkpoint(first),
        load_checkpoint(second),
        exclude_prefixes=exclude_prefix,
        include_optimizer=optimizer,
    )
    for name in report.differing:
        click.echo(f"différent: {name}")
    for name in report.only_in_a:
        click.echo(f"seulement dans {first}: {name}")
    for name in report.only_in_b:
        click.echo(f"seulement dans {second}: {name}")
    if report.identical:
        click.echo(f"Identiques ({report.compared} tenseurs comparés)")
    else:
        click.echo(f"{len(report.differing)} tenseur(s) différent(s) sur {report.compared}")
