"""
Commandes CLI d'évaluation.

Ce module fournit l'évaluation glissante d'un checkpoint et des références
naïves (eval) ainsi que la sonde d'échelle (scaling-probe).
"""

import click
from ..evaluation.protocol import naive_baselines, rolling_eval
from ..evaluation.scaling import SCALING_NAME, run_scaling_probe
from ..training.checkpoint import load_checkpoint
from . import resolve_run_config

EVAL_DIR = "eval"
SCALING_DIR = "scaling"


@click.command(name="eval")
@click.option(
    "--checkpoint", type=click.Path(), help="Checkpoint à évaluer (références seules sinon)"
)
@click.option("--dataset", type=click.Path(), help="CSV du jeu de données")
@click.option(
    "--eval-preset",
    type=click.Choice(["default", "ili"]),
    help="Contexte et horizons de référence",
)
@click.option("--context-len", type=int, help="Longueur du contexte")
@click.option(
    "--split", help="Découpage de référence (etth, ettm, electricity, traffic, weather, ili)"
)
@click.option("--dump-windows", is_flag=True, help="Écrire les erreurs par fenêtre")
@click.pass_context
def evaluate(ctx, checkpoint, dataset, eval_preset, context_len, split, dump_windows):
    """
    Évaluer un checkpoint et les références naïves sur la partie test.

    Un tableau par prévisionniste (une ligne par horizon et la moyenne) est
    écrit en CSV et en texte dans <out>/eval.

    Exemple:
        python -m gtt.cli --out runs/eval eval --checkpoint best.ckpt \\
            --dataset ili.csv --eval-preset ili
    """
    config = resolve_run_config(
        ctx,
        eval={
            "checkpoint": checkpoint,
            "dataset": dataset,
            "preset": eval_preset,
            "context_len": context_len,
            "split": split,
            "dump_windows": dump_windows or None,
        },
    )
    spec = config.eval_spec()
    out_dir = config.out_dir / EVAL_DIR

    tables = []
    if config.eval.checkpoint:
        tables.append(rolling_eval(load_checkpoint(config.eval.checkpoint), spec))
    if config.eval.baselines:
        tables.extend(naive_baselines(spec, names=config.eval.baselines).values())
    if not tables:
        click.echo("Rien à évaluer: ni checkpoint ni référence.")
        return
    for table in tables:
        table.write(out_dir)
        click.echo(table.to_text())
    click.echo(f"Tableaux écrits dans {out_dir}")


@click.command(name="scaling-probe")
@click.option(
    "--preset", "presets", multiple=True, help="Préréglage à entraîner (option répétable)"
)
@click.pass_context
def scaling_probe(ctx, presets):
    """
    Comparer plusieurs tailles de modèle sur un même corpus synthétique.

    Les séries d'entraînement viennent de la section synth ; les modèles sont
    évalués sur des séries d'une période absente de l'entraînement et le
    tableau comparatif est écrit dans <out>/scaling/scaling.csv.

    Exemple:
        python -m gtt.cli --seed 3 --out runs/scaling scaling-probe \\
            --preset micro --preset micro-wide
    """
    config = resolve_run_config(ctx, scaling={"presets": list(presets) or None})
    out_dir = config.out_dir / SCALING_DIR
    table = run_scaling_probe(
        config.scaling,
        config.synth,
        config.corpus,
        config.train,
        config.seed,
        out_dir,
    )
    click.echo(table.to_string(index=False))
    click.echo(f"Tableau écrit dans {out_dir / SCALING_NAME}")
