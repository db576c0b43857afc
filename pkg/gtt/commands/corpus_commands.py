"""
Commandes CLI de préparation des données.

Ce module fournit la construction du corpus d'échantillons à partir de
fichiers CSV (prepare) et la génération de séries synthétiques (synth).
"""

import click
from ..datapipe.corpus import build_corpus
from ..datapipe.series import read_series_csv
from ..exceptions import ConfigurationError
from ..synthetic import write_synthetic
from . import resolve_run_config

CORPUS_DIR = "corpus"
SYNTH_DIR = "synth"


@click.command()
@click.option(
    "--input",
    "inputs",
    multiple=True,
    type=click.Path(),
    help="Fichier CSV (option répétable)",
)
@click.option("--stride", type=int, help="Pas entre deux fenêtres")
@click.option("--cap", type=int, help="Nombre maximal d'échantillons par série et par split")
@click.pass_context
def prepare(ctx, inputs, stride, cap):
    """
    Construire le corpus d'échantillons.

    Les séries sont découpées 90/10 en entraînement/validation, fenêtrées,
    normalisées, filtrées et masquées ; le corpus est écrit dans <out>/corpus.

    Exemple:
        python -m gtt.cli --seed 7 --out runs/demo prepare --input data/etth1.csv
    """
    config = resolve_run_config(
        ctx,
        data={"paths": list(inputs) or None},
        corpus={"stride": stride, "cap": cap},
    )
    if not config.data.paths:
        raise ConfigurationError("Aucun fichier d'entrée (option --input ou data.paths)")

    series = [read_series_csv(path, roles=config.data.roles or None) for path in config.data.paths]
    corpus = build_corpus(series, config.corpus, config.seed, config.out_dir / CORPUS_DIR)
    totals = corpus.manifest["totals"]
    click.echo(f"Séries: {len(series)}")
    click.echo(f"Fenêtres: {totals['windows']}")
    click.echo(f"Échantillons d'entraînement: {totals['train']}")
    click.echo(f"Échantillons de validation: {totals['validation']}")
    click.echo(f"Échantillons rejetés: {totals['discarded']}")
    click.echo(f"Corpus écrit dans {corpus.root}")


@click.command()
@click.option(
    "--generator",
    type=click.Choice(["sine-mixture", "trend+season", "random-walk"]),
    help="Générateur",
)
@click.option("--n-series", type=int, help="Nombre de séries")
@click.option("--length", type=int, help="Nombre de points par série")
@click.option("--channels", type=int, help="Nombre de canaux par série")
@click.pass_context
def synth(ctx, generator, n_series, length, channels):
    """
    Générer des séries synthétiques dans <out>/synth.

    Les paramètres tirés pour chaque série sont consignés dans synth_params.yaml.

    Exemple:
        python -m gtt.cli --seed 1 --out runs/demo synth --n-series 4 --length 3500
    """
    config = resolve_run_config(
        ctx,
        synth={
            "generator": generator,
            "n_series": n_series,
            "length": length,
            "channels": channels,
        },
    )
    paths = write_synthetic(config.synth, config.out_dir / SYNTH_DIR)
    click.echo(f"{len(paths)} série(s) écrite(s) dans {config.out_dir / SYNTH_DIR}")
