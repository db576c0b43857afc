"""
Commande CLI de prévision à partir d'un checkpoint.
"""

import click
import numpy as np
import pandas as pd
from ..datapipe.series import read_series_csv
from ..exceptions import ConfigurationError, DataError
from ..inference.forecast import ForecastRequest, forecast as run_forecast
from ..training.checkpoint import load_checkpoint
from . import resolve_run_config

FORECAST_NAME = "forecast.csv"


@click.command()
@click.option("--checkpoint", type=click.Path(), help="Checkpoint à utiliser")
@click.option("--context", "context_path", type=click.Path(), help="CSV du contexte")
@click.option("--horizon", type=int, help="Nombre de pas à prévoir")
@click.option("--context-len", type=int, help="Ne garder que les N dernières lignes du contexte")
@click.pass_context
def forecast(ctx, checkpoint, context_path, horizon, context_len):
    """
    Prévoir les prochains pas des canaux cibles d'un CSV.

    Les prévisions [H × O] sont écrites dans <out>/forecast.csv ; le nombre de
    blocs et les statistiques RevIN sont affichés sur stderr.

    Exemple:
        python -m gtt.cli --out runs/fc forecast --checkpoint best.ckpt \\
            --context ctx.csv --horizon 64
    """
    config = resolve_run_config(
        ctx,
        forecast={
            "checkpoint": checkpoint,
            "context": context_path,
            "horizon": horizon,
            "context_len": context_len,
        },
    )
    section = config.forecast
    if not section.checkpoint or not section.context:
        raise ConfigurationError("Les options --checkpoint et --context sont requises")
    if section.horizon < 1:
        raise ConfigurationError(f"L'horizon doit être >= 1 (reçu {section.horizon})")
    if section.context_len is not None and section.context_len < 1:
        raise ConfigurationError("--context-len doit être >= 1")

    ckpt = load_checkpoint(section.checkpoint)
    series = read_series_csv(section.context, roles=config.data.roles or None)
    values, timestamps = series.values, series.timestamps
    if section.context_len is not None:
        values = values[-section.context_len:]
        timestamps = None if timestamps is None else timestamps[-section.context_len:]
    if np.isnan(values).any():
        raise DataError(f"{section.context}: le contexte contient des valeurs manquantes")

    request = ForecastRequest(
        context=values,
        horizon=section.horizon,
        timestamps=timestamps,
        channel_roles=series.channel_roles,
        channel_names=series.channel_names,
    )
    result = run_forecast(ckpt, request, renormalize_each_block=section.renormalize_each_block)

    frame = pd.DataFrame(result.predictions, columns=result.target_names)
    if result.timestamps is not None:
        frame.insert(0, "timestamp", result.timestamps)
    path = config.out_dir / FORECAST_NAME
    try:
        frame.to_csv(path, index=False, float_format="%.10g")
    except OSError as e:
        raise DataError(f"{path}: écriture des prévisions impossible ({e})") from e

    click.echo(f"Blocs utilisés: {result.blocks_used}", err=True)
    for name, mean, std in zip(result.target_names, result.mean, result.std):
        click.echo(f"RevIN {name}: moyenne={mean:.6g} écart-type={std:.6g}", err=True)
    click.echo(f"{len(frame)} ligne(s) écrite(s) dans {path}")
