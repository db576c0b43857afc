"""
Sonde d'échelle à petite taille : plusieurs modèles (ou volumes de données)
entraînés sur un même corpus synthétique, puis comparés sur des séries d'une
fréquence absente de l'entraînement.
"""

import logging
from dataclasses import replace
from pathlib import Path
import numpy as np
import pandas as pd
from ..datapipe.corpus import build_corpus
from ..datapipe.series import read_series_csv
from ..exceptions import ConfigurationError, DataError
from ..model.config import get_preset
from ..model.params import param_count
from ..synthetic import write_synthetic
from ..training.loop import train
from .protocol import EvalSpec, naive_baselines, rolling_eval

logger = logging.getLogger(__name__)

SCALING_NAME = "scaling.csv"


def _runs(scaling):
    if not scaling.presets:
        raise ConfigurationError("La sonde d'échelle ne contient aucun modèle à entraîner")
    runs = [(preset, 1.0) for preset in scaling.presets]
    base = scaling.presets[0]
    for fraction in scaling.data_fractions:
        if not 0 < fraction <= 1:
            raise ConfigurationError(f"Fraction de données invalide: {fraction}")
        if (base, float(fraction)) not in runs:
            runs.append((base, float(fraction)))
    return runs


def check_heldout_period(heldout_period, train_period):
    """
    Vérifie que les périodes de test sont absentes de l'entraînement.

    Args:
        heldout_period (sequence): Bornes [min, max] des séries de test
        train_period (sequence): Bornes [min, max] des séries d'entraînement

    Raises:
        ConfigurationError: Bornes invalides ou intervalles qui se chevauchent
    """
    if len(heldout_period) != 2:
        raise ConfigurationError(
            f"heldout_period attend deux bornes, reçu {list(heldout_period)}"
        )
    lo, hi = (float(v) for v in heldout_period)
    if not 0 < lo <= hi:
        raise ConfigurationError(f"Bornes de heldout_period invalides: [{lo}, {hi}]")
    train_lo, train_hi = (float(v) for v in train_period)
    if lo <= train_hi and hi >= train_lo:
        raise ConfigurationError(
            f"Les périodes de test [{lo}, {hi}] chevauchent celles de l'entraînement "
            f"[{train_lo}, {train_hi}]"
        )


def _mean_metrics(tables):
    rows = [table.mean_row() for table in tables]
    return {
        "MAE": float(np.mean([r["MAE"] for r in rows])),
        "MSE": float(np.mean([r["MSE"] for r in rows])),
    }


def run_scaling_probe(scaling, synth, corpus_config, train_config, seed, out_dir):
    """
    Entraîne et compare les modèles de la sonde, puis écrit scaling.csv.

    Args:
        scaling (ScalingSection): Préréglages, fractions de données, séries de test
        synth (SyntheticSpec): Séries d'entraînement
        corpus_config (CorpusConfig): Construction du corpus
        train_config (TrainConfig): Recette (le préréglage est remplacé par celui du modèle)
        seed (int): Graine maîtresse
        out_dir (str | Path): Répertoire de la sonde

    Returns:
        pandas.DataFrame: Une ligne par modèle entraîné

    Raises:
        ConfigurationError: Sonde vide, fraction invalide ou période de test déjà vue
        DataError: Aucune série d'entraînement
    """
    out_dir = Path(out_dir)
    runs = _runs(scaling)
    check_heldout_period(scaling.heldout_period, synth.period)
    train_paths = write_synthetic(replace(synth, seed=seed), out_dir / "train_data")
    if not train_paths:
        raise DataError(
            "La sonde d'échelle demande au moins une série d'entraînement (synth.n_series)"
        )
    series = [read_series_csv(path) for path in train_paths]

    heldout_spec = replace(
        synth,
        n_series=scaling.heldout_series,
        period=tuple(scaling.heldout_period),
        seed=seed + 1,
    )
    heldout_paths = write_synthetic(heldout_spec, out_dir / "heldout_data")
    heldout = [read_series_csv(path) for path in heldout_paths]
    if not heldout:
        raise DataError(
            "La sonde d'échelle demande au moins une série de test (scaling.heldout_series)"
        )
    eval_spec = EvalSpec(
        context_len=scaling.context_len,
        horizons=tuple(scaling.horizons),
        fractions=(0.0, 0.0, 1.0),
        stride=scaling.eval_stride,
    ).validate()
    baseline = _mean_metrics(
        [naive_baselines(eval_spec, s, names=("last_value",))["last_value"] for s in heldout]
    )

    corpora, records = {}, []
    for preset, fraction in runs:
        if fraction not in corpora:
            n = max(1, int(round(fraction * len(series))))
            corpus_dir = out_dir / f"corpus_{fraction:g}"
            corpora[fraction] = build_corpus(series[:n], corpus_config, seed, corpus_dir)
        corpus = corpora[fraction]
        model_config = get_preset(preset)
        run_dir = out_dir / f"{preset}_{fraction:g}"
        logger.info(f"Sonde d'échelle: {preset} sur {fraction:.0%} des séries")
        run_config = replace(train_config, preset=preset, seed=seed)
        best = train(corpus, model_config, run_config, out_dir=run_dir)
        scores = _mean_metrics([rolling_eval(best, eval_spec, series=s) for s in heldout])
        records.append(
            {
                "preset": preset,
                "params": param_count(model_config),
                "data_fraction": fraction,
                "train_samples": corpus.count("train"),
                "best_val_loss": best.best_val_loss,
                "MAE": scores["MAE"],
                "MSE": scores["MSE"],
                "last_value_MAE": baseline["MAE"],
            }
        )

    table = pd.DataFrame.from_records(records)
    path = out_dir / SCALING_NAME
    try:
        table.to_csv(path, index=False, float_format="%.10g")
    except OSError as e:
        raise DataError(f"{path}: écriture impossible ({e})") from e
    logger.info(f"Sonde d'échelle écrite dans {path}")
    return table
