"""
Sous-commandes de la CLI et utilitaires partagés.
"""

import logging
import click
from ..runconfig import build_run_config, read_config_file

logger = logging.getLogger(__name__)


def merge_overrides(document, overrides):
    """
    Applique les options d'une sous-commande au document de configuration.

    Args:
        document (dict): Contenu du fichier YAML
        overrides (dict): section -> {clé: valeur} ; les valeurs None sont ignorées

    Returns:
        dict: Nouveau document
    """
    merged = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (document or {}).items()}
    for section, values in overrides.items():
        kept = {k: v for k, v in values.items() if v is not None}
        if kept:
            current = merged.get(section) or {}
            merged[section] = {**current, **kept}
    return merged


def resolve_run_config(ctx, **overrides):
    """
    Configuration effective d'une sous-commande.

    Lit le fichier --config, applique les options de la sous-commande puis les
    options globales, plafonne les threads de calcul, affiche le résultat sur
    stderr et l'écrit dans le répertoire de sortie.

    Args:
        ctx (click.Context): Contexte portant les options globales
        **overrides: section -> {clé: valeur}

    Returns:
        RunConfig: Configuration effective
    """
    options = ctx.find_root().obj or {}
    document = read_config_file(options["config"]) if options.get("config") else {}
    config = build_run_config(
        merge_overrides(document, overrides),
        seed=options.get("seed"),
        threads=options.get("threads"),
        out=options.get("out"),
    )
    ctx.with_resource(config.limit_threads())
    click.echo("# Configuration effective", err=True)
    click.echo(config.to_yaml(), err=True)
    path = config.write_effective()
    logger.debug(f"Configuration effective écrite dans {path}")
    return config
