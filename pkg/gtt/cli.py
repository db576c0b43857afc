"""
Point d'entrée principal de la CLI GTT.

Ce module définit le groupe de commandes, ses options globales (--config,
--seed, --threads, --out) et la traduction des erreurs en codes de sortie :
0 succès, 1 erreur d'utilisation, 2 erreur de données, 3 invariant violé.
"""

import logging
import os
import subprocess
import sys
import click

# Ajouter le répertoire parent au PYTHONPATH
# Cette configuration permet de lancer le module directement depuis le dépôt
parent_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if parent_dir not in sys.path:
    sys.path.append(parent_dir)

# noqa: E402 indique à flake8 d'ignorer l'erreur d'importation non en haut du fichier
from gtt.commands import (  # noqa: E402
    corpus_commands,
    eval_commands,
    forecast_commands,
    training_commands,
)
from gtt.event_logging import log_error  # noqa: E402
from gtt.exceptions import EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, GTTError  # noqa: E402

logger = logging.getLogger(__name__)


class GTTGroup(click.Group):
    """
    Groupe click qui convertit les exceptions en codes de sortie.
    """

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else EXIT_OK
        except click.ClickException as e:
            e.show()
            code = EXIT_USAGE
        except click.Abort:
            click.echo("Interrompu.", err=True)
            code = EXIT_USAGE
        except GTTError as e:
            click.echo(f"Erreur: {e}", err=True)
            log_error(e, {"command": " ".join(sys.argv[1:] if args is None else args)})
            code = e.exit_code
        except Exception as e:
            click.echo(f"Erreur interne: {e}", err=True)
            log_error(e, {"command": " ".join(sys.argv[1:] if args is None else args)})
            code = EXIT_INTERNAL
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=GTTGroup)
@click.option("--config", "config_path", type=click.Path(), help="Fichier de configuration YAML")
@click.option("--seed", type=click.IntRange(min=0), help="Graine maîtresse")
@click.option("--threads", type=click.IntRange(min=1), help="Parallélisme maximal")
@click.option("--out", type=click.Path(), help="Répertoire de sortie")
@click.pass_context
def cli(ctx, config_path, seed, threads, out):
    """
    GTT : prévision de séries temporelles multivariées.

    Cette application prépare un corpus d'échantillons, entraîne le modèle,
    prévoit à partir d'un checkpoint et l'évalue selon un protocole glissant.
    """
    ctx.obj = {"config": config_path, "seed": seed, "threads": threads, "out": out}


# Commande pour exécuter les tests
@cli.command()
@click.option("--verbose", "-v", is_flag=True, help="Exécuter les tests en mode verbeux")
@click.option("--coverage", "-c", is_flag=True, help="Mesurer la couverture de code")
@click.option("--integration", is_flag=True, help="Inclure les tests d'intégration (longs)")
@click.argument("test_path", required=False)
def test(verbose, coverage, integration, test_path):
    """
    Exécuter les tests avec pytest.

    Exemples:
        - Exécuter tous les tests rapides: python -m gtt.cli test
        - Exécuter les tests en mode verbeux: python -m gtt.cli test --verbose
        - Inclure les tests d'acceptation: python -m gtt.cli test --integration
        - Exécuter un fichier de test spécifique: python -m gtt.cli test tests/test_numerics.py
    """
    os.environ["GTT_ENV"] = "test"  # Configurer l'environnement de test

    cmd = [sys.executable, "-m", "pytest"]
    if verbose:
        cmd.append("-v")
    if coverage:
        cmd.extend(["--cov=gtt", "--cov-report=term-missing"])
    if integration:
        cmd.extend(["-m", "integration or not integration"])
    if test_path:
        cmd.append(test_path)

    result = subprocess.run(cmd)
    if result.returncode != 0:
        click.echo(f"Les tests ont échoué avec le code de retour: {result.returncode}")
    return result.returncode


# Enregistrement des sous-commandes
cli.add_command(corpus_commands.prepare)
cli.add_command(corpus_commands.synth)
cli.add_command(training_commands.train)
cli.add_command(training_commands.finetune)
cli.add_command(training_commands.diff_checkpoints_command)
cli.add_command(forecast_commands.forecast)
cli.add_command(eval_commands.evaluate)
cli.add_command(eval_commands.scaling_probe)


if __name__ == "__main__":
    # Point d'entrée lorsque le script est exécuté directement
    cli()
