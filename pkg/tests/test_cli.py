"""
Tests pour l'interface en ligne de commande.

Ce module vérifie les sous-commandes de bout en bout avec le CliRunner de
click ainsi que la traduction des erreurs en codes de sortie.
"""

from unittest.mock import MagicMock, patch
import numpy as np
import pandas as pd
import pytest
from click.testing import CliRunner
from gtt.cli import cli
from gtt.commands.forecast_commands import FORECAST_NAME
from gtt.exceptions import EXIT_DATA, EXIT_USAGE
from gtt.model.params import ModelParams
from gtt.runconfig import EFFECTIVE_CONFIG_NAME
from gtt.training.checkpoint import Checkpoint, save_checkpoint


@pytest.fixture
def runner():
    """
    Fixture pour créer un runner CLI.
    """
    return CliRunner()


@pytest.fixture
def checkpoint_path(tmp_path, tiny_config):
    """Checkpoint du modèle minuscule, jamais entraîné."""
    params = ModelParams.init_params(tiny_config, np.random.default_rng(0))
    ckpt = Checkpoint(model_config=tiny_config, params=params.to_arrays(), train_config={})
    return save_checkpoint(ckpt, tmp_path / "model.ckpt")


def _frame(length, n_channels=2, period=24.0):
    t = np.arange(length)
    frame = pd.DataFrame(
        {f"c{k}": 5.0 + np.sin(2 * np.pi * t / period + k) for k in range(n_channels)}
    )
    frame.insert(0, "timestamp", pd.date_range("2022-03-01", periods=length, freq="h"))
    return frame


class TestGroup:
    """
    Tests du groupe de commandes et des codes de sortie.
    """

    def test_help(self, runner):
        """
        Teste l'affichage de l'aide et la liste des commandes.
        """
        result = runner.invoke(cli, ["--help"])
        assert result.exit_code == 0
        for name in ("prepare", "synth", "train", "finetune", "forecast", "eval"):
            assert name in result.output

    def test_unknown_option(self, runner):
        """
        Teste qu'une option inconnue est une erreur d'utilisation.
        """
        result = runner.invoke(cli, ["synth", "--colour", "red"])
        assert result.exit_code == EXIT_USAGE

    def test_missing_checkpoint(self, runner, tmp_path):
        """
        Teste qu'une prévision sans checkpoint est une erreur d'utilisation.
        """
        result = runner.invoke(cli, ["--out", str(tmp_path), "forecast", "--context", "x.csv"])
        assert result.exit_code == EXIT_USAGE
        assert "--checkpoint" in result.output

    def test_missing_input_file(self, runner, tmp_path):
        """
        Teste qu'un CSV introuvable est une erreur de données.
        """
        args = ["--out", str(tmp_path), "prepare", "--input", str(tmp_path / "absent.csv")]
        result = runner.invoke(cli, args)
        assert result.exit_code == EXIT_DATA
        assert "Erreur" in result.output

    def test_bad_config_file(self, runner, tmp_path):
        """
        Teste qu'une clé inconnue du fichier de configuration est refusée.
        """
        path = tmp_path / "run.yaml"
        path.write_text("train:\n  learning_rate: 0.1\n")
        result = runner.invoke(cli, ["--config", str(path), "--out", str(tmp_path), "synth"])
        assert result.exit_code == EXIT_USAGE

    @patch("gtt.cli.subprocess.run")
    def test_test_command(self, mock_run, runner):
        """
        Teste que la commande test lance pytest avec les bonnes options.
        """
        mock_run.return_value = MagicMock(returncode=0)
        result = runner.invoke(cli, ["test", "--verbose", "--integration", "tests/test_cli.py"])
        assert result.exit_code == 0
        cmd = mock_run.call_args[0][0]
        assert cmd[1:3] == ["-m", "pytest"]
        assert "-v" in cmd
        assert "integration or not integration" in cmd
        assert cmd[-1] == "tests/test_cli.py"

    @patch("gtt.cli.subprocess.run")
    def test_test_command_failure(self, mock_run, runner):
        """
        Teste que l'échec de pytest est reporté dans le code de sortie.
        """
        mock_run.return_value = MagicMock(returncode=1)
        result = runner.invoke(cli, ["test"])
        assert result.exit_code == 1
        assert "ont échoué" in result.output


class TestCorpusCommands:
    """
    Tests des commandes synth et prepare.
    """

    def test_synth_then_prepare(self, runner, tmp_path):
        """
        Teste la génération de séries puis la construction du corpus.
        """
        out = tmp_path / "run"
        args = ["--seed", "1", "--out", str(out), "synth", "--n-series", "2", "--length", "3500"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        paths = sorted((out / "synth").glob("*.csv"))
        assert len(paths) == 2

        args = ["--seed", "1", "--out", str(out), "prepare", "--stride", "64", "--cap", "8"]
        for path in paths:
            args.extend(["--input", str(path)])
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert "Séries: 2" in result.output
        assert (out / "corpus" / "manifest.json").exists()
        assert (out / EFFECTIVE_CONFIG_NAME).exists()

    def test_seed_recorded(self, runner, tmp_path):
        """
        Teste que la configuration effective reprend la graine de la ligne de commande.
        """
        args = ["--seed", "4", "--out", str(tmp_path), "synth", "--n-series", "0"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        text = (tmp_path / EFFECTIVE_CONFIG_NAME).read_text()
        assert "seed: 4" in text

    @patch("gtt.runconfig.threadpool_limits")
    def test_threads_cap_native_pools(self, mock_limits, runner, tmp_path):
        """
        Teste que --threads plafonne les threads BLAS pendant la commande puis les libère.
        """
        args = ["--threads", "1", "--out", str(tmp_path), "synth", "--n-series", "0"]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        mock_limits.assert_called_once_with(limits=1)
        mock_limits.return_value.__enter__.assert_called_once()
        mock_limits.return_value.__exit__.assert_called_once()


class TestModelCommands:
    """
    Tests des commandes forecast, diff-checkpoints et eval.
    """

    def test_forecast(self, runner, tmp_path, checkpoint_path, write_csv):
        """
        Teste l'écriture des prévisions horodatées des cibles.
        """
        context = write_csv(_frame(100), "context.csv")
        out = tmp_path / "fc"
        args = [
            "--out", str(out), "forecast",
            "--checkpoint", str(checkpoint_path),
            "--context", str(context),
            "--horizon", "20",
        ]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert "Blocs utilisés: 2" in result.output
        frame = pd.read_csv(out / FORECAST_NAME)
        assert list(frame.columns) == ["timestamp", "c0", "c1"]
        assert len(frame) == 20
        assert frame["timestamp"].iloc[0] == "2022-03-05 04:00:00"

    def test_forecast_missing_values(self, runner, tmp_path, checkpoint_path, write_csv):
        """
        Teste qu'un contexte incomplet est une erreur de données.
        """
        frame = _frame(50)
        frame.loc[10, "c1"] = np.nan
        context = write_csv(frame, "holes.csv")
        args = [
            "--out", str(tmp_path / "fc"), "forecast",
            "--checkpoint", str(checkpoint_path),
            "--context", str(context),
        ]
        assert runner.invoke(cli, args).exit_code == EXIT_DATA

    def test_diff_checkpoints(self, runner, tmp_path, checkpoint_path):
        """
        Teste la comparaison d'un checkpoint avec lui-même.
        """
        paths = [str(checkpoint_path), str(checkpoint_path)]
        args = ["--out", str(tmp_path), "diff-checkpoints", *paths]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        assert "Identiques" in result.output

    def test_diff_corrupt_checkpoint(self, runner, tmp_path, checkpoint_path):
        """
        Teste qu'un checkpoint tronqué est une erreur de données.
        """
        broken = tmp_path / "broken.ckpt"
        broken.write_bytes(checkpoint_path.read_bytes()[:40])
        args = ["--out", str(tmp_path), "diff-checkpoints", str(checkpoint_path), str(broken)]
        assert runner.invoke(cli, args).exit_code == EXIT_DATA

    def test_eval(self, runner, tmp_path, checkpoint_path, write_csv):
        """
        Teste l'évaluation d'un checkpoint et des références naïves.
        """
        dataset = write_csv(_frame(1500, n_channels=1), "ili.csv")
        out = tmp_path / "ev"
        args = [
            "--out", str(out), "eval",
            "--checkpoint", str(checkpoint_path),
            "--dataset", str(dataset),
            "--eval-preset", "ili",
            "--context-len", "64",
        ]
        result = runner.invoke(cli, args)
        assert result.exit_code == 0, result.output
        for name in ("model", "last_value", "seasonal_naive"):
            assert (out / "eval" / f"metrics_{name}.csv").exists()
        frame = pd.read_csv(out / "eval" / "metrics_last_value.csv", index_col=0)
        assert list(frame.index.astype(str)) == ["24", "36", "48", "60", "mean"]
