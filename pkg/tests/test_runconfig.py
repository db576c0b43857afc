"""
Tests pour la configuration d'exécution (fichier YAML et options globales).
"""

from pathlib import Path
from unittest.mock import patch
import pytest
import yaml
from gtt.commands import merge_overrides
from gtt.exceptions import ConfigurationError
from gtt.runconfig import (
    EFFECTIVE_CONFIG_NAME,
    build_run_config,
    load_run_config,
    read_config_file,
)


class TestBuildRunConfig:
    """
    Tests de la construction de la configuration effective.
    """

    def test_defaults(self, tmp_path):
        """
        Teste les valeurs par défaut d'un document vide.
        """
        config = build_run_config({}, out=str(tmp_path))
        assert config.seed == 0
        assert config.threads == 1
        assert config.model.preset == "micro"
        assert config.model_config().n_layers == 2
        assert config.eval_spec().context_len == 1024

    def test_unknown_keys(self):
        """
        Teste le refus des sections et des clés inconnues.
        """
        with pytest.raises(ConfigurationError):
            build_run_config({"optimizer": {}})
        with pytest.raises(ConfigurationError):
            build_run_config({"train": {"learning_rate": 0.1}})
        with pytest.raises(ConfigurationError):
            build_run_config({"train": [1, 2]})
        with pytest.raises(ConfigurationError):
            build_run_config({"seed": "abc"})

    def test_master_seed(self):
        """
        Teste que la graine maîtresse remplit les sections qui n'en ont pas.
        """
        config = build_run_config({"seed": 5, "train": {"seed": 9}})
        assert config.seed == 5
        assert config.train.seed == 9
        assert config.finetune.seed == 5
        assert config.synth.seed == 5

    def test_seed_option_wins(self):
        """
        Teste que l'option --seed l'emporte sur toutes les sections.
        """
        config = build_run_config({"seed": 5, "train": {"seed": 9}}, seed=2)
        assert config.seed == 2
        assert config.train.seed == 2
        assert config.synth.seed == 2

    def test_threads_propagated(self):
        """
        Teste la propagation de --threads au corpus et le refus d'une valeur nulle.
        """
        assert build_run_config({}, threads=4).corpus.threads == 4
        with pytest.raises(ConfigurationError):
            build_run_config({}, threads=0)

    @patch("gtt.runconfig.threadpool_limits")
    def test_limit_threads(self, mock_limits):
        """
        Teste que le plafond des threads natifs reprend --threads.
        """
        config = build_run_config({"threads": 3}, threads=1)
        assert config.limit_threads() is mock_limits.return_value
        mock_limits.assert_called_once_with(limits=1)

    def test_tuple_fields(self):
        """
        Teste que les listes YAML des champs tuples sont converties.
        """
        config = build_run_config(
            {"train": {"betas": [0.8, 0.9]}, "finetune": {"trainable": ["head.weight"]}}
        )
        assert config.train.betas == (0.8, 0.9)
        assert config.finetune.trainable == ("head.weight",)

    def test_model_overrides(self):
        """
        Teste la surcharge d'une dimension du préréglage et le refus d'une architecture invalide.
        """
        config = build_run_config({"model": {"preset": "tiny", "n_layers": 2}})
        assert config.model_config().n_layers == 2
        assert config.model_config().embed_dim == 384
        with pytest.raises(ConfigurationError):
            build_run_config({"model": {"n_heads": 3}}).model_config()


class TestConfigFile:
    """
    Tests de la lecture du fichier et de l'écriture de la configuration effective.
    """

    def test_load_and_write_effective(self, tmp_path):
        """
        Teste qu'une configuration relue depuis son export est identique.
        """
        path = tmp_path / "run.yaml"
        path.write_text(
            yaml.safe_dump({"seed": 3, "corpus": {"stride": 32}, "eval": {"horizons": [24]}})
        )
        config = load_run_config(path, out=str(tmp_path / "out"))
        assert config.corpus.stride == 32
        written = config.write_effective()
        assert written == tmp_path / "out" / EFFECTIVE_CONFIG_NAME
        document = yaml.safe_load(written.read_text())
        assert document["seed"] == 3
        assert document["eval"]["horizons"] == [24]
        assert build_run_config(document).to_dict() == config.to_dict()

    def test_example_file(self):
        """
        Teste que le fichier d'exemple du dépôt est une configuration valide.
        """
        path = Path(__file__).resolve().parent.parent / "config.example.yaml"
        config = load_run_config(path)
        assert config.seed == 7
        assert config.corpus.threads == 2
        assert config.train.seed == 7
        assert config.finetune.trainable == ("head.bias", "head.weight")
        assert config.eval_spec().horizons == (96, 192, 336, 720)

    def test_bad_files(self, tmp_path):
        """
        Teste le refus d'un fichier absent, d'un YAML invalide et d'une liste.
        """
        with pytest.raises(ConfigurationError):
            read_config_file(tmp_path / "absent.yaml")
        broken = tmp_path / "broken.yaml"
        broken.write_text("train: [unclosed\n")
        with pytest.raises(ConfigurationError):
            read_config_file(broken)
        listing = tmp_path / "list.yaml"
        listing.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigurationError):
            read_config_file(listing)

    def test_merge_overrides(self):
        """
        Teste que les options d'une commande complètent le fichier sans l'écraser.
        """
        document = {"train": {"max_epochs": 5}}
        merged = merge_overrides(document, {"train": {"preset": "tiny", "total_steps": None}})
        assert merged == {"train": {"max_epochs": 5, "preset": "tiny"}}
        assert document == {"train": {"max_epochs": 5}}
