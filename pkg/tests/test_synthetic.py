"""
Tests pour la génération de séries synthétiques.
"""

import numpy as np
import pytest
import yaml
from gtt.datapipe.series import read_series_csv
from gtt.exceptions import ConfigurationError
from gtt.synthetic import PARAMS_NAME, Generator, SyntheticSpec, generate_series, write_synthetic


class TestSineMixture:
    """
    Tests du mélange de sinusoïdes.
    """

    def test_single_unit_sine(self, tmp_path):
        """
        Teste qu'une sinusoïde d'amplitude 1 relue depuis le CSV culmine à 1.
        """
        spec = SyntheticSpec(
            n_series=1,
            length=512,
            n_components=1,
            amplitude=(1, 1),
            period=(128, 128),
            phase=(0, 0),
        )
        paths = write_synthetic(spec, tmp_path)
        series = read_series_csv(paths[0])
        assert series.values.shape == (512, 1)
        assert abs(series.values.max() - 1.0) < 1e-6
        assert series.values[0, 0] == pytest.approx(0.0, abs=1e-9)
        assert series.timestamps[1] - series.timestamps[0] == np.timedelta64(1, "h")

    def test_deterministic(self):
        """
        Teste qu'une même graine et un même numéro donnent la même série.
        """
        spec = SyntheticSpec(length=200, channels=2, seed=3)
        a, params_a = generate_series(spec, 1)
        b, params_b = generate_series(spec, 1)
        other, _ = generate_series(spec, 2)
        assert a.equals(b)
        assert params_a == params_b
        assert not np.allclose(a[["ch0", "ch1"]].values, other[["ch0", "ch1"]].values)
        assert list(a.columns) == ["timestamp", "ch0", "ch1"]


class TestOtherGenerators:
    """
    Tests des générateurs tendance plus saison et marche aléatoire.
    """

    def test_trend_without_season(self):
        """
        Teste une tendance pure : pente constante à partir du niveau tiré.
        """
        spec = SyntheticSpec(
            generator=Generator.TREND_SEASON,
            length=100,
            amplitude=(0, 0),
            trend=(0.01, 0.01),
        )
        frame, params = generate_series(spec, 0)
        values = frame["ch0"].values
        np.testing.assert_allclose(np.diff(values), 0.01, atol=1e-12)
        assert values[0] == pytest.approx(params["channels"][0]["level"])

    def test_random_walk(self):
        """
        Teste que la marche aléatoire part de son niveau et utilise le pas demandé.
        """
        spec = SyntheticSpec(generator=Generator.RANDOM_WALK, length=5000, noise=0.5)
        frame, params = generate_series(spec, 0)
        values = frame["ch0"].values
        assert values[0] == params["channels"][0]["level"]
        assert np.std(np.diff(values)) == pytest.approx(0.5, rel=0.05)


class TestWriteSynthetic:
    """
    Tests de l'écriture des fichiers.
    """

    def test_params_file(self, tmp_path):
        """
        Teste que les paramètres tirés sont consignés pour chaque série.
        """
        spec = SyntheticSpec(n_series=3, length=64, seed=8)
        paths = write_synthetic(spec, tmp_path)
        assert [p.name for p in paths] == [f"series_000{i}.csv" for i in range(3)]
        document = yaml.safe_load((tmp_path / PARAMS_NAME).read_text())
        assert document["spec"]["seed"] == 8
        assert sorted(document["series"]) == [p.name for p in paths]
        components = document["series"]["series_0000.csv"]["channels"][0]["components"]
        assert len(components) == spec.n_components

    def test_zero_series(self, tmp_path):
        """
        Teste qu'aucune série ne produit un répertoire vide, sans fichier de paramètres.
        """
        out = tmp_path / "empty"
        assert write_synthetic(SyntheticSpec(n_series=0), out) == []
        assert out.is_dir()
        assert list(out.iterdir()) == []

    @pytest.mark.parametrize(
        "overrides",
        [
            {"generator": "chaos"},
            {"n_series": -1},
            {"length": 0},
            {"amplitude": (2.0, 1.0)},
            {"period": (0.0, 10.0)},
            {"noise": -0.1},
        ],
    )
    def test_invalid_spec(self, tmp_path, overrides):
        """
        Teste le refus des configurations incohérentes.
        """
        with pytest.raises(ConfigurationError):
            write_synthetic(SyntheticSpec(**overrides), tmp_path)
