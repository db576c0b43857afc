"""
Tests pour la chaîne de préparation des données.

Ce module couvre la lecture des CSV, l'extraction des fenêtres, la
répartition des canaux, la normalisation, le masquage, le format des shards
et la construction déterministe d'un corpus.
"""

import json
import numpy as np
import pandas as pd
import pytest
from gtt.datapipe.corpus import MANIFEST_NAME, CorpusConfig, SampleCorpus, build_corpus
from gtt.datapipe.packing import MAX_CHANNELS, channel_groups, pack_channels
from gtt.datapipe.samples import (
    EXTREME_LIMIT,
    MAX_MASKED_ROWS,
    Discard,
    TrainingSample,
    apply_context_mask,
    draw_mask_start,
    normalize_sample,
)
from gtt.datapipe.series import ChannelRole, read_series_csv, split_train_val
from gtt.datapipe.shards import RECORD_SIZE, read_shard, record_to_sample, write_shard
from gtt.datapipe.time_features import N_TIME_FEATURES, encode_time_features, extrapolate_timestamps
from gtt.datapipe.windows import WINDOW_LEN, extract_windows, window_starts
from gtt.exceptions import ConfigurationError, CorruptShardError, DataError, InvariantViolation


def _packed_window(rng, n_valid=5):
    window = np.zeros((WINDOW_LEN, MAX_CHANNELS))
    window[:, :n_valid] = rng.normal(size=(WINDOW_LEN, n_valid)) * 3.0 + 10.0
    valid = np.zeros(MAX_CHANNELS, dtype=bool)
    valid[:n_valid] = True
    return window, valid


class TestSeriesReading:
    """
    Tests de la lecture des séries CSV.
    """

    def test_timestamps_and_missing_cells(self, write_csv):
        """
        Teste la détection de la colonne d'horodatage et des cellules vides.
        """
        frame = pd.DataFrame(
            {
                "date": pd.date_range("2022-03-01", periods=4, freq="h").astype(str),
                "load": [1.0, None, 3.0, 4.0],
                "temp": [0.5, 0.6, 0.7, 0.8],
            }
        )
        series = read_series_csv(write_csv(frame))
        assert series.timestamps is not None
        assert series.channel_names == ["load", "temp"]
        assert series.n_targets == 2
        assert np.isnan(series.values[1, 0])
        np.testing.assert_array_equal(series.missing_rows(), [False, True, False, False])

    def test_roles_sidecar(self, write_csv):
        """
        Teste les rôles lus dans le fichier <csv>.roles.yaml et le réordonnancement.
        """
        frame = pd.DataFrame({"temp": [1.0, 2.0], "load": [3.0, 4.0]})
        path = write_csv(frame)
        (path.parent / f"{path.name}.roles.yaml").write_text("temp: covariate\n", encoding="utf-8")
        series = read_series_csv(path)
        assert series.channel_roles == [ChannelRole.COVARIATE, ChannelRole.TARGET]
        ordered = series.ordered()
        assert ordered.channel_names == ["load", "temp"]
        np.testing.assert_array_equal(ordered.values[:, 0], [3.0, 4.0])

    def test_non_numeric_cell(self, write_csv):
        """
        Teste le refus d'une cellule non numérique.
        """
        frame = pd.DataFrame({"a": ["1.0", "abc", "3.0"]})
        with pytest.raises(DataError):
            read_series_csv(write_csv(frame))

    def test_missing_file(self, tmp_path):
        """
        Teste l'erreur sur un fichier absent.
        """
        with pytest.raises(DataError):
            read_series_csv(tmp_path / "absent.csv")

    def test_split_train_val(self):
        """
        Teste la coupure à 90 % de l'axe temporel.
        """
        assert split_train_val(12000) == ((0, 10800), (10800, 12000))
        assert split_train_val(7) == ((0, 6), (6, 7))


class TestWindows:
    """
    Tests de l'extraction des fenêtres glissantes.
    """

    def test_window_count(self):
        """
        Teste le nombre de fenêtres d'une série de 12000 pas au pas de 16.
        """
        train_range, val_range = split_train_val(12000)
        missing = np.zeros(12000, dtype=bool)
        assert len(window_starts(train_range, 16, missing)) == 608
        assert len(window_starts(val_range, 16, missing)) == 8

    def test_short_range(self):
        """
        Teste qu'une plage plus courte qu'une fenêtre n'en produit aucune.
        """
        assert len(window_starts((0, WINDOW_LEN - 1), 1, np.zeros(5000, dtype=bool))) == 0
        assert len(window_starts((0, WINDOW_LEN), 1, np.zeros(5000, dtype=bool))) == 1

    def test_missing_rows_excluded(self, make_series):
        """
        Teste qu'aucune fenêtre retenue ne contient de ligne manquante.
        """
        values = np.arange(5000, dtype=np.float64)
        values[2500] = np.nan
        series = make_series(values, with_timestamps=False)
        starts = window_starts((0, 5000), 7, series.missing_rows())
        assert len(starts) > 0
        assert not np.any((starts <= 2500) & (2500 < starts + WINDOW_LEN))
        for window in extract_windows(series, (0, 5000), stride=7):
            assert window.shape == (WINDOW_LEN, 1)
            assert not np.isnan(window).any()

    def test_cap(self, rng):
        """
        Teste le sous-échantillonnage uniforme au-delà du plafond.
        """
        missing = np.zeros(20000, dtype=bool)
        starts = window_starts((0, 20000), 1, missing, cap=50, rng=rng)
        assert len(starts) == 50
        assert np.all(np.diff(starts) > 0)
        with pytest.raises(ConfigurationError):
            window_starts((0, 20000), 1, missing, cap=50)

    def test_invalid_stride(self):
        """
        Teste le refus d'un pas nul.
        """
        with pytest.raises(ConfigurationError):
            window_starts((0, 5000), 0, np.zeros(5000, dtype=bool))


class TestPacking:
    """
    Tests de la répartition des canaux sur 32 emplacements.
    """

    def test_groups_with_time_features(self):
        """
        Teste le découpage de 60 canaux en 26/26/8 avec canaux calendaires.
        """
        sizes = [len(g) for g in channel_groups(60, True)]
        assert sizes == [26, 26, 8]
        assert [len(g) for g in channel_groups(60, False)] == [32, 28]

    def test_pack_layout(self, rng):
        """
        Teste la disposition données, calendrier puis zéros.
        """
        window = rng.normal(size=(WINDOW_LEN, 60))
        feats = rng.normal(size=(WINDOW_LEN, N_TIME_FEATURES))
        packed = pack_channels(window, feats)
        assert len(packed) == 3
        last = packed[-1]
        assert last.n_data == 8
        np.testing.assert_array_equal(last.values[:, :8], window[:, 52:60])
        np.testing.assert_array_equal(last.values[:, 8:14], feats)
        assert not np.any(last.values[:, 14:])
        assert last.channel_valid.sum() == 14
        for p in packed:
            assert p.values.shape == (WINDOW_LEN, MAX_CHANNELS)
            assert not np.any(p.values[:, ~p.channel_valid])


class TestTimeFeatures:
    """
    Tests de l'encodage calendaire.
    """

    def test_known_timestamp(self):
        """
        Teste un lundi de janvier à 6 h.
        """
        feats = encode_time_features(pd.DatetimeIndex(["2021-01-04 06:00:00"]))
        np.testing.assert_allclose(feats[0], [1.0, 0.0, 0.0, 1.0, 0.0, 1.0], atol=1e-12)

    def test_extrapolation(self):
        """
        Teste le prolongement des horodatages à l'intervalle médian.
        """
        index = pd.date_range("2021-01-01", periods=10, freq="15min")
        future = extrapolate_timestamps(index, 3)
        assert list(future) == list(pd.date_range("2021-01-01 02:30", periods=3, freq="15min"))
        assert extrapolate_timestamps(index[:1], 3) is None


class TestSamples:
    """
    Tests de la normalisation, du rejet et du masquage des échantillons.
    """

    def test_normalized_sample_invariants(self, rng):
        """
        Teste les invariants d'un échantillon normalisé.
        """
        window, valid = _packed_window(rng)
        sample = normalize_sample(window, valid)
        assert isinstance(sample, TrainingSample)
        sample.validate()
        assert sample.context_valid_from == 0
        np.testing.assert_allclose(sample.norm_mean[:5], window[:1024, :5].mean(axis=0), rtol=1e-5)

    def test_constant_channel(self, rng):
        """
        Teste qu'un canal constant devient nul.
        """
        window, valid = _packed_window(rng, n_valid=2)
        window[:, 1] = 42.0
        sample = normalize_sample(window, valid)
        assert not np.any(sample.context[:, 1])
        assert not np.any(sample.target[:, 1])
        sample.validate()

    def test_extreme_value_discarded(self, rng):
        """
        Teste le rejet d'un échantillon dont une valeur normalisée dépasse 9.
        """
        window, valid = _packed_window(rng)
        window[1050, 0] = 1e6
        result = normalize_sample(window, valid)
        assert isinstance(result, Discard)
        assert result.max_abs > EXTREME_LIMIT

    def test_validate_detects_padding_leak(self, rng):
        """
        Teste qu'un canal complémentaire non nul viole les invariants.
        """
        window, valid = _packed_window(rng)
        sample = normalize_sample(window, valid)
        sample.context[0, 20] = 1.0
        with pytest.raises(InvariantViolation):
            sample.validate()

    def test_mask_recomputes_statistics(self, rng):
        """
        Teste le masquage avec statistiques recalculées sur la zone conservée.
        """
        window, valid = _packed_window(rng)
        sample = normalize_sample(window, valid)
        masked = apply_context_mask(sample, rng, mask_start=300)
        assert masked.context_valid_from == 300
        assert not np.any(masked.context[:300])
        masked.validate()
        expected = window[300:1024, :5].mean(axis=0)
        np.testing.assert_allclose(masked.norm_mean[:5], expected, rtol=1e-4)

    def test_mask_zero_only(self, rng):
        """
        Teste le masquage sans recalcul : seules les premières lignes changent.
        """
        window, valid = _packed_window(rng)
        sample = normalize_sample(window, valid)
        masked = apply_context_mask(sample, rng, mask_stats_over_unmasked=False, mask_start=10)
        assert not np.any(masked.context[:10])
        np.testing.assert_array_equal(masked.context[10:], sample.context[10:])
        np.testing.assert_array_equal(masked.target, sample.target)

    def test_mask_frequency(self):
        """
        Teste la proportion d'échantillons masqués et la plage des longueurs.
        """
        rng = np.random.default_rng(3)
        draws = np.array([draw_mask_start(rng) for _ in range(20000)])
        assert abs(np.mean(draws > 0) - 0.1) < 0.01
        masked = draws[draws > 0]
        assert masked.min() >= 1
        assert masked.max() <= MAX_MASKED_ROWS


class TestShards:
    """
    Tests du format binaire des shards.
    """

    def _samples(self, rng, n=3):
        samples = []
        for _ in range(n):
            window, valid = _packed_window(rng)
            samples.append(normalize_sample(window, valid))
        return samples

    def test_roundtrip(self, tmp_path, rng):
        """
        Teste l'écriture puis la relecture exacte des échantillons.
        """
        samples = self._samples(rng)
        samples[1] = apply_context_mask(samples[1], rng, mask_start=64)
        path = tmp_path / "train-00000.bin"
        assert write_shard(path, samples) == 3
        assert path.stat().st_size == 3 * RECORD_SIZE
        for original, record in zip(samples, read_shard(path)):
            restored = record_to_sample(record)
            np.testing.assert_array_equal(restored.context, original.context)
            np.testing.assert_array_equal(restored.target, original.target)
            np.testing.assert_array_equal(restored.channel_valid, original.channel_valid)
            assert restored.context_valid_from == original.context_valid_from

    def test_truncated_shard(self, tmp_path, rng):
        """
        Teste le refus d'un shard tronqué.
        """
        path = tmp_path / "bad.bin"
        write_shard(path, self._samples(rng, 1))
        path.write_bytes(path.read_bytes()[:-7])
        with pytest.raises(CorruptShardError):
            read_shard(path)

    def test_bad_magic(self, tmp_path, rng):
        """
        Teste le refus d'un shard dont le magic est altéré.
        """
        path = tmp_path / "bad.bin"
        write_shard(path, self._samples(rng, 1))
        payload = bytearray(path.read_bytes())
        payload[0] ^= 0xFF
        path.write_bytes(bytes(payload))
        with pytest.raises(CorruptShardError):
            read_shard(path)


class TestCorpus:
    """
    Tests de la construction d'un corpus.
    """

    def _series(self, make_series, sine_values, n=2):
        return [
            make_series(
                sine_values(3500, period=24.0 + 8 * i, amplitude=1.0 + i),
                series_id=f"s{i}",
                with_timestamps=False,
            )
            for i in range(n)
        ]

    def test_counts_and_invariants(self, tmp_path, make_series, sine_values):
        """
        Teste les effectifs du manifeste et les invariants des échantillons écrits.
        """
        config = CorpusConfig(stride=16, cap=128, shard_size=100)
        series = self._series(make_series, sine_values)
        corpus = build_corpus(series, config, seed=5, out_dir=tmp_path)
        totals = corpus.manifest["totals"]
        assert totals["train"] == 256
        assert totals["validation"] == 0
        assert totals["discarded"] == 0
        assert corpus.count("train") == 256
        assert len(corpus.shard_paths("train")) == 3
        for sample in corpus.iter_samples("train"):
            sample.validate()
        arrays = corpus.load_arrays("train")
        assert arrays["context"].shape == (256, 1024, 32)
        assert arrays["target"].shape == (256, 64, 32)
        assert arrays["channel_valid"][:, 0].all()
        assert not arrays["channel_valid"][:, 1:].any()

    def test_deterministic(self, tmp_path, make_series, sine_values):
        """
        Teste que deux constructions de même graine (et de parallélisme différent)
        écrivent des octets identiques.
        """
        series = self._series(make_series, sine_values, n=3)
        a = build_corpus(series, CorpusConfig(stride=32, cap=64), seed=9, out_dir=tmp_path / "a")
        threaded = CorpusConfig(stride=32, cap=64, threads=3)
        b = build_corpus(series, threaded, seed=9, out_dir=tmp_path / "b")
        manifest_a = (tmp_path / "a" / MANIFEST_NAME).read_text()
        assert manifest_a == (tmp_path / "b" / MANIFEST_NAME).read_text()
        for pa, pb in zip(a.shard_paths("train"), b.shard_paths("train")):
            assert pa.read_bytes() == pb.read_bytes()

    def test_seed_changes_masks(self, tmp_path, make_series, sine_values):
        """
        Teste qu'une autre graine change les échantillons masqués.
        """
        series = self._series(make_series, sine_values)
        config = CorpusConfig(stride=16, cap=128, mask_prob=0.5)
        a = build_corpus(series, config, seed=1, out_dir=tmp_path / "a")
        b = build_corpus(series, config, seed=2, out_dir=tmp_path / "b")
        va = a.load_arrays("train")["context_valid_from"]
        vb = b.load_arrays("train")["context_valid_from"]
        assert not np.array_equal(va, vb)

    def test_open(self, tmp_path, make_series, sine_values):
        """
        Teste la réouverture d'un corpus et les erreurs de manifeste.
        """
        series = self._series(make_series, sine_values, n=1)
        build_corpus(series, CorpusConfig(cap=8), seed=0, out_dir=tmp_path)
        corpus = SampleCorpus.open(tmp_path)
        assert corpus.seed == 0
        assert corpus.count("train") == 8
        with pytest.raises(DataError):
            SampleCorpus.open(tmp_path / "absent")
        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())
        manifest["version"] = 99
        (tmp_path / MANIFEST_NAME).write_text(json.dumps(manifest))
        with pytest.raises(CorruptShardError):
            SampleCorpus.open(tmp_path)
