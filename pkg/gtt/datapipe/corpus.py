"""
Construction et lecture d'un corpus d'échantillons sur disque.

Un corpus est un répertoire contenant des shards binaires par split et un
manifeste JSON (`manifest.json`) décrivant leur contenu.
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
import numpy as np
from ..event_logging import log_pipeline_step
from ..exceptions import CorruptShardError, DataError
from ..seeding import substream
from .packing import channel_groups, pack_channels
from .samples import MASK_PROB, Discard, apply_context_mask, draw_mask_start, normalize_sample
from .series import TRAIN_FRACTION, split_train_val
from .shards import RECORD_DTYPE, read_shard, record_to_sample, write_shard
from .time_features import encode_time_features
from .windows import DEFAULT_STRIDE, SERIES_CAP, WINDOW_LEN, window_starts

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_VERSION = 1
SPLITS = ("train", "validation")


@dataclass
class CorpusConfig:
    """
    Paramètres de construction du corpus.

    Attributs :
        stride (int) : Pas entre deux fenêtres
        cap (int) : Nombre maximal d'échantillons par série et par split
        train_fraction (float) : Part des premiers points réservée à l'entraînement
        mask_prob (float) : Probabilité de masquer le début du contexte
        mask_stats_over_unmasked (bool) : Statistiques calculées sur la zone non masquée
        shard_size (int) : Nombre d'enregistrements par shard
        threads (int) : Nombre de séries traitées en parallèle
    """

    stride: int = DEFAULT_STRIDE
    cap: int = SERIES_CAP
    train_fraction: float = TRAIN_FRACTION
    mask_prob: float = MASK_PROB
    mask_stats_over_unmasked: bool = True
    shard_size: int = 4096
    threads: int = 1


@dataclass
class SeriesOutcome:
    """Échantillons et compteurs produits par une série."""

    series_id: str
    samples: dict = field(default_factory=lambda: {split: [] for split in SPLITS})
    windows: int = 0
    discarded: int = 0


def _process_series(index, series, config, seed):
    series = series.ordered()
    outcome = SeriesOutcome(series_id=series.id)
    window_rng = substream(seed, "corpus", index)
    mask_rng = substream(seed, "mask", index)
    time_feats = encode_time_features(series.timestamps) if series.timestamps is not None else None
    n_groups = len(channel_groups(series.n_channels, time_feats is not None))
    window_cap = config.cap // n_groups
    missing = series.missing_rows()

    ranges = split_train_val(series, config.train_fraction)
    for split, value_range in zip(SPLITS, ranges):
        starts = window_starts(value_range, config.stride, missing, window_cap, window_rng)
        outcome.windows += len(starts)
        for s in starts:
            feats = time_feats[s:s + WINDOW_LEN] if time_feats is not None else None
            for packed in pack_channels(series.values[s:s + WINDOW_LEN], feats):
                m = draw_mask_start(mask_rng, config.mask_prob)
                if config.mask_stats_over_unmasked:
                    result = normalize_sample(
                        packed.values, packed.channel_valid, context_valid_from=m
                    )
                else:
                    result = normalize_sample(packed.values, packed.channel_valid)
                    if not isinstance(result, Discard) and m:
                        result = apply_context_mask(
                            result, mask_rng, mask_stats_over_unmasked=False, mask_start=m
                        )
                if isinstance(result, Discard):
                    outcome.discarded += 1
                    continue
                outcome.samples[split].append(result)
    return outcome


class _ShardWriter:
    """Écrit les échantillons d'un split par blocs de `shard_size`."""

    def __init__(self, root, split, shard_size):
        self.root = Path(root)
        self.split = split
        self.shard_size = shard_size
        self.pending = []
        self.shards = []

    def add(self, samples):
        self.pending.extend(samples)
        while len(self.pending) >= self.shard_size:
            self._flush(self.pending[: self.shard_size])
            self.pending = self.pending[self.shard_size:]

    def close(self):
        if self.pending:
            self._flush(self.pending)
            self.pending = []
        return self.shards

    def _flush(self, samples):
        name = f"{self.split}-{len(self.shards):05d}.bin"
        count = write_shard(self.root / name, samples)
        self.shards.append({"path": name, "split": self.split, "count": count})


@log_pipeline_step("build_corpus")
def build_corpus(series_list, config, seed, out_dir):
    """
    Construit un corpus : split → fenêtres → répartition → normalisation → masquage.

    Chaque série tire ses fenêtres et ses masques de sous-flux propres, si bien
    que l'ordre d'exécution des fils n'influe pas sur les octets écrits.

    Args:
        series_list (list[RawSeries]): Séries sources
        config (CorpusConfig): Paramètres
        seed (int): Graine maîtresse
        out_dir (str | Path): Répertoire du corpus

    Returns:
        SampleCorpus: Corpus écrit
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"{out_dir}: création du répertoire impossible ({e})") from e

    writers = {split: _ShardWriter(out_dir, split, config.shard_size) for split in SPLITS}
    per_series = []
    jobs = [(i, series, config, seed) for i, series in enumerate(series_list)]
    with ThreadPoolExecutor(max_workers=max(1, int(config.threads))) as pool:
        for outcome in pool.map(lambda job: _process_series(*job), jobs):
            for split in SPLITS:
                writers[split].add(outcome.samples[split])
            per_series.append(
                {
                    "id": outcome.series_id,
                    "windows": outcome.windows,
                    "train": len(outcome.samples["train"]),
                    "validation": len(outcome.samples["validation"]),
                    "discarded": outcome.discarded,
                }
            )

    shards = [entry for split in SPLITS for entry in writers[split].close()]
    totals = {
        "train": sum(s["train"] for s in per_series),
        "validation": sum(s["validation"] for s in per_series),
        "discarded": sum(s["discarded"] for s in per_series),
        "windows": sum(s["windows"] for s in per_series),
    }
    manifest = {
        "version": MANIFEST_VERSION,
        "seed": int(seed),
        "config": asdict(config),
        "shards": shards,
        "series": per_series,
        "totals": totals,
    }
    manifest["config"].pop("threads", None)
    manifest_path = out_dir / MANIFEST_NAME
    try:
        text = json.dumps(manifest, indent=2, sort_keys=True) + "\n"
        manifest_path.write_text(text, encoding="utf-8")
    except OSError as e:
        raise DataError(f"{manifest_path}: écriture du manifeste impossible ({e})") from e

    if totals["discarded"]:
        logger.warning(f"{totals['discarded']} échantillon(s) rejeté(s) pour valeur extrême")
    logger.info(
        f"Corpus écrit dans {out_dir}: {totals['train']} entraînement, "
        f"{totals['validation']} validation"
    )
    return SampleCorpus(out_dir, manifest)


class SampleCorpus:
    """
    Corpus d'échantillons lu depuis son manifeste.

    Attributs :
        root (Path) : Répertoire du corpus
        manifest (dict) : Contenu du manifeste
    """

    def __init__(self, root, manifest):
        self.root = Path(root)
        self.manifest = manifest

    @classmethod
    def open(cls, root):
        """
        Ouvre un corpus existant.

        Raises:
            DataError: Manifeste absent ou illisible
        """
        path = Path(root) / MANIFEST_NAME
        try:
            manifest = json.loads(path.read_text(encoding="utf-8"))
        except OSError as e:
            raise DataError(f"{path}: manifeste introuvable ({e})") from e
        except json.JSONDecodeError as e:
            raise CorruptShardError(f"{path}: manifeste illisible ({e})") from e
        if manifest.get("version") != MANIFEST_VERSION:
            raise CorruptShardError(f"{path}: version de manifeste non prise en charge")
        return cls(root, manifest)

    @property
    def seed(self):
        return self.manifest["seed"]

    def shard_paths(self, split):
        return [self.root / s["path"] for s in self.manifest["shards"] if s["split"] == split]

    def count(self, split):
        """Nombre d'échantillons d'un split."""
        return sum(s["count"] for s in self.manifest["shards"] if s["split"] == split)

    def iter_samples(self, split):
        """Itère sur les TrainingSample d'un split, dans l'ordre des shards."""
        for path in self.shard_paths(split):
            for record in read_shard(path):
                yield record_to_sample(record)

    def load_arrays(self, split):
        """
        Charge un split sous forme de tableaux empilés.

        Returns:
            dict: context [N×1024×32], target [N×64×32], channel_valid [N×32],
                context_valid_from [N]
        """
        parts = [read_shard(path) for path in self.shard_paths(split)]
        records = np.concatenate(parts) if parts else np.zeros(0, dtype=RECORD_DTYPE)
        bits = records["channel_valid"].astype(np.int64)
        channel_valid = ((bits[:, None] >> np.arange(32)) & 1).astype(bool)
        return {
            "context": np.ascontiguousarray(records["context"]),
            "target": np.ascontiguousarray(records["target"]),
            "channel_valid": channel_valid,
            "context_valid_from": records["context_valid_from"].astype(np.int64),
        }
