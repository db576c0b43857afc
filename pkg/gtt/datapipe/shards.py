"""
Format binaire des shards d'échantillons.

Chaque enregistrement, petit-boutiste et de taille fixe, contient : magic u32,
version u16, nombre de canaux u16, masque des canaux valides u32,
context_valid_from u16, moyennes et écarts-types 32×f32, contexte 1024×32 f32
et cible 64×32 f32 en ordre ligne par ligne.
"""

import numpy as np
from ..exceptions import CorruptShardError, DataError
from .packing import MAX_CHANNELS
from .samples import TrainingSample
from .windows import CONTEXT_LEN, TARGET_LEN

SHARD_MAGIC = 0x47545431
SHARD_VERSION = 1

RECORD_DTYPE = np.dtype(
    [
        ("magic", "<u4"),
        ("version", "<u2"),
        ("n_channels", "<u2"),
        ("channel_valid", "<u4"),
        ("context_valid_from", "<u2"),
        ("norm_mean", "<f4", (MAX_CHANNELS,)),
        ("norm_std", "<f4", (MAX_CHANNELS,)),
        ("context", "<f4", (CONTEXT_LEN, MAX_CHANNELS)),
        ("target", "<f4", (TARGET_LEN, MAX_CHANNELS)),
    ]
)
RECORD_SIZE = RECORD_DTYPE.itemsize

_BIT_WEIGHTS = (1 << np.arange(MAX_CHANNELS, dtype=np.uint64)).astype(np.uint64)


def pack_bits(channel_valid):
    """Masque booléen [32] -> entier u32 (bit i = canal i)."""
    return int(np.sum(_BIT_WEIGHTS[np.asarray(channel_valid, dtype=bool)]))


def unpack_bits(bits):
    """Entier u32 -> masque booléen [32]."""
    return (int(bits) >> np.arange(MAX_CHANNELS)) & 1 == 1


def samples_to_records(samples):
    """
    Convertit des échantillons en tableau structuré.

    Args:
        samples (list[TrainingSample]): Échantillons

    Returns:
        numpy.ndarray: Enregistrements de type RECORD_DTYPE
    """
    records = np.zeros(len(samples), dtype=RECORD_DTYPE)
    records["magic"] = SHARD_MAGIC
    records["version"] = SHARD_VERSION
    records["n_channels"] = MAX_CHANNELS
    for i, sample in enumerate(samples):
        records["channel_valid"][i] = pack_bits(sample.channel_valid)
        records["context_valid_from"][i] = sample.context_valid_from
        records["norm_mean"][i] = sample.norm_mean
        records["norm_std"][i] = sample.norm_std
        records["context"][i] = sample.context
        records["target"][i] = sample.target
    return records


def record_to_sample(record):
    """Reconstruit un TrainingSample à partir d'un enregistrement."""
    return TrainingSample(
        context=np.array(record["context"], dtype=np.float32),
        target=np.array(record["target"], dtype=np.float32),
        channel_valid=unpack_bits(record["channel_valid"]),
        context_valid_from=int(record["context_valid_from"]),
        norm_mean=np.array(record["norm_mean"], dtype=np.float32),
        norm_std=np.array(record["norm_std"], dtype=np.float32),
    )


def write_shard(path, samples):
    """
    Écrit des échantillons dans un fichier shard.

    Raises:
        DataError: Si l'écriture échoue
    """
    records = samples_to_records(samples)
    try:
        with open(path, "wb") as fh:
            fh.write(records.tobytes())
    except OSError as e:
        raise DataError(f"{path}: écriture du shard impossible ({e})") from e
    return len(records)


def read_shard(path):
    """
    Lit et valide un fichier shard.

    Args:
        path (str | Path): Chemin du shard

    Returns:
        numpy.ndarray: Enregistrements de type RECORD_DTYPE

    Raises:
        CorruptShardError: Taille, magic ou version invalides
    """
    try:
        with open(path, "rb") as fh:
            payload = fh.read()
    except OSError as e:
        raise DataError(f"{path}: lecture du shard impossible ({e})") from e
    if len(payload) % RECORD_SIZE:
        raise CorruptShardError(f"{path}: taille {len(payload)} non multiple de {RECORD_SIZE}")
    records = np.frombuffer(payload, dtype=RECORD_DTYPE)
    if np.any(records["magic"] != SHARD_MAGIC):
        raise CorruptShardError(f"{path}: magic invalide")
    if np.any(records["version"] != SHARD_VERSION):
        raise CorruptShardError(f"{path}: version de format non prise en charge")
    return records
