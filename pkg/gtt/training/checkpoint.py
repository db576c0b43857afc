"""
Sérialisation binaire versionnée des checkpoints.

Disposition (petit-boutiste) :
    u32 magic 0x47545443 | u16 version | u32 CRC32 de la charge utile
    charge utile :
        u32 longueur + configuration JSON (clés triées)
        u32 nombre de tenseurs
        par tenseur, dans l'ordre trié des noms :
            u16 longueur du nom + nom UTF-8 | u8 rang | u32 × rang dimensions | f32 valeurs
Les noms sont préfixés par "param/", "adam_m/" ou "adam_v/".
"""

import json
import math
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
import numpy as np
from ..event_logging import log_checkpoint_saved
from ..exceptions import (
    ChecksumMismatchError,
    CheckpointVersionError,
    CorruptCheckpointError,
    DataError,
)
from ..model.config import ModelConfig
from ..model.params import ModelParams

CKPT_MAGIC = 0x47545443
CKPT_VERSION = 1
_HEADER = struct.Struct("<IHI")
_PREFIXES = ("param/", "adam_m/", "adam_v/")


@dataclass
class Checkpoint:
    """
    État complet d'un entraînement.

    Attributs :
        model_config (ModelConfig) : Architecture
        train_config (dict) : Recette utilisée
        params (dict) : nom -> numpy.ndarray float32
        adam_m, adam_v (dict) : Moments de l'optimiseur
        step (int) : Pas de l'optimiseur
        epoch (int) : Dernière époque terminée
        best_val_loss (float) : Meilleure perte de validation
        best_epoch (int) : Époque de la meilleure perte
        last_val_loss (float | None) : Perte de la dernière époque
        increase_count (int) : Hausses consécutives de la perte de validation
        rng_state (dict) : Graine et sous-flux à reprendre
    """

    model_config: ModelConfig
    params: dict
    train_config: dict = field(default_factory=dict)
    adam_m: dict = field(default_factory=dict)
    adam_v: dict = field(default_factory=dict)
    step: int = 0
    epoch: int = 0
    best_val_loss: float = math.inf
    best_epoch: int = 0
    last_val_loss: Optional[float] = None
    increase_count: int = 0
    rng_state: dict = field(default_factory=dict)

    def model_params(self, requires_grad=True):
        """Paramètres du modèle reconstruits à partir du checkpoint."""
        return ModelParams.from_arrays(self.params, self.model_config, requires_grad=requires_grad)

    def _config_document(self):
        return {
            "model_config": self.model_config.to_dict(),
            "train_config": self.train_config,
            "scalars": {"step": self.step, "epoch": self.epoch},
            "early_stopping": {
                "best_val_loss": self.best_val_loss,
                "best_epoch": self.best_epoch,
                "last_val_loss": self.last_val_loss,
                "increase_count": self.increase_count,
            },
            "rng_state": self.rng_state,
        }

    def named_tensors(self):
        tensors = {}
        for prefix, group in zip(_PREFIXES, (self.params, self.adam_m, self.adam_v)):
            for name, value in group.items():
                tensors[prefix + name] = value
        return dict(sorted(tensors.items()))


def encode_checkpoint(ckpt):
    """Octets du fichier checkpoint."""
    config = json.dumps(ckpt._config_document(), sort_keys=True).encode("utf-8")
    parts = [struct.pack("<I", len(config)), config]
    tensors = ckpt.named_tensors()
    parts.append(struct.pack("<I", len(tensors)))
    for name, value in tensors.items():
        encoded = name.encode("utf-8")
        array = np.ascontiguousarray(value, dtype="<f4")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", array.ndim))
        parts.append(struct.pack(f"<{array.ndim}I", *array.shape))
        parts.append(array.tobytes())
    payload = b"".join(parts)
    return _HEADER.pack(CKPT_MAGIC, CKPT_VERSION, zlib.crc32(payload)) + payload


class _Reader:
    def __init__(self, payload, path):
        self.payload = payload
        self.offset = 0
        self.path = path

    def take(self, n):
        if self.offset + n > len(self.payload):
            raise CorruptCheckpointError(f"{self.path}: fichier tronqué")
        chunk = self.payload[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))


def decode_checkpoint(data, path="<mémoire>"):
    """
    Reconstruit un checkpoint à partir de ses octets.

    Raises:
        CorruptCheckpointError: Fichier tronqué ou mal formé
        CheckpointVersionError: Version non prise en charge
        ChecksumMismatchError: CRC32 incorrect
    """
    if len(data) < _HEADER.size:
        raise CorruptCheckpointError(f"{path}: fichier tronqué")
    magic, version, crc = _HEADER.unpack_from(data)
    if magic != CKPT_MAGIC:
        raise CorruptCheckpointError(f"{path}: ce n'est pas un checkpoint (magic {magic:#x})")
    if version != CKPT_VERSION:
        raise CheckpointVersionError(
            f"{path}: version {version} non prise en charge (attendue {CKPT_VERSION})"
        )
    payload = data[_HEADER.size:]
    if zlib.crc32(payload) != crc:
        raise ChecksumMismatchError(f"{path}: somme de contrôle incorrecte")

    reader = _Reader(payload, path)
    (config_len,) = reader.unpack("<I")
    try:
        doc = json.loads(reader.take(config_len).decode("utf-8"))
        model_config = ModelConfig.from_dict(doc["model_config"])
    except (ValueError, KeyError) as e:
        raise CorruptCheckpointError(f"{path}: configuration illisible ({e})") from e
    (count,) = reader.unpack("<I")
    groups = {prefix: {} for prefix in _PREFIXES}
    for _ in range(count):
        (name_len,) = reader.unpack("<H")
        name = reader.take(name_len).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}I") if ndim else ()
        size = int(np.prod(shape)) if shape else 1
        array = np.frombuffer(reader.take(4 * size), dtype="<f4").reshape(shape).astype(np.float32)
        prefix = next((p for p in _PREFIXES if name.startswith(p)), None)
        if prefix is None:
            raise CorruptCheckpointError(f"{path}: tenseur au nom inattendu '{name}'")
        groups[prefix][name[len(prefix):]] = array
    if reader.offset != len(payload):
        raise CorruptCheckpointError(f"{path}: octets superflus en fin de fichier")

    early = doc.get("early_stopping", {})
    scalars = doc.get("scalars", {})
    return Checkpoint(
        model_config=model_config,
        params=groups["param/"],
        train_config=doc.get("train_config", {}),
        adam_m=groups["adam_m/"],
        adam_v=groups["adam_v/"],
        step=scalars.get("step", 0),
        epoch=scalars.get("epoch", 0),
        best_val_loss=early.get("best_val_loss", math.inf),
        best_epoch=early.get("best_epoch", 0),
        last_val_loss=early.get("last_val_loss"),
        increase_count=early.get("increase_count", 0),
        rng_state=doc.get("rng_state", {}),
    )


@log_checkpoint_saved
def save_checkpoint(ckpt, path):
    """
    Écrit un checkpoint (écriture dans un fichier temporaire puis renommage).

    Raises:
        DataError: Si l'écriture échoue
    """
    path = Path(path)
    data = encode_checkpoint(ckpt)
    tmp = path.with_name(path.name + ".tmp")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp.write_bytes(data)
        tmp.replace(path)
    except OSError as e:
        raise DataError(f"{path}: écriture du checkpoint impossible ({e})") from e
    return path


def load_checkpoint(path):
    """
    Lit un checkpoint.

    Raises:
        DataError: Fichier absent ou illisible
        CorruptCheckpointError: Contenu invalide
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DataError(f"{path}: lecture du checkpoint impossible ({e})") from e
    return decode_checkpoint(data, path)


@dataclass
class CheckpointDiff:
    """Tenseurs différents (au bit près) entre deux checkpoints."""

    differing: list
    only_in_a: list
    only_in_b: list
    compared: int

    @property
    def identical(self):
        return not (self.differing or self.only_in_a or self.only_in_b)


def diff_checkpoints(a, b, exclude_prefixes=(), include_optimizer=False):
    """
    Compare deux checkpoints tenseur par tenseur.

    Args:
        a (Checkpoint): Premier checkpoint
        b (Checkpoint): Second checkpoint
        exclude_prefixes (iterable[str]): Préfixes de noms de paramètres ignorés (ex: "head.")
        include_optimizer (bool): Compare aussi les moments de l'optimiseur

    Returns:
        CheckpointDiff: Rapport
    """
    exclude = tuple(exclude_prefixes)

    def selected(ckpt):
        if include_optimizer:
            tensors = ckpt.named_tensors()
        else:
            tensors = {"param/" + k: v for k, v in ckpt.params.items()}
        return {
            name: value
            for name, value in tensors.items()
            if not name.split("/", 1)[1].startswith(exclude)
        }

    def as_bytes(value):
        return np.asarray(value, dtype="<f4").tobytes()

    ta, tb = selected(a), selected(b)
    common = sorted(set(ta) & set(tb))
    differing = [
        name
        for name in common
        if ta[name].shape != tb[name].shape
        or as_bytes(ta[name]) != as_bytes(tb[name])
    ]
    return CheckpointDiff(
        differing=differing,
        only_in_a=sorted(set(ta) - set(tb)),
        only_in_b=sorted(set(tb) - set(ta)),
        compared=len(common),
    )
