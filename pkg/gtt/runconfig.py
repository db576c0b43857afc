"""
Fichier de configuration d'exécution (YAML) et configuration effective.

Le fichier est découpé en sections qui correspondent aux étapes du pipeline.
Toute clé inconnue est refusée. Les options de la ligne de commande
l'emportent sur le fichier ; la configuration complète, valeurs par défaut
comprises, est affichée puis écrite dans `<out>/effective_config.yaml`.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional
import yaml
from threadpoolctl import threadpool_limits
from .datapipe.corpus import CorpusConfig
from .evaluation.protocol import EvalSpec
from .exceptions import ConfigurationError, DataError
from .model.config import get_preset
from .settings import get_default_out
from .synthetic import SyntheticSpec
from .training.config import FinetuneConfig, TrainConfig

logger = logging.getLogger(__name__)

EFFECTIVE_CONFIG_NAME = "effective_config.yaml"


def _plain(value):
    """Convertit tuples et dictionnaires imbriqués en types YAML simples."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass
class DataSection:
    """Fichiers CSV d'entrée et rôles de leurs colonnes."""

    paths: List[str] = field(default_factory=list)
    roles: dict = field(default_factory=dict)


@dataclass
class ModelSection:
    """Préréglage, éventuellement surchargé dimension par dimension."""

    preset: str = "micro"
    n_layers: Optional[int] = None
    embed_dim: Optional[int] = None
    n_heads: Optional[int] = None
    mlp_dim: Optional[int] = None

    def resolve(self):
        """
        Configuration d'architecture correspondante.

        Returns:
            ModelConfig: Configuration validée
        """
        overrides = {
            name: getattr(self, name)
            for name in ("n_layers", "embed_dim", "n_heads", "mlp_dim")
            if getattr(self, name) is not None
        }
        return replace(get_preset(self.preset), **overrides).validate()


@dataclass
class ForecastSection:
    """Paramètres de la commande forecast."""

    checkpoint: Optional[str] = None
    context: Optional[str] = None
    horizon: int = 64
    context_len: Optional[int] = None
    renormalize_each_block: bool = False


@dataclass
class EvalSection:
    """Préréglage d'évaluation et ses surcharges (champs de EvalSpec)."""

    preset: str = "default"
    checkpoint: Optional[str] = None
    baselines: List[str] = field(default_factory=lambda: ["last_value", "seasonal_naive"])
    dataset: Optional[str] = None
    context_len: Optional[int] = None
    horizons: Optional[List[int]] = None
    targets: List[str] = field(default_factory=list)
    split: Optional[str] = None
    fractions: Optional[List[float]] = None
    stride: Optional[int] = None
    borrow_context: Optional[bool] = None
    univariate: Optional[bool] = None
    space: Optional[str] = None
    season_period: Optional[int] = None
    batch_size: Optional[int] = None
    dump_windows: Optional[bool] = None
    renormalize_each_block: Optional[bool] = None

    def to_spec(self, roles=None):
        """
        Configuration d'évaluation complète.

        Returns:
            EvalSpec: Protocole validé
        """
        skip = {"preset", "checkpoint", "baselines"}
        overrides = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in skip and getattr(self, f.name) is not None
        }
        if roles:
            overrides["roles"] = dict(roles)
        return EvalSpec.from_preset(self.preset, **overrides).validate()


@dataclass
class ScalingSection:
    """
    Sonde d'échelle : modèles entraînés sur un même corpus synthétique puis
    évalués sur des séries de fréquence non vue : heldout_period doit rester
    hors des bornes synth.period.
    """

    presets: List[str] = field(default_factory=lambda: ["micro", "micro-wide"])
    data_fractions: List[float] = field(default_factory=list)
    heldout_period: List[float] = field(default_factory=lambda: [12.0, 12.0])
    heldout_series: int = 2
    context_len: int = 512
    horizons: List[int] = field(default_factory=lambda: [64])
    eval_stride: int = 16


@dataclass
class RunConfig:
    """
    Configuration d'exécution complète.

    Attributs :
        seed (int) : Graine maîtresse
        out (str) : Répertoire de sortie
        threads (int) : Parallélisme maximal
        data, corpus, model, train, finetune, forecast, eval, synth, scaling : sections
    """

    seed: int = 0
    out: str = field(default_factory=get_default_out)
    threads: int = 1
    data: DataSection = field(default_factory=DataSection)
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    finetune: FinetuneConfig = field(default_factory=FinetuneConfig)
    forecast: ForecastSection = field(default_factory=ForecastSection)
    eval: EvalSection = field(default_factory=EvalSection)
    synth: SyntheticSpec = field(default_factory=SyntheticSpec)
    scaling: ScalingSection = field(default_factory=ScalingSection)

    @property
    def out_dir(self):
        return Path(self.out)

    def model_config(self):
        return self.model.resolve()

    def eval_spec(self):
        return self.eval.to_spec(self.data.roles)

    def limit_threads(self):
        """
        Plafonne les threads des bibliothèques natives de numpy (BLAS, OpenMP).

        Avec threads = 1, les réductions matricielles sont faites dans un ordre
        fixe et les résultats sont reproductibles au bit près.

        Returns:
            threadpool_limits: Limite active ; gestionnaire de contexte qui la lève
        """
        return threadpool_limits(limits=self.threads)

    def to_dict(self):
        return _plain(asdict(self))

    def to_yaml(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True, allow_unicode=True)

    def write_effective(self, out_dir=None):
        """
        Écrit la configuration effective dans le répertoire de sortie.

        Returns:
            pathlib.Path: Chemin du fichier écrit

        Raises:
            DataError: Si l'écriture échoue
        """
        out_dir = Path(out_dir or self.out)
        path = out_dir / EFFECTIVE_CONFIG_NAME
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            path.write_text(self.to_yaml(), encoding="utf-8")
        except OSError as e:
            raise DataError(f"{path}: écriture impossible ({e})") from e
        return path


SECTIONS = {
    "data": DataSection,
    "corpus": CorpusConfig,
    "model": ModelSection,
    "train": TrainConfig,
    "finetune": FinetuneConfig,
    "forecast": ForecastSection,
    "eval": EvalSection,
    "synth": SyntheticSpec,
    "scaling": ScalingSection,
}
SCALARS = {"seed": int, "out": str, "threads": int}
SEEDED_SECTIONS = ("train", "finetune", "synth")
TUPLE_FIELDS = {"betas", "trainable"}


def _build_section(name, cls, values):
    if values is None:
        values = {}
    if not isinstance(values, dict):
        raise ConfigurationError(f"La section '{name}' doit être un dictionnaire")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigurationError(f"Clés inconnues dans la section '{name}': {', '.join(unknown)}")
    values = {
        k: tuple(v) if k in TUPLE_FIELDS and isinstance(v, list) else v
        for k, v in values.items()
    }
    try:
        return cls(**values)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"Section '{name}' invalide: {e}") from e


def read_config_file(path):
    """
    Lit un fichier YAML de configuration.

    Raises:
        ConfigurationError: Fichier absent, illisible ou qui n'est pas un dictionnaire
    """
    try:
        with open(path, encoding="utf-8") as fh:
            document = yaml.safe_load(fh) or {}
    except OSError as e:
        raise ConfigurationError(f"{path}: lecture de la configuration impossible ({e})") from e
    except yaml.YAMLError as e:
        raise ConfigurationError(f"{path}: YAML invalide ({e})") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"{path}: un dictionnaire de sections est attendu")
    return document


def build_run_config(document=None, seed=None, threads=None, out=None):
    """
    Construit la configuration à partir d'un document et des options globales.

    La graine maîtresse s'applique aux sections train, finetune et synth qui
    n'en précisent pas une ; l'option --seed l'emporte sur toutes.

    Args:
        document (dict, optional): Contenu du fichier YAML
        seed (int, optional): Option --seed
        threads (int, optional): Option --threads
        out (str, optional): Option --out

    Returns:
        RunConfig: Configuration effective

    Raises:
        ConfigurationError: Clé inconnue ou valeur invalide
    """
    document = dict(document or {})
    unknown = sorted(set(document) - set(SECTIONS) - set(SCALARS))
    if unknown:
        raise ConfigurationError(f"Sections inconnues dans la configuration: {', '.join(unknown)}")

    scalars = {}
    for name, kind in SCALARS.items():
        if document.get(name) is not None:
            try:
                scalars[name] = kind(document[name])
            except (TypeError, ValueError) as e:
                raise ConfigurationError(
                    f"Valeur invalide pour '{name}': {document[name]!r}"
                ) from e
    for name, value in (("seed", seed), ("threads", threads), ("out", out)):
        if value is not None:
            scalars[name] = value
    master_seed = scalars.get("seed", 0)

    sections = {}
    for name, cls in SECTIONS.items():
        values = dict(document.get(name) or {})
        if name in SEEDED_SECTIONS and (seed is not None or "seed" not in values):
            values["seed"] = master_seed
        sections[name] = _build_section(name, cls, values)

    config = RunConfig(**scalars, **sections)
    if config.threads < 1:
        raise ConfigurationError("--threads doit être >= 1")
    config.corpus = replace(config.corpus, threads=config.threads)
    return config


def load_run_config(path=None, seed=None, threads=None, out=None):
    """Lit le fichier (facultatif) puis applique les options globales."""
    document = read_config_file(path) if path else {}
    return build_run_config(document, seed=seed, threads=threads, out=out)
