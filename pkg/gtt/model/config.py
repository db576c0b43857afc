"""
Hyperparamètres d'architecture et préréglages du modèle.
"""

from dataclasses import asdict, dataclass
from ..exceptions import ConfigurationError


@dataclass(frozen=True)
class ModelConfig:
    """
    Configuration du modèle.

    Attributs :
        n_layers (int) : Nombre de couches d'encodeur N
        embed_dim (int) : Dimension des jetons D
        n_heads (int) : Nombre de têtes d'attention h
        mlp_dim (int) : Dimension cachée du MLP F
        patch_size (int) : Longueur d'un patch P
        context_len (int) : Longueur du contexte T
        max_channels (int) : Nombre de canaux d'un échantillon C
    """

    n_layers: int
    embed_dim: int
    n_heads: int
    mlp_dim: int
    patch_size: int = 64
    context_len: int = 1024
    max_channels: int = 32

    @property
    def n_patches(self):
        return self.context_len // self.patch_size

    @property
    def head_dim(self):
        return self.embed_dim // self.n_heads

    def validate(self):
        """
        Vérifie la cohérence des dimensions.

        Raises:
            ConfigurationError: Si D n'est pas divisible par h, D impair ou T non multiple de P
        """
        sizes = ("n_layers", "embed_dim", "n_heads", "mlp_dim", "patch_size")
        for name in sizes + ("context_len", "max_channels"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} doit être strictement positif")
        if self.embed_dim % self.n_heads:
            raise ConfigurationError(
                f"embed_dim={self.embed_dim} n'est pas divisible par n_heads={self.n_heads}"
            )
        if self.embed_dim % 2:
            raise ConfigurationError(
                f"embed_dim={self.embed_dim} doit être pair (encodage positionnel)"
            )
        if self.context_len % self.patch_size:
            raise ConfigurationError(
                f"context_len={self.context_len} "
                f"n'est pas un multiple de patch_size={self.patch_size}"
            )
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data).validate()
        except TypeError as e:
            raise ConfigurationError(f"Configuration de modèle invalide: {e}") from e


PRESETS = {
    "tiny": ModelConfig(n_layers=4, embed_dim=384, n_heads=6, mlp_dim=1536),
    "small": ModelConfig(n_layers=6, embed_dim=512, n_heads=8, mlp_dim=2048),
    "large": ModelConfig(n_layers=8, embed_dim=768, n_heads=12, mlp_dim=3072),
    "micro": ModelConfig(n_layers=2, embed_dim=64, n_heads=4, mlp_dim=256),
    "micro-wide": ModelConfig(n_layers=2, embed_dim=128, n_heads=4, mlp_dim=512),
}


def get_preset(name):
    """
    Retourne la configuration d'un préréglage.

    Args:
        name (str): tiny, small, large, micro ou micro-wide

    Returns:
        ModelConfig: Configuration

    Raises:
        ConfigurationError: Préréglage inconnu
    """
    try:
        return PRESETS[name.lower()]
    except KeyError:
        raise ConfigurationError(
            f"Préréglage de modèle inconnu '{name}' (choix: {', '.join(PRESETS)})"
        ) from None
