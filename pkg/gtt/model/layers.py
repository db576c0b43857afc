"""
Couches du réseau : encodage positionnel, plongement des patchs, attention
multi-têtes et couche d'encodeur à double attention (temporelle puis entre canaux).
"""

import math
import numpy as np
from ..exceptions import ConfigurationError, DimensionError
from ..numerics import Tensor, gelu, layer_norm, softmax


def positional_encoding(n_positions, dim, dtype=np.float32):
    """
    Encodage positionnel sinusoïdal, constant.

    PE[pos, 2i] = sin(pos / 10000^(2i/D)), PE[pos, 2i+1] = cos(pos / 10000^(2i/D)).

    Args:
        n_positions (int): Nombre de positions M
        dim (int): Dimension D (paire)

    Returns:
        Tensor: Tableau [M × D] non suivi par le gradient

    Raises:
        ConfigurationError: Si D est impair
    """
    if dim % 2:
        raise ConfigurationError(f"L'encodage positionnel exige une dimension paire (reçu {dim})")
    pos = np.arange(n_positions, dtype=np.float64)[:, None]
    freq = np.power(10000.0, -np.arange(0, dim, 2, dtype=np.float64) / dim)
    pe = np.zeros((n_positions, dim), dtype=np.float64)
    pe[:, 0::2] = np.sin(pos * freq)
    pe[:, 1::2] = np.cos(pos * freq)
    return Tensor(pe.astype(dtype), dtype=dtype)


class LayerView:
    """Accès aux paramètres d'une couche par suffixe (ex: view["attn.w_q"])."""

    def __init__(self, params, index):
        self.params = params
        self.prefix = f"layers.{index}."

    def __getitem__(self, suffix):
        return self.params[self.prefix + suffix]


def linear(x, weight, bias):
    return x @ weight + bias


def patch_embed(x, params, config, use_positional=True):
    """
    Découpe chaque canal en patchs de P points et les projette en dimension D.

    Une convolution de noyau et de pas P est exactement une application
    linéaire par patch.

    Args:
        x (Tensor): Entrée [B × T × C]
        params (ModelParams): Paramètres (patch_embed.kernel, patch_embed.bias)
        config (ModelConfig): Configuration
        use_positional (bool): Ajoute l'encodage positionnel

    Returns:
        Tensor: Jetons [B·C × M × D]
    """
    if x.ndim != 3 or x.shape[1] != config.context_len:
        raise DimensionError(
            f"patch_embed: entrée [B × {config.context_len} × C] attendue, reçu {x.shape}"
        )
    B, T, C = x.shape
    patches = x.transpose(0, 2, 1).reshape(B * C, config.n_patches, config.patch_size)
    tokens = linear(patches, params["patch_embed.kernel"], params["patch_embed.bias"])
    if use_positional:
        tokens = tokens + positional_encoding(config.n_patches, config.embed_dim, dtype=x.dtype)
    return tokens


def mha(x, view, n_heads):
    """
    Auto-attention multi-têtes sans masque.

    Args:
        x (Tensor): Séquences [G × S × D]
        view (LayerView): Projections attn.{w,b}_{q,k,v,o} de la couche
        n_heads (int): Nombre de têtes

    Returns:
        Tensor: Sortie [G × S × D]
    """
    G, S, D = x.shape
    if D % n_heads:
        raise DimensionError(f"mha: D={D} non divisible par h={n_heads}")
    dh = D // n_heads

    def heads(t):
        return t.reshape(G, S, n_heads, dh).transpose(0, 2, 1, 3)

    q = heads(linear(x, view["attn.w_q"], view["attn.b_q"]))
    k = heads(linear(x, view["attn.w_k"], view["attn.b_k"]))
    v = heads(linear(x, view["attn.w_v"], view["attn.b_v"]))
    scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(dh))
    weights = softmax(scores, axis=-1)
    context = (weights @ v).transpose(0, 2, 1, 3).reshape(G, S, D)
    return linear(context, view["attn.w_o"], view["attn.b_o"])


def mlp(x, view):
    hidden = gelu(linear(x, view["mlp.w1"], view["mlp.b1"]))
    return linear(hidden, view["mlp.w2"], view["mlp.b2"])


def _norm(x, view, name):
    return layer_norm(x, view[f"{name}.gamma"], view[f"{name}.beta"])


def encoder_layer(z, view, batch_size, n_channels, n_heads):
    """
    Couche d'encodeur : attention temporelle, attention entre canaux (mêmes
    projections), puis MLP, chacune précédée d'une LayerNorm et suivie d'une
    connexion résiduelle.

    Args:
        z (Tensor): Jetons [B·C × M × D]
        view (LayerView): Paramètres de la couche
        batch_size (int): B
        n_channels (int): C
        n_heads (int): Nombre de têtes

    Returns:
        Tensor: Jetons [B·C × M × D]
    """
    BC, M, D = z.shape
    if BC != batch_size * n_channels:
        raise DimensionError(f"encoder_layer: {BC} groupes pour B={batch_size}, C={n_channels}")
    z = mha(_norm(z, view, "ln_t"), view, n_heads) + z
    # [B·C × M × D] -> [B·M × C × D]
    z = z.reshape(batch_size, n_channels, M, D).transpose(0, 2, 1, 3)
    z = z.reshape(batch_size * M, n_channels, D)
    z = mha(_norm(z, view, "ln_c"), view, n_heads) + z
    z = z.reshape(batch_size, M, n_channels, D).transpose(0, 2, 1, 3).reshape(BC, M, D)
    return mlp(_norm(z, view, "ln_mlp"), view) + z
