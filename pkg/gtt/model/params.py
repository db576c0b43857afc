"""
Ensemble nommé des tableaux appris du modèle.

Noms : patch_embed.{kernel,bias}, layers.{l}.attn.{w_q,w_k,w_v,w_o,b_q,b_k,b_v,b_o}
(un seul jeu par couche, partagé par l'attention temporelle et l'attention
entre canaux), layers.{l}.{ln_t,ln_c,ln_mlp}.{gamma,beta},
layers.{l}.mlp.{w1,b1,w2,b2}, head.{weight,bias}.
"""

from collections import OrderedDict
import numpy as np
from scipy.stats import truncnorm
from ..exceptions import DimensionError
from ..numerics import DEFAULT_DTYPE, Tensor

INIT_STD = 0.02
HEAD_NAMES = ("head.bias", "head.weight")


def parameter_shapes(config):
    """
    Énumère les tableaux appris et leurs formes.

    Args:
        config (ModelConfig): Configuration

    Returns:
        OrderedDict: nom -> forme
    """
    P, D, F = config.patch_size, config.embed_dim, config.mlp_dim
    shapes = OrderedDict()
    shapes["patch_embed.kernel"] = (P, D)
    shapes["patch_embed.bias"] = (D,)
    for layer in range(config.n_layers):
        prefix = f"layers.{layer}"
        for proj in ("q", "k", "v", "o"):
            shapes[f"{prefix}.attn.w_{proj}"] = (D, D)
            shapes[f"{prefix}.attn.b_{proj}"] = (D,)
        for norm in ("ln_t", "ln_c", "ln_mlp"):
            shapes[f"{prefix}.{norm}.gamma"] = (D,)
            shapes[f"{prefix}.{norm}.beta"] = (D,)
        shapes[f"{prefix}.mlp.w1"] = (D, F)
        shapes[f"{prefix}.mlp.b1"] = (F,)
        shapes[f"{prefix}.mlp.w2"] = (F, D)
        shapes[f"{prefix}.mlp.b2"] = (D,)
    shapes["head.weight"] = (D, P)
    shapes["head.bias"] = (P,)
    return shapes


def param_count(config):
    """Nombre exact de scalaires appris."""
    return int(sum(np.prod(shape) for shape in parameter_shapes(config).values()))


def is_layer_norm(name):
    return ".ln_" in name


def is_bias(name):
    leaf = name.rsplit(".", 1)[-1]
    return leaf == "bias" or leaf.startswith("b_") or leaf in ("b1", "b2")


def is_decayed(name):
    """La décroissance des poids s'applique à tout sauf aux biais et aux LayerNorm."""
    return not (is_bias(name) or is_layer_norm(name))


class ModelParams:
    """
    Tableaux appris du modèle, indexés par nom (ordre trié).

    Attributs :
        tensors (dict) : nom -> Tensor
    """

    def __init__(self, tensors):
        self.tensors = dict(sorted(tensors.items()))

    @classmethod
    def init_params(cls, config, rng, dtype=DEFAULT_DTYPE):
        """
        Initialise les paramètres : normale tronquée (±2σ, σ = 0.02) pour les
        matrices, zéros pour les biais, gamma = 1 et beta = 0 pour les LayerNorm.

        Args:
            config (ModelConfig): Configuration
            rng (numpy.random.Generator): Générateur du sous-flux "init"
            dtype: Précision (float32 à l'entraînement, float64 pour les vérifications)

        Returns:
            ModelParams: Paramètres suivis par le gradient
        """
        tensors = {}
        for name, shape in parameter_shapes(config).items():
            if is_layer_norm(name):
                data = np.ones(shape) if name.endswith("gamma") else np.zeros(shape)
            elif is_bias(name):
                data = np.zeros(shape)
            else:
                data = truncnorm.rvs(
                    -2.0, 2.0, loc=0.0, scale=INIT_STD, size=shape, random_state=rng
                )
            tensors[name] = Tensor(np.asarray(data, dtype=dtype), requires_grad=True, dtype=dtype)
        return cls(tensors)

    @classmethod
    def from_arrays(cls, arrays, config=None, requires_grad=True):
        """
        Construit les paramètres à partir de tableaux numpy.

        Raises:
            DimensionError: Si un tableau manque ou a une forme inattendue
        """
        if config is not None:
            expected = parameter_shapes(config)
            missing = set(expected) - set(arrays)
            extra = set(arrays) - set(expected)
            if missing or extra:
                raise DimensionError(
                    f"Paramètres manquants {sorted(missing)} ou inattendus {sorted(extra)}"
                )
            for name, shape in expected.items():
                if tuple(arrays[name].shape) != tuple(shape):
                    raise DimensionError(f"{name}: forme {arrays[name].shape}, attendue {shape}")
        return cls(
            {
                name: Tensor(
                    np.array(value), requires_grad=requires_grad, dtype=np.asarray(value).dtype
                )
                for name, value in arrays.items()
            }
        )

    def to_arrays(self):
        """Copie des valeurs : nom -> numpy.ndarray."""
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def astype(self, dtype):
        """Copie des paramètres dans une autre précision."""
        return ModelParams(
            {
                name: Tensor(t.data.astype(dtype), requires_grad=t.requires_grad, dtype=dtype)
                for name, t in self.tensors.items()
            }
        )

    def __getitem__(self, name):
        return self.tensors[name]

    def __contains__(self, name):
        return name in self.tensors

    def __iter__(self):
        return iter(self.tensors)

    def __len__(self):
        return len(self.tensors)

    def items(self):
        return self.tensors.items()

    def names(self):
        return list(self.tensors)

    def trainable(self):
        """Paramètres suivis par le gradient, dans l'ordre trié."""
        return [(name, t) for name, t in self.tensors.items() if t.requires_grad]

    def zero_grad(self):
        for t in self.tensors.values():
            t.zero_grad()

    def set_trainable(self, names):
        """
        Restreint le suivi du gradient aux paramètres nommés.

        Args:
            names (iterable[str]): Paramètres à entraîner ; les autres sont gelés
        """
        names = set(names)
        for name, t in self.tensors.items():
            t.requires_grad = name in names
            t.grad = np.zeros_like(t.data) if t.requires_grad else None

    def count(self):
        return int(sum(t.size for t in self.tensors.values()))
