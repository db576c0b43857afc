"""
Opérations différentiables sur les tenseurs.

Chaque opération calcule sa sortie avec numpy puis, si une bande est active,
enregistre la fonction qui transforme le gradient de sortie en gradients
d'entrée. Les gradients d'un opérande diffusé sont sommés vers sa forme.
"""

import builtins
import math
import numpy as np
from scipy.special import ndtr
from ..exceptions import DimensionError
from .tensor import Tensor, record

LAYER_NORM_EPS = 1e-5
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def _as_tensor(value, like=None):
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype), dtype=dtype)


def _pair(a, b):
    like = a if isinstance(a, Tensor) else b
    return _as_tensor(a, like), _as_tensor(b, like)


def unbroadcast(grad, shape):
    """
    Somme un gradient diffusé pour le ramener à la forme de l'opérande.

    Args:
        grad (numpy.ndarray): Gradient de la sortie diffusée
        shape (tuple): Forme de l'opérande d'origine

    Returns:
        numpy.ndarray: Gradient de forme `shape`
    """
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, extent in enumerate(shape):
        if extent == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(a, b, op):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{op}: formes incompatibles {a.shape} et {b.shape}") from None


# Opérations élément par élément


def add(a, b):
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "add")
    out = Tensor(a.data + b.data)

    def _backward(g):
        return unbroadcast(g, a.shape), unbroadcast(g, b.shape)

    return record("add", out, (a, b), _backward)


def sub(a, b):
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "sub")
    out = Tensor(a.data - b.data)

    def _backward(g):
        return unbroadcast(g, a.shape), unbroadcast(-g, b.shape)

    return record("sub", out, (a, b), _backward)


def mul(a, b):
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "mul")
    out = Tensor(a.data * b.data)

    def _backward(g):
        return unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)

    return record("mul", out, (a, b), _backward)


def div(a, b):
    a, b = _pair(a, b)
    _broadcast_shape(a, b, "div")
    out = Tensor(a.data / b.data)

    def _backward(g):
        return (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        )

    return record("div", out, (a, b), _backward)


def neg(x):
    out = Tensor(-x.data)
    return record("neg", out, (x,), lambda g: (-g,))


def abs(x):
    out = Tensor(np.abs(x.data))
    return record("abs", out, (x,), lambda g: (g * np.sign(x.data),))


# Réductions


def _normalize_axes(axis, ndim):
    if axis is None:
        return tuple(range(ndim))
    axes = axis if isinstance(axis, (tuple, list)) else (axis,)
    normalized = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise DimensionError(f"Axe {ax} invalide pour un tenseur de rang {ndim}")
        normalized.append(ax % ndim)
    return tuple(sorted(normalized))


def sum(x, axis=None, keepdims=False):
    axes = _normalize_axes(axis, x.ndim)
    out = Tensor(np.sum(x.data, axis=axes, keepdims=keepdims))

    def _backward(g):
        if not keepdims:
            g = np.expand_dims(g, axes)
        return (np.broadcast_to(g, x.shape).copy(),)

    return record("sum", out, (x,), _backward)


def mean(x, axis=None, keepdims=False):
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[ax] for ax in axes])) if axes else 1
    return mul(sum(x, axis=axes, keepdims=keepdims), 1.0 / count)


# Algèbre linéaire


def matmul(a, b):
    """
    Produit matriciel avec dimensions de lot diffusables.

    Args:
        a (Tensor): Tenseur [..., m, k]
        b (Tensor): Tenseur [..., k, n]

    Returns:
        Tensor: Produit [..., m, n]

    Raises:
        DimensionError: Si les dimensions internes ou de lot sont incompatibles
    """
    a, b = _pair(a, b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError(f"matmul: formes incompatibles {a.shape} et {b.shape}")
    try:
        np.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except ValueError:
        raise DimensionError(
            f"matmul: dimensions de lot incompatibles {a.shape} et {b.shape}"
        ) from None
    out = Tensor(np.matmul(a.data, b.data))

    def _backward(g):
        grad_a = grad_b = None
        if a.requires_grad:
            grad_a = unbroadcast(np.matmul(g, np.swapaxes(b.data, -1, -2)), a.shape)
        if b.requires_grad:
            if b.ndim == 2:
                k, n = b.shape
                grad_b = a.data.reshape(-1, k).T @ g.reshape(-1, n)
            else:
                grad_b = unbroadcast(np.matmul(np.swapaxes(a.data, -1, -2), g), b.shape)
        return grad_a, grad_b

    return record("matmul", out, (a, b), _backward)


# Non-linéarités et normalisation


def softmax(x, axis=-1):
    """
    Softmax stabilisé par soustraction du maximum.

    Args:
        x (Tensor): Entrée
        axis (int): Axe de normalisation

    Returns:
        Tensor: Sorties positives sommant à 1 le long de `axis`
    """
    _normalize_axes(axis, x.ndim)
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    exps = np.exp(shifted)
    y = exps / np.sum(exps, axis=axis, keepdims=True)
    out = Tensor(y)

    def _backward(g):
        return (y * (g - np.sum(g * y, axis=axis, keepdims=True)),)

    return record("softmax", out, (x,), _backward)


def layer_norm(x, gamma, beta, eps=LAYER_NORM_EPS):
    """
    Normalisation par couche sur le dernier axe, suivie d'une transformation affine.

    Args:
        x (Tensor): Entrée [..., D]
        gamma (Tensor): Échelle [D]
        beta (Tensor): Décalage [D]
        eps (float): Terme ajouté à la variance

    Returns:
        Tensor: Sortie de même forme que x
    """
    width = x.shape[-1]
    if gamma.shape != (width,) or beta.shape != (width,):
        raise DimensionError(
            f"layer_norm: dernière dimension {width} "
            f"incompatible avec {gamma.shape} / {beta.shape}"
        )
    mu = np.mean(x.data, axis=-1, keepdims=True)
    centered = x.data - mu
    var = np.mean(centered * centered, axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv_std
    out = Tensor(x_hat * gamma.data + beta.data)

    def _backward(g):
        lead = tuple(range(g.ndim - 1))
        grad_gamma = np.sum(g * x_hat, axis=lead)
        grad_beta = np.sum(g, axis=lead)
        g_hat = g * gamma.data
        grad_x = inv_std * (
            g_hat
            - np.mean(g_hat, axis=-1, keepdims=True)
            - x_hat * np.mean(g_hat * x_hat, axis=-1, keepdims=True)
        )
        return grad_x, grad_gamma, grad_beta

    return record("layer_norm", out, (x, gamma, beta), _backward)


def gelu(x):
    """
    GELU exacte : x·Φ(x), Φ étant la fonction de répartition de la loi normale.

    Args:
        x (Tensor): Entrée

    Returns:
        Tensor: Sortie de même forme
    """
    cdf = ndtr(x.data).astype(x.dtype, copy=False)
    out = Tensor(x.data * cdf)

    def _backward(g):
        pdf = np.exp(-0.5 * x.data * x.data) * _INV_SQRT_2PI
        return (g * (cdf + x.data * pdf),)

    return record("gelu", out, (x,), _backward)


# Manipulations de forme


def reshape(x, shape):
    try:
        data = x.data.reshape(shape)
    except ValueError:
        raise DimensionError(
            f"reshape: impossible de passer de {x.shape} à {tuple(shape)}"
        ) from None
    out = Tensor(data)
    return record("reshape", out, (x,), lambda g: (g.reshape(x.shape),))


def transpose(x, axes=None):
    axes = tuple(reversed(range(x.ndim))) if axes is None else tuple(axes)
    if sorted(axes) != list(range(x.ndim)):
        raise DimensionError(f"transpose: permutation {axes} invalide pour la forme {x.shape}")
    inverse = tuple(int(i) for i in np.argsort(axes))
    out = Tensor(np.transpose(x.data, axes))
    return record("transpose", out, (x,), lambda g: (np.transpose(g, inverse),))


def _check_index(key, shape):
    if len(key) > len(shape):
        raise DimensionError(f"slice: {len(key)} indices pour un tenseur de forme {shape}")
    for k, extent in zip(key, shape):
        if isinstance(k, (int, np.integer)) and not isinstance(k, bool):
            if not -extent <= k < extent:
                raise DimensionError(f"slice: indice {k} hors bornes pour l'étendue {extent}")
        elif isinstance(k, builtins.slice):
            if k.step is not None and k.step <= 0:
                raise DimensionError("slice: seuls les pas positifs sont pris en charge")
            for bound in (k.start, k.stop):
                if bound is not None and not -extent <= bound <= extent:
                    raise DimensionError(
                        f"slice: borne {bound} hors bornes pour l'étendue {extent}"
                    )
        else:
            raise DimensionError(f"slice: indice non pris en charge {k!r}")


def slice(x, key):
    """
    Extraction d'une sous-région par indices entiers et tranches.

    Args:
        x (Tensor): Entrée
        key: Indice, tranche ou tuple d'indices/tranches

    Returns:
        Tensor: Sous-région (copie)
    """
    key = key if isinstance(key, tuple) else (key,)
    _check_index(key, x.shape)
    out = Tensor(x.data[key].copy())

    def _backward(g):
        full = np.zeros_like(x.data)
        full[key] += g
        return (full,)

    return record("slice", out, (x,), _backward)


def concat(tensors, axis=0):
    """
    Concatène des tenseurs le long d'un axe.

    Args:
        tensors (list[Tensor]): Tenseurs de même rang
        axis (int): Axe de concaténation

    Returns:
        Tensor: Concaténation
    """
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise DimensionError("concat: liste de tenseurs vide")
    ndim = tensors[0].ndim
    axis = _normalize_axes(axis, ndim)[0]
    for t in tensors[1:]:
        if t.ndim != ndim or any(
            t.shape[i] != tensors[0].shape[i] for i in range(ndim) if i != axis
        ):
            raise DimensionError(f"concat: formes incompatibles {tensors[0].shape} et {t.shape}")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=axis))
    splits = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def _backward(g):
        return tuple(np.split(g, splits, axis=axis))

    return record("concat", out, tuple(tensors), _backward)
