"""
Tenseur dense et bande d'enregistrement pour la différentiation automatique.

Un Tensor enveloppe un tableau numpy. Les opérations exécutées pendant qu'une
GradTape est active, et dont au moins une entrée suit le gradient, sont
enregistrées dans l'ordre d'exécution ; backward() rejoue la bande à l'envers.
"""

import threading
from dataclasses import dataclass
from typing import Callable, Optional, Sequence
import numpy as np
from ..exceptions import DimensionError, NonFiniteError, TapeError

# Précision d'entraînement ; les vérifications de gradient utilisent float64
DEFAULT_DTYPE = np.float32

_local = threading.local()


def _tape_stack():
    if not hasattr(_local, "stack"):
        _local.stack = []
    return _local.stack


def active_tape():
    """
    Retourne la bande active du fil d'exécution courant.

    Returns:
        GradTape | None: Bande active, ou None hors de tout bloc `with GradTape()`
    """
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """
    Tableau dense de réels, éventuellement suivi par la différentiation.

    Attributs :
        data (numpy.ndarray) : Valeurs, en ordre ligne par ligne
        requires_grad (bool) : Le tenseur participe à la différentiation
        grad (numpy.ndarray | None) : Gradient accumulé (feuilles uniquement)
    """

    def __init__(self, data, requires_grad=False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            kind = getattr(data, "dtype", None)
            dtype = data.dtype if kind is not None and kind.kind == "f" else DEFAULT_DTYPE
        self.data = np.asarray(data, dtype=dtype)
        self.requires_grad = bool(requires_grad)
        self.is_leaf = True
        self.grad = np.zeros_like(self.data) if self.requires_grad else None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self):
        return self.data.size

    def numpy(self):
        """Copie des valeurs sous forme de tableau numpy."""
        return self.data.copy()

    def item(self):
        return self.data.item()

    def detach(self):
        """Nouveau tenseur partageant les valeurs, hors différentiation."""
        return Tensor(self.data, dtype=self.data.dtype)

    def zero_grad(self):
        """Remet le gradient accumulé à zéro."""
        if self.grad is not None:
            self.grad.fill(0)

    def check_finite(self, name="tensor"):
        """
        Vérifie que toutes les valeurs sont finies.

        Args:
            name (str): Nom utilisé dans le message d'erreur

        Raises:
            NonFiniteError: Si une valeur NaN ou infinie est présente
        """
        if not np.all(np.isfinite(self.data)):
            bad = int(np.size(self.data) - np.count_nonzero(np.isfinite(self.data)))
            raise NonFiniteError(
                f"{name}: {bad} valeur(s) non finie(s) dans un tenseur {self.shape}"
            )
        return self

    def __repr__(self):
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad})"

    # Opérateurs, délégués au module ops
    def __add__(self, other):
        return ops.add(self, other)

    def __radd__(self, other):
        return ops.add(other, self)

    def __sub__(self, other):
        return ops.sub(self, other)

    def __rsub__(self, other):
        return ops.sub(other, self)

    def __mul__(self, other):
        return ops.mul(self, other)

    def __rmul__(self, other):
        return ops.mul(other, self)

    def __truediv__(self, other):
        return ops.div(self, other)

    def __neg__(self):
        return ops.neg(self)

    def __matmul__(self, other):
        return ops.matmul(self, other)

    def __getitem__(self, key):
        return ops.slice(self, key)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return ops.reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return ops.transpose(self, axes or None)

    def sum(self, axis=None, keepdims=False):
        return ops.sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return ops.mean(self, axis=axis, keepdims=keepdims)

    def abs(self):
        return ops.abs(self)


@dataclass
class TapeEntry:
    """Une opération enregistrée : sortie, entrées et fonction de rétropropagation."""

    op: str
    output: Tensor
    inputs: tuple
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class GradTape:
    """
    Bande d'enregistrement des opérations différentiables.

    S'utilise comme gestionnaire de contexte ; une bande n'est jamais partagée
    entre deux passes concurrentes (la pile des bandes est propre à chaque fil).
    """

    def __init__(self):
        self.entries = []
        self._produced = set()

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()
        return False

    def __len__(self):
        return len(self.entries)

    def __contains__(self, tensor):
        return id(tensor) in self._produced

    def record(self, op, output, inputs, backward_fn):
        """
        Ajoute une opération à la bande.

        Args:
            op (str): Nom de l'opération
            output (Tensor): Tenseur produit
            inputs (tuple): Tenseurs d'entrée
            backward_fn (callable): Gradient de sortie -> gradients des entrées
        """
        self.entries.append(TapeEntry(op, output, tuple(inputs), backward_fn))
        self._produced.add(id(output))


def record(op, output, inputs, backward_fn):
    """
    Enregistre une opération si une bande est active et si une entrée suit le gradient.

    Args:
        op (str): Nom de l'opération
        output (Tensor): Tenseur produit (modifié sur place)
        inputs (tuple): Tenseurs d'entrée
        backward_fn (callable): Fonction de rétropropagation

    Returns:
        Tensor: Le tenseur de sortie
    """
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        output.requires_grad = True
        output.is_leaf = False
        tape.record(op, output, inputs, backward_fn)
    return output


def backward(loss, tape):
    """
    Rétropropage le gradient d'une perte scalaire à travers la bande.

    Les gradients des feuilles sont accumulés (ajoutés) : deux appels successifs
    sans remise à zéro additionnent leurs contributions.

    Args:
        loss (Tensor): Perte scalaire produite sous la bande
        tape (GradTape): Bande ayant enregistré la passe avant

    Raises:
        DimensionError: Si la perte n'est pas scalaire
        TapeError: Si la perte n'a pas été produite sous cette bande
    """
    if loss.size != 1:
        raise DimensionError(f"La perte doit être scalaire, forme reçue {loss.shape}")
    if loss not in tape:
        raise TapeError("La perte n'a pas été enregistrée sur cette bande")

    grads = {id(loss): np.ones_like(loss.data)}
    for entry in reversed(tape.entries):
        grad_out = grads.pop(id(entry.output), None)
        if grad_out is None:
            continue
        input_grads = entry.backward(grad_out)
        for tensor, grad in zip(entry.inputs, input_grads):
            if grad is None or not tensor.requires_grad:
                continue
            if tensor.is_leaf:
                tensor.grad += grad.astype(tensor.grad.dtype, copy=False)
            elif id(tensor) in grads:
                grads[id(tensor)] = grads[id(tensor)] + grad
            else:
                grads[id(tensor)] = grad


from . import ops  # noqa: E402
