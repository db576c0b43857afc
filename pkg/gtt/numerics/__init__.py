"""
Arithmétique tensorielle dense et différentiation en mode inverse.
"""

from .tensor import DEFAULT_DTYPE, GradTape, Tensor, active_tape, backward
from . import ops
from .ops import (
    abs,
    add,
    concat,
    div,
    gelu,
    layer_norm,
    matmul,
    mean,
    mul,
    neg,
    reshape,
    slice,
    softmax,
    sub,
    sum,
    transpose,
)
from .gradcheck import GradCheckReport, grad_check, relative_error


def check_finite(tensor, name="tensor"):
    """Lève NonFiniteError si le tenseur contient NaN ou Inf."""
    return tensor.check_finite(name)


__all__ = [
    "DEFAULT_DTYPE",
    "GradTape",
    "GradCheckReport",
    "Tensor",
    "active_tape",
    "backward",
    "check_finite",
    "grad_check",
    "relative_error",
    "ops",
    "abs",
    "add",
    "concat",
    "div",
    "gelu",
    "layer_norm",
    "matmul",
    "mean",
    "mul",
    "neg",
    "reshape",
    "slice",
    "softmax",
    "sub",
    "sum",
    "transpose",
]
