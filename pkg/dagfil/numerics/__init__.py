"""Differentiable tensor core and optimizer."""

from .tensor import (
    Tensor,
    Parameter,
    tensor,
    add,
    sub,
    mul,
    matmul,
    tanh,
    relu,
    sum,
    mean,
    squared_error,
    concat,
    backward,
)
from .optim import Adam, AdamState, adam_step
from .gradcheck import GradCheckResult, check_gradients, numerical_gradient

__all__ = [
    "Tensor",
    "Parameter",
    "tensor",
    "add",
    "sub",
    "mul",
    "matmul",
    "tanh",
    "relu",
    "sum",
    "mean",
    "squared_error",
    "concat",
    "backward",
    "Adam",
    "AdamState",
    "adam_step",
    "GradCheckResult",
    "check_gradients",
    "numerical_gradient",
]
