"""
Tensor: Minimal reverse-mode differentiable array.

Every value that flows through the models, losses and combiners is a
``Tensor``: a float64 numpy array plus, when any input requires gradients,
a link to the tape node that produced it. ``backward`` sweeps the tape in
reverse topological order and accumulates gradients into leaf tensors.

Broadcasting is limited to scalar-vs-tensor; everything else must match
shape exactly.
"""

from typing import Callable, List, Optional, Sequence, Tuple, Union
import logging

import numpy as np

from ..core.errors import ContractError, NumericError, ShapeError

logger = logging.getLogger(__name__)

ArrayLike = Union[float, int, Sequence, np.ndarray]
Operand = Union["Tensor", float, int]
BackwardFn = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]


class Tensor:
    """
    Dense float64 array with gradient-tape participation.

    Data is read-only after construction. Leaves created with
    ``requires_grad=True`` receive ``grad`` after ``backward``.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward", "op")

    def __init__(self, data: ArrayLike, requires_grad: bool = False):
        array = np.array(data, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise NumericError("non-finite value in tensor data", op="tensor")
        array.flags.writeable = False
        self.data = array
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardFn] = None
        self.op = "leaf"

    @classmethod
    def _from_op(
        cls,
        data: np.ndarray,
        op: str,
        parents: Tuple["Tensor", ...],
        backward_fn: BackwardFn,
    ) -> "Tensor":
        """Wrap an op result, recording it on the tape when needed."""
        if not np.all(np.isfinite(data)):
            raise NumericError("non-finite output", op=op)
        out = cls.__new__(cls)
        data = np.asarray(data, dtype=np.float64)
        data.flags.writeable = False
        out.data = data
        out.grad = None
        out.op = op
        if any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward_fn
        else:
            out.requires_grad = False
            out._parents = ()
            out._backward = None
        return out

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def is_leaf(self) -> bool:
        return not self._parents

    def numpy(self) -> np.ndarray:
        """Return a writable copy of the data."""
        return np.array(self.data)

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError("item() needs a single-element tensor", [self.shape])
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        """Same data, off the tape."""
        out = Tensor.__new__(Tensor)
        out.data = self.data
        out.requires_grad = False
        out.grad = None
        out._parents = ()
        out._backward = None
        out.op = "detach"
        return out

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self.op}{flag})"

    def __add__(self, other: Operand) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: Operand) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: Operand) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: Operand) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: Operand) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: Operand) -> "Tensor":
        return mul(other, self)

    def __neg__(self) -> "Tensor":
        return mul(self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        return matmul(self, other)


class Parameter(Tensor):
    """Trainable leaf tensor; only optimizers and checkpoint loading reassign it."""

    __slots__ = ("name",)

    def __init__(self, data: ArrayLike, name: str):
        super().__init__(data, requires_grad=True)
        self.name = name

    def assign(self, data: np.ndarray) -> None:
        """Replace the parameter values, keeping shape."""
        array = np.array(data, dtype=np.float64)
        if array.shape != self.data.shape:
            raise ShapeError(f"cannot assign to parameter {self.name}", [self.data.shape, array.shape])
        if not np.all(np.isfinite(array)):
            raise NumericError(f"non-finite update for {self.name}", op="assign")
        array.flags.writeable = False
        self.data = array

    def __repr__(self) -> str:
        return f"Parameter(name={self.name}, shape={self.shape})"


def tensor(data: ArrayLike, requires_grad: bool = False) -> Tensor:
    """Build a tensor from array-like data."""
    return Tensor(data, requires_grad=requires_grad)


def _as_tensor(value: Operand) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _check_elementwise(op: str, a: Tensor, b: Tensor) -> None:
    if a.shape != b.shape and a.data.ndim != 0 and b.data.ndim != 0:
        raise ShapeError(f"{op}: operands must have equal shapes or one must be scalar", [a.shape, b.shape])


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Reduce a gradient back to a scalar operand's shape."""
    if shape == grad.shape:
        return grad
    return np.asarray(grad.sum()).reshape(shape)


def add(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("add", a, b)

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return Tensor._from_op(a.data + b.data, "add", (a, b), backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("sub", a, b)

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return Tensor._from_op(a.data - b.data, "sub", (a, b), backward)


def mul(a: Operand, b: Operand) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    _check_elementwise("mul", a, b)

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return _unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)

    return Tensor._from_op(a.data * b.data, "mul", (a, b), backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2:
        raise ShapeError("matmul: operands must be 2-D", [a.shape, b.shape])
    if a.shape[1] != b.shape[0]:
        raise ShapeError("matmul: inner dimensions differ", [a.shape, b.shape])

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return g @ b.data.T, a.data.T @ g

    return Tensor._from_op(a.data @ b.data, "matmul", (a, b), backward)


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.data)

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return (g * (1.0 - y * y),)

    return Tensor._from_op(y, "tanh", (x,), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0.0

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return (g * mask,)

    return Tensor._from_op(np.where(mask, x.data, 0.0), "relu", (x,), backward)


def sum(x: Tensor, axis: Optional[int] = None) -> Tensor:  # noqa: A001
    """Sum over all elements, or over one axis."""
    if axis is not None and not -x.data.ndim <= axis < x.data.ndim:
        raise ShapeError(f"sum: axis {axis} out of range", [x.shape])

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        if axis is None:
            return (np.full(x.shape, float(g)),)
        return (np.broadcast_to(np.expand_dims(g, axis), x.shape).copy(),)

    return Tensor._from_op(np.sum(x.data, axis=axis), "sum", (x,), backward)


def mean(x: Tensor, axis: Optional[int] = None) -> Tensor:
    """Mean over all elements, or over one axis."""
    if x.size == 0:
        raise ShapeError("mean of an empty tensor", [x.shape])
    count = x.size if axis is None else x.shape[axis]
    return mul(sum(x, axis=axis), 1.0 / count)


def squared_error(pred: Tensor, target: Operand) -> Tensor:
    """Sum of squared differences over the last axis."""
    target = _as_tensor(target)
    if pred.shape != target.shape:
        raise ShapeError("squared_error: operands must have equal shapes", [pred.shape, target.shape])
    if pred.data.ndim == 0:
        raise ShapeError("squared_error needs at least one axis", [pred.shape])
    diff = pred.data - target.data

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        grad = 2.0 * np.expand_dims(g, -1) * diff
        return grad, -grad

    return Tensor._from_op(np.sum(diff * diff, axis=-1), "squared_error", (pred, target), backward)


def concat(tensors: Sequence[Tensor]) -> Tensor:
    """Concatenate along the last axis."""
    if not tensors:
        raise ContractError("concat needs at least one tensor")
    lead = tensors[0].shape[:-1]
    for t in tensors:
        if t.data.ndim == 0 or t.shape[:-1] != lead:
            raise ShapeError("concat: leading dimensions differ", [x.shape for x in tensors])
    bounds = np.cumsum([t.shape[-1] for t in tensors])[:-1]

    def backward(g: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        return tuple(np.split(g, bounds, axis=-1))

    data = np.concatenate([t.data for t in tensors], axis=-1)
    return Tensor._from_op(data, "concat", tuple(tensors), backward)


def _topological_order(root: Tensor) -> List[Tensor]:
    """Nodes reachable from root, parents before children."""
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> None:
    """
    Accumulate dLoss/dLeaf into every requires_grad leaf and consume the tape.

    Raises:
        ContractError: loss is not a scalar or is not on the tape
    """
    if loss.data.ndim != 0:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        raise ContractError("loss does not depend on any tensor requiring gradients")

    order = _topological_order(loss)
    grads = {id(loss): np.ones((), dtype=np.float64)}

    for node in reversed(order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            if node.requires_grad:
                node.grad = np.array(g) if node.grad is None else node.grad + g
            continue
        parent_grads = node._backward(g)
        for parent, pg in zip(node._parents, parent_grads):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            grads[key] = pg if key not in grads else grads[key] + pg

    for node in order:
        if not node.is_leaf:
            node._parents = ()
            node._backward = None
