"""Dense float64 tensors with reverse-mode automatic differentiation.

Tensors are C-ordered ``numpy.float64`` arrays. A :class:`Graph` is an
explicit tape of operation records in topological order; ``forward`` caches
every intermediate value and ``backward`` sweeps the tape once to produce
the gradient of a scalar output with respect to every parameter.

The differentiable op set is deliberately closed: matmul, add (with
broadcast over leading axes only), scalar multiplication, tanh, relu,
mean-squared-error, mean, and concatenation along the trailing axis.
Backward rules stay small enough to audit by hand and to verify against
central finite differences (:func:`grad_check`).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Graph",
    "GraphError",
    "NonFiniteError",
    "GradCheckReport",
    "as_tensor",
    "forward",
    "backward",
    "grad_check",
]


class GraphError(ValueError):
    """Structural problem in a graph: bad shapes, unknown nodes, misuse."""


class NonFiniteError(ArithmeticError):
    """A forward pass produced NaN or Inf."""


def as_tensor(data) -> np.ndarray:
    """Coerce to a C-ordered float64 array."""
    return np.ascontiguousarray(data, dtype=np.float64)


@dataclass
class Node:
    op: str
    inputs: tuple[int, ...]
    shape: tuple[int, ...]
    name: str | None = None
    factor: float | None = None


def _describe(i: int, node: Node) -> str:
    label = f" '{node.name}'" if node.name else ""
    return f"node {i} ({node.op}{label})"


class Graph:
    """Tape of operations over named inputs and parameters.

    Build the tape once with the op methods (each returns a node id), mark
    the output with :meth:`set_output`, then run :func:`forward` /
    :func:`backward`. Parameter values live in ``graph.params`` and may be
    replaced between forward passes; the tape structure is immutable once
    built. A graph is single-owner during forward/backward because the
    value cache is mutable.
    """

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self.params: dict[str, np.ndarray] = {}
        self.input_ids: dict[str, int] = {}
        self.param_ids: dict[str, int] = {}
        self.output_id: int | None = None
        self._values: list[np.ndarray] | None = None
        self._consts: dict[int, np.ndarray] = {}

    # -- leaves ---------------------------------------------------------

    def input(self, name: str, shape: tuple[int, ...]) -> int:
        if name in self.input_ids:
            raise GraphError(f"duplicate input name '{name}'")
        nid = self._push(Node("input", (), tuple(int(s) for s in shape), name=name))
        self.input_ids[name] = nid
        return nid

    def param(self, name: str, value) -> int:
        if name in self.param_ids:
            raise GraphError(f"duplicate parameter name '{name}'")
        arr = as_tensor(value)
        nid = self._push(Node("param", (), arr.shape, name=name))
        self.param_ids[name] = nid
        self.params[name] = arr
        return nid

    def constant(self, value) -> int:
        arr = as_tensor(value)
        nid = self._push(Node("const", (), arr.shape))
        self._consts[nid] = arr
        return nid

    # -- ops ------------------------------------------------------------

    def matmul(self, a: int, b: int) -> int:
        sa, sb = self._shape(a), self._shape(b)
        if len(sa) != 2 or len(sb) != 2:
            raise GraphError(f"matmul needs 2-D operands, got {sa} @ {sb}")
        if sa[1] != sb[0]:
            raise GraphError(f"matmul inner dims differ: {sa} @ {sb}")
        return self._push(Node("matmul", (a, b), (sa[0], sb[1])))

    def add(self, a: int, b: int) -> int:
        sa, sb = self._shape(a), self._shape(b)
        out = _broadcast_shape(sa, sb)
        if out is None:
            raise GraphError(
                f"add shapes {sa} and {sb} neither match nor broadcast on leading axes"
            )
        return self._push(Node("add", (a, b), out))

    def scale(self, a: int, factor: float) -> int:
        return self._push(Node("scale", (a,), self._shape(a), factor=float(factor)))

    def tanh(self, a: int) -> int:
        return self._push(Node("tanh", (a,), self._shape(a)))

    def relu(self, a: int) -> int:
        return self._push(Node("relu", (a,), self._shape(a)))

    def mse(self, a: int, b: int) -> int:
        sa, sb = self._shape(a), self._shape(b)
        if sa != sb:
            raise GraphError(f"mse operand shapes differ: {sa} vs {sb}")
        return self._push(Node("mse", (a, b), ()))

    def mean(self, a: int) -> int:
        return self._push(Node("mean", (a,), ()))

    def concat(self, a: int, b: int) -> int:
        sa, sb = self._shape(a), self._shape(b)
        if len(sa) != len(sb) or len(sa) < 1 or sa[:-1] != sb[:-1]:
            raise GraphError(f"concat needs equal shapes up to the last axis: {sa} vs {sb}")
        return self._push(Node("concat", (a, b), sa[:-1] + (sa[-1] + sb[-1],)))

    # -- bookkeeping ----------------------------------------------------

    def set_output(self, node: int) -> None:
        self._check_id(node)
        self.output_id = node

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        """Replace parameter values (shapes must match the registered ones)."""
        for name in self.param_ids:
            arr = as_tensor(params[name])
            if arr.shape != self.params[name].shape:
                raise GraphError(
                    f"parameter '{name}' shape {arr.shape} != registered {self.params[name].shape}"
                )
            self.params[name] = arr

    def value(self, node: int) -> np.ndarray:
        """Cached forward value of a node (forward must have run)."""
        if self._values is None:
            raise GraphError("forward has not been run")
        return self._values[node]

    def _push(self, node: Node) -> int:
        self.nodes.append(node)
        self._values = None
        return len(self.nodes) - 1

    def _shape(self, node: int) -> tuple[int, ...]:
        self._check_id(node)
        return self.nodes[node].shape

    def _check_id(self, node: int) -> None:
        if not 0 <= node < len(self.nodes):
            raise GraphError(f"unknown node id {node}")


def _broadcast_shape(sa: tuple[int, ...], sb: tuple[int, ...]) -> tuple[int, ...] | None:
    """Equal shapes, or one operand equals the other's trailing axes."""
    if sa == sb:
        return sa
    if len(sb) < len(sa) and sa[len(sa) - len(sb):] == sb:
        return sa
    if len(sa) < len(sb) and sb[len(sb) - len(sa):] == sa:
        return sb
    return None


def _sum_to_shape(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    for _ in range(grad.ndim - len(shape)):
        grad = grad.sum(axis=0)
    return grad


def forward(graph: Graph, bindings: dict[str, np.ndarray]) -> np.ndarray:
    """Evaluate the tape under the given input bindings.

    Returns the output node's value; all intermediates are cached on the
    graph for :func:`backward`. Raises :class:`GraphError` on missing or
    mis-shaped bindings and :class:`NonFiniteError` if any node value
    contains NaN/Inf.
    """
    if graph.output_id is None:
        raise GraphError("graph has no output node")
    missing = set(graph.input_ids) - set(bindings)
    if missing:
        raise GraphError(f"bindings missing inputs: {sorted(missing)}")

    values: list[np.ndarray] = [None] * len(graph.nodes)  # type: ignore[list-item]
    for i, node in enumerate(graph.nodes):
        if node.op == "input":
            v = as_tensor(bindings[node.name])
            if v.shape != node.shape:
                raise GraphError(
                    f"binding for {_describe(i, node)} has shape {v.shape}, expected {node.shape}"
                )
        elif node.op == "param":
            v = graph.params[node.name]
        elif node.op == "const":
            v = graph._consts[i]
        else:
            ins = [values[j] for j in node.inputs]
            # overflow/invalid surface as the typed non-finite error below
            with np.errstate(over="ignore", invalid="ignore"):
                if node.op == "matmul":
                    v = ins[0] @ ins[1]
                elif node.op == "add":
                    v = ins[0] + ins[1]
                elif node.op == "scale":
                    v = node.factor * ins[0]
                elif node.op == "tanh":
                    v = np.tanh(ins[0])
                elif node.op == "relu":
                    v = np.maximum(ins[0], 0.0)
                elif node.op == "mse":
                    d = ins[0] - ins[1]
                    v = np.mean(d * d)
                elif node.op == "mean":
                    v = np.mean(ins[0])
                else:  # concat
                    v = np.concatenate(ins, axis=-1)
        v = np.asarray(v, dtype=np.float64)
        if not np.isfinite(v).all():
            raise NonFiniteError(f"non-finite value at {_describe(i, node)}")
        values[i] = v
    graph._values = values
    return values[graph.output_id]


def backward(graph: Graph) -> dict[str, np.ndarray]:
    """Gradient of the scalar output w.r.t. every parameter.

    Parameters that do not reach the output get zero gradients.
    """
    if graph._values is None:
        raise GraphError("backward requires a prior forward pass")
    out_id = graph.output_id
    assert out_id is not None
    if graph.nodes[out_id].shape != ():
        raise GraphError(
            f"backward needs a scalar output, got shape {graph.nodes[out_id].shape}"
        )

    values = graph._values
    adj: list[np.ndarray | None] = [None] * len(graph.nodes)
    adj[out_id] = np.array(1.0)

    def accumulate(node: int, grad: np.ndarray) -> None:
        grad = _sum_to_shape(grad, graph.nodes[node].shape)
        if adj[node] is None:
            adj[node] = grad.copy() if grad.base is not None else grad
        else:
            adj[node] = adj[node] + grad

    for i in range(out_id, -1, -1):
        g = adj[i]
        if g is None:
            continue
        node = graph.nodes[i]
        if node.op in ("input", "param", "const"):
            continue
        ins = node.inputs
        if node.op == "matmul":
            a, b = values[ins[0]], values[ins[1]]
            accumulate(ins[0], g @ b.T)
            accumulate(ins[1], a.T @ g)
        elif node.op == "add":
            accumulate(ins[0], g)
            accumulate(ins[1], g)
        elif node.op == "scale":
            accumulate(ins[0], node.factor * g)
        elif node.op == "tanh":
            y = values[i]
            accumulate(ins[0], (1.0 - y * y) * g)
        elif node.op == "relu":
            accumulate(ins[0], (values[ins[0]] > 0.0) * g)
        elif node.op == "mse":
            a, b = values[ins[0]], values[ins[1]]
            d = (2.0 / a.size) * (a - b) * g
            accumulate(ins[0], d)
            accumulate(ins[1], -d)
        elif node.op == "mean":
            a = values[ins[0]]
            accumulate(ins[0], np.full(a.shape, float(g) / a.size))
        else:  # concat
            wa = graph.nodes[ins[0]].shape[-1]
            accumulate(ins[0], g[..., :wa])
            accumulate(ins[1], g[..., wa:])

    grads: dict[str, np.ndarray] = {}
    for name, nid in graph.param_ids.items():
        g = adj[nid]
        grads[name] = np.zeros_like(graph.params[name]) if g is None else np.asarray(g)
    return grads


@dataclass
class GradCheckReport:
    """Outcome of an analytic-vs-finite-difference gradient comparison."""

    per_param: dict[str, float]
    max_rel_error: float
    failed: tuple[str, ...]
    passed: bool
    h: float
    tol: float

    def __str__(self) -> str:
        status = "PASS" if self.passed else "FAIL: " + ", ".join(self.failed)
        return f"grad_check max_rel_error={self.max_rel_error:.3e} tol={self.tol:.1e} [{status}]"


def grad_check(
    graph: Graph,
    bindings: dict[str, np.ndarray],
    h: float = 1e-5,
    tol: float = 1e-5,
    grads: dict[str, np.ndarray] | None = None,
) -> GradCheckReport:
    """Compare gradients against central differences, entry by entry.

    ``grads`` defaults to a fresh :func:`backward` run; pass explicit
    gradients to audit an external computation. Relative error is
    ``|a - b| / max(|a|, |b|, 1e-8)`` with the finite-difference value
    ``(f(x+h) - f(x-h)) / (2h)``.
    """
    if h <= 0:
        raise GraphError("grad_check step size must be positive")
    if grads is None:
        forward(graph, bindings)
        grads = backward(graph)

    per_param: dict[str, float] = {}
    failed: list[str] = []
    for name in graph.param_ids:
        base = graph.params[name]
        analytic = grads[name]
        worst = 0.0
        flat = base.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            f_plus = float(forward(graph, bindings))
            flat[idx] = orig - h
            f_minus = float(forward(graph, bindings))
            flat[idx] = orig
            numeric = (f_plus - f_minus) / (2.0 * h)
            a = float(analytic.reshape(-1)[idx])
            rel = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            if rel > worst:
                worst = rel
        per_param[name] = worst
        if worst > tol:
            failed.append(name)
    # restore the cache for the unperturbed parameters
    forward(graph, bindings)
    max_err = max(per_param.values(), default=0.0)
    return GradCheckReport(
        per_param=per_param,
        max_rel_error=max_err,
        failed=tuple(failed),
        passed=not failed,
        h=h,
        tol=tol,
    )
