"""Tape construction, forward/backward, and the finite-difference checker."""

import numpy as np
import pytest

from sswnp.autodiff import (
    Graph,
    GraphError,
    NonFiniteError,
    backward,
    forward,
    grad_check,
)
from sswnp.rng import stream


def scalar_graph(build):
    """Helper: build() receives a fresh Graph and returns the output node."""
    g = Graph()
    g.set_output(build(g))
    return g


class TestForward:
    def test_identity_graph_returns_input(self):
        g = Graph()
        g.set_output(g.input("t", (2, 3)))
        t = np.arange(6.0).reshape(2, 3)
        assert np.array_equal(forward(g, {"t": t}), t)

    def test_matmul_identity(self):
        g = Graph()
        a = g.input("a", (2, 2))
        g.set_output(g.matmul(a, g.constant(np.eye(2))))
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.array_equal(forward(g, {"a": m}), m)

    def test_mse_hand_value(self):
        # mean((a-b)^2) with a=[1,3], b=[0,1]: (1 + 4) / 2 = 2.5
        g = Graph()
        a = g.input("a", (2,))
        b = g.input("b", (2,))
        g.set_output(g.mse(a, b))
        out = forward(g, {"a": np.array([1.0, 3.0]), "b": np.array([0.0, 1.0])})
        assert out == pytest.approx(2.5, abs=1e-12)

    def test_deterministic(self):
        g = Graph()
        x = g.input("x", (3, 4))
        w = g.param("w", stream(0, "w").standard_normal((4, 2)))
        g.set_output(g.mean(g.tanh(g.matmul(x, w))))
        xs = stream(0, "x").standard_normal((3, 4))
        assert forward(g, {"x": xs}) == forward(g, {"x": xs})

    def test_missing_binding_rejected(self):
        g = Graph()
        g.input("x", (2,))
        g.set_output(g.mean(g.input("y", (2,))))
        with pytest.raises(GraphError, match="x"):
            forward(g, {"y": np.zeros(2)})

    def test_shape_mismatch_names_node(self):
        g = Graph()
        x = g.input("x", (2, 3))
        g.set_output(g.mean(x))
        with pytest.raises(GraphError, match="'x'"):
            forward(g, {"x": np.zeros((3, 2))})

    def test_non_finite_detected(self):
        g = Graph()
        x = g.input("x", (2,))
        g.set_output(g.mean(x))
        with pytest.raises(NonFiniteError):
            forward(g, {"x": np.array([1.0, np.nan])})

    def test_matmul_inner_dim_checked_at_build(self):
        g = Graph()
        a = g.input("a", (2, 3))
        b = g.input("b", (2, 3))
        with pytest.raises(GraphError, match="inner dims"):
            g.matmul(a, b)

    def test_add_broadcasts_on_leading_axis_only(self):
        g = Graph()
        a = g.input("a", (4, 3))
        bias = g.param("bias", np.array([1.0, 2.0, 3.0]))
        g.set_output(g.mean(g.add(a, bias)))
        out = forward(g, {"a": np.zeros((4, 3))})
        assert out == pytest.approx(2.0)
        with pytest.raises(GraphError, match="broadcast"):
            g.add(a, g.param("col", np.ones((4, 1))))

    def test_concat_trailing_axis(self):
        g = Graph()
        a = g.input("a", (2, 2))
        b = g.input("b", (2, 3))
        g.set_output(g.concat(a, b))
        out = forward(g, {"a": np.ones((2, 2)), "b": np.zeros((2, 3))})
        assert out.shape == (2, 5)
        assert np.array_equal(out[:, :2], np.ones((2, 2)))


class TestBackward:
    def test_constant_function_zero_gradient(self):
        g = Graph()
        g.param("w", np.ones((2, 2)))
        g.set_output(g.mean(g.constant(np.array([5.0]))))
        forward(g, {})
        grads = backward(g)
        assert np.array_equal(grads["w"], np.zeros((2, 2)))

    def test_linear_function_gradient(self):
        # f(w) = 3w for scalar w: df/dw = 3
        g = Graph()
        w = g.param("w", np.array([2.0]))
        g.set_output(g.mean(g.scale(w, 3.0)))
        forward(g, {})
        assert backward(g)["w"] == pytest.approx(np.array([3.0]))

    def test_two_layer_tanh_matches_independent_differences(self):
        rng = stream(42, "net")
        g = Graph()
        x = g.input("x", (3, 4))
        w0 = g.param("w0", rng.standard_normal((4, 5)))
        b0 = g.param("b0", rng.standard_normal(5))
        w1 = g.param("w1", rng.standard_normal((5, 2)))
        h = g.tanh(g.add(g.matmul(x, w0), b0))
        g.set_output(g.mean(g.tanh(g.matmul(h, w1))))
        bindings = {"x": rng.uniform(-1, 1, (3, 4))}
        forward(g, bindings)
        grads = backward(g)

        # independent central-difference loop, written from scratch
        h_step = 1e-5
        worst = 0.0
        for name in ("w0", "b0", "w1"):
            flat = g.params[name].reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h_step
                f_plus = float(forward(g, bindings))
                flat[i] = orig - h_step
                f_minus = float(forward(g, bindings))
                flat[i] = orig
                numeric = (f_plus - f_minus) / (2 * h_step)
                a = float(grads[name].reshape(-1)[i])
                worst = max(worst, abs(a - numeric) / max(abs(a), abs(numeric), 1e-8))
        assert worst < 1e-5

    def test_requires_forward_first(self):
        g = Graph()
        g.param("w", np.ones(2))
        g.set_output(g.mean(g.param("v", np.ones(2))))
        with pytest.raises(GraphError, match="forward"):
            backward(g)

    def test_rejects_non_scalar_output(self):
        g = Graph()
        g.set_output(g.input("x", (2,)))
        forward(g, {"x": np.ones(2)})
        with pytest.raises(GraphError, match="scalar"):
            backward(g)

    def test_sum_of_losses_is_sum_of_gradients(self):
        rng = stream(7, "linearity")
        w_init = rng.standard_normal((3, 3))

        def build(which):
            g = Graph()
            x = g.input("x", (2, 3))
            w = g.param("w", w_init.copy())
            y = g.tanh(g.matmul(x, w))
            l1 = g.mse(y, g.constant(np.zeros((2, 3))))
            l2 = g.mean(g.relu(y))
            node = {"l1": l1, "l2": l2, "sum": g.add(l1, l2)}[which]
            g.set_output(node)
            return g

        bindings = {"x": rng.uniform(-1, 1, (2, 3))}
        grads = {}
        for which in ("l1", "l2", "sum"):
            g = build(which)
            forward(g, bindings)
            grads[which] = backward(g)["w"]
        assert np.allclose(grads["sum"], grads["l1"] + grads["l2"], atol=1e-12)


class TestGradCheck:
    def test_linear_graph_exact_up_to_roundoff(self):
        g = Graph()
        w = g.param("w", np.array([1.5, -0.5]))
        g.set_output(g.mean(g.scale(w, 2.0)))
        report = grad_check(g, {}, h=1e-5, tol=1e-6)
        assert report.passed
        assert report.max_rel_error < 1e-10

    def test_two_layer_tanh_passes(self):
        rng = stream(9, "gc")
        g = Graph()
        x = g.input("x", (2, 3))
        w0 = g.param("w0", rng.standard_normal((3, 4)))
        w1 = g.param("w1", rng.standard_normal((4, 1)))
        g.set_output(g.mean(g.tanh(g.matmul(g.tanh(g.matmul(x, w0)), w1))))
        report = grad_check(g, {"x": rng.uniform(-1, 1, (2, 3))}, h=1e-5, tol=1e-5)
        assert report.passed

    def test_corrupted_gradient_fails_with_parameter_named(self):
        rng = stream(10, "gc")
        g = Graph()
        x = g.input("x", (2, 2))
        w0 = g.param("w0", rng.standard_normal((2, 3)))
        w1 = g.param("w1", rng.standard_normal((3, 1)))
        g.set_output(g.mean(g.tanh(g.matmul(g.tanh(g.matmul(x, w0)), w1))))
        bindings = {"x": rng.uniform(-1, 1, (2, 2))}
        forward(g, bindings)
        grads = backward(g)
        grads["w1"] = grads["w1"].copy()
        grads["w1"][0, 0] += 0.1
        report = grad_check(g, bindings, h=1e-5, tol=1e-5, grads=grads)
        assert not report.passed
        assert report.failed == ("w1",)

    def test_positive_step_required(self):
        g = Graph()
        g.set_output(g.mean(g.param("w", np.ones(1))))
        with pytest.raises(GraphError):
            grad_check(g, {}, h=0.0)


OPS = ("matmul", "add", "scale", "tanh", "relu", "mse", "mean", "concat")


def _random_graph(seed: int) -> tuple[Graph, dict[str, np.ndarray]]:
    """A random DAG over the supported op set, ending in a scalar."""
    rng = stream(seed, "random-graph")
    g = Graph()
    bindings: dict[str, np.ndarray] = {}
    pool: list[int] = []
    rows = int(rng.integers(1, 4))

    def leaf() -> int:
        cols = int(rng.integers(1, 5))
        vals = rng.uniform(-1.0, 1.0, (rows, cols))
        if rng.uniform() < 0.5:
            name = f"p{len(g.param_ids)}"
            return g.param(name, vals)
        name = f"x{len(g.input_ids)}"
        bindings[name] = vals
        return g.input(name, (rows, cols))

    pool.append(leaf())
    if len(g.param_ids) == 0:
        pool.append(g.param("p0", rng.uniform(-1, 1, (rows, int(rng.integers(1, 5))))))
    for _ in range(int(rng.integers(3, 9))):
        op = OPS[int(rng.integers(0, len(OPS)))]
        a = pool[int(rng.integers(0, len(pool)))]
        sa = g.nodes[a].shape
        if op == "matmul":
            w = g.param(f"p{len(g.param_ids)}", rng.uniform(-1, 1, (sa[-1], int(rng.integers(1, 5)))))
            pool.append(g.matmul(a, w))
        elif op == "add":
            b = g.param(f"p{len(g.param_ids)}", rng.uniform(-1, 1, sa[1:] if rng.uniform() < 0.5 else sa))
            pool.append(g.add(a, b))
        elif op == "scale":
            pool.append(g.scale(a, float(rng.uniform(-2, 2))))
        elif op == "tanh":
            pool.append(g.tanh(a))
        elif op == "relu":
            pool.append(g.relu(a))
        elif op == "mse":
            pool.append(g.mse(a, g.constant(rng.uniform(-1, 1, sa))))
        elif op == "mean":
            pool.append(g.mean(a))
        else:  # concat
            b = g.param(f"p{len(g.param_ids)}", rng.uniform(-1, 1, sa))
            pool.append(g.concat(a, b))
        # scalar nodes end the growth phase for simplicity
        if g.nodes[pool[-1]].shape == ():
            break
    out = pool[-1]
    if g.nodes[out].shape != ():
        out = g.mean(out)
    g.set_output(out)
    return g, bindings


def test_random_graphs_pass_grad_check():
    # module invariant: 100 random graphs over the closed op set, fixed seed
    for i in range(100):
        g, bindings = _random_graph(i)
        report = grad_check(g, bindings, h=1e-5, tol=1e-5)
        assert report.passed, f"graph {i}: {report}"
