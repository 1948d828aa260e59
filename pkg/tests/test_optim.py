"""Adam update semantics."""

import math

import numpy as np
import pytest

from sswnp.optim import AdamState, adam_step


def test_zero_gradient_leaves_parameters_unchanged():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    state = AdamState.init(params, lr=0.01)
    new_params, new_state = adam_step(params, {"w": np.zeros(3)}, state)
    assert np.array_equal(new_params["w"], params["w"])
    assert new_state.step == 1


def test_first_step_closed_form():
    # with bias correction, step one moves by -lr * g / (|g| + eps)
    g_val = 2.0
    lr = 0.01
    eps = 1e-8
    params = {"w": np.array([0.5])}
    state = AdamState.init(params, lr=lr, eps=eps)
    new_params, _ = adam_step(params, {"w": np.array([g_val])}, state)
    expected = 0.5 - lr * g_val / (math.sqrt(g_val**2) + eps)
    assert new_params["w"][0] == pytest.approx(expected, rel=1e-12)
    assert new_params["w"][0] == pytest.approx(0.5 - 0.01, rel=1e-6)


def test_step_counter_increments_per_call():
    params = {"w": np.ones(2)}
    state = AdamState.init(params)
    grads = {"w": np.full(2, 0.3)}
    params, state = adam_step(params, grads, state)
    params, state = adam_step(params, grads, state)
    assert state.step == 2


def test_shape_mismatch_rejected():
    params = {"w": np.ones((2, 2))}
    state = AdamState.init(params)
    with pytest.raises(ValueError, match="w"):
        adam_step(params, {"w": np.ones(3)}, state)


def test_missing_gradient_treated_as_zero():
    params = {"w": np.ones(2), "v": np.ones(2)}
    state = AdamState.init(params)
    new_params, new_state = adam_step(params, {"w": np.full(2, 1.0)}, state)
    assert np.array_equal(new_params["v"], params["v"])
    assert not np.array_equal(new_params["w"], params["w"])


def test_inputs_not_mutated():
    params = {"w": np.ones(2)}
    state = AdamState.init(params)
    before = params["w"].copy()
    adam_step(params, {"w": np.full(2, 2.0)}, state)
    assert np.array_equal(params["w"], before)
    assert np.array_equal(state.m["w"], np.zeros(2))


def test_accumulator_shapes_mirror_parameters():
    params = {"w": np.ones((3, 4)), "b": np.ones(4)}
    state = AdamState.init(params)
    for name, p in params.items():
        assert state.m[name].shape == p.shape
        assert state.v[name].shape == p.shape
