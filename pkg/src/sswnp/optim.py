"""Adam with bias correction, operating on named parameter dicts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["AdamState", "adam_step"]


@dataclass
class AdamState:
    """Step counter plus first/second moment accumulators, one per parameter."""

    step: int
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def init(cls, params: dict[str, np.ndarray], lr: float = 1e-3, **kw) -> "AdamState":
        return cls(
            step=0,
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
            lr=lr,
            **kw,
        )


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One Adam update; returns fresh params and state (inputs untouched).

    Parameters absent from ``grads`` are treated as having zero gradient
    (their moments still decay). Shape disagreement is an error.
    """
    t = state.step + 1
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros_like(p)
        if g.shape != p.shape or state.m[name].shape != p.shape:
            raise ValueError(
                f"adam_step shape mismatch for '{name}': param {p.shape}, grad {g.shape}"
            )
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * (g * g)
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        new_params[name] = p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
        new_m[name] = m
        new_v[name] = v
    return new_params, AdamState(
        step=t,
        m=new_m,
        v=new_v,
        lr=state.lr,
        beta1=state.beta1,
        beta2=state.beta2,
        eps=state.eps,
    )
