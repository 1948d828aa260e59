"""Randomized gradient verification over composite training objectives.

Builds small random instances of the full two-view objective (encoder,
trajectory head, noise head, weighted total) and compares backpropagated
gradients against central finite differences. Architectures are kept tiny
so a hundred checks finish in seconds; inputs are drawn uniformly from
[-1, 1] and the activation is tanh, keeping the objective smooth at the
finite-difference scale.

Targets are placed near the initial predictions, keeping the loss value
small, and the default step is 2e-6. Both choices condition the check:
the difference f(x+h) - f(x-h) must stay above float64 cancellation noise
(proportional to the loss magnitude) and below the cubic truncation term,
even for entries whose gradient the lambda weighting or incidental
cancellation makes tiny.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import GradCheckReport, forward, grad_check
from .model import ArchConfig, build_loss_graph, init_params
from .rng import stream

__all__ = ["CompositeCheck", "random_composite_check", "run_composite_checks"]


@dataclass(frozen=True)
class CompositeCheck:
    index: int
    batch: int
    lambda_: float
    report: GradCheckReport


def _random_arch(rng: np.random.Generator, t_obs: int, t_fut: int) -> ArchConfig:
    def dims(max_layers: int) -> list[int]:
        return [int(rng.integers(2, 9)) for _ in range(int(rng.integers(1, max_layers + 1)))]

    return ArchConfig(
        t_obs=t_obs,
        t_fut=t_fut,
        feature_dim=int(rng.integers(2, 7)),
        fe_hidden=dims(2),
        sup_hidden=dims(2),
        ss_hidden=dims(2),
        latent_dim=int(rng.integers(1, 4)),
        latent_std=float(rng.uniform(0.0, 0.2)),
        activation="tanh",
        decode="cumulative" if rng.uniform() < 0.5 else "absolute",
    )


def random_composite_check(
    index: int,
    seed: int = 0,
    batch_max: int = 4,
    t_obs: int = 8,
    t_fut: int = 12,
    h: float = 2e-6,
    tol: float = 1e-5,
) -> CompositeCheck:
    """One random composite objective, checked end to end."""
    rng = stream(seed, "gradcheck", index)
    arch = _random_arch(rng, t_obs, t_fut)
    n = int(rng.integers(1, batch_max + 1))
    lambda_ = float(rng.uniform(0.01, 1.0))
    params = init_params(arch, seed=index)
    lg = build_loss_graph(arch, params, rows=2 * n, dual_view=True, with_noise=True, lambda_=lambda_)
    bindings = {
        "x": rng.uniform(-1.0, 1.0, (2 * n, 2 * t_obs)),
        "latent": rng.uniform(-1.0, 1.0, (2 * n, arch.latent_dim)),
        "gt": np.zeros((2 * n, 2 * t_fut)),
        "noise_target": np.zeros((2 * n, 2 * t_obs)),
    }
    # move the targets next to the initial predictions (see module docstring)
    forward(lg.graph, bindings)
    assert lg.noise_pred is not None
    bindings["gt"] = lg.graph.value(lg.pred) + rng.uniform(-0.005, 0.005, (2 * n, 2 * t_fut))
    bindings["noise_target"] = lg.graph.value(lg.noise_pred) + rng.uniform(
        -0.005, 0.005, (2 * n, 2 * t_obs)
    )
    report = grad_check(lg.graph, bindings, h=h, tol=tol)
    return CompositeCheck(index=index, batch=n, lambda_=lambda_, report=report)


def run_composite_checks(
    count: int = 100,
    seed: int = 0,
    batch_max: int = 4,
    t_obs: int = 8,
    t_fut: int = 12,
    h: float = 2e-6,
    tol: float = 1e-5,
) -> list[CompositeCheck]:
    return [
        random_composite_check(i, seed, batch_max, t_obs, t_fut, h, tol)
        for i in range(count)
    ]
