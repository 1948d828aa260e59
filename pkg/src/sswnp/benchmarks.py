"""Frozen synthetic benchmark configurations.

Two desk-scale benchmarks with pinned data seeds and splits:

* ``learnability``  noiseless constant-velocity corpus where a linear
  extrapolator is exact; 50 epochs of baseline training must approach it.
* ``piecewise``     a small-training-split piecewise-goal corpus in an
  overfit-prone regime, used for the mode ablation, the robustness
  comparison, and the noise-factor sweep.

Training is bit-deterministic given (config, seed, corpus), so results on
these benchmarks reproduce exactly run to run.
"""

from __future__ import annotations

from .model import ArchConfig
from .synth import SynthSpec
from .training import TrainConfig

__all__ = [
    "LEARNABILITY_SPEC",
    "LEARNABILITY_CONFIG",
    "PIECEWISE_SPEC",
    "PIECEWISE_CONFIG",
    "PIECEWISE_SEEDS",
    "SWEEP_OMEGAS",
]

LEARNABILITY_SPEC = SynthSpec(family="constant-velocity", agents=96, steps=30, seed=7)
LEARNABILITY_CONFIG = TrainConfig(
    mode="B",
    omega=0.0,
    lambda_=0.0,
    epochs=50,
    batch_size=16,
    seed=0,
    arch=ArchConfig(
        t_obs=8, t_fut=12, feature_dim=32, fe_hidden=[64], sup_hidden=[64],
        ss_hidden=[32, 16], latent_dim=4, latent_std=0.0,
    ),
    split_fraction=0.8,
    split_seed=0,
    k_eval=1,
)

PIECEWISE_SPEC = SynthSpec(family="piecewise-goal", agents=84, steps=30, seed=11)
PIECEWISE_CONFIG = TrainConfig(
    mode="B+SC+NP",
    omega=0.1,
    lambda_=0.1,
    epochs=250,
    batch_size=32,
    seed=0,
    arch=ArchConfig(
        t_obs=8, t_fut=12, feature_dim=64, fe_hidden=[64, 64], sup_hidden=[64, 64],
        ss_hidden=[64, 32], latent_dim=4, latent_std=1.0,
    ),
    tp_mode="best_of_k",
    k_train=5,
    split_fraction=14 / 84,
    split_seed=111,
    k_eval=20,
)
PIECEWISE_SEEDS = [0, 1, 2]
SWEEP_OMEGAS = [0.0, 0.01, 0.05, 0.1, 0.5]
