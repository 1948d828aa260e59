"""Trajectory prediction with two-view consistency and waypoint-noise prediction.

A self-contained toolkit: float64 autodiff numerics, corpus parsing and
windowing, synthetic benchmarks with closed-form ground truth, the
clean/noise-augmented view machinery, a reference MLP model, the training
loop, ADE/FDE evaluation, and a reproducible ablation/robustness harness.
"""

from .augment import NoiseField, ViewPair, make_views, sample_noise
from .autodiff import Graph, GradCheckReport, backward, forward, grad_check
from .data import (
    ParseError,
    Scene,
    Trajectory,
    TrajectorySample,
    Waypoint,
    denormalize,
    normalize,
    parse_corpus,
    serialize_corpus,
    window,
)
from .evaluation import (
    MetricResult,
    RobustnessReport,
    ade,
    evaluate,
    fde,
    min_of_k,
    noise_factor_sweep,
    run_ablation,
    split_scene,
)
from .losses import (
    LossBreakdown,
    breakdown,
    self_supervised_loss,
    supervised_loss,
    total_loss,
    traj_loss,
)
from .model import (
    ArchConfig,
    ModelParams,
    PredictionSet,
    encode,
    init_params,
    load_checkpoint,
    predict_future,
    predict_noise,
    save_checkpoint,
)
from .optim import AdamState, adam_step
from .synth import SynthSpec, generate, linear_extrapolation_oracle
from .training import TrainConfig, TrainLog, lambda_diagnostic, train

__version__ = "0.1.0"
