"""Two-view training loop with the noise-prediction pretext task.

Per batch: assemble the clean and noise-augmented views (concatenated
along the batch axis so the encoder sees both), run one forward pass of
the composite objective, backpropagate, and take an Adam step. Three
ablation modes control the objective:

* ``B``        trajectory loss on the clean view only
* ``B+SC``     two-view supervised loss
* ``B+SC+NP``  two-view supervised loss plus the weighted noise loss

Degenerate settings collapse exactly: with a zero noise factor the two
views coincide, so the duplicated pass is skipped and the supervised term
reduces to the single-view trajectory loss; with zero lambda the noise
head drops out of the objective entirely. A ``B+SC+NP`` run with both at
zero therefore reproduces a ``B`` run bit for bit under the same seed.

All randomness flows through streams keyed by (seed, purpose, epoch,
step), so runs are bit-reproducible and skipping one consumer never
shifts another.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import autodiff as ad
from .data import Scene, future_array, normalize, observed_array, window
from .model import (
    ArchConfig,
    LossGraph,
    ModelParams,
    build_loss_graph,
    decode_futures,
    encode_batch,
    init_params,
    save_checkpoint,
)
from .optim import AdamState, adam_step
from .rng import stream
from .synth import SynthSpec

__all__ = [
    "MODES",
    "PRESETS",
    "TrainConfig",
    "TrainLog",
    "StepRecord",
    "LambdaDiagnostic",
    "NonFiniteLossError",
    "train",
    "lambda_diagnostic",
]

MODES = ("B", "B+SC", "B+SC+NP")

# (omega, lambda) defaults per benchmark style.
PRESETS = {
    "nba": (0.05, 0.01),
    "trajnet": (0.1, 0.1),
    "eth": (0.01, 0.1),
    "univ": (0.01, 0.1),
    "zara": (0.1, 0.1),
    "hotel": (0.001, 0.1),
}


class NonFiniteLossError(ArithmeticError):
    """Training hit NaN/Inf; carries the global step index."""

    def __init__(self, step: int, cause: Exception):
        super().__init__(f"non-finite loss at global step {step}: {cause}")
        self.step = step


@dataclass
class TrainConfig:
    mode: str = "B+SC+NP"
    omega: float = 0.05
    lambda_: float = 0.01
    epochs: int = 20
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    resample_noise: bool = True
    tp_mode: str = "single"
    k_train: int = 20
    normalize: bool = True
    stride: int = 1
    split_fraction: float = 0.8
    split_seed: int | None = None
    k_eval: int = 20
    omega_test: float | None = None
    arch: ArchConfig = field(default_factory=ArchConfig)
    dataset: str | None = None
    synth: SynthSpec | None = None

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.omega < 0 or self.lambda_ < 0:
            raise ValueError("omega and lambda must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.tp_mode not in ("single", "best_of_k"):
            raise ValueError("tp_mode must be 'single' or 'best_of_k'")
        if not 0.0 < self.split_fraction <= 1.0:
            raise ValueError("split_fraction must be in (0, 1]")


class StepRecord(NamedTuple):
    epoch: int
    step: int
    l_sup: float
    l_ss: float
    l_total: float


@dataclass
class TrainLog:
    mode: str
    lambda_: float
    records: list[StepRecord]
    wall_clock: float
    checkpoint_path: str | None

    def to_csv(self) -> str:
        lines = ["epoch,step,l_sup,l_ss,l_total"]
        for r in self.records:
            lines.append(f"{r.epoch},{r.step},{r.l_sup!r},{r.l_ss!r},{r.l_total!r}")
        return "\n".join(lines) + "\n"


def _prepare_arrays(config: TrainConfig, corpus: Scene) -> tuple[np.ndarray, np.ndarray]:
    samples = window(corpus, config.arch.t_obs, config.arch.t_fut, config.stride)
    if config.normalize:
        samples = [normalize(s) for s in samples]
    if not samples:
        raise ValueError("corpus yields no samples under the configured horizons")
    x = np.stack([observed_array(s).reshape(-1) for s in samples])
    y = np.stack([future_array(s).reshape(-1) for s in samples])
    return x, y


def _select_latents(
    params_flat: dict[str, np.ndarray],
    arch: ArchConfig,
    x_rows: np.ndarray,
    gt_rows: np.ndarray,
    pool: np.ndarray,
) -> np.ndarray:
    """Winner-takes-all latent choice: per row, the pool entry whose decoded
    trajectory is closest to the ground truth. The choice is made outside
    the tape and treated as constant."""
    params = ModelParams.from_flat(params_flat)
    feats = encode_batch(params, arch, x_rows)
    k, rows, _ = pool.shape
    z = np.concatenate(
        [np.broadcast_to(feats, (k, rows, feats.shape[1])), pool], axis=2
    ).reshape(k * rows, -1)
    decoded = decode_futures(params, arch, z).reshape(k, rows, -1)
    sq_err = np.mean((decoded - gt_rows[None, :, :]) ** 2, axis=2)
    best = np.argmin(sq_err, axis=0)
    return pool[best, np.arange(rows), :]


def train(
    config: TrainConfig,
    corpus: Scene,
    checkpoint_path: str | None = None,
) -> tuple[ModelParams, TrainLog]:
    """Run the configured objective over the corpus; deterministic per seed."""
    t0 = time.perf_counter()
    arch = config.arch
    x, y = _prepare_arrays(config, corpus)
    n = x.shape[0]
    t_obs2 = 2 * arch.t_obs

    dual_view = config.mode in ("B+SC", "B+SC+NP") and config.omega > 0.0
    with_noise = config.mode == "B+SC+NP" and config.lambda_ > 0.0

    params = init_params(arch, config.seed)
    params_flat = params.flat()
    state = AdamState.init(params_flat, lr=config.lr)

    fixed_noise: np.ndarray | None = None
    if dual_view and not config.resample_noise:
        fixed_noise = np.stack(
            [stream(config.seed, "noise-fixed", i).standard_normal(t_obs2) for i in range(n)]
        )

    graphs: dict[int, LossGraph] = {}
    records: list[StepRecord] = []
    global_step = 0
    for epoch in range(config.epochs):
        order = stream(config.seed, "shuffle", epoch).permutation(n)
        for step, lo in enumerate(range(0, n, config.batch_size)):
            idx = order[lo : lo + config.batch_size]
            xb, yb = x[idx], y[idx]
            nb = xb.shape[0]

            if dual_view:
                if fixed_noise is not None:
                    scaled = config.omega * fixed_noise[idx]
                else:
                    raw = stream(config.seed, "noise", epoch, step).standard_normal((nb, t_obs2))
                    scaled = config.omega * raw
                x_rows = np.concatenate([xb, xb + scaled], axis=0)
                gt_rows = np.concatenate([yb, yb], axis=0)
            else:
                x_rows, gt_rows = xb, yb

            lat = arch.latent_std * stream(config.seed, "latent", epoch, step).standard_normal(
                (nb, arch.latent_dim)
            )
            if config.tp_mode == "best_of_k":
                # winners are chosen on the clean view and shared with the
                # augmented view, so both views train the same decoder mode
                pool = arch.latent_std * stream(
                    config.seed, "latent-pool", epoch, step
                ).standard_normal((config.k_train, nb, arch.latent_dim))
                lat = _select_latents(params_flat, arch, xb, yb, pool)
            lat_rows = np.concatenate([lat, lat], axis=0) if dual_view else lat

            rows = x_rows.shape[0]
            lg = graphs.get(rows)
            if lg is None or lg.dual_view != dual_view or lg.with_noise != with_noise:
                lg = build_loss_graph(
                    arch, ModelParams.from_flat(params_flat), rows, dual_view, with_noise,
                    config.lambda_,
                )
                graphs[rows] = lg
            lg.graph.set_params(params_flat)

            bindings = {"x": x_rows, "latent": lat_rows, "gt": gt_rows}
            if with_noise:
                zeros = np.zeros((nb, t_obs2))
                bindings["noise_target"] = (
                    np.concatenate([zeros, scaled], axis=0) if dual_view else zeros
                )
            try:
                l_total = float(ad.forward(lg.graph, bindings))
            except ad.NonFiniteError as exc:
                raise NonFiniteLossError(global_step, exc) from exc
            grads = ad.backward(lg.graph)
            params_flat, state = adam_step(params_flat, grads, state)

            l_sup = float(lg.graph.value(lg.l_sup))
            l_ss = float(lg.graph.value(lg.l_ss)) if with_noise else 0.0
            records.append(StepRecord(epoch, step, l_sup, l_ss, l_total))
            global_step += 1

    final = ModelParams.from_flat(params_flat)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, arch, final)
    log = TrainLog(
        mode=config.mode,
        lambda_=config.lambda_,
        records=records,
        wall_clock=time.perf_counter() - t0,
        checkpoint_path=checkpoint_path,
    )
    return final, log


@dataclass
class LambdaDiagnostic:
    """Noise-loss trajectory used by operators to judge a lambda setting."""

    curve: list[tuple[int, float]]
    epoch_means: list[float]
    decrease_fraction: float


def lambda_diagnostic(log: TrainLog) -> LambdaDiagnostic:
    """Per-step noise-loss curve plus the fraction of epoch-mean decreases."""
    if log.mode != "B+SC+NP" or log.lambda_ <= 0.0:
        raise ValueError("log comes from a run whose objective had no noise loss")
    curve = [(i, r.l_ss) for i, r in enumerate(log.records)]
    by_epoch: dict[int, list[float]] = {}
    for r in log.records:
        by_epoch.setdefault(r.epoch, []).append(r.l_ss)
    means = [float(np.mean(by_epoch[e])) for e in sorted(by_epoch)]
    pairs = list(zip(means, means[1:]))
    frac = float(np.mean([b < a for a, b in pairs])) if pairs else 0.0
    return LambdaDiagnostic(curve=curve, epoch_means=means, decrease_fraction=frac)
