"""Reference MLP network: shared encoder, trajectory head, noise head.

The encoder maps a flattened observed window to a feature vector. The
trajectory head decodes features (concatenated with a latent draw, so
several futures can be sampled per window) into per-step displacements
that are accumulated into positions. The noise head decodes the same
features into a per-waypoint noise estimate for the pretext task. The
test-time path touches only the encoder and trajectory head.

Parameters are plain dicts of float64 arrays, grouped into three bundles
(fe / sup / ss). ``build_loss_graph`` assembles the full differentiable
training objective on the autodiff tape; the numpy inference helpers here
apply the same arithmetic outside the tape.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .rng import stream

__all__ = [
    "ArchConfig",
    "ModelParams",
    "PredictionSet",
    "LossGraph",
    "init_params",
    "encode",
    "predict_future",
    "predict_noise",
    "build_loss_graph",
    "save_checkpoint",
    "load_checkpoint",
    "CHECKPOINT_HEADER",
]

CHECKPOINT_HEADER = "SSWNP-CKPT v1"

ACTIVATIONS = ("tanh", "relu")
DECODE_MODES = ("cumulative", "absolute")


@dataclass
class ArchConfig:
    t_obs: int = 8
    t_fut: int = 12
    feature_dim: int = 32
    fe_hidden: list[int] = field(default_factory=lambda: [32])
    sup_hidden: list[int] = field(default_factory=lambda: [32])
    ss_hidden: list[int] = field(default_factory=lambda: [128, 64])
    latent_dim: int = 4
    latent_std: float = 0.1
    activation: str = "tanh"
    decode: str = "cumulative"

    def __post_init__(self) -> None:
        sizes = [self.t_obs, self.t_fut, self.feature_dim, self.latent_dim]
        sizes += list(self.fe_hidden) + list(self.sup_hidden) + list(self.ss_hidden)
        if any(int(s) <= 0 for s in sizes):
            raise ValueError("all architecture sizes must be positive")
        if self.latent_std < 0:
            raise ValueError("latent_std must be >= 0")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.decode not in DECODE_MODES:
            raise ValueError(f"decode must be one of {DECODE_MODES}")

    def layer_dims(self, bundle: str) -> list[int]:
        if bundle == "fe":
            return [2 * self.t_obs, *self.fe_hidden, self.feature_dim]
        if bundle == "sup":
            return [self.feature_dim + self.latent_dim, *self.sup_hidden, 2 * self.t_fut]
        if bundle == "ss":
            return [self.feature_dim, *self.ss_hidden, 2 * self.t_obs]
        raise ValueError(f"unknown bundle {bundle!r}")


@dataclass
class ModelParams:
    """Three parameter bundles; each maps 'w<i>'/'b<i>' to arrays."""

    fe: dict[str, np.ndarray]
    sup: dict[str, np.ndarray]
    ss: dict[str, np.ndarray]

    def flat(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for bundle in ("fe", "sup", "ss"):
            for key, arr in getattr(self, bundle).items():
                out[f"{bundle}.{key}"] = arr
        return out

    @classmethod
    def from_flat(cls, flat: dict[str, np.ndarray]) -> "ModelParams":
        bundles: dict[str, dict[str, np.ndarray]] = {"fe": {}, "sup": {}, "ss": {}}
        for name, arr in flat.items():
            bundle, key = name.split(".", 1)
            bundles[bundle][key] = arr
        return cls(**bundles)


@dataclass
class PredictionSet:
    """K sampled futures, shape (k, t_fut, 2)."""

    samples: np.ndarray
    k: int

    def __post_init__(self) -> None:
        if self.samples.shape[0] != self.k or self.k < 1:
            raise ValueError("sample count disagrees with k")
        if not np.isfinite(self.samples).all():
            raise ValueError("non-finite prediction")


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def init_params(arch: ArchConfig, seed: int) -> ModelParams:
    """Uniform Glorot weights, zero biases, deterministic per seed."""
    bundles: dict[str, dict[str, np.ndarray]] = {}
    for bundle in ("fe", "sup", "ss"):
        dims = arch.layer_dims(bundle)
        layers: dict[str, np.ndarray] = {}
        for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
            rng = stream(seed, "init", bundle, i)
            layers[f"w{i}"] = _glorot(rng, fan_in, fan_out)
            layers[f"b{i}"] = np.zeros(fan_out)
        bundles[bundle] = layers
    return ModelParams(**bundles)


def _act(x: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(x) if kind == "tanh" else np.maximum(x, 0.0)


def _mlp_apply(layers: dict[str, np.ndarray], x: np.ndarray, activation: str) -> np.ndarray:
    n_layers = len(layers) // 2
    h = x
    for i in range(n_layers):
        h = (h @ layers[f"w{i}"]) + layers[f"b{i}"]
        if i < n_layers - 1:
            h = _act(h, activation)
    return h


def cumsum_matrix(t_fut: int) -> np.ndarray:
    """Constant matrix turning flattened per-step displacements into positions.

    For row-major (t, 2) flattening, position entry (t, c) is the sum of
    displacement entries (s, c) for s <= t.
    """
    size = 2 * t_fut
    mat = np.zeros((size, size))
    for ti in range(t_fut):
        for tj in range(ti + 1):
            mat[2 * ti, 2 * tj] = 1.0
            mat[2 * ti + 1, 2 * tj + 1] = 1.0
    return mat


def encode(params: ModelParams, arch: ArchConfig, observed: np.ndarray) -> np.ndarray:
    """Feature vector for one observed window of shape (t_obs, 2)."""
    observed = np.asarray(observed, dtype=np.float64)
    if observed.shape != (arch.t_obs, 2):
        raise ValueError(f"observed shape {observed.shape} != ({arch.t_obs}, 2)")
    return _mlp_apply(params.fe, observed.reshape(1, -1), arch.activation)[0]


def encode_batch(params: ModelParams, arch: ArchConfig, windows: np.ndarray) -> np.ndarray:
    """Features for windows of shape (n, 2 * t_obs)."""
    return _mlp_apply(params.fe, windows, arch.activation)


def decode_futures(params: ModelParams, arch: ArchConfig, z: np.ndarray) -> np.ndarray:
    """Decode rows of [features | latent] into positions (n, 2 * t_fut)."""
    out = _mlp_apply(params.sup, z, arch.activation)
    if arch.decode == "cumulative":
        out = out @ cumsum_matrix(arch.t_fut).T
    return out


def predict_future(
    params: ModelParams,
    arch: ArchConfig,
    features: np.ndarray,
    k: int,
    rng: np.random.Generator,
) -> PredictionSet:
    """Sample k futures by decoding k latent draws alongside the features."""
    if k < 1:
        raise ValueError("k must be >= 1")
    features = np.asarray(features, dtype=np.float64)
    latent = arch.latent_std * rng.standard_normal((k, arch.latent_dim))
    z = np.concatenate([np.tile(features, (k, 1)), latent], axis=1)
    flat = decode_futures(params, arch, z)
    return PredictionSet(samples=flat.reshape(k, arch.t_fut, 2), k=k)


def predict_noise(params: ModelParams, arch: ArchConfig, features: np.ndarray) -> np.ndarray:
    """Per-waypoint noise estimate, shape (t_obs, 2)."""
    features = np.asarray(features, dtype=np.float64)
    if features.shape != (arch.feature_dim,):
        raise ValueError(f"features shape {features.shape} != ({arch.feature_dim},)")
    out = _mlp_apply(params.ss, features.reshape(1, -1), arch.activation)
    return out.reshape(arch.t_obs, 2)


# -- training graph -------------------------------------------------------


@dataclass
class LossGraph:
    """The differentiable training objective plus handles into the tape.

    Inputs to bind: ``x`` (rows, 2*t_obs), ``latent`` (rows, latent_dim),
    ``gt`` (rows, 2*t_fut), and ``noise_target`` (rows, 2*t_obs) when the
    noise head participates. Rows hold the clean half then the augmented
    half when ``dual_view`` is set.
    """

    graph: ad.Graph
    rows: int
    dual_view: bool
    with_noise: bool
    pred: int
    noise_pred: int | None
    l_sup: int
    l_ss: int | None
    l_total: int


def _mlp_graph(g: ad.Graph, bundle: str, n_layers: int, h: int, activation: str) -> int:
    for i in range(n_layers):
        h = g.add(g.matmul(h, g.param_ids[f"{bundle}.w{i}"]), g.param_ids[f"{bundle}.b{i}"])
        if i < n_layers - 1:
            h = g.tanh(h) if activation == "tanh" else g.relu(h)
    return h


def build_loss_graph(
    arch: ArchConfig,
    params: ModelParams,
    rows: int,
    dual_view: bool,
    with_noise: bool,
    lambda_: float,
) -> LossGraph:
    """Assemble the per-batch objective on a fresh tape.

    ``dual_view`` doubles the agent-mean losses (the two-view sum over a
    concatenated block halves the mean). ``with_noise`` attaches the noise
    head and weighs its loss by ``lambda_``.
    """
    g = ad.Graph()
    x = g.input("x", (rows, 2 * arch.t_obs))
    latent = g.input("latent", (rows, arch.latent_dim))
    gt = g.input("gt", (rows, 2 * arch.t_fut))
    for name, arr in params.flat().items():
        if not with_noise and name.startswith("ss."):
            continue
        g.param(name, arr)

    feat = _mlp_graph(g, "fe", len(arch.layer_dims("fe")) - 1, x, arch.activation)
    z = g.concat(feat, latent)
    pred = _mlp_graph(g, "sup", len(arch.layer_dims("sup")) - 1, z, arch.activation)
    if arch.decode == "cumulative":
        pred = g.matmul(pred, g.constant(cumsum_matrix(arch.t_fut).T))

    per_view = 2.0 if dual_view else 1.0
    l_sup = g.scale(g.mse(pred, gt), per_view) if dual_view else g.mse(pred, gt)

    l_ss = None
    l_total = l_sup
    noise_pred = None
    if with_noise:
        noise_target = g.input("noise_target", (rows, 2 * arch.t_obs))
        noise_pred = _mlp_graph(g, "ss", len(arch.layer_dims("ss")) - 1, feat, arch.activation)
        raw = g.mse(noise_pred, noise_target)
        l_ss = g.scale(raw, per_view) if dual_view else raw
        l_total = g.add(l_sup, g.scale(l_ss, lambda_))

    g.set_output(l_total)
    return LossGraph(
        graph=g,
        rows=rows,
        dual_view=dual_view,
        with_noise=with_noise,
        pred=pred,
        noise_pred=noise_pred,
        l_sup=l_sup,
        l_ss=l_ss,
        l_total=l_total,
    )


# -- checkpoints -----------------------------------------------------------


def _arch_to_lines(arch: ArchConfig) -> list[str]:
    def fmt(v) -> str:
        if isinstance(v, list):
            return ",".join(str(x) for x in v)
        if isinstance(v, float):
            return repr(v)
        return str(v)

    fields = vars(arch)
    return [f"{k}={fmt(fields[k])}" for k in sorted(fields)]


def _arch_from_items(items: dict[str, str]) -> ArchConfig:
    def ints(s: str) -> list[int]:
        return [int(x) for x in s.split(",") if x]

    return ArchConfig(
        t_obs=int(items["t_obs"]),
        t_fut=int(items["t_fut"]),
        feature_dim=int(items["feature_dim"]),
        fe_hidden=ints(items["fe_hidden"]),
        sup_hidden=ints(items["sup_hidden"]),
        ss_hidden=ints(items["ss_hidden"]),
        latent_dim=int(items["latent_dim"]),
        latent_std=float(items["latent_std"]),
        activation=items["activation"],
        decode=items["decode"],
    )


def _tensor_block(name: str, arr: np.ndarray) -> list[str]:
    lines = [name, " ".join(str(d) for d in arr.shape)]
    rows = arr.reshape(-1, arr.shape[-1]) if arr.ndim > 1 else arr.reshape(1, -1)
    for row in rows:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return lines


def save_checkpoint(path: str, arch: ArchConfig, params: ModelParams) -> None:
    """Versioned text checkpoint; round-trips bit-exactly."""
    lines = [CHECKPOINT_HEADER]
    lines += _arch_to_lines(arch)
    for name, arr in params.flat().items():
        lines += _tensor_block(name, arr)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_checkpoint(path: str) -> tuple[ArchConfig, ModelParams]:
    """Read a checkpoint; bundles absent from the file load as empty."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    if not lines or lines[0] != CHECKPOINT_HEADER:
        raise ValueError(f"not a checkpoint file: {path}")
    items: dict[str, str] = {}
    i = 1
    while i < len(lines) and "=" in lines[i]:
        key, _, val = lines[i].partition("=")
        items[key] = val
        i += 1
    arch = _arch_from_items(items)

    flat: dict[str, np.ndarray] = {}
    while i < len(lines):
        if not lines[i]:
            i += 1
            continue
        name = lines[i]
        shape = tuple(int(d) for d in lines[i + 1].split())
        n_rows = 1 if len(shape) == 1 else int(np.prod(shape[:-1]))
        rows = [
            [float(tok) for tok in lines[i + 2 + r].split()]
            for r in range(n_rows)
        ]
        flat[name] = np.array(rows, dtype=np.float64).reshape(shape)
        i += 2 + n_rows
    return arch, ModelParams.from_flat(flat)
