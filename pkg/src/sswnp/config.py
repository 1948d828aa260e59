"""Line-based ``key = value`` run configuration.

Files are UTF-8 text, one assignment per line, ``#`` comments allowed.
Unknown and duplicate keys are errors: every accepted key is part of the
replay contract, and the merged effective configuration is echoed into
run manifests in the same syntax so any run can be reconstructed from its
manifest alone. A ``preset`` key expands to per-benchmark (omega, lambda)
defaults before explicit keys are applied.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import ArchConfig
from .synth import SynthSpec
from .training import PRESETS, TrainConfig

__all__ = ["ConfigError", "RunConfig", "parse_items", "build_config", "load_config", "echo_items"]


class ConfigError(ValueError):
    """Bad configuration file or override."""


@dataclass
class RunConfig:
    """A TrainConfig plus harness-level settings shared by the subcommands."""

    train: TrainConfig
    seeds: list[int] = field(default_factory=list)
    sweep_omegas: list[float] = field(default_factory=lambda: [0.0, 0.01, 0.05, 0.1, 0.5])
    checkpoint: str | None = None
    source: str | None = None
    gc_graphs: int = 100
    gc_batch: int = 4
    gc_h: float = 2e-6
    gc_tol: float = 1e-5

    def __post_init__(self) -> None:
        if not self.seeds:
            self.seeds = [self.train.seed]


def parse_items(text: str) -> dict[str, str]:
    """Raw key/value pairs from config text; strict about shape and duplicates."""
    items: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key:
            raise ConfigError(f"line {line_no}: empty key")
        if key in items:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        items[key] = val
    return items


def _bool(key: str, val: str) -> bool:
    if val == "true":
        return True
    if val == "false":
        return False
    raise ConfigError(f"{key}: expected true/false, got {val!r}")


def _int_list(val: str) -> list[int]:
    return [int(x) for x in val.split(",") if x.strip()]


def _float_list(val: str) -> list[float]:
    return [float(x) for x in val.split(",") if x.strip()]


def _range(key: str, val: str) -> tuple[float, float]:
    parts = _float_list(val)
    if len(parts) != 2:
        raise ConfigError(f"{key}: expected 'low,high', got {val!r}")
    return parts[0], parts[1]


_ARCH_KEYS = {
    "t_obs", "t_fut", "feature_dim", "fe_hidden", "sup_hidden", "ss_hidden",
    "latent_dim", "latent_std", "activation", "decode",
}
_SYNTH_KEYS = {
    "synth_family", "synth_agents", "synth_steps", "synth_dt", "synth_speed_range",
    "synth_turn_rate_range", "synth_amplitude_range", "synth_period_range",
    "synth_goal_count", "synth_noise_std", "synth_start_box", "synth_seed",
    "synth_scene_id",
}
_TRAIN_KEYS = {
    "mode", "omega", "lambda", "epochs", "batch_size", "lr", "seed",
    "resample_noise", "tp_mode", "k_train", "normalize", "stride",
    "split_fraction", "split_seed", "k_eval", "omega_test", "dataset",
}
_RUN_KEYS = {
    "seeds", "sweep_omegas", "checkpoint", "source",
    "gc_graphs", "gc_batch", "gc_h", "gc_tol",
}
KNOWN_KEYS = _ARCH_KEYS | _SYNTH_KEYS | _TRAIN_KEYS | _RUN_KEYS | {"preset"}


def build_config(items: dict[str, str]) -> RunConfig:
    """Turn raw key/value pairs into a validated RunConfig."""
    unknown = sorted(set(items) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    def get(key: str, default: str | None = None) -> str | None:
        return items.get(key, default)

    preset = get("preset")
    omega_default, lambda_default = "0.05", "0.01"
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        omega_default, lambda_default = (repr(v) for v in PRESETS[preset])

    try:
        arch = ArchConfig(
            t_obs=int(get("t_obs", "8")),
            t_fut=int(get("t_fut", "12")),
            feature_dim=int(get("feature_dim", "32")),
            fe_hidden=_int_list(get("fe_hidden", "32")),
            sup_hidden=_int_list(get("sup_hidden", "32")),
            ss_hidden=_int_list(get("ss_hidden", "128,64")),
            latent_dim=int(get("latent_dim", "4")),
            latent_std=float(get("latent_std", "0.1")),
            activation=get("activation", "tanh"),
            decode=get("decode", "cumulative"),
        )
        synth = None
        if "synth_family" in items:
            synth = SynthSpec(
                family=items["synth_family"],
                agents=int(get("synth_agents", "32")),
                steps=int(get("synth_steps", "30")),
                dt=float(get("synth_dt", "0.4")),
                speed_range=_range("synth_speed_range", get("synth_speed_range", "0.5,1.5")),
                turn_rate_range=_range("synth_turn_rate_range", get("synth_turn_rate_range", "0.2,1.2")),
                amplitude_range=_range("synth_amplitude_range", get("synth_amplitude_range", "0.3,1.5")),
                period_range=_range("synth_period_range", get("synth_period_range", "3.2,9.6")),
                goal_count=int(get("synth_goal_count", "3")),
                noise_std=float(get("synth_noise_std", "0")),
                start_box=float(get("synth_start_box", "10")),
                seed=int(get("synth_seed", "0")),
                scene_id=get("synth_scene_id"),
            )
        omega_test = get("omega_test")
        tc = TrainConfig(
            mode=get("mode", "B+SC+NP"),
            omega=float(get("omega", omega_default)),
            lambda_=float(get("lambda", lambda_default)),
            epochs=int(get("epochs", "20")),
            batch_size=int(get("batch_size", "32")),
            lr=float(get("lr", "0.001")),
            seed=int(get("seed", "0")),
            resample_noise=_bool("resample_noise", get("resample_noise", "true")),
            tp_mode=get("tp_mode", "single"),
            k_train=int(get("k_train", "20")),
            normalize=_bool("normalize", get("normalize", "true")),
            stride=int(get("stride", "1")),
            split_fraction=float(get("split_fraction", "0.8")),
            split_seed=int(items["split_seed"]) if "split_seed" in items else None,
            k_eval=int(get("k_eval", "20")),
            omega_test=float(omega_test) if omega_test is not None else None,
            arch=arch,
            dataset=get("dataset"),
            synth=synth,
        )
        seeds_val = get("seeds")
        return RunConfig(
            train=tc,
            seeds=[int(s) for s in seeds_val.split(",")] if seeds_val else [],
            sweep_omegas=_float_list(get("sweep_omegas", "0,0.01,0.05,0.1,0.5")),
            checkpoint=get("checkpoint"),
            source=get("source"),
            gc_graphs=int(get("gc_graphs", "100")),
            gc_batch=int(get("gc_batch", "4")),
            gc_h=float(get("gc_h", "2e-6")),
            gc_tol=float(get("gc_tol", "1e-5")),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Read a config file and apply CLI overrides on top."""
    with open(path, "r", encoding="utf-8") as fh:
        items = parse_items(fh.read())
    for key, val in (overrides or {}).items():
        items[key] = val
    return build_config(items)


def echo_items(cfg: RunConfig) -> dict[str, str]:
    """The merged effective configuration, in config-file syntax.

    ``build_config(echo_items(cfg))`` reconstructs an equal RunConfig, which
    is what makes manifests replayable.
    """
    t, a = cfg.train, cfg.train.arch
    items: dict[str, str] = {
        "mode": t.mode,
        "omega": repr(t.omega),
        "lambda": repr(t.lambda_),
        "epochs": str(t.epochs),
        "batch_size": str(t.batch_size),
        "lr": repr(t.lr),
        "seed": str(t.seed),
        "resample_noise": "true" if t.resample_noise else "false",
        "tp_mode": t.tp_mode,
        "k_train": str(t.k_train),
        "normalize": "true" if t.normalize else "false",
        "stride": str(t.stride),
        "split_fraction": repr(t.split_fraction),
        "k_eval": str(t.k_eval),
        "t_obs": str(a.t_obs),
        "t_fut": str(a.t_fut),
        "feature_dim": str(a.feature_dim),
        "fe_hidden": ",".join(map(str, a.fe_hidden)),
        "sup_hidden": ",".join(map(str, a.sup_hidden)),
        "ss_hidden": ",".join(map(str, a.ss_hidden)),
        "latent_dim": str(a.latent_dim),
        "latent_std": repr(a.latent_std),
        "activation": a.activation,
        "decode": a.decode,
        "seeds": ",".join(map(str, cfg.seeds)),
        "sweep_omegas": ",".join(repr(w) for w in cfg.sweep_omegas),
        "gc_graphs": str(cfg.gc_graphs),
        "gc_batch": str(cfg.gc_batch),
        "gc_h": repr(cfg.gc_h),
        "gc_tol": repr(cfg.gc_tol),
    }
    if t.omega_test is not None:
        items["omega_test"] = repr(t.omega_test)
    if t.split_seed is not None:
        items["split_seed"] = str(t.split_seed)
    if t.dataset is not None:
        items["dataset"] = t.dataset
    if t.synth is not None:
        s = t.synth
        items.update(
            {
                "synth_family": s.family,
                "synth_agents": str(s.agents),
                "synth_steps": str(s.steps),
                "synth_dt": repr(s.dt),
                "synth_speed_range": f"{s.speed_range[0]!r},{s.speed_range[1]!r}",
                "synth_turn_rate_range": f"{s.turn_rate_range[0]!r},{s.turn_rate_range[1]!r}",
                "synth_amplitude_range": f"{s.amplitude_range[0]!r},{s.amplitude_range[1]!r}",
                "synth_period_range": f"{s.period_range[0]!r},{s.period_range[1]!r}",
                "synth_goal_count": str(s.goal_count),
                "synth_noise_std": repr(s.noise_std),
                "synth_start_box": repr(s.start_box),
                "synth_seed": str(s.seed),
            }
        )
        if s.scene_id is not None:
            items["synth_scene_id"] = s.scene_id
    if cfg.checkpoint is not None:
        items["checkpoint"] = cfg.checkpoint
    if cfg.source is not None:
        items["source"] = cfg.source
    return dict(sorted(items.items()))
