"""Operator entry point: generate, train, evaluate, ablate, sweep, report.

Every run reads one config file (plus ``--set key=value`` overrides),
writes its artifacts under ``--out``, and finishes with a ``manifest.txt``
recording the merged effective configuration and a sha256 line per
artifact. Replaying the manifest's config with the same seed reproduces
every artifact bit for bit.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
from pathlib import Path

from . import autodiff as ad
from .checks import run_composite_checks
from .config import ConfigError, RunConfig, echo_items, load_config
from .data import ParseError, Scene, parse_corpus, serialize_corpus
from .evaluation import evaluate, noise_factor_sweep, run_ablation
from .model import load_checkpoint
from .reports import (
    ablation_csv,
    ablation_markdown,
    lss_curve_csv,
    sweep_csv,
    sweep_markdown,
    xy_csv,
)
from .synth import generate
from .training import (
    NonFiniteLossError,
    StepRecord,
    TrainLog,
    lambda_diagnostic,
    train,
)

__all__ = ["main", "run"]


class UsageError(Exception):
    pass


class GradCheckFailed(ArithmeticError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would sys.exit(2); we map usage to 1
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sswnp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in [
        ("synth", "generate a synthetic corpus"),
        ("train", "train a model and write checkpoint + loss log"),
        ("eval", "evaluate a checkpoint on a corpus"),
        ("ablate", "train/evaluate all modes in clean and noisy environments"),
        ("sweep", "train one model per noise factor"),
        ("report", "derive the noise-loss diagnostic from a finished run"),
        ("grad-check", "verify gradients of random composite objectives"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to key = value config file")
        p.add_argument("--out", required=True, help="output directory (created if absent)")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override a config entry (repeatable)",
        )
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
    return parser


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    digest.update(path.read_bytes())
    return digest.hexdigest()


def _write_manifest(out: Path, command: str, cfg: RunConfig, artifacts: list[str]) -> None:
    lines = [f"command = {command}"]
    lines += [f"{k} = {v}" for k, v in echo_items(cfg).items()]
    lines += [f"sha256 {_sha256(out / rel)}  {rel}" for rel in sorted(artifacts)]
    (out / "manifest.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load_corpus(cfg: RunConfig) -> Scene:
    if cfg.train.dataset is not None:
        with open(cfg.train.dataset, "r", encoding="utf-8") as fh:
            return parse_corpus(fh)
    if cfg.train.synth is not None:
        return generate(cfg.train.synth)
    raise ConfigError("config needs either 'dataset = <path>' or synth_* keys")


def _write(out: Path, rel: str, text: str, artifacts: list[str]) -> None:
    (out / rel).write_text(text, encoding="utf-8")
    artifacts.append(rel)


def _cmd_synth(cfg: RunConfig, out: Path) -> list[str]:
    if cfg.train.synth is None:
        raise ConfigError("synth requires synth_* keys in the config")
    artifacts: list[str] = []
    _write(out, "corpus.txt", serialize_corpus(generate(cfg.train.synth)), artifacts)
    return artifacts


def _cmd_train(cfg: RunConfig, out: Path) -> list[str]:
    corpus = _load_corpus(cfg)
    artifacts: list[str] = []
    params, log = train(cfg.train, corpus, checkpoint_path=str(out / "checkpoint.txt"))
    artifacts.append("checkpoint.txt")
    _write(out, "trainlog.csv", log.to_csv(), artifacts)
    if log.mode == "B+SC+NP" and log.lambda_ > 0:
        _write(out, "lss_curve.csv", lss_curve_csv(lambda_diagnostic(log)), artifacts)
    last = log.records[-1]
    print(
        f"trained mode={log.mode} steps={len(log.records)} "
        f"final l_total={last.l_total:.6g} ({log.wall_clock:.2f}s)"
    )
    return artifacts


def _cmd_eval(cfg: RunConfig, out: Path) -> list[str]:
    if cfg.checkpoint is None:
        raise ConfigError("eval requires 'checkpoint = <path>'")
    arch, params = load_checkpoint(cfg.checkpoint)
    corpus = _load_corpus(cfg)
    omega_test = cfg.train.omega_test if cfg.train.omega_test is not None else 0.0
    result = evaluate(
        params,
        arch,
        corpus,
        k=cfg.train.k_eval,
        omega_test=omega_test,
        seed=cfg.train.seed,
        stride=cfg.train.stride,
        normalize_inputs=cfg.train.normalize,
    )
    artifacts: list[str] = []
    text = "ade,fde,k,n,omega_test\n" + (
        f"{result.ade!r},{result.fde!r},{result.k},{result.n},{omega_test!r}\n"
    )
    _write(out, "metrics.csv", text, artifacts)
    print(f"ade={result.ade:.6g} fde={result.fde:.6g} (k={result.k}, n={result.n})")
    return artifacts


def _cmd_ablate(cfg: RunConfig, out: Path) -> list[str]:
    corpus = _load_corpus(cfg)
    report = run_ablation(cfg.train, corpus, seeds=cfg.seeds)
    artifacts: list[str] = []
    _write(out, "ablation.csv", ablation_csv(report), artifacts)
    _write(out, "ablation.md", ablation_markdown(report), artifacts)
    print(ablation_markdown(report))
    return artifacts


def _cmd_sweep(cfg: RunConfig, out: Path) -> list[str]:
    corpus = _load_corpus(cfg)
    report = noise_factor_sweep(cfg.train, corpus, cfg.sweep_omegas, seeds=cfg.seeds)
    artifacts: list[str] = []
    _write(out, "sweep.csv", sweep_csv(report), artifacts)
    _write(out, "sweep.md", sweep_markdown(report), artifacts)
    curve = [(w, report.median[w].ade) for w in report.omegas]
    _write(out, "sweep_curve.csv", xy_csv(curve, "omega", "ade"), artifacts)
    print(sweep_markdown(report))
    return artifacts


def _read_manifest_items(path: Path) -> dict[str, str]:
    items: dict[str, str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("sha256 ") or not line.strip():
            continue
        key, _, val = line.partition("=")
        items[key.strip()] = val.strip()
    return items


def _cmd_report(cfg: RunConfig, out: Path) -> list[str]:
    if cfg.source is None:
        raise ConfigError("report requires 'source = <run dir>'")
    src = Path(cfg.source)
    manifest = _read_manifest_items(src / "manifest.txt")
    mode = manifest.get("mode", "")
    lambda_ = float(manifest.get("lambda", "0"))
    records = []
    for line in (src / "trainlog.csv").read_text(encoding="utf-8").splitlines()[1:]:
        e, s, l_sup, l_ss, l_total = line.split(",")
        records.append(StepRecord(int(e), int(s), float(l_sup), float(l_ss), float(l_total)))
    log = TrainLog(mode=mode, lambda_=lambda_, records=records, wall_clock=0.0, checkpoint_path=None)
    diag = lambda_diagnostic(log)
    artifacts: list[str] = []
    _write(out, "lss_curve.csv", lss_curve_csv(diag), artifacts)
    summary = (
        f"steps = {len(diag.curve)}\n"
        f"epochs = {len(diag.epoch_means)}\n"
        f"decrease_fraction = {diag.decrease_fraction!r}\n"
        f"first_epoch_mean = {diag.epoch_means[0]!r}\n"
        f"final_epoch_mean = {diag.epoch_means[-1]!r}\n"
    )
    _write(out, "lss_summary.txt", summary, artifacts)
    print(summary, end="")
    return artifacts


def _cmd_grad_check(cfg: RunConfig, out: Path) -> list[str]:
    checks = run_composite_checks(
        count=cfg.gc_graphs,
        seed=cfg.train.seed,
        batch_max=cfg.gc_batch,
        t_obs=cfg.train.arch.t_obs,
        t_fut=cfg.train.arch.t_fut,
        h=cfg.gc_h,
        tol=cfg.gc_tol,
    )
    lines = ["graph,batch,lambda,max_rel_error,passed"]
    for c in checks:
        lines.append(
            f"{c.index},{c.batch},{c.lambda_!r},{c.report.max_rel_error!r},{c.report.passed}"
        )
    artifacts: list[str] = []
    _write(out, "gradcheck.csv", "\n".join(lines) + "\n", artifacts)
    worst = max(c.report.max_rel_error for c in checks)
    failed = [c.index for c in checks if not c.report.passed]
    print(f"{len(checks)} graphs, worst relative error {worst:.3e}")
    if failed:
        raise GradCheckFailed(f"gradient check failed for graphs {failed}")
    return artifacts


_COMMANDS = {
    "synth": _cmd_synth,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "ablate": _cmd_ablate,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "grad-check": _cmd_grad_check,
}


def run(argv: list[str]) -> int:
    """Parse argv, dispatch, write manifest; returns the process exit code."""
    try:
        args = _build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1

    overrides: dict[str, str] = {}
    for pair in args.overrides:
        if "=" not in pair:
            print(f"usage error: --set expects KEY=VALUE, got {pair!r}", file=sys.stderr)
            return 1
        key, _, val = pair.partition("=")
        overrides[key.strip()] = val.strip()
    if args.seed is not None:
        overrides["seed"] = str(args.seed)

    try:
        cfg = load_config(args.config, overrides)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        artifacts = _COMMANDS[args.command](cfg, out)
        _write_manifest(out, args.command, cfg, artifacts)
    except (ConfigError, ParseError, OSError, ValueError) as exc:
        print(f"data/config error: {exc}", file=sys.stderr)
        return 2
    except (NonFiniteLossError, ad.NonFiniteError, GradCheckFailed) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
