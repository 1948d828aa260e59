"""Acceptance criteria, one test per criterion, printed pass/fail lines.

The directional criteria (7-9) run the full harness on frozen synthetic
benchmarks: training is bit-deterministic given (config, seed, corpus),
so the medians asserted here are reproducible run to run. Every tolerance
is pinned in this file.
"""

import time
from dataclasses import replace

import numpy as np
import pytest

from sswnp import autodiff as ad
from sswnp.augment import sample_noise
from sswnp.benchmarks import (
    LEARNABILITY_CONFIG,
    LEARNABILITY_SPEC,
    PIECEWISE_CONFIG,
    PIECEWISE_SEEDS,
    PIECEWISE_SPEC,
    SWEEP_OMEGAS,
)
from sswnp.checks import run_composite_checks
from sswnp.cli import run as cli_run
from sswnp.data import future_array, window
from sswnp.evaluation import (
    ade,
    evaluate,
    fde,
    min_of_k,
    noise_factor_sweep,
    run_ablation,
    split_scene,
)
from sswnp.losses import self_supervised_loss
from sswnp.model import ArchConfig, PredictionSet, build_loss_graph, init_params
from sswnp.rng import stream
from sswnp.synth import SynthSpec, generate, linear_extrapolation_oracle
from sswnp.training import TrainConfig, train


def report(criterion: int, name: str, ok: bool, detail: str) -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[acceptance] criterion {criterion:02d} {name}: {status} ({detail})")
    assert ok, f"criterion {criterion} {name}: {detail}"


@pytest.fixture(scope="module")
def bench_ablation():
    return run_ablation(PIECEWISE_CONFIG, generate(PIECEWISE_SPEC), seeds=PIECEWISE_SEEDS)


@pytest.fixture(scope="module")
def bench_sweep():
    return noise_factor_sweep(
        PIECEWISE_CONFIG, generate(PIECEWISE_SPEC), SWEEP_OMEGAS, seeds=PIECEWISE_SEEDS
    )


def test_criterion_01_gradient_correctness():
    t0 = time.perf_counter()
    checks = run_composite_checks(count=100, seed=0, batch_max=4, t_obs=8, t_fut=12)
    elapsed = time.perf_counter() - t0
    worst = max(c.report.max_rel_error for c in checks)
    ok = all(c.report.passed for c in checks) and worst < 1e-5 and elapsed < 60.0
    report(1, "gradient correctness", ok,
           f"100 composite graphs, max rel err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_metric_oracles():
    gt12 = np.zeros((12, 2))
    checks = [
        abs(ade(gt12, gt12) - 0.0) <= 1e-9,
        abs(ade(gt12 + np.array([3.0, 4.0]), gt12) - 5.0) <= 1e-9,
        abs(fde(gt12 + np.array([3.0, 4.0]), gt12) - 5.0) <= 1e-9,
    ]
    last_dev = gt12.copy()
    last_dev[-1] = [0.0, 2.0]
    checks.append(abs(ade(last_dev, gt12) - 2.0 / 12.0) <= 1e-9)
    checks.append(abs(fde(last_dev, gt12) - 2.0) <= 1e-9)
    gt2 = np.zeros((4, 2))
    pset = PredictionSet(
        samples=np.stack([gt2 + np.array([0.5, 0.0]), gt2 + np.array([0.3, 0.0])]), k=2
    )
    m = min_of_k(pset, gt2)
    checks.append(abs(m.ade - 0.3) <= 1e-9)

    worst_shift = 0.0
    for i in range(1000):
        rng = stream(i, "accept-trans")
        pred = rng.uniform(-10, 10, (12, 2))
        gt = rng.uniform(-10, 10, (12, 2))
        shift = rng.uniform(-50, 50, 2)
        worst_shift = max(
            worst_shift,
            abs(ade(pred + shift, gt + shift) - ade(pred, gt)),
            abs(fde(pred + shift, gt + shift) - fde(pred, gt)),
        )
    checks.append(worst_shift <= 1e-12)
    report(2, "metric oracles", all(checks),
           f"hand values exact, translation drift {worst_shift:.2e} over 1000 cases")


def test_criterion_03_loss_identities():
    scene = generate(SynthSpec(family="piecewise-goal", agents=12, steps=30, seed=3))
    arch = ArchConfig(t_obs=8, t_fut=12, feature_dim=16, fe_hidden=[16], sup_hidden=[16],
                      ss_hidden=[16, 8], latent_dim=2, latent_std=0.1)
    cfg = TrainConfig(mode="B+SC+NP", omega=0.05, lambda_=0.1, epochs=3, batch_size=16,
                      seed=5, arch=arch)
    _, log = train(cfg, scene)
    worst_identity = max(
        abs(r.l_total - (r.l_sup + cfg.lambda_ * r.l_ss)) for r in log.records
    )

    params = init_params(arch, 0)
    lg = build_loss_graph(arch, params, rows=4, dual_view=True, with_noise=True, lambda_=0.0)
    rng = stream(1, "accept-loss")
    ad.forward(lg.graph, {
        "x": rng.uniform(-1, 1, (4, 16)),
        "latent": rng.uniform(-1, 1, (4, 2)),
        "gt": rng.uniform(-1, 1, (4, 24)),
        "noise_target": rng.uniform(-1, 1, (4, 16)),
    })
    grads = ad.backward(lg.graph)
    ss_norm = float(np.sqrt(sum(
        np.sum(g * g) for name, g in grads.items() if name.startswith("ss.")
    )))

    true_noise = stream(2, "accept-oracle").standard_normal((5, 8, 2))
    oracle_lss = self_supervised_loss(np.zeros_like(true_noise), true_noise, true_noise)

    ok = worst_identity <= 1e-12 and ss_norm <= 1e-12 and oracle_lss == 0.0
    report(3, "loss identities", ok,
           f"identity drift {worst_identity:.2e}, zero-lambda head grad {ss_norm:.2e}, "
           f"oracle L_ss {oracle_lss}")


def test_criterion_04_augmentation_statistics():
    omega = 0.1
    rng = stream(7, "bulk")
    draws = omega * rng.standard_normal((62_500, 8, 2))  # 1e6 scalars
    std = float(draws.std())
    mean = float(draws.mean())
    zero = sample_noise(8, 0.0, stream(0, "z"))
    ok = (
        0.098 <= std <= 0.102
        and abs(mean) <= 3.0 * omega / np.sqrt(draws.size)
        and np.array_equal(zero.scaled, np.zeros((8, 2)))
    )
    report(4, "augmentation statistics", ok,
           f"std {std:.5f} in [0.098, 0.102], |mean| {abs(mean):.2e} <= 3e-4, zero field exact")


def test_criterion_05_degenerate_collapse():
    scene = generate(SynthSpec(family="piecewise-goal", agents=10, steps=30, seed=3))
    arch = ArchConfig(t_obs=8, t_fut=12, feature_dim=16, fe_hidden=[16], sup_hidden=[16],
                      ss_hidden=[16, 8], latent_dim=2, latent_std=0.1)
    full = TrainConfig(mode="B+SC+NP", omega=0.0, lambda_=0.0, epochs=4, batch_size=16,
                       seed=5, arch=arch)
    _, log_full = train(full, scene)
    _, log_base = train(replace(full, mode="B"), scene)
    ok = log_full.records == log_base.records
    report(5, "degenerate-config collapse", ok,
           f"{len(log_full.records)} steps bit-identical to mode B")


def test_criterion_06_learnability():
    cfg = LEARNABILITY_CONFIG
    train_scene, holdout = split_scene(
        generate(LEARNABILITY_SPEC), cfg.split_fraction, cfg.split_seed
    )
    t0 = time.perf_counter()
    params, _ = train(cfg, train_scene)
    elapsed = time.perf_counter() - t0
    result = evaluate(params, cfg.arch, holdout, k=1, omega_test=0.0, seed=0)

    oracle_worst = 0.0
    for sample in window(holdout, 8, 12):
        pred = np.array([[w.x, w.y] for w in linear_extrapolation_oracle(sample)])
        oracle_worst = max(oracle_worst, ade(pred, future_array(sample)))

    ok = result.ade < 0.05 and elapsed < 300.0 and oracle_worst < 1e-12
    report(6, "learnability", ok,
           f"held-out ADE {result.ade:.4f} < 0.05 in {elapsed:.1f}s; "
           f"linear-extrapolation oracle ADE {oracle_worst:.2e}")


def test_criterion_07_ablation_direction(bench_ablation):
    med = {mode: bench_ablation.median[mode]["clean"].ade for mode in bench_ablation.modes}
    ok = med["B+SC+NP"] < med["B"] and med["B+SC+NP"] <= med["B+SC"]
    report(7, "ablation direction", ok,
           f"clean ADE medians B {med['B']:.4f}, B+SC {med['B+SC']:.4f}, "
           f"B+SC+NP {med['B+SC+NP']:.4f}")


def test_criterion_08_robustness_direction(bench_ablation):
    deg = {mode: bench_ablation.median_degradation[mode][0] for mode in ("B", "B+SC+NP")}
    ok = deg["B+SC+NP"] < deg["B"]
    report(8, "robustness direction", ok,
           f"median rel ADE degradation B {deg['B']:.4f} vs B+SC+NP {deg['B+SC+NP']:.4f} "
           f"at omega_test {bench_ablation.omega_test}")


def test_criterion_09_noise_factor_sweep_shape(bench_sweep):
    curve = {w: bench_sweep.median[w].ade for w in bench_sweep.omegas}
    ok = bench_sweep.best_omega != 0.0
    detail = ", ".join(f"{w}: {curve[w]:.4f}" for w in bench_sweep.omegas)
    report(9, "noise-factor sweep shape", ok,
           f"argmin omega {bench_sweep.best_omega} (not 0); curve {detail}")


def test_criterion_10_reproducibility(tmp_path):
    cfg_text = """\
synth_family = piecewise-goal
synth_agents = 10
synth_steps = 30
synth_seed = 4
mode = B+SC+NP
omega = 0.05
lambda = 0.1
epochs = 2
batch_size = 32
seed = 1
feature_dim = 8
fe_hidden = 8
sup_hidden = 8
ss_hidden = 8,4
latent_dim = 2
latent_std = 0.1
split_fraction = 0.7
split_seed = 2
k_eval = 2
sweep_omegas = 0,0.05
"""
    cfg = tmp_path / "run.cfg"
    cfg.write_text(cfg_text, encoding="utf-8")
    pairs = []
    for command, artifacts in [
        ("train", ["manifest.txt", "checkpoint.txt", "trainlog.csv", "lss_curve.csv"]),
        ("ablate", ["manifest.txt", "ablation.csv", "ablation.md"]),
        ("sweep", ["manifest.txt", "sweep.csv", "sweep_curve.csv"]),
    ]:
        out_a = tmp_path / f"{command}_a"
        out_b = tmp_path / f"{command}_b"
        assert cli_run([command, "--config", str(cfg), "--out", str(out_a)]) == 0
        assert cli_run([command, "--config", str(cfg), "--out", str(out_b)]) == 0
        for name in artifacts:
            pairs.append(
                (f"{command}/{name}", (out_a / name).read_bytes() == (out_b / name).read_bytes())
            )
    ok = all(same for _, same in pairs)
    report(10, "reproducibility", ok,
           f"{len(pairs)} artifacts byte-identical across repeated runs")
