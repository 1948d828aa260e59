#!/usr/bin/env python3
"""Mode ablation on the piecewise-goal benchmark.

Trains B, B+SC, and B+SC+NP under identical seeds and data, evaluates the
clean and noisy test environments, and writes the comparison tables with
the published NBA/GroupNet reference columns.
"""

import argparse
from pathlib import Path

from sswnp.benchmarks import PIECEWISE_CONFIG, PIECEWISE_SEEDS, PIECEWISE_SPEC
from sswnp.evaluation import run_ablation
from sswnp.reports import ablation_csv, ablation_markdown
from sswnp.synth import generate


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/synth_ablation", help="output directory")
    parser.add_argument(
        "--seeds", default=",".join(map(str, PIECEWISE_SEEDS)),
        help="comma-separated training seeds",
    )
    args = parser.parse_args()
    seeds = [int(s) for s in args.seeds.split(",")]

    report = run_ablation(PIECEWISE_CONFIG, generate(PIECEWISE_SPEC), seeds=seeds)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "ablation.csv").write_text(ablation_csv(report), encoding="utf-8")
    (out / "ablation.md").write_text(ablation_markdown(report), encoding="utf-8")
    print(ablation_markdown(report))
    print(f"wrote {out / 'ablation.csv'} and {out / 'ablation.md'}")


if __name__ == "__main__":
    main()
