"""CSV and aligned-markdown emission for harness results.

CSV cells use shortest round-trip float formatting so reports are
bit-reproducible; markdown tables round to three decimals for reading.
Plot data is emitted as plain (x, y) CSV series for external tools.
"""

from __future__ import annotations

from .evaluation import AblationReport, SweepReport
from .training import LambdaDiagnostic

__all__ = [
    "markdown_table",
    "xy_csv",
    "ablation_csv",
    "ablation_markdown",
    "sweep_csv",
    "sweep_markdown",
    "lss_curve_csv",
]


def markdown_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [
        max(len(header[c]), *(len(r[c]) for r in rows)) if rows else len(header[c])
        for c in range(len(header))
    ]
    fmt_row = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"
    lines = [fmt_row(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt_row(r) for r in rows]
    return "\n".join(lines) + "\n"


def xy_csv(pairs: list[tuple[float, float]], x_name: str = "x", y_name: str = "y") -> str:
    lines = [f"{x_name},{y_name}"]
    lines += [f"{x!r},{y!r}" for x, y in pairs]
    return "\n".join(lines) + "\n"


def _fmt3(v: float) -> str:
    return f"{v:.3f}"


def _ref_pair(ref: tuple[float, float] | None) -> tuple[str, str]:
    if ref is None:
        return "", ""
    return repr(ref[0]), repr(ref[1])


def ablation_csv(report: AblationReport) -> str:
    lines = ["seed,mode,environment,ade,fde,k,n,ref_nba_ade,ref_nba_fde"]
    def ref_for(mode: str, env: str) -> tuple[float, float] | None:
        if env == "clean":
            return report.reference.get(mode)
        return report.reference_robustness.get(mode, {}).get("noisy")

    for seed in report.seeds:
        for mode in report.modes:
            for env in ("clean", "noisy"):
                m = report.per_seed[seed][mode][env]
                ra, rf = _ref_pair(ref_for(mode, env))
                lines.append(
                    f"{seed},{mode},{env},{m.ade!r},{m.fde!r},{m.k},{m.n},{ra},{rf}"
                )
    for mode in report.modes:
        for env in ("clean", "noisy"):
            m = report.median[mode][env]
            ra, rf = _ref_pair(ref_for(mode, env))
            lines.append(f"median,{mode},{env},{m.ade!r},{m.fde!r},{m.k},{m.n},{ra},{rf}")
    return "\n".join(lines) + "\n"


def ablation_markdown(report: AblationReport) -> str:
    header = [
        "mode",
        "clean ADE/FDE",
        "noisy ADE/FDE",
        "rel ADE degr.",
        "ref NBA clean ADE/FDE",
        "ref NBA noisy ADE/FDE",
    ]
    rows = []
    for mode in report.modes:
        clean = report.median[mode]["clean"]
        noisy = report.median[mode]["noisy"]
        deg = report.median_degradation[mode][0]
        ref_c = report.reference.get(mode)
        ref_n = report.reference_robustness.get(mode, {}).get("noisy")
        rows.append(
            [
                mode,
                f"{_fmt3(clean.ade)}/{_fmt3(clean.fde)}",
                f"{_fmt3(noisy.ade)}/{_fmt3(noisy.fde)}",
                _fmt3(deg),
                f"{ref_c[0]}/{ref_c[1]}" if ref_c else "-",
                f"{ref_n[0]}/{ref_n[1]}" if ref_n else "-",
            ]
        )
    caption = (
        f"Seed-median over seeds {report.seeds}, noisy environment at "
        f"omega_test={report.omega_test!r}. Reference columns are published "
        "NBA/GroupNet results, shown for context only.\n\n"
    )
    return caption + markdown_table(header, rows)


def sweep_csv(report: SweepReport) -> str:
    ref = {w: (a, f) for w, a, f in report.reference}
    lines = ["seed,omega,ade,fde,k,n,ref_nba_ade,ref_nba_fde"]
    for seed in report.seeds:
        for omega in report.omegas:
            m = report.per_seed[seed][omega]
            ra, rf = _ref_pair(ref.get(omega))
            lines.append(f"{seed},{omega!r},{m.ade!r},{m.fde!r},{m.k},{m.n},{ra},{rf}")
    for omega in report.omegas:
        m = report.median[omega]
        ra, rf = _ref_pair(ref.get(omega))
        lines.append(f"median,{omega!r},{m.ade!r},{m.fde!r},{m.k},{m.n},{ra},{rf}")
    lines.append(f"best,{report.best_omega!r},,,,,,")
    return "\n".join(lines) + "\n"


def sweep_markdown(report: SweepReport) -> str:
    header = ["omega", "ADE", "FDE", "ref NBA ADE/FDE"]
    ref = {w: (a, f) for w, a, f in report.reference}
    rows = []
    for omega in report.omegas:
        m = report.median[omega]
        r = ref.get(omega)
        rows.append(
            [
                repr(omega),
                _fmt3(m.ade),
                _fmt3(m.fde),
                f"{r[0]}/{r[1]}" if r else "-",
            ]
        )
    caption = (
        f"Clean held-out metrics per training noise factor (seed-median over "
        f"{report.seeds}); best omega by median ADE: {report.best_omega!r}.\n\n"
    )
    return caption + markdown_table(header, rows)


def lss_curve_csv(diag: LambdaDiagnostic) -> str:
    return xy_csv([(float(s), v) for s, v in diag.curve], "step", "l_ss")
