"""Report figures rendered to files, with plain-text data alongside.

Every figure writer also emits a whitespace-delimited .dat companion so the
numbers behind a plot stay greppable and replottable with other tools.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from lookopt.evaluate import CompareReport, EvalReport
from lookopt.plan import LookPlan
from lookopt.scenario import PRIORITY_CLASSES, Scenario, eval_curve


def penalty_trajectories(scenario: Scenario, plan: LookPlan, out_dir: str | Path,
                         cell_ids: list[int] | None = None, stem: str = "trajectories",
                         samples_per_segment: int = 8) -> tuple[Path, Path]:
    """Pending-penalty sawtooth per cell: grows between looks, resets on one.

    Returns (png_path, dat_path).  Defaults to the first six cells to keep
    the figure readable.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cell_ids is None:
        cell_ids = [c.id for c in scenario.cells[:6]]

    times = [0.0] + [sw.time for sw in scenario.swaths]
    looked = {(lk.c, lk.s) for lk in plan}

    columns: dict[int, tuple[list[float], list[float]]] = {}
    for cid in cell_ids:
        curve = scenario.curves[scenario.cell(cid).curve_id]
        xs: list[float] = []
        ys: list[float] = []
        last_t = 0.0
        for s in range(1, scenario.num_swaths + 1):
            t = times[s]
            for k in range(samples_per_segment + 1):
                tt = last_t + (t - last_t) * k / samples_per_segment
                xs.append(tt)
                ys.append(eval_curve(curve, tt - last_t))
            if (cid, s) in looked:
                xs.append(t)
                ys.append(0.0)
                last_t = t
        columns[cid] = (xs, ys)

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for cid, (xs, ys) in columns.items():
        cls = scenario.cell(cid).priority_class
        ax.plot(xs, ys, label=f"cell {cid} ({cls})")
    for s in range(1, scenario.num_swaths + 1):
        ax.axvline(times[s], color="0.85", lw=0.8, zorder=0)
    ax.set_xlabel("hours since start")
    ax.set_ylabel("pending penalty")
    ax.set_title("penalty growth and look resets")
    ax.legend(fontsize=8)
    fig.tight_layout()
    png_path = out_dir / f"{stem}.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)

    dat_path = out_dir / f"{stem}.dat"
    with dat_path.open("w") as fh:
        fh.write("# time_hours penalty (one block per cell, blank-line separated)\n")
        for cid, (xs, ys) in columns.items():
            fh.write(f"# cell {cid}\n")
            for x, y in zip(xs, ys):
                fh.write(f"{x:.6f} {y:.9f}\n")
            fh.write("\n")
    return png_path, dat_path


def coverage_comparison(cmp: CompareReport, report_a: EvalReport, report_b: EvalReport,
                        out_dir: str | Path, stem: str = "coverage") -> tuple[Path, Path]:
    """Grouped bars: overall coverage plus per-class unique cells."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    labels = ["coverage %"] + [f"{cls} cells" for cls in PRIORITY_CLASSES]
    values_a = [report_a.coverage_pct * 100] + [
        report_a.per_class[cls].unique_cells for cls in PRIORITY_CLASSES]
    values_b = [report_b.coverage_pct * 100] + [
        report_b.per_class[cls].unique_cells for cls in PRIORITY_CLASSES]

    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(labels))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], values_a, width, label=cmp.label_a)
    ax.bar([x + width / 2 for x in xs], values_b, width, label=cmp.label_b)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_title(f"{cmp.label_a} vs {cmp.label_b}")
    ax.legend()
    fig.tight_layout()
    png_path = out_dir / f"{stem}.png"
    fig.savefig(png_path, dpi=150)
    plt.close(fig)

    dat_path = out_dir / f"{stem}.dat"
    with dat_path.open("w") as fh:
        fh.write(f"# metric {cmp.label_a} {cmp.label_b}\n")
        for label, va, vb in zip(labels, values_a, values_b):
            fh.write(f"{label.replace(' ', '_')} {va:.6f} {vb:.6f}\n")
    return png_path, dat_path
