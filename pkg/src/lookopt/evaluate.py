"""Plan simulation and reporting.

Simulates any look plan against a scenario to produce gap trajectories,
penalty totals, coverage percentages, and side-by-side comparisons.  The
evaluator accepts infeasible plans on purpose (the greedy baseline ignores
resolution thresholds); problems show up in the report's violations list
rather than as exceptions.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import statistics
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from lookopt.plan import LookPlan
from lookopt.scenario import PenaltyTable, Scenario, PRIORITY_CLASSES


def scenario_digest(scenario: Scenario) -> str:
    """Stable fingerprint used to refuse cross-scenario comparisons."""
    h = hashlib.sha256()
    h.update(f"{scenario.num_cells}|{scenario.num_swaths}|{scenario.never}".encode())
    for c in scenario.cells:
        h.update(f"{c.id},{c.row},{c.col},{c.priority_class},{c.rmin}".encode())
    for sw in scenario.swaths:
        h.update(f"{sw.index},{sw.time},{sw.sensor_id}".encode())
    return h.hexdigest()[:16]


def check_plan_indices(scenario: Scenario, plan: LookPlan) -> None:
    C, S = scenario.num_cells, scenario.num_swaths
    for lk in plan:
        if not (1 <= lk.c <= C and 1 <= lk.s <= S):
            raise ValueError(f"plan references unknown cell/swath ({lk.c}, {lk.s})")


def simulate_gaps(scenario: Scenario, plan: LookPlan) -> np.ndarray:
    """Gap matrix gaps[c][s]: swaths since the last look, 0 on a look."""
    check_plan_indices(scenario, plan)
    C, S = scenario.num_cells, scenario.num_swaths
    looked = {(lk.c, lk.s) for lk in plan}
    gaps = np.zeros((C + 1, S + 1), dtype=int)
    for c in range(1, C + 1):
        for s in range(1, S + 1):
            gaps[c, s] = 0 if (c, s) in looked else gaps[c, s - 1] + 1
    return gaps


def _never_terms(scenario: Scenario, plan: LookPlan) -> list[float]:
    counts = plan.looks_per_cell()
    terms = []
    for c in range(1, scenario.num_cells + 1):
        shortfall = min(1, max(0, scenario.looks_required - counts.get(c, 0)))
        if shortfall:
            terms.append(scenario.never * float(shortfall))
    return terms


def objective_value(scenario: Scenario, pen: PenaltyTable, plan: LookPlan) -> float:
    """Total objective of a plan: accumulated penalties plus never charges."""
    gaps = simulate_gaps(scenario, plan)
    C, S = scenario.num_cells, scenario.num_swaths
    terms = [float(pen.pen[c, s, gaps[c, s]])
             for c in range(1, C + 1) for s in range(1, S + 1)]
    terms.extend(_never_terms(scenario, plan))
    return math.fsum(terms)


@dataclass(frozen=True)
class ClassCount:
    unique_cells: int
    total_looks: int

    def brackets(self) -> str:
        """'n [m]' when looks exceed unique cells, matching report style."""
        if self.total_looks > self.unique_cells:
            return f"{self.unique_cells} [{self.total_looks}]"
        return str(self.unique_cells)


@dataclass(frozen=True)
class EvalReport:
    scenario_digest: str
    label: str
    num_cells: int
    coverage_pct: float  # fraction in [0, 1]
    per_class: dict[str, ClassCount]
    per_resolution: dict[int, dict[str, ClassCount]]
    total_penalty: float
    never_penalty: float
    objective: float
    violations: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "scenario_digest": self.scenario_digest,
            "label": self.label,
            "num_cells": self.num_cells,
            "coverage_pct": self.coverage_pct,
            "per_class": {k: [v.unique_cells, v.total_looks] for k, v in self.per_class.items()},
            "per_resolution": {
                str(r): {k: [v.unique_cells, v.total_looks] for k, v in per_cls.items()}
                for r, per_cls in sorted(self.per_resolution.items())
            },
            "total_penalty": self.total_penalty,
            "never_penalty": self.never_penalty,
            "objective": self.objective,
            "violations": list(self.violations),
        }


def coverage_report(scenario: Scenario, plan: LookPlan, pen: PenaltyTable | None = None,
                    label: str = "") -> EvalReport:
    """Full evaluation of one plan, violations included."""
    from lookopt.scenario import precompute_pen

    check_plan_indices(scenario, plan)
    if pen is None:
        pen = precompute_pen(scenario)
    C = scenario.num_cells

    unique: dict[str, set[int]] = {k: set() for k in PRIORITY_CLASSES}
    totals: dict[str, int] = {k: 0 for k in PRIORITY_CLASSES}
    res_unique: dict[int, dict[str, set[int]]] = {}
    res_totals: dict[int, dict[str, int]] = {}
    for lk in plan:
        cls = scenario.cell(lk.c).priority_class
        unique[cls].add(lk.c)
        totals[cls] += 1
        res_unique.setdefault(lk.r, {k: set() for k in PRIORITY_CLASSES})[cls].add(lk.c)
        res_totals.setdefault(lk.r, {k: 0 for k in PRIORITY_CLASSES})[cls] += 1

    covered_cells = plan.cells_looked()
    coverage = len(covered_cells) / C if C else 0.0

    gaps = simulate_gaps(scenario, plan)
    penalty_terms = [float(pen.pen[c, s, gaps[c, s]])
                     for c in range(1, C + 1) for s in range(1, scenario.num_swaths + 1)]
    total_penalty = math.fsum(penalty_terms)
    never_penalty = math.fsum(_never_terms(scenario, plan))

    violations = list(plan.violations(scenario))
    counts = plan.looks_per_cell()
    for c in range(1, C + 1):
        cell = scenario.cell(c)
        low_looks = sum(1 for lk in plan if lk.c == c and lk.r < cell.rmin)
        if low_looks > scenario.maxlow:
            violations.append(
                f"cell {c}: {low_looks} looks below threshold resolution {cell.rmin} "
                f"(allowance {scenario.maxlow})")
        if counts.get(c, 0) < scenario.looks_required:
            violations.append(f"cell {c}: {counts.get(c, 0)} looks, {scenario.looks_required} required")

    return EvalReport(
        scenario_digest=scenario_digest(scenario),
        label=label,
        num_cells=C,
        coverage_pct=coverage,
        per_class={k: ClassCount(len(unique[k]), totals[k]) for k in PRIORITY_CLASSES},
        per_resolution={
            r: {k: ClassCount(len(res_unique[r][k]), res_totals[r][k]) for k in PRIORITY_CLASSES}
            for r in sorted(res_unique)
        },
        total_penalty=total_penalty,
        never_penalty=never_penalty,
        objective=total_penalty + never_penalty,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class CompareReport:
    scenario_digest: str
    label_a: str
    label_b: str
    coverage_a: float
    coverage_b: float
    coverage_delta: float
    rel_coverage_improvement: float | None  # None when b has zero coverage
    per_class_delta: dict[str, tuple[int, int]]  # class -> (d unique, d looks)
    per_resolution_delta: dict[int, dict[str, tuple[int, int]]]
    objective_a: float
    objective_b: float

    def to_dict(self) -> dict:
        return {
            "scenario_digest": self.scenario_digest,
            "label_a": self.label_a,
            "label_b": self.label_b,
            "coverage_a": self.coverage_a,
            "coverage_b": self.coverage_b,
            "coverage_delta": self.coverage_delta,
            "rel_coverage_improvement": self.rel_coverage_improvement,
            "per_class_delta": {k: list(v) for k, v in self.per_class_delta.items()},
            "per_resolution_delta": {
                str(r): {k: list(v) for k, v in per_cls.items()}
                for r, per_cls in sorted(self.per_resolution_delta.items())
            },
            "objective_a": self.objective_a,
            "objective_b": self.objective_b,
        }

    CSV_FIELDS = (
        "scenario_digest", "label_a", "label_b", "coverage_a", "coverage_b",
        "coverage_delta", "rel_coverage_improvement", "objective_a", "objective_b",
    )

    def csv_row(self) -> dict[str, str]:
        row = {}
        for name in self.CSV_FIELDS:
            value = getattr(self, name)
            row[name] = "n/a" if value is None else str(value)
        return row


def compare(report_a: EvalReport, report_b: EvalReport) -> CompareReport:
    """Side-by-side deltas (a minus b) for two reports on the same scenario."""
    if report_a.scenario_digest != report_b.scenario_digest:
        raise ValueError("reports evaluate different scenarios")

    def cc(report: EvalReport, r: int, cls: str) -> ClassCount:
        return report.per_resolution.get(r, {}).get(cls, ClassCount(0, 0))

    res_keys = sorted(set(report_a.per_resolution) | set(report_b.per_resolution))
    rel = None
    if report_b.coverage_pct > 0:
        rel = (report_a.coverage_pct - report_b.coverage_pct) / report_b.coverage_pct
    return CompareReport(
        scenario_digest=report_a.scenario_digest,
        label_a=report_a.label or "a",
        label_b=report_b.label or "b",
        coverage_a=report_a.coverage_pct,
        coverage_b=report_b.coverage_pct,
        coverage_delta=report_a.coverage_pct - report_b.coverage_pct,
        rel_coverage_improvement=rel,
        per_class_delta={
            k: (report_a.per_class[k].unique_cells - report_b.per_class[k].unique_cells,
                report_a.per_class[k].total_looks - report_b.per_class[k].total_looks)
            for k in PRIORITY_CLASSES
        },
        per_resolution_delta={
            r: {
                k: (cc(report_a, r, k).unique_cells - cc(report_b, r, k).unique_cells,
                    cc(report_a, r, k).total_looks - cc(report_b, r, k).total_looks)
                for k in PRIORITY_CLASSES
            }
            for r in res_keys
        },
        objective_a=report_a.objective,
        objective_b=report_b.objective,
    )


def summarize_relative_improvements(values: list[float]) -> tuple[float, float]:
    """(mean, median) of a batch of relative coverage improvements."""
    if not values:
        raise ValueError("no improvements to summarize")
    return statistics.fmean(values), statistics.median(values)


def render_report(report: EvalReport) -> str:
    """Human-readable aligned table for one evaluation."""
    lines = []
    title = report.label or "plan"
    lines.append(f"evaluation: {title}")
    covered = round(report.coverage_pct * report.num_cells)
    lines.append(f"  coverage     {report.coverage_pct * 100:7.2f}%  ({covered} of {report.num_cells} cells)")
    lines.append(f"  objective    {report.objective:.6f}")
    lines.append(f"    penalty    {report.total_penalty:.6f}")
    lines.append(f"    never      {report.never_penalty:.6f}")
    lines.append("  class        cells (looks in brackets when larger)")
    for cls in PRIORITY_CLASSES:
        lines.append(f"    {cls:<10} {report.per_class[cls].brackets()}")
    if report.per_resolution:
        lines.append("  resolution   " + "  ".join(f"{cls}" for cls in PRIORITY_CLASSES))
        for r in sorted(report.per_resolution):
            cells = "  ".join(f"{report.per_resolution[r][cls].brackets():>10}"
                              for cls in PRIORITY_CLASSES)
            lines.append(f"    r={r:<8} {cells}")
    if report.violations:
        lines.append(f"  violations ({len(report.violations)}):")
        for v in report.violations:
            lines.append(f"    - {v}")
    else:
        lines.append("  violations: none")
    return "\n".join(lines) + "\n"


def render_compare(cmp: CompareReport) -> str:
    lines = []
    lines.append(f"comparison: {cmp.label_a} vs {cmp.label_b}")
    lines.append(f"  coverage     {cmp.coverage_a * 100:7.2f}%  vs {cmp.coverage_b * 100:7.2f}%"
                 f"  (delta {cmp.coverage_delta * 100:+.2f} pts)")
    rel = "n/a" if cmp.rel_coverage_improvement is None else f"{cmp.rel_coverage_improvement * 100:+.1f}%"
    lines.append(f"  relative coverage improvement: {rel}")
    lines.append(f"  objective    {cmp.objective_a:.6f}  vs {cmp.objective_b:.6f}")
    lines.append("  class        d-cells  d-looks")
    for cls in PRIORITY_CLASSES:
        du, dl = cmp.per_class_delta[cls]
        lines.append(f"    {cls:<10} {du:+7d}  {dl:+7d}")
    for r in sorted(cmp.per_resolution_delta):
        for cls in PRIORITY_CLASSES:
            du, dl = cmp.per_resolution_delta[r][cls]
            if du or dl:
                lines.append(f"    r={r} {cls:<10} {du:+7d}  {dl:+7d}")
    return "\n".join(lines) + "\n"


def save_report(report: EvalReport, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")


def compare_csv_line(cmp: CompareReport, include_header: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CompareReport.CSV_FIELDS))
    if include_header:
        writer.writeheader()
    writer.writerow(cmp.csv_row())
    return buf.getvalue()
