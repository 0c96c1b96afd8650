"""Seeded synthetic scenario generator.

Stands in for operational data so experiments are reproducible: satellites fly
straight strips with seeded headings, cells land on a planar grid with classes
assigned by seeded shuffle, and penalty curves come from per-class templates.
Fixed seed means byte-identical scenario files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lookopt.scenario import (
    HIGH,
    LOW,
    BudgetRow,
    GridCell,
    PenaltyCurve,
    Scenario,
    Sensor,
    StripFootprint,
    Swath,
    reference_curves,
    standard_sensor,
)


def _default_templates() -> dict[str, PenaltyCurve]:
    ref = reference_curves()
    return {HIGH: ref["urgent"], LOW: ref["gentle"]}


@dataclass(frozen=True)
class GenSpec:
    """Knobs for one synthetic scenario.

    `sensor_mix` holds one tuple of sensor kinds per satellite; every pass of
    a satellite spawns one swath per listed sensor, all at the pass time.
    `sensor_budgets` optionally replaces the standard per-kind budget tables
    (handy for desk-scale instances where tight budgets keep exact search
    tractable).
    """

    seed: int
    grid_rows: int = 10
    grid_cols: int = 10
    cell_km: float = 50.0
    n_high: int = 3
    n_low: int = 7
    n_satellites: int = 2
    passes_per_day: float = 6.0
    horizon_hours: float = 24.0
    swath_width_km: float = 120.0
    sensor_mix: tuple[tuple[str, ...], ...] = (
        ("electro_optical", "infrared_day", "infrared_night", "sar"),
        ("electro_optical", "infrared_day", "sar"),
    )
    curve_templates: dict[str, PenaltyCurve] = field(default_factory=_default_templates)
    curve_jitter: float = 0.2
    sensor_budgets: dict[str, dict[int, BudgetRow]] | None = None
    resolution_count: int = 5
    never: float = 100_000.0
    maxlow: int = 0
    rmin_high: int = 4
    rmin_low: int = 4
    looks_required: int = 1

    def passes_in_horizon(self) -> int:
        return int(self.horizon_hours * self.passes_per_day / 24.0)

    def violations(self) -> list[str]:
        out = []
        if self.n_high + self.n_low > self.grid_rows * self.grid_cols:
            out.append("more cells requested than grid positions")
        if self.n_high + self.n_low < 1:
            out.append("at least one cell required")
        if self.horizon_hours <= 0:
            out.append("horizon_hours must be > 0")
        if len(self.sensor_mix) != self.n_satellites:
            out.append("sensor_mix must list one entry per satellite")
        if self.passes_in_horizon() < 1:
            out.append("horizon too short for a single pass")
        if self.swath_width_km <= 0:
            out.append("swath_width_km must be > 0")
        for cls in (HIGH, LOW):
            if cls not in self.curve_templates:
                out.append(f"missing curve template for class {cls!r}")
        return out


def _make_sensor(spec: GenSpec, sensor_id: str, kind: str) -> Sensor:
    if spec.sensor_budgets and kind in spec.sensor_budgets:
        return Sensor(id=sensor_id, kind=kind, budget_rows=dict(spec.sensor_budgets[kind]))
    sensor = standard_sensor(sensor_id, kind)
    return sensor


def generate(spec: GenSpec) -> Scenario:
    """Deterministic scenario for a fixed spec (seed included)."""
    problems = spec.violations()
    if problems:
        raise ValueError("infeasible generator spec: " + "; ".join(problems))
    rng = np.random.default_rng(spec.seed)

    # Cells: seeded shuffle of grid positions, first n_high become high
    # priority; ids are then assigned in (row, col) order so they stay dense.
    positions = [(r, c) for r in range(spec.grid_rows) for c in range(spec.grid_cols)]
    order = rng.permutation(len(positions))
    chosen = [positions[i] for i in order[: spec.n_high + spec.n_low]]
    classed = [(pos, HIGH if i < spec.n_high else LOW) for i, pos in enumerate(chosen)]
    classed.sort(key=lambda item: item[0])
    cells = []
    for cid, ((row, col), cls) in enumerate(classed, start=1):
        center = ((col + 0.5) * spec.cell_km, (spec.grid_rows - row - 0.5) * spec.cell_km)
        cells.append(GridCell(
            id=cid, row=row, col=col, center=center, priority_class=cls,
            curve_id=cls, rmin=spec.rmin_high if cls == HIGH else spec.rmin_low,
        ))

    # Curves: per-class template with a seeded scale factor
    curves = {}
    for cls in (HIGH, LOW):
        scale = 1.0 if spec.curve_jitter == 0 else float(
            rng.uniform(1.0 - spec.curve_jitter, 1.0 + spec.curve_jitter))
        template = spec.curve_templates[cls]
        curves[cls] = PenaltyCurve(tuple((t, p * scale) for t, p in template.breakpoints))

    sensors: dict[str, Sensor] = {}
    width_x = spec.grid_cols * spec.cell_km
    width_y = spec.grid_rows * spec.cell_km
    half_diag = math.hypot(width_x, width_y)

    n_passes = spec.passes_in_horizon()
    interval = spec.horizon_hours / n_passes
    raw_swaths: list[tuple[float, int, int, StripFootprint, str]] = []
    for sat in range(spec.n_satellites):
        phase = float(rng.uniform(0.05, 0.95))
        sensor_ids = []
        for kind in spec.sensor_mix[sat]:
            sensor_id = f"sat{sat + 1}_{kind}"
            sensors[sensor_id] = _make_sensor(spec, sensor_id, kind)
            sensor_ids.append(sensor_id)
        for k in range(n_passes):
            t = (k + phase) * interval
            heading = float(rng.uniform(0.0, math.pi))
            cx = float(rng.uniform(0.0, width_x))
            cy = float(rng.uniform(0.0, width_y))
            dx, dy = math.cos(heading), math.sin(heading)
            strip = StripFootprint(
                entry=(cx - half_diag * dx, cy - half_diag * dy),
                exit=(cx + half_diag * dx, cy + half_diag * dy),
                width=spec.swath_width_km,
            )
            for pos, sid in enumerate(sensor_ids):
                raw_swaths.append((t, sat, pos, strip, sid))

    raw_swaths.sort(key=lambda item: (item[0], item[1], item[2]))
    swaths = tuple(
        Swath(index=i, time=t, sensor_id=sid, footprint=strip)
        for i, (t, _, _, strip, sid) in enumerate(raw_swaths, start=1)
    )

    return Scenario(
        cells=tuple(cells),
        curves=curves,
        sensors=sensors,
        swaths=swaths,
        cell_area=spec.cell_km * spec.cell_km,
        resolution_count=spec.resolution_count,
        never=spec.never,
        maxlow=spec.maxlow,
        looks_required=spec.looks_required,
    )


def desk_spec(seed: int, n_cells: int = 6, n_swaths: int = 4) -> GenSpec:
    """Tiny instance spec sized for the exact search (and for quick demos).

    Tight custom budgets (two usable resolutions, at most two cheap looks per
    swath) keep the allocation tree small.
    """
    n_high = max(1, n_cells // 3)
    return GenSpec(
        seed=seed,
        grid_rows=3,
        grid_cols=3,
        n_high=n_high,
        n_low=n_cells - n_high,
        n_satellites=1,
        passes_per_day=24.0 * n_swaths / 12.0,
        horizon_hours=12.0,
        swath_width_km=140.0,
        sensor_mix=(("sar",),),
        sensor_budgets={
            "sar": {1: BudgetRow(5_000.0, 40), 2: BudgetRow(2_500.0, 40)},
        },
        resolution_count=2,
        rmin_high=1,
        rmin_low=1,
    )


# ---------------------------------------------------------------------------
# JSON round trip for generator specs
# ---------------------------------------------------------------------------

def genspec_to_dict(spec: GenSpec) -> dict:
    data = {
        "seed": spec.seed,
        "grid_rows": spec.grid_rows,
        "grid_cols": spec.grid_cols,
        "cell_km": spec.cell_km,
        "n_high": spec.n_high,
        "n_low": spec.n_low,
        "n_satellites": spec.n_satellites,
        "passes_per_day": spec.passes_per_day,
        "horizon_hours": spec.horizon_hours,
        "swath_width_km": spec.swath_width_km,
        "sensor_mix": [list(mix) for mix in spec.sensor_mix],
        "curve_templates": {
            cls: [list(bp) for bp in curve.breakpoints]
            for cls, curve in sorted(spec.curve_templates.items())
        },
        "curve_jitter": spec.curve_jitter,
        "resolution_count": spec.resolution_count,
        "never": spec.never,
        "maxlow": spec.maxlow,
        "rmin_high": spec.rmin_high,
        "rmin_low": spec.rmin_low,
        "looks_required": spec.looks_required,
    }
    if spec.sensor_budgets is not None:
        data["sensor_budgets"] = {
            kind: {str(r): [row.area_budget, row.look_budget] for r, row in sorted(rows.items())}
            for kind, rows in sorted(spec.sensor_budgets.items())
        }
    return data


def genspec_from_dict(data: dict) -> GenSpec:
    kwargs = dict(data)
    if "sensor_mix" in kwargs:
        kwargs["sensor_mix"] = tuple(tuple(mix) for mix in kwargs["sensor_mix"])
    if "curve_templates" in kwargs:
        kwargs["curve_templates"] = {
            cls: PenaltyCurve(tuple((float(t), float(p)) for t, p in bps))
            for cls, bps in kwargs["curve_templates"].items()
        }
    if "sensor_budgets" in kwargs and kwargs["sensor_budgets"] is not None:
        kwargs["sensor_budgets"] = {
            kind: {int(r): BudgetRow(float(row[0]), int(row[1])) for r, row in rows.items()}
            for kind, rows in kwargs["sensor_budgets"].items()
        }
    return GenSpec(**kwargs)


def save_genspec(spec: GenSpec, path: str | Path) -> None:
    Path(path).write_text(json.dumps(genspec_to_dict(spec), indent=2, sort_keys=True) + "\n")


def load_genspec(path: str | Path) -> GenSpec:
    return genspec_from_dict(json.loads(Path(path).read_text()))
