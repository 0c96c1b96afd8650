"""Problem data model: grid cells, penalty curves, sensors, swaths.

A :class:`Scenario` is the single source of truth for one planning problem.
This module also derives per-look cost factors from sensor budgets, evaluates
penalty curves, and precomputes the penalty tensor used by every solver path.
All distances are planar km, areas sq km, times hours since scenario start.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

HIGH = "high"
LOW = "low"
PRIORITY_CLASSES = (HIGH, LOW)

SENSOR_KINDS = ("electro_optical", "infrared_day", "infrared_night", "sar")

# Default per-resolution budgets: resolution -> (square area budget in sq km,
# look count budget).  Electro-optical sensors only support a sparse set of
# resolutions; the remaining kinds share one denser table.
ELECTRO_OPTICAL_BUDGETS = {
    1: (500_000.0, 100),
    4: (10_000.0, 90),
    9: (500.0, 20),
}
OTHER_SENSOR_BUDGETS = {
    1: (500_000.0, 100),
    2: (100_000.0, 100),
    3: (50_000.0, 90),
    4: (10_000.0, 90),
    5: (5_000.0, 80),
    6: (1_000.0, 80),
    7: (500.0, 70),
    8: (100.0, 50),
    9: (50.0, 40),
}

DEFAULT_CELL_AREA = 2_500.0  # 50 km x 50 km cells


@dataclass(frozen=True)
class BudgetRow:
    """Budget pair for one sensor resolution."""

    area_budget: float
    look_budget: int


@dataclass(frozen=True)
class PenaltyCurve:
    """Piecewise-linear penalty as a function of hours since the last look.

    Breakpoints are (t, p) pairs with t strictly increasing, p nondecreasing,
    and (0, 0) first.  Beyond the last breakpoint the curve continues with the
    final segment's slope, so sustained neglect keeps getting more expensive.
    """

    breakpoints: tuple[tuple[float, float], ...]

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", tuple((float(t), float(p)) for t, p in self.breakpoints))

    def violations(self, label: str = "curve") -> list[str]:
        out = []
        bps = self.breakpoints
        if not bps:
            return [f"{label}: no breakpoints"]
        if bps[0] != (0.0, 0.0):
            out.append(f"{label}: first breakpoint must be (0, 0), got {bps[0]}")
        ts = [t for t, _ in bps]
        ps = [p for _, p in bps]
        if any(t1 >= t2 for t1, t2 in zip(ts, ts[1:])):
            out.append(f"{label}: breakpoint times not strictly increasing")
        if any(p1 > p2 for p1, p2 in zip(ps, ps[1:])):
            out.append(f"{label}: curve not nondecreasing")
        if any(p < 0 for p in ps) or any(t < 0 for t in ts):
            out.append(f"{label}: negative breakpoint coordinate")
        return out

    def evaluate_many(self, dt: np.ndarray) -> np.ndarray:
        """Vectorised curve evaluation; linear extrapolation past the end."""
        dt = np.asarray(dt, dtype=float)
        if dt.size and float(dt.min()) < 0:
            raise ValueError("elapsed time must be >= 0")
        ts = np.array([t for t, _ in self.breakpoints])
        ps = np.array([p for _, p in self.breakpoints])
        vals = np.interp(dt, ts, ps)
        if len(ts) >= 2:
            slope = (ps[-1] - ps[-2]) / (ts[-1] - ts[-2])
            beyond = dt > ts[-1]
            if np.any(beyond):
                vals = np.where(beyond, ps[-1] + slope * (dt - ts[-1]), vals)
        return vals


def eval_curve(curve: PenaltyCurve, dt: float) -> float:
    """Penalty incurred when `dt` hours have passed since the last look."""
    if dt < 0:
        raise ValueError(f"elapsed time must be >= 0, got {dt}")
    bps = curve.breakpoints
    ts = [t for t, _ in bps]
    ps = [p for _, p in bps]
    if dt <= ts[-1]:
        # bisect keeps breakpoint hits exact (no slope arithmetic on them)
        i = bisect_right(ts, dt) - 1
        if ts[i] == dt:
            return ps[i]
        slope = (ps[i + 1] - ps[i]) / (ts[i + 1] - ts[i])
        return ps[i] + slope * (dt - ts[i])
    if len(ts) < 2:
        return ps[-1]
    slope = (ps[-1] - ps[-2]) / (ts[-1] - ts[-2])
    return ps[-1] + slope * (dt - ts[-1])


@dataclass(frozen=True)
class GridCell:
    """One square of the area of operations.

    Row 0 is the northernmost row, column 0 the westernmost column; `center`
    is the cell midpoint in planar km.  `rmin` is the threshold resolution:
    looks below it are rationed by the scenario-wide `maxlow` allowance.
    """

    id: int
    row: int
    col: int
    center: tuple[float, float]
    priority_class: str
    curve_id: str
    rmin: int


@dataclass(frozen=True)
class Sensor:
    id: str
    kind: str
    budget_rows: dict[int, BudgetRow]


@dataclass(frozen=True)
class StripFootprint:
    """Ground strip between entry and exit points, `width` km across."""

    entry: tuple[float, float]
    exit: tuple[float, float]
    width: float


@dataclass(frozen=True)
class ExplicitFootprint:
    """Footprint given directly as the set of covered cell ids."""

    cells: frozenset[int]


@dataclass(frozen=True)
class Swath:
    """One pass of one sensor; also the model's discrete unit of time.

    Index 0 is a reserved dummy origin and never stored as a Swath.
    """

    index: int
    time: float
    sensor_id: str
    footprint: StripFootprint | ExplicitFootprint


@dataclass(frozen=True)
class Scenario:
    cells: tuple[GridCell, ...]
    curves: dict[str, PenaltyCurve]
    sensors: dict[str, Sensor]
    swaths: tuple[Swath, ...]
    cell_area: float = DEFAULT_CELL_AREA
    resolution_count: int = 5
    never: float = 100_000.0
    maxlow: int = 0
    looks_required: int = 1

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))
        object.__setattr__(self, "swaths", tuple(self.swaths))

    @property
    def num_cells(self) -> int:
        return len(self.cells)

    @property
    def num_swaths(self) -> int:
        return len(self.swaths)

    def cell(self, cell_id: int) -> GridCell:
        return self.cells[cell_id - 1]

    def swath(self, index: int) -> Swath:
        return self.swaths[index - 1]

    def swath_times(self) -> np.ndarray:
        """Times indexed by swath number, with the dummy origin at t=0."""
        return np.array([0.0] + [sw.time for sw in self.swaths])

    def swath_cost(self, swath: Swath, r: int) -> float | None:
        """Cost factor for one look at resolution r during `swath`.

        Returns None both for omitted (cost > 1) and unlisted resolutions, so
        callers can treat "unusable" uniformly.
        """
        sensor = self.sensors[swath.sensor_id]
        if r not in sensor.budget_rows:
            return None
        return cost_factor(sensor, r, self.cell_area)


@dataclass(frozen=True)
class PenaltyTable:
    """Precomputed penalty tensor pen[c][s][g].

    Entries exist for cells c in 1..C, swaths s in 0..S and gaps g in 0..G
    with G = S; positions with g > s are unused and stored as zero.  Row 0 of
    the cell axis is padding so indices match scenario numbering.
    """

    pen: np.ndarray  # shape (C + 1, S + 1, S + 1)

    def __post_init__(self):
        arr = np.asarray(self.pen, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "pen", arr)

    @property
    def num_cells(self) -> int:
        return self.pen.shape[0] - 1

    @property
    def num_swaths(self) -> int:
        return self.pen.shape[1] - 1

    @property
    def num_gaps(self) -> int:
        return self.pen.shape[2] - 1

    def value(self, c: int, s: int, g: int) -> float:
        if g > s:
            raise IndexError(f"gap {g} undefined at swath {s}")
        return float(self.pen[c, s, g])

    def violations(self) -> list[str]:
        out = []
        C, S, G = self.num_cells, self.num_swaths, self.num_gaps
        if G != S:
            out.append(f"gap axis {G} != swath axis {S}")
        if np.any(self.pen[:, :, 0] != 0.0):
            out.append("pen[c][s][0] != 0 for some (c, s)")
        for s in range(S + 1):
            block = self.pen[1:, s, : s + 1]
            if block.shape[1] > 1 and np.any(np.diff(block, axis=1) < 0):
                out.append(f"pen not nondecreasing in gap at swath {s}")
        return out


def cost_factor(sensor: Sensor, r: int, cell_area: float = DEFAULT_CELL_AREA) -> float | None:
    """Fraction of a swath's unit budget one look consumes, or None.

    The limiting budget is the smaller of the area budget (in cells) and the
    look count budget.  Costs above 1 mean the sensor cannot afford even a
    single look at that resolution, so the resolution is omitted (None).
    """
    row = sensor.budget_rows.get(r)
    if row is None:
        raise ValueError(f"sensor {sensor.id!r} has no budget for resolution {r}")
    limit = min(row.area_budget / cell_area, float(row.look_budget))
    cost = 1.0 / limit
    return None if cost > 1.0 else cost


def precompute_pen(scenario: Scenario) -> PenaltyTable:
    """Evaluate every cell's curve at every (swath, gap) elapsed time.

    pen[c][s][g] is the penalty charged at swath s when the last look was at
    swath s - g (with swath 0 the scenario start).  Cells sharing a curve get
    identical slices, so evaluation happens once per distinct curve.
    """
    C, S = scenario.num_cells, scenario.num_swaths
    times = scenario.swath_times()
    # dt[s][g] = elapsed hours at swath s for gap g (lower triangle, g >= 1)
    dt = np.zeros((S + 1, S + 1))
    for s in range(1, S + 1):
        for g in range(1, s + 1):
            dt[s, g] = times[s] - times[s - g]
    mask = np.tril(np.ones((S + 1, S + 1), dtype=bool), k=0)
    mask[:, 0] = False

    pen = np.zeros((C + 1, S + 1, S + 1))
    slices: dict[str, np.ndarray] = {}
    for cell in scenario.cells:
        cid = cell.curve_id
        if cid not in slices:
            sl = np.zeros((S + 1, S + 1))
            sl[mask] = scenario.curves[cid].evaluate_many(dt[mask])
            slices[cid] = sl
        pen[cell.id] = slices[cid]
    return PenaltyTable(pen)


def validate(scenario: Scenario) -> list[str]:
    """Check every structural invariant; returns all violations found."""
    out: list[str] = []
    C = scenario.num_cells

    ids = [c.id for c in scenario.cells]
    if ids != list(range(1, C + 1)):
        out.append("cell ids are not dense 1..C in order")
    seen_pos = set()
    for cell in scenario.cells:
        pos = (cell.row, cell.col)
        if pos in seen_pos:
            out.append(f"cell {cell.id}: duplicate grid position {pos}")
        seen_pos.add(pos)
        if not 1 <= cell.rmin <= scenario.resolution_count:
            out.append(f"cell {cell.id}: rmin {cell.rmin} outside 1..{scenario.resolution_count}")
        if cell.priority_class not in PRIORITY_CLASSES:
            out.append(f"cell {cell.id}: unknown priority class {cell.priority_class!r}")
        if cell.curve_id not in scenario.curves:
            out.append(f"cell {cell.id}: missing curve {cell.curve_id!r}")

    for cid, curve in sorted(scenario.curves.items()):
        out.extend(curve.violations(label=f"curve {cid!r}"))

    for sid, sensor in sorted(scenario.sensors.items()):
        if sensor.id != sid:
            out.append(f"sensor key {sid!r} != sensor id {sensor.id!r}")
        for r, row in sorted(sensor.budget_rows.items()):
            if not 1 <= r <= 9:
                out.append(f"sensor {sid!r}: resolution {r} outside 1..9")
            if row.area_budget <= 0 or row.look_budget <= 0:
                out.append(f"sensor {sid!r} r={r}: budgets must be positive")

    indices = [sw.index for sw in scenario.swaths]
    if indices != list(range(1, len(indices) + 1)):
        out.append("swath indices are not dense 1..S in order")
    prev_t = 0.0
    for sw in scenario.swaths:
        if sw.time <= 0:
            out.append(f"swath {sw.index}: time must be > 0")
        if sw.time < prev_t:
            out.append(f"swath {sw.index}: times not nondecreasing")
        prev_t = sw.time
        if sw.sensor_id not in scenario.sensors:
            out.append(f"swath {sw.index}: missing sensor {sw.sensor_id!r}")
        fp = sw.footprint
        if isinstance(fp, StripFootprint):
            if fp.entry == fp.exit:
                out.append(f"swath {sw.index}: degenerate strip (entry = exit)")
            if fp.width <= 0:
                out.append(f"swath {sw.index}: strip width must be > 0")
        else:
            bad = [c for c in sorted(fp.cells) if not 1 <= c <= C]
            if bad:
                out.append(f"swath {sw.index}: footprint lists unknown cells {bad}")

    if scenario.never <= 0:
        out.append("never penalty must be > 0")
    if scenario.cell_area <= 0:
        out.append("cell_area must be > 0")
    if scenario.maxlow < 0:
        out.append("maxlow must be >= 0")
    if scenario.looks_required < 1:
        out.append("looks_required must be >= 1")
    if scenario.resolution_count < 1:
        out.append("resolution count must be >= 1")
    return out


def reference_curves() -> dict[str, PenaltyCurve]:
    """Three fixture curves used by tests, demos, and generator templates.

    At 20 hours of neglect they charge 0.01 (gentle), 0.42 (urgent) and 0.08
    (moderate); the gentle curve reaches 0.05 at 37 hours.  Shapes between
    and beyond those anchors are fixture choices with steep late growth.
    """
    return {
        "gentle": PenaltyCurve(((0.0, 0.0), (20.0, 0.01), (37.0, 0.05), (72.0, 1.0), (96.0, 5.0))),
        "urgent": PenaltyCurve(((0.0, 0.0), (20.0, 0.42), (48.0, 2.5), (96.0, 12.0))),
        "moderate": PenaltyCurve(((0.0, 0.0), (20.0, 0.08), (48.0, 0.9), (96.0, 6.0))),
    }


def standard_sensor(sensor_id: str, kind: str) -> Sensor:
    """Sensor with the default budget table for its kind."""
    table = ELECTRO_OPTICAL_BUDGETS if kind == "electro_optical" else OTHER_SENSOR_BUDGETS
    rows = {r: BudgetRow(area, looks) for r, (area, looks) in table.items()}
    return Sensor(id=sensor_id, kind=kind, budget_rows=rows)


def with_overrides(scenario: Scenario, *, never: float | None = None,
                   maxlow: int | None = None, rmin: int | None = None,
                   looks_required: int | None = None) -> Scenario:
    """Copy of `scenario` with selected global parameters replaced."""
    cells = scenario.cells
    if rmin is not None:
        cells = tuple(replace(c, rmin=rmin) for c in cells)
    return replace(
        scenario,
        cells=cells,
        never=scenario.never if never is None else never,
        maxlow=scenario.maxlow if maxlow is None else maxlow,
        looks_required=scenario.looks_required if looks_required is None else looks_required,
    )


# ---------------------------------------------------------------------------
# JSON schema: top-level keys cells / curves / sensors / swaths / params.
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    def footprint_dict(fp):
        if isinstance(fp, ExplicitFootprint):
            return {"cells": sorted(fp.cells)}
        return {"entry": list(fp.entry), "exit": list(fp.exit), "width": fp.width}

    return {
        "cells": [
            {
                "id": c.id,
                "row": c.row,
                "col": c.col,
                "center": list(c.center),
                "priority_class": c.priority_class,
                "curve_id": c.curve_id,
                "rmin": c.rmin,
            }
            for c in scenario.cells
        ],
        "curves": {
            cid: {"breakpoints": [list(bp) for bp in curve.breakpoints]}
            for cid, curve in sorted(scenario.curves.items())
        },
        "sensors": {
            sid: {
                "id": s.id,
                "kind": s.kind,
                "budget_rows": {
                    str(r): {"area_budget": row.area_budget, "look_budget": row.look_budget}
                    for r, row in sorted(s.budget_rows.items())
                },
            }
            for sid, s in sorted(scenario.sensors.items())
        },
        "swaths": [
            {
                "index": sw.index,
                "time": sw.time,
                "sensor_id": sw.sensor_id,
                "footprint": footprint_dict(sw.footprint),
            }
            for sw in scenario.swaths
        ],
        "params": {
            "cell_area": scenario.cell_area,
            "R": scenario.resolution_count,
            "never": scenario.never,
            "maxlow": scenario.maxlow,
            "looks_required": scenario.looks_required,
        },
    }


def scenario_from_dict(data: dict) -> Scenario:
    cells = tuple(
        GridCell(
            id=int(c["id"]),
            row=int(c["row"]),
            col=int(c["col"]),
            center=(float(c["center"][0]), float(c["center"][1])),
            priority_class=c["priority_class"],
            curve_id=c["curve_id"],
            rmin=int(c["rmin"]),
        )
        for c in data["cells"]
    )
    curves = {
        cid: PenaltyCurve(tuple((float(t), float(p)) for t, p in spec["breakpoints"]))
        for cid, spec in data["curves"].items()
    }
    sensors = {}
    for sid, spec in data["sensors"].items():
        rows = {
            int(r): BudgetRow(float(b["area_budget"]), int(b["look_budget"]))
            for r, b in spec["budget_rows"].items()
        }
        sensors[sid] = Sensor(id=spec.get("id", sid), kind=spec["kind"], budget_rows=rows)
    swaths = []
    for sw in data["swaths"]:
        fp = sw["footprint"]
        if "cells" in fp:
            footprint = ExplicitFootprint(frozenset(int(c) for c in fp["cells"]))
        else:
            footprint = StripFootprint(
                entry=(float(fp["entry"][0]), float(fp["entry"][1])),
                exit=(float(fp["exit"][0]), float(fp["exit"][1])),
                width=float(fp["width"]),
            )
        swaths.append(Swath(index=int(sw["index"]), time=float(sw["time"]),
                            sensor_id=sw["sensor_id"], footprint=footprint))
    params = data.get("params", {})
    return Scenario(
        cells=cells,
        curves=curves,
        sensors=sensors,
        swaths=tuple(swaths),
        cell_area=float(params.get("cell_area", DEFAULT_CELL_AREA)),
        resolution_count=int(params.get("R", params.get("resolution_count", 5))),
        never=float(params.get("never", 100_000.0)),
        maxlow=int(params.get("maxlow", 0)),
        looks_required=int(params.get("looks_required", 1)),
    )


def save_scenario(scenario: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=2, sort_keys=True) + "\n")


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))
