"""Greedy look-allocation baseline at a fixed, user-chosen resolution.

Swaths are processed in index order.  Within a swath every covered cell is
ranked by its pending penalty (curve value at hours since its last look),
highest first, ties broken north-to-south then west-to-east, and looks are
assigned until the next look would exceed the unit budget.  The baseline
deliberately ignores resolution thresholds and the low-resolution allowance;
the evaluator reports those as violations instead.
"""

from __future__ import annotations

from lookopt.geometry import CoverageSets
from lookopt.plan import BUDGET_SLACK, Look, LookPlan
from lookopt.scenario import Scenario, eval_curve

# Re-exported here because plans are this module's primary output shape.
__all__ = ["greedy_plan", "LookPlan", "Look"]


def greedy_plan(scenario: Scenario, cov: CoverageSets, resolution: int) -> LookPlan:
    """Run the greedy baseline with every look at `resolution`.

    Raises if any swath's sensor cannot afford a look at that resolution,
    naming the first such swath.
    """
    for sw in scenario.swaths:
        if scenario.swath_cost(sw, resolution) is None:
            raise ValueError(
                f"resolution {resolution} is unusable for swath {sw.index} "
                f"(sensor {sw.sensor_id!r})")

    last_look: dict[int, float] = {}  # cell id -> time of last look (absent = never)
    looks: list[Look] = []
    for sw in scenario.swaths:
        cost = scenario.swath_cost(sw, resolution)
        candidates = []
        for cell_id in cov.covered[sw.index]:
            cell = scenario.cell(cell_id)
            elapsed = sw.time - last_look.get(cell_id, 0.0)
            pending = eval_curve(scenario.curves[cell.curve_id], elapsed)
            # sort: largest pending penalty first, then north-to-south,
            # west-to-east (smaller row, then smaller column)
            candidates.append((-pending, cell.row, cell.col, cell_id))
        candidates.sort()
        spent = 0.0
        for _, _, _, cell_id in candidates:
            if spent + cost > 1.0 + BUDGET_SLACK:
                break
            spent += cost
            looks.append(Look(cell_id, sw.index, resolution))
            last_look[cell_id] = sw.time
    return LookPlan(tuple(looks))
