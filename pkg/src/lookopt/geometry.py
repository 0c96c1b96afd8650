"""Swath-to-cell coverage using center-point overlap.

A strip covers a cell when the cell center lies within half the strip width
of the entry-exit segment (distance to the segment, not the infinite line;
the boundary counts as covered).  Center-point overlap can credit a swath
with slightly more cells than an area-overlap test would; explicit footprints
are the escape hatch when exact cell sets are known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from lookopt.scenario import ExplicitFootprint, GridCell, Scenario, Swath


@dataclass(frozen=True)
class CoverageSets:
    """Map from swath index to the ids of the cells it covers."""

    covered: dict[int, frozenset[int]]

    def cells_for(self, swath_index: int) -> frozenset[int]:
        return self.covered[swath_index]


def point_segment_distance(p: tuple[float, float], a: tuple[float, float],
                           b: tuple[float, float]) -> float:
    """Distance from point p to the finite segment a-b."""
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    seg2 = dx * dx + dy * dy
    if seg2 == 0.0:
        raise ValueError("degenerate segment: endpoints coincide")
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    t = max(0.0, min(1.0, t))
    cx, cy = ax + t * dx, ay + t * dy
    return math.hypot(px - cx, py - cy)


def swath_covers(swath: Swath, cell: GridCell) -> bool:
    """Whether `swath` can look at `cell` under the center-point rule."""
    fp = swath.footprint
    if isinstance(fp, ExplicitFootprint):
        return cell.id in fp.cells
    if fp.entry == fp.exit:
        raise ValueError(f"degenerate strip (entry = exit) at {fp.entry}")
    if fp.width <= 0:
        raise ValueError(f"strip width must be > 0, got {fp.width}")
    return point_segment_distance(cell.center, fp.entry, fp.exit) <= fp.width / 2.0


def coverage_sets(scenario: Scenario) -> CoverageSets:
    """Covered cell set for every swath in the scenario."""
    covered: dict[int, frozenset[int]] = {}
    for sw in scenario.swaths:
        try:
            covered[sw.index] = frozenset(
                cell.id for cell in scenario.cells if swath_covers(sw, cell)
            )
        except ValueError as exc:
            raise ValueError(f"swath {sw.index}: {exc}") from exc
    return CoverageSets(covered)
