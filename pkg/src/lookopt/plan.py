"""Look plans: the common currency of all three solution producers.

A plan is a list of (cell, swath, resolution) looks.  The greedy baseline,
the exact desk-scale search, and decoded solver output all emit this shape,
so any of them can feed the evaluator or be compared against each other.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from lookopt.scenario import Scenario

BUDGET_SLACK = 1e-9


@dataclass(frozen=True, order=True)
class Look:
    c: int
    s: int
    r: int


@dataclass(frozen=True)
class LookPlan:
    """Immutable set of looks, kept sorted by (swath, cell)."""

    looks: tuple[Look, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.looks, key=lambda lk: (lk.s, lk.c, lk.r)))
        object.__setattr__(self, "looks", ordered)

    def __len__(self) -> int:
        return len(self.looks)

    def __iter__(self):
        return iter(self.looks)

    def cells_looked(self) -> set[int]:
        return {lk.c for lk in self.looks}

    def looks_in_swath(self, s: int) -> list[Look]:
        return [lk for lk in self.looks if lk.s == s]

    def looks_per_cell(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for lk in self.looks:
            counts[lk.c] = counts.get(lk.c, 0) + 1
        return counts

    def violations(self, scenario: Scenario, covered: dict[int, frozenset[int]] | None = None) -> list[str]:
        """Invariant check: (c, s) uniqueness, coverage, per-swath budget."""
        out: list[str] = []
        seen: set[tuple[int, int]] = set()
        for lk in self.looks:
            if not 1 <= lk.c <= scenario.num_cells:
                out.append(f"look {lk}: unknown cell")
            if not 1 <= lk.s <= scenario.num_swaths:
                out.append(f"look {lk}: unknown swath")
                continue
            key = (lk.c, lk.s)
            if key in seen:
                out.append(f"cell {lk.c} looked twice in swath {lk.s}")
            seen.add(key)
            if covered is not None and lk.c not in covered.get(lk.s, frozenset()):
                out.append(f"look {lk}: cell not covered by swath {lk.s}")
        for s in sorted({lk.s for lk in self.looks if 1 <= lk.s <= scenario.num_swaths}):
            swath = scenario.swath(s)
            costs = []
            for lk in self.looks_in_swath(s):
                cost = scenario.swath_cost(swath, lk.r)
                if cost is None:
                    out.append(f"look {lk}: resolution unusable for sensor {swath.sensor_id!r}")
                else:
                    costs.append(cost)
            spent = math.fsum(costs)
            if spent > 1.0 + BUDGET_SLACK:
                out.append(f"swath {s}: budget exceeded ({spent:.9f} > 1)")
        return out

    def to_records(self) -> list[dict[str, int]]:
        return [{"c": lk.c, "s": lk.s, "r": lk.r} for lk in self.looks]

    @classmethod
    def from_records(cls, records) -> "LookPlan":
        return cls(tuple(Look(int(r["c"]), int(r["s"]), int(r["r"])) for r in records))


def save_plan(plan: LookPlan, path: str | Path) -> None:
    Path(path).write_text(json.dumps(plan.to_records(), indent=2) + "\n")


def load_plan(path: str | Path) -> LookPlan:
    return LookPlan.from_records(json.loads(Path(path).read_text()))
