"""Exact desk-scale solver by depth-first search over per-swath allocations.

Serves as the ground truth for tiny instances: every MILP build, export, or
heuristic result can be checked against it.  It refuses instances beyond its
limits rather than silently degrading, because a "mostly exact" oracle is
worthless as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from lookopt.geometry import CoverageSets
from lookopt.plan import BUDGET_SLACK, Look, LookPlan
from lookopt.scenario import PenaltyTable, Scenario, Swath


@dataclass(frozen=True)
class SearchLimits:
    max_cells: int = 6
    max_swaths: int = 4
    max_resolutions: int = 2
    max_nodes: int = 10_000_000

    def violations(self) -> list[str]:
        out = []
        for name in ("max_cells", "max_swaths", "max_resolutions", "max_nodes"):
            if getattr(self, name) <= 0:
                out.append(f"{name} must be positive")
        return out


class SearchLimitExceededError(RuntimeError):
    """Instance too rich for exhaustive search; export the MILP instead."""


@dataclass(frozen=True)
class ExactResult:
    plan: LookPlan
    objective: float
    node_count: int


class _NodeBudget:
    __slots__ = ("used", "limit")

    def __init__(self, limit: int):
        self.used = 0
        self.limit = limit

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise SearchLimitExceededError(
                f"search exceeded {self.limit} nodes; export the model and use an "
                f"external solver instead")


def _usable_costs(scenario: Scenario, swath: Swath,
                  resolutions=None) -> list[tuple[int, float]]:
    rs = range(1, scenario.resolution_count + 1) if resolutions is None else sorted(resolutions)
    out = []
    for r in rs:
        cost = scenario.swath_cost(swath, r)
        if cost is not None:
            out.append((r, cost))
    return out


def _allocations(cells: list[int], cost_options: list[tuple[int, float]],
                 budget: _NodeBudget, admit=None):
    """Yield every budget-feasible allocation, deterministically.

    Order: depth-first over cells in ascending id order, branching "no look"
    first and then each resolution ascending.  `admit(cell, resolution)` can
    veto branches (used for the low-resolution allowance during exact search).
    """
    chosen: list[tuple[int, int]] = []

    def rec(i: int, spent: float):
        budget.tick()
        if i == len(cells):
            yield tuple(chosen)
            return
        yield from rec(i + 1, spent)
        cell = cells[i]
        for r, cost in cost_options:
            if spent + cost > 1.0 + BUDGET_SLACK:
                continue
            if admit is not None and not admit(cell, r):
                continue
            chosen.append((cell, r))
            yield from rec(i + 1, spent + cost)
            chosen.pop()

    yield from rec(0, 0.0)


def enumerate_swath_allocations(scenario: Scenario, swath: Swath,
                                covered_cells, resolutions=None,
                                max_nodes: int = 10_000_000) -> list[tuple[tuple[int, int], ...]]:
    """All feasible (cell, resolution) allocation sets for one swath.

    Includes the empty allocation.  Cells are distinct within an allocation
    and total cost stays within the unit budget.
    """
    cells = sorted(covered_cells)
    cost_options = _usable_costs(scenario, swath, resolutions)
    budget = _NodeBudget(max_nodes)
    return list(_allocations(cells, cost_options, budget))


def solve_exact(scenario: Scenario, pen: PenaltyTable, cov: CoverageSets,
                limits: SearchLimits = SearchLimits()) -> ExactResult:
    """Globally optimal plan for the full model semantics, by exhaustive DFS.

    Honors looks_required, per-cell threshold resolutions, and the maxlow
    allowance.  Pruning uses an admissible bound: penalties still to come are
    at least zero, plus the full never charge for every unlooked cell that no
    remaining swath can cover.  Ties between equal-objective plans go to the
    first plan found in enumeration order.
    """
    bad = limits.violations()
    if bad:
        raise ValueError("; ".join(bad))
    C, S = scenario.num_cells, scenario.num_swaths
    if C > limits.max_cells or S > limits.max_swaths:
        raise SearchLimitExceededError(
            f"instance ({C} cells, {S} swaths) beyond limits "
            f"({limits.max_cells}, {limits.max_swaths}); export the model instead")
    cost_options = {sw.index: _usable_costs(scenario, sw) for sw in scenario.swaths}
    widest = max((len(v) for v in cost_options.values()), default=0)
    if widest > limits.max_resolutions:
        raise SearchLimitExceededError(
            f"{widest} usable resolutions in one swath exceeds limit "
            f"{limits.max_resolutions}; export the model instead")

    covered = {s: sorted(cov.covered[s]) for s in cost_options}
    never = scenario.never
    required = scenario.looks_required
    rmin = {c.id: c.rmin for c in scenario.cells}

    # coverable_later[s][c]: any swath with index >= s covers c
    coverable_later = [[False] * (C + 1) for _ in range(S + 2)]
    for s in range(S, 0, -1):
        row = coverable_later[s]
        nxt = coverable_later[s + 1]
        for c in range(1, C + 1):
            row[c] = nxt[c] or c in cov.covered[s]

    if C == 0:
        raise ValueError("scenario has no cells")
    budget = _NodeBudget(limits.max_nodes)
    last_look = [0] * (C + 1)
    low_used = [0] * (C + 1)
    look_count = [0] * (C + 1)
    contrib: list[float] = []   # pen terms in DFS order; fsum at leaves
    chosen: list[Look] = []

    best_obj = math.inf
    best_plan: tuple[Look, ...] | None = None

    def admit(cell: int, r: int) -> bool:
        return r >= rmin[cell] or low_used[cell] < scenario.maxlow

    def leaf_objective() -> tuple[float, bool]:
        never_terms = []
        for c in range(1, C + 1):
            shortfall = required - look_count[c]
            if shortfall > 1:
                return math.inf, False  # Z in [0, 1] cannot absorb this
            if shortfall == 1:
                never_terms.append(never)
        return math.fsum(contrib + never_terms), True

    def descend(s: int, acc: float):
        nonlocal best_obj, best_plan
        if s > S:
            obj, feasible = leaf_objective()
            if feasible and obj < best_obj:
                best_obj = obj
                best_plan = tuple(chosen)
            return
        doomed = sum(1 for c in range(1, C + 1)
                     if look_count[c] == 0 and not coverable_later[s][c])
        if acc + never * doomed >= best_obj:
            return
        for alloc in _allocations(covered[s], cost_options[s], budget, admit):
            alloc_cells = {c for c, _ in alloc}
            added = 0.0
            for c in range(1, C + 1):
                g = 0 if c in alloc_cells else s - last_look[c]
                val = float(pen.pen[c, s, g])
                contrib.append(val)
                added += val
            saved_last = [last_look[c] for c, _ in alloc]
            for c, r in alloc:
                last_look[c] = s
                look_count[c] += 1
                if r < rmin[c]:
                    low_used[c] += 1
                chosen.append(Look(c, s, r))
            descend(s + 1, acc + added)
            for (c, r), prev in zip(alloc, saved_last):
                last_look[c] = prev
                look_count[c] -= 1
                if r < rmin[c]:
                    low_used[c] -= 1
                chosen.pop()
            del contrib[-C:]

    descend(1, 0.0)
    if best_plan is None:
        raise SearchLimitExceededError("search completed without a feasible plan")
    return ExactResult(plan=LookPlan(best_plan), objective=best_obj,
                       node_count=budget.used)
