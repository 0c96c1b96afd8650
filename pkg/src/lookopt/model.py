"""Mixed-integer program for look allocation, solver-agnostic.

The instance minimizes accumulated priority penalties plus a large `never`
charge per cell left short of its required looks.  Binary X variables place
looks, binary Y variables select each cell's current gap (swaths since last
look), continuous G variables carry the gap value, and continuous Z in [0, 1]
relaxes the at-least-`looks_required`-looks requirement elastically.

Row tags:
  eq2   gap value equals the gap selected by the indicator variables
  eq3   exactly one gap indicator per cell and swath
  eq4   gap grows by one unless a look resets it (big-M = swath count)
  eq5   per-cell look count requirement, relaxed by Z
  eq6   per-swath unit budget over look cost factors
  eq7   per-cell cap on looks below the threshold resolution
  fix8  X pinned to zero (dummy origin swath; in dense mode also uncovered
        cell/swath pairs and unaffordable resolutions)
  fix9  gap indicators pinned to zero where the gap would predate the start
  fix11 gap value pinned to zero at the dummy origin swath

Sparse mode (default) simply omits structurally-zero variables instead of
pinning them; dense mode materializes the full index ranges and exists for
model-size studies and debugging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from lookopt.geometry import CoverageSets
from lookopt.plan import Look, LookPlan
from lookopt.scenario import PenaltyTable, Scenario, validate

FEASIBILITY_TOL = 1e-6
BINARY_THRESHOLD = 0.5

TAG_ORDER = ("eq2", "eq3", "eq4", "eq5", "eq6", "eq7", "fix8", "fix9", "fix11")
_TAG_RANK = {tag: i for i, tag in enumerate(TAG_ORDER)}
_KIND_RANK = {"X": 0, "Y": 1, "G": 2, "Z": 3}


def x_name(c: int, s: int, r: int) -> str:
    return f"X_{c}_{s}_{r}"


def y_name(c: int, s: int, g: int) -> str:
    return f"Y_{c}_{s}_{g}"


def g_name(c: int, s: int) -> str:
    return f"G_{c}_{s}"


def z_name(c: int) -> str:
    return f"Z_{c}"


def split_var_name(name: str) -> tuple[str, tuple[int, ...]]:
    """('X', (c, s, r)) etc. from an exported variable name."""
    parts = name.split("_")
    return parts[0], tuple(int(p) for p in parts[1:])


@dataclass(frozen=True)
class Variable:
    name: str
    binary: bool
    lb: float = 0.0
    ub: float = math.inf


@dataclass(frozen=True)
class Row:
    name: str
    tag: str
    coeffs: dict[str, float]
    sense: str  # 'E', 'L', 'G'
    rhs: float

    def activity(self, values: dict[str, float]) -> float:
        return math.fsum(coef * values.get(name, 0.0) for name, coef in self.coeffs.items())


@dataclass(frozen=True)
class Assignment:
    """Variable values, e.g. a warm start or imported solver output."""

    values: dict[str, float]

    def get(self, name: str) -> float:
        return self.values.get(name, 0.0)


@dataclass(frozen=True)
class Violation:
    kind: str  # 'row', 'bound', 'integrality'
    name: str
    tag: str | None
    detail: str
    amount: float

    def __str__(self) -> str:
        tag = f" [{self.tag}]" if self.tag else ""
        return f"{self.kind} {self.name}{tag}: {self.detail}"


class InfeasibleAssignmentError(ValueError):
    def __init__(self, violations: list[Violation]):
        self.violations = violations
        lines = "; ".join(str(v) for v in violations[:10])
        more = "" if len(violations) <= 10 else f" (+{len(violations) - 10} more)"
        super().__init__(f"assignment violates {len(violations)} rows/bounds: {lines}{more}")


@dataclass
class ModelInstance:
    """Built MILP; treat as immutable once constructed."""

    scenario: Scenario
    pen: PenaltyTable
    cov: CoverageSets
    mode: str
    big_m: float
    variables: dict[str, Variable]
    rows: list[Row]
    objective: dict[str, float]
    x_keys: list[tuple[int, int, int]] = field(default_factory=list)
    y_keys: list[tuple[int, int, int]] = field(default_factory=list)
    g_keys: list[tuple[int, int]] = field(default_factory=list)
    z_keys: list[int] = field(default_factory=list)

    @property
    def num_variables(self) -> int:
        return len(self.variables)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def sorted_variables(self) -> list[Variable]:
        return sorted(self.variables.values(),
                      key=lambda v: (_KIND_RANK[v.name[0]], split_var_name(v.name)[1]))

    def sorted_rows(self) -> list[Row]:
        def key(row: Row):
            _, idx = split_var_name(row.name)  # row names share the tag_indices shape
            return (_TAG_RANK[row.tag], idx)
        return sorted(self.rows, key=key)

    def size_report(self) -> dict:
        by_kind: dict[str, int] = {"X": 0, "Y": 0, "G": 0, "Z": 0}
        for name in self.variables:
            by_kind[name[0]] += 1
        by_tag: dict[str, int] = {}
        for row in self.rows:
            by_tag[row.tag] = by_tag.get(row.tag, 0) + 1
        return {
            "mode": self.mode,
            "variables": self.num_variables,
            "variables_by_kind": by_kind,
            "rows": self.num_rows,
            "rows_by_tag": {t: by_tag[t] for t in TAG_ORDER if t in by_tag},
        }


def _swath_costs(scenario: Scenario) -> dict[int, dict[int, float]]:
    """Usable cost factors per swath: {s: {r: cost}}, omissions dropped."""
    costs: dict[int, dict[int, float]] = {}
    for sw in scenario.swaths:
        per_r = {}
        for r in range(1, scenario.resolution_count + 1):
            cost = scenario.swath_cost(sw, r)
            if cost is not None:
                per_r[r] = cost
        costs[sw.index] = per_r
    return costs


def build_model(scenario: Scenario, pen: PenaltyTable, cov: CoverageSets,
                mode: str = "sparse") -> ModelInstance:
    """Assemble variables, rows, and objective for one scenario.

    Sparse mode creates X only for (cell, swath, resolution) triples that are
    covered and affordable, and gap indicators only for gaps that can occur.
    Dense mode creates the full index ranges and pins unusable variables with
    explicit fix rows, which is also the documented row-counting convention
    for model-size reports.
    """
    if mode not in ("sparse", "dense"):
        raise ValueError(f"unknown mode {mode!r}")
    problems = validate(scenario)
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))
    C, S = scenario.num_cells, scenario.num_swaths
    if S == 0:
        raise ValueError("scenario has no swaths")
    if pen.num_cells != C or pen.num_swaths != S:
        raise ValueError("penalty table does not match scenario dimensions")
    if pen.num_gaps != S:
        raise ValueError(f"gap range {pen.num_gaps} != swath count {S}; only G = S is supported")

    costs = _swath_costs(scenario)
    big_m = float(S)
    R = scenario.resolution_count
    dense = mode == "dense"

    variables: dict[str, Variable] = {}
    rows: list[Row] = []
    objective: dict[str, float] = {}
    x_keys: list[tuple[int, int, int]] = []
    y_keys: list[tuple[int, int, int]] = []
    g_keys: list[tuple[int, int]] = []
    z_keys: list[int] = []

    def add_var(var: Variable):
        variables[var.name] = var

    # X: look placement
    for c in range(1, C + 1):
        s_range = range(0, S + 1) if dense else range(1, S + 1)
        for s in s_range:
            for r in range(1, R + 1):
                usable = s >= 1 and c in cov.covered[s] and r in costs[s]
                if dense or usable:
                    add_var(Variable(x_name(c, s, r), binary=True, ub=1.0))
                    x_keys.append((c, s, r))

    # Y: gap indicators; G: gap values; Z: shortfall
    for c in range(1, C + 1):
        for s in range(0, S + 1):
            g_top = S if dense else s
            for g in range(0, g_top + 1):
                add_var(Variable(y_name(c, s, g), binary=True, ub=1.0))
                y_keys.append((c, s, g))
            ub = math.inf if dense else (0.0 if s == 0 else math.inf)
            add_var(Variable(g_name(c, s), binary=False, lb=0.0, ub=ub))
            g_keys.append((c, s))
        add_var(Variable(z_name(c), binary=False, lb=0.0, ub=1.0))
        z_keys.append(c)

    # Objective: penalties on selected gaps plus the never charge
    for c, s, g in y_keys:
        if g <= s:
            coef = float(pen.pen[c, s, g])
            if coef != 0.0:
                objective[y_name(c, s, g)] = coef
    for c in z_keys:
        objective[z_name(c)] = scenario.never

    # eq2 / eq3: tie the gap value to exactly one selected gap indicator
    for c in range(1, C + 1):
        for s in range(0, S + 1):
            g_top = S if dense else s
            coeffs2 = {y_name(c, s, g): float(g) for g in range(1, g_top + 1)}
            coeffs2[g_name(c, s)] = -1.0
            rows.append(Row(f"eq2_{c}_{s}", "eq2", coeffs2, "E", 0.0))
            coeffs3 = {y_name(c, s, g): 1.0 for g in range(0, g_top + 1)}
            rows.append(Row(f"eq3_{c}_{s}", "eq3", coeffs3, "E", 1.0))

    # eq4: gap increments unless a look occurs
    for c in range(1, C + 1):
        for s in range(1, S + 1):
            coeffs = {g_name(c, s): 1.0, g_name(c, s - 1): -1.0}
            for r in range(1, R + 1):
                if x_name(c, s, r) in variables:
                    coeffs[x_name(c, s, r)] = big_m
            rows.append(Row(f"eq4_{c}_{s}", "eq4", coeffs, "G", 1.0))

    x_by_cell: dict[int, list[tuple[int, int, int]]] = {c: [] for c in range(1, C + 1)}
    for key in x_keys:
        x_by_cell[key[0]].append(key)

    # eq5: per-cell required looks, elastic via Z
    for c in range(1, C + 1):
        coeffs = {x_name(*key): 1.0 for key in x_by_cell[c]}
        coeffs[z_name(c)] = 1.0
        rows.append(Row(f"eq5_{c}", "eq5", coeffs, "G", float(scenario.looks_required)))

    # eq6: per-swath budget (dummy origin swath has no looks to budget)
    for s in range(1, S + 1):
        coeffs = {}
        for c in range(1, C + 1):
            for r, cost in sorted(costs[s].items()):
                name = x_name(c, s, r)
                if name in variables:
                    coeffs[name] = cost
        if coeffs:
            rows.append(Row(f"eq6_{s}", "eq6", coeffs, "L", 1.0))

    # eq7: low-resolution ration per cell
    for c in range(1, C + 1):
        rmin = scenario.cell(c).rmin
        coeffs = {x_name(*key): 1.0 for key in x_by_cell[c] if key[2] < rmin}
        if coeffs:
            rows.append(Row(f"eq7_{c}", "eq7", coeffs, "L", float(scenario.maxlow)))

    if dense:
        # fix8: pin every structurally-zero X (origin swath, uncovered pair,
        # or unaffordable resolution)
        for c, s, r in x_keys:
            usable = s >= 1 and c in cov.covered[s] and r in costs[s]
            if not usable:
                rows.append(Row(f"fix8_{c}_{s}_{r}", "fix8", {x_name(c, s, r): 1.0}, "E", 0.0))
        # fix9: gaps cannot predate the scenario start
        for c, s, g in y_keys:
            if g > s:
                rows.append(Row(f"fix9_{c}_{s}_{g}", "fix9", {y_name(c, s, g): 1.0}, "E", 0.0))
        # fix11: dummy origin swath has gap zero
        for c in range(1, C + 1):
            rows.append(Row(f"fix11_{c}", "fix11", {g_name(c, 0): 1.0}, "E", 0.0))

    return ModelInstance(
        scenario=scenario, pen=pen, cov=cov, mode=mode, big_m=big_m,
        variables=variables, rows=rows, objective=objective,
        x_keys=x_keys, y_keys=y_keys, g_keys=g_keys, z_keys=z_keys,
    )


def warm_start(model: ModelInstance) -> Assignment:
    """Worst feasible assignment: no looks over the whole horizon.

    Every cell keeps an ever-growing gap (G = s, the g = s indicator set) and
    pays the full never charge (Z = 1).  Feasible whenever a single unit of Z
    can absorb the look requirement, i.e. looks_required = 1.
    """
    values: dict[str, float] = {}
    for c, s, r in model.x_keys:
        values[x_name(c, s, r)] = 0.0
    for c, s, g in model.y_keys:
        values[y_name(c, s, g)] = 1.0 if g == s else 0.0
    for c, s in model.g_keys:
        values[g_name(c, s)] = float(s)
    for c in model.z_keys:
        values[z_name(c)] = 1.0
    return Assignment(values)


def round_penalties(pen: PenaltyTable, places: int = 6) -> PenaltyTable:
    """Round every penalty half-to-even to `places` decimals."""
    if places < 0:
        raise ValueError("places must be >= 0")
    return PenaltyTable(np.round(pen.pen, places))


def objective_at(model: ModelInstance, values: dict[str, float]) -> float:
    """Objective expression evaluated at raw variable values."""
    return math.fsum(coef * values.get(name, 0.0) for name, coef in model.objective.items())


def check_feasible(model: ModelInstance, assignment: Assignment,
                   tol: float = FEASIBILITY_TOL) -> list[Violation]:
    """Evaluate every row and bound; reports all violations, not the first."""
    out: list[Violation] = []
    values = assignment.values
    for var in model.variables.values():
        val = values.get(var.name, 0.0)
        if val < var.lb - tol or val > var.ub + tol:
            out.append(Violation("bound", var.name, None,
                                 f"value {val} outside [{var.lb}, {var.ub}]", val))
        if var.binary and abs(val - round(val)) > tol:
            out.append(Violation("integrality", var.name, None,
                                 f"value {val} not integral", val))
    for row in model.rows:
        act = row.activity(values)
        bad = (
            (row.sense == "E" and abs(act - row.rhs) > tol)
            or (row.sense == "L" and act > row.rhs + tol)
            or (row.sense == "G" and act < row.rhs - tol)
        )
        if bad:
            out.append(Violation("row", row.name, row.tag,
                                 f"activity {act} vs {row.sense} {row.rhs}", act))
    return out


@dataclass(frozen=True)
class DecodedSolution:
    plan: LookPlan
    gaps: np.ndarray  # shape (C + 1, S + 1), gaps[c][s]
    objective: float


def decode_solution(model: ModelInstance, assignment: Assignment,
                    tol: float = FEASIBILITY_TOL) -> DecodedSolution:
    """Turn a feasible assignment into a plan, gap matrix, and objective.

    The objective is recomputed here from the selected gap indicators and the
    raw Z values; solver-reported objectives are never trusted.
    """
    violations = check_feasible(model, assignment, tol=tol)
    if violations:
        raise InfeasibleAssignmentError(violations)
    values = assignment.values

    looks = [Look(c, s, r) for (c, s, r) in model.x_keys
             if values.get(x_name(c, s, r), 0.0) > BINARY_THRESHOLD]
    plan = LookPlan(tuple(looks))

    C, S = model.scenario.num_cells, model.scenario.num_swaths
    gaps = np.zeros((C + 1, S + 1), dtype=int)
    for c, s in model.g_keys:
        gaps[c, s] = int(round(values.get(g_name(c, s), 0.0)))

    contributions = [float(model.pen.pen[c, s, g]) for (c, s, g) in model.y_keys
                     if g <= s and values.get(y_name(c, s, g), 0.0) > BINARY_THRESHOLD]
    contributions.extend(model.scenario.never * values.get(z_name(c), 0.0)
                         for c in model.z_keys)
    objective = math.fsum(contributions)
    return DecodedSolution(plan=plan, gaps=gaps, objective=objective)


def encode_plan(model: ModelInstance, plan: LookPlan) -> Assignment:
    """Assignment realizing `plan` with true gap dynamics and tight Z."""
    from lookopt.evaluate import simulate_gaps

    scenario = model.scenario
    values: dict[str, float] = {name: 0.0 for name in model.variables}
    for lk in plan:
        name = x_name(lk.c, lk.s, lk.r)
        if name not in model.variables:
            raise ValueError(f"plan look {lk} has no matching variable in the model")
        values[name] = 1.0
    gaps = simulate_gaps(scenario, plan)
    for c, s in model.g_keys:
        values[g_name(c, s)] = float(gaps[c, s])
    for c, s, g in model.y_keys:
        values[y_name(c, s, g)] = 1.0 if g == gaps[c, s] else 0.0
    counts = plan.looks_per_cell()
    for c in model.z_keys:
        shortfall = scenario.looks_required - counts.get(c, 0)
        values[z_name(c)] = float(min(1, max(0, shortfall)))
    return Assignment(values)
