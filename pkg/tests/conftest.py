"""Shared builders and solver helpers for the test suite."""

from __future__ import annotations

import sys
import textwrap

import numpy as np
import pytest

from lookopt import modelio
from lookopt.scenario import (
    BudgetRow,
    ExplicitFootprint,
    GridCell,
    Scenario,
    Sensor,
    Swath,
    reference_curves,
)


def make_sensor(sensor_id="cap", kind="sar", budgets=None) -> Sensor:
    """Sensor with small custom budgets; default one-look-per-swath."""
    budgets = budgets or {1: (2_500.0, 10)}
    rows = {r: BudgetRow(area, looks) for r, (area, looks) in budgets.items()}
    return Sensor(id=sensor_id, kind=kind, budget_rows=rows)


def explicit_scenario(cell_specs, swath_specs, *, curves=None, sensors=None,
                      never=100.0, maxlow=0, resolution_count=1, looks_required=1,
                      cell_area=2_500.0) -> Scenario:
    """Scenario from terse tuples, footprints given as explicit cell sets.

    cell_specs: list of (row, col, curve_id) or (row, col, curve_id, rmin,
    priority_class); swath_specs: list of (time, sensor_id, covered_cell_ids).
    """
    cells = []
    for i, spec in enumerate(cell_specs, start=1):
        row, col, curve_id = spec[:3]
        rmin = spec[3] if len(spec) > 3 else 1
        cls = spec[4] if len(spec) > 4 else "low"
        cells.append(GridCell(id=i, row=row, col=col,
                              center=(col * 50.0 + 25.0, -(row * 50.0) - 25.0),
                              priority_class=cls, curve_id=curve_id, rmin=rmin))
    swaths = [
        Swath(index=i, time=t, sensor_id=sid, footprint=ExplicitFootprint(frozenset(covered)))
        for i, (t, sid, covered) in enumerate(swath_specs, start=1)
    ]
    return Scenario(
        cells=tuple(cells),
        curves=curves or reference_curves(),
        sensors=sensors or {"cap": make_sensor()},
        swaths=tuple(swaths),
        cell_area=cell_area,
        resolution_count=resolution_count,
        never=never,
        maxlow=maxlow,
        looks_required=looks_required,
    )


def narrative_scenario() -> Scenario:
    """Three cells, swaths at 20 h and 37 h, each covering everything.

    Cell 1 uses the gentle curve, cell 2 the urgent curve, cell 3 the
    moderate one; the sensor affords two looks per swath at resolution 1.
    """
    sensors = {"cap": make_sensor(budgets={1: (5_000.0, 10)})}  # cost 0.5
    return explicit_scenario(
        [(0, 0, "gentle"), (0, 1, "urgent"), (1, 0, "moderate")],
        [(20.0, "cap", {1, 2, 3}), (37.0, "cap", {1, 2, 3})],
        sensors=sensors,
        never=100.0,
    )


def solve_linear_system(ls: modelio.LinearSystem, mip_rel_gap: float = 0.0):
    """Exact MILP solve of a LinearSystem via scipy's HiGHS backend."""
    from scipy import sparse
    from scipy.optimize import Bounds, LinearConstraint, milp

    n = len(ls.names)
    if ls.entries:
        rows = [e[0] for e in ls.entries]
        cols = [e[1] for e in ls.entries]
        vals = [e[2] for e in ls.entries]
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(ls.row_names), n))
        lo = np.where([s in ("E", "G") for s in ls.row_sense], ls.rhs, -np.inf)
        hi = np.where([s in ("E", "L") for s in ls.row_sense], ls.rhs, np.inf)
        constraints = LinearConstraint(A, lo, hi)
    else:
        constraints = ()
    return milp(c=ls.c, constraints=constraints, integrality=ls.integrality,
                bounds=Bounds(ls.lb, ls.ub), options={"mip_rel_gap": mip_rel_gap})


def solve_model_exactly(model) -> tuple[float, dict[str, float]]:
    """(optimal objective, variable values) for a built or parsed model."""
    ls = modelio.as_linear_system(model)
    res = solve_linear_system(ls)
    assert res.status == 0, f"MILP solve failed: status {res.status} ({res.message})"
    return float(res.fun), dict(zip(ls.names, res.x))


SHIM_SOLVER = textwrap.dedent('''\
    """Minimal file-protocol MILP solver used by the CLI tests.

    Usage: shim_solver.py MODEL SOLUTION [GAP [TIMELIMIT]] [--fail]
    Parses the exported model file, solves it exactly, and writes the
    solution as `name value` lines.
    """
    import sys

    from lookopt import modelio


    def main() -> int:
        args = [a for a in sys.argv[1:] if a != "--fail"]
        if "--fail" in sys.argv:
            sys.stderr.write("shim solver told to fail\\n")
            return 1
        model_path, solution_path = args[0], args[1]
        parsed = modelio.parse_model_file(model_path)
        ls = modelio.as_linear_system(parsed)

        import numpy as np
        from scipy import sparse
        from scipy.optimize import Bounds, LinearConstraint, milp

        rows = [e[0] for e in ls.entries]
        cols = [e[1] for e in ls.entries]
        vals = [e[2] for e in ls.entries]
        A = sparse.csr_matrix((vals, (rows, cols)), shape=(len(ls.row_names), len(ls.names)))
        lo = np.where([s in ("E", "G") for s in ls.row_sense], ls.rhs, -np.inf)
        hi = np.where([s in ("E", "L") for s in ls.row_sense], ls.rhs, np.inf)
        res = milp(c=ls.c, constraints=LinearConstraint(A, lo, hi),
                   integrality=ls.integrality, bounds=Bounds(ls.lb, ls.ub),
                   options={"mip_rel_gap": 0.0})
        if res.status != 0:
            sys.stderr.write(f"solve failed: {res.message}\\n")
            return 1
        modelio.write_solution(dict(zip(ls.names, res.x)), solution_path)
        return 0


    if __name__ == "__main__":
        sys.exit(main())
''')


@pytest.fixture()
def shim_solver_cmd(tmp_path) -> str:
    """Solver command template backed by a real subprocess shim."""
    script = tmp_path / "shim_solver.py"
    script.write_text(SHIM_SOLVER)
    return f"{sys.executable} {script} {{model}} {{solution}} {{gap}} {{timelimit}}"


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
