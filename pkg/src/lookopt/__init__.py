"""Toolkit for allocating satellite sensor looks to grid cells.

The package builds look-allocation problem instances (grid cells with
time-growing priority penalties, timed sensor swaths with per-resolution
budgets), solves them three ways (greedy baseline, exact desk-scale search,
mixed-integer program handed to an external solver), and evaluates the
resulting plans against each other.
"""

from lookopt.scenario import (
    BudgetRow,
    GridCell,
    PenaltyCurve,
    PenaltyTable,
    Scenario,
    Sensor,
    Swath,
    cost_factor,
    eval_curve,
    precompute_pen,
    validate,
)
from lookopt.plan import Look, LookPlan
from lookopt.geometry import CoverageSets, coverage_sets, swath_covers
from lookopt.model import (
    Assignment,
    ModelInstance,
    build_model,
    check_feasible,
    decode_solution,
    encode_plan,
    round_penalties,
    warm_start,
)
from lookopt.heuristic import greedy_plan
from lookopt.oracle import SearchLimits, enumerate_swath_allocations, solve_exact
from lookopt.evaluate import (
    EvalReport,
    compare,
    coverage_report,
    objective_value,
    simulate_gaps,
)
from lookopt.generator import GenSpec, generate

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "BudgetRow",
    "CoverageSets",
    "EvalReport",
    "GenSpec",
    "GridCell",
    "Look",
    "LookPlan",
    "ModelInstance",
    "PenaltyCurve",
    "PenaltyTable",
    "Scenario",
    "SearchLimits",
    "Sensor",
    "Swath",
    "build_model",
    "check_feasible",
    "compare",
    "cost_factor",
    "coverage_report",
    "coverage_sets",
    "decode_solution",
    "encode_plan",
    "enumerate_swath_allocations",
    "eval_curve",
    "generate",
    "greedy_plan",
    "objective_value",
    "precompute_pen",
    "round_penalties",
    "simulate_gaps",
    "solve_exact",
    "swath_covers",
    "validate",
    "warm_start",
]
