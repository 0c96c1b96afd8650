"""Command-line front end: gen, build, heuristic, exact, solve, eval, compare.

External solvers are invoked through a command template with {model},
{warmstart}, {solution}, {gap}, {timelimit}, and {options} placeholders
(flag --solver-cmd or environment variable LOOKOPT_SOLVER), so the core
never links against solver libraries.  Exit codes: 0 success, 2 validation
or configuration failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import shlex
import subprocess
import sys
from pathlib import Path

from lookopt import evaluate, figures, generator, modelio, scenario as scn
from lookopt.geometry import coverage_sets
from lookopt.heuristic import greedy_plan
from lookopt.model import (
    InfeasibleAssignmentError,
    build_model,
    decode_solution,
    round_penalties,
    warm_start,
)
from lookopt.oracle import SearchLimitExceededError, SearchLimits, solve_exact
from lookopt.plan import load_plan, save_plan
from lookopt.scenario import precompute_pen

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

SOLVER_ENV = "LOOKOPT_SOLVER"


class CommandError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load_scenario(args) -> scn.Scenario:
    path = Path(args.scenario)
    if not path.exists():
        raise CommandError(f"scenario file not found: {path}", EXIT_VALIDATION)
    scenario = scn.load_scenario(path)
    scenario = scn.with_overrides(
        scenario,
        never=getattr(args, "never", None),
        maxlow=getattr(args, "maxlow", None),
        rmin=getattr(args, "rmin", None),
        looks_required=getattr(args, "looks_required", None),
    )
    problems = scn.validate(scenario)
    if problems:
        raise CommandError("invalid scenario:\n  " + "\n  ".join(problems), EXIT_VALIDATION)
    return scenario


def _prepared(args):
    scenario = _load_scenario(args)
    pen = precompute_pen(scenario)
    places = getattr(args, "round_places", None)
    if places is not None:
        pen = round_penalties(pen, places)
    cov = coverage_sets(scenario)
    return scenario, pen, cov


def cmd_gen(args) -> int:
    spec_path = Path(args.spec)
    if not spec_path.exists():
        raise CommandError(f"generator spec not found: {spec_path}", EXIT_VALIDATION)
    spec = generator.load_genspec(spec_path)
    if args.seed is not None:
        spec = generator.genspec_from_dict({**generator.genspec_to_dict(spec), "seed": args.seed})
    try:
        scenario = generator.generate(spec)
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_VALIDATION) from exc
    scn.save_scenario(scenario, args.out)
    print(f"wrote {args.out}: {scenario.num_cells} cells, {scenario.num_swaths} swaths")
    return EXIT_OK


def cmd_build(args) -> int:
    scenario, pen, cov = _prepared(args)
    mode = "dense" if args.dense else "sparse"
    model = build_model(scenario, pen, cov, mode=mode)
    fmt = args.format or (Path(args.out).suffix.lstrip(".").lower() or "mps")
    modelio.export_model(model, args.out, fmt)
    if args.warm_start_out:
        modelio.write_warm_start(model, warm_start(model), args.warm_start_out)
    report = model.size_report()
    print(f"wrote {args.out} ({fmt}, {report['mode']} mode)")
    kinds = report["variables_by_kind"]
    print(f"variables: {report['variables']} "
          f"(X {kinds['X']}, Y {kinds['Y']}, G {kinds['G']}, Z {kinds['Z']})")
    tags = " ".join(f"{t} {n}" for t, n in report["rows_by_tag"].items())
    print(f"rows: {report['rows']} ({tags})")
    return EXIT_OK


def cmd_heuristic(args) -> int:
    scenario, _, cov = _prepared(args)
    try:
        plan = greedy_plan(scenario, cov, args.resolution)
    except ValueError as exc:
        raise CommandError(str(exc), EXIT_VALIDATION) from exc
    save_plan(plan, args.out)
    print(f"wrote {args.out}: {len(plan)} looks across {len(plan.cells_looked())} cells")
    return EXIT_OK


def cmd_exact(args) -> int:
    scenario, pen, cov = _prepared(args)
    limits = SearchLimits(max_cells=args.max_cells, max_swaths=args.max_swaths,
                          max_resolutions=args.max_resolutions, max_nodes=args.max_nodes)
    try:
        result = solve_exact(scenario, pen, cov, limits)
    except SearchLimitExceededError as exc:
        raise CommandError(str(exc), EXIT_VALIDATION) from exc
    save_plan(result.plan, args.out)
    print(f"wrote {args.out}: {len(result.plan)} looks, objective {result.objective:.6f}, "
          f"{result.node_count} nodes")
    return EXIT_OK


def cmd_solve(args) -> int:
    template = args.solver_cmd or os.environ.get(SOLVER_ENV)
    if not template:
        raise CommandError(
            f"no solver configured: pass --solver-cmd or set {SOLVER_ENV}", EXIT_VALIDATION)

    scenario, pen, cov = _prepared(args)
    mode = "dense" if args.dense else "sparse"
    model = build_model(scenario, pen, cov, mode=mode)

    out_dir = Path(args.workdir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model_path = out_dir / f"model.{args.format}"
    warm_path = out_dir / "warmstart.txt"
    solution_path = out_dir / "solution.txt"
    modelio.export_model(model, model_path, args.format)
    if args.warm:
        modelio.write_warm_start(model, warm_start(model), warm_path)

    try:
        command = template.format(
            model=str(model_path),
            warmstart=str(warm_path) if args.warm else "",
            solution=str(solution_path),
            gap=args.gap,
            timelimit=args.timelimit,
            options=args.solver_options,
        )
    except KeyError as exc:
        raise CommandError(f"unknown placeholder in solver command: {exc}", EXIT_VALIDATION) from exc
    if args.solver_options and "{options}" not in template:
        command = f"{command} {args.solver_options}"

    print(f"running: {command}")
    try:
        proc = subprocess.run(shlex.split(command), capture_output=True, text=True)
    except FileNotFoundError as exc:
        raise CommandError(f"solver binary not found while running: {command}", EXIT_SOLVER) from exc
    if proc.returncode != 0:
        sys.stderr.write(proc.stdout + proc.stderr)
        raise CommandError(f"solver exited with {proc.returncode}: {command}", EXIT_SOLVER)
    if not solution_path.exists():
        raise CommandError(f"solver wrote no solution file at {solution_path}", EXIT_SOLVER)

    assignment = modelio.read_solution(solution_path)
    try:
        decoded = decode_solution(model, assignment)
    except InfeasibleAssignmentError as exc:
        raise CommandError(f"solver solution infeasible: {exc}", EXIT_SOLVER) from exc

    save_plan(decoded.plan, args.plan)
    report = evaluate.coverage_report(scenario, decoded.plan, pen=pen, label="solver")
    evaluate.save_report(report, args.report)
    print(f"objective (recomputed): {decoded.objective:.6f}")
    print(f"coverage: {report.coverage_pct * 100:.2f}%")
    print(f"wrote {args.plan} and {args.report}")
    return EXIT_OK


def cmd_eval(args) -> int:
    scenario, pen, _ = _prepared(args)
    plan_path = Path(args.plan)
    if not plan_path.exists():
        raise CommandError(f"plan file not found: {plan_path}", EXIT_VALIDATION)
    plan = load_plan(plan_path)
    report = evaluate.coverage_report(scenario, plan, pen=pen, label=args.label)
    if args.report:
        evaluate.save_report(report, args.report)
    sys.stdout.write(evaluate.render_report(report))
    if args.figures:
        png, dat = figures.penalty_trajectories(scenario, plan, args.figures)
        print(f"wrote {png} and {dat}")
    return EXIT_OK


def cmd_compare(args) -> int:
    scenario, pen, _ = _prepared(args)
    for path in (args.plan_a, args.plan_b):
        if not Path(path).exists():
            raise CommandError(f"plan file not found: {path}", EXIT_VALIDATION)
    report_a = evaluate.coverage_report(scenario, load_plan(args.plan_a), pen=pen, label=args.label_a)
    report_b = evaluate.coverage_report(scenario, load_plan(args.plan_b), pen=pen, label=args.label_b)
    cmp = evaluate.compare(report_a, report_b)
    sys.stdout.write(evaluate.render_compare(cmp))
    if args.out:
        import json

        Path(args.out).write_text(json.dumps(cmp.to_dict(), indent=2, sort_keys=True) + "\n")
    if args.csv:
        csv_path = Path(args.csv)
        line = evaluate.compare_csv_line(cmp, include_header=not csv_path.exists())
        with csv_path.open("a") as fh:
            fh.write(line)
    if args.figures:
        png, dat = figures.coverage_comparison(cmp, report_a, report_b, args.figures)
        print(f"wrote {png} and {dat}")
    return EXIT_OK


def _add_scenario_options(p: argparse.ArgumentParser):
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--never", type=float, default=None, help="override never penalty")
    p.add_argument("--maxlow", type=int, default=None, help="override low-resolution allowance")
    p.add_argument("--rmin", type=int, default=None, help="override threshold resolution for all cells")
    p.add_argument("--looks-required", dest="looks_required", type=int, default=None,
                   help="override per-cell required look count")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookopt",
        description="Build, export, solve, and evaluate satellite look-allocation plans.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic scenario from a spec")
    p.add_argument("--spec", required=True, help="generator spec JSON file")
    p.add_argument("--seed", type=int, default=None, help="override the spec's seed")
    p.add_argument("--out", required=True, help="scenario JSON to write")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build the optimization model and export it")
    _add_scenario_options(p)
    p.add_argument("--out", required=True, help="model file to write (.mps or .lp)")
    p.add_argument("--format", choices=("mps", "lp"), default=None)
    p.add_argument("--dense", action="store_true", help="materialize full index ranges")
    p.add_argument("--round-places", dest="round_places", type=int, default=None,
                   help="round penalties to this many decimals before building")
    p.add_argument("--warm-start-out", dest="warm_start_out", default=None,
                   help="also write the no-looks warm start here")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("heuristic", help="run the greedy baseline at a fixed resolution")
    _add_scenario_options(p)
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--out", required=True, help="plan JSON to write")
    p.set_defaults(func=cmd_heuristic)

    p = sub.add_parser("exact", help="solve a desk-scale instance exactly")
    _add_scenario_options(p)
    p.add_argument("--out", required=True, help="plan JSON to write")
    p.add_argument("--max-cells", type=int, default=SearchLimits.max_cells)
    p.add_argument("--max-swaths", type=int, default=SearchLimits.max_swaths)
    p.add_argument("--max-resolutions", type=int, default=SearchLimits.max_resolutions)
    p.add_argument("--max-nodes", type=int, default=SearchLimits.max_nodes)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("solve", help="export the model and hand it to an external solver")
    _add_scenario_options(p)
    p.add_argument("--solver-cmd", default=None,
                   help="command template with {model} {warmstart} {solution} {gap} "
                        f"{{timelimit}} {{options}} placeholders (or set {SOLVER_ENV})")
    p.add_argument("--workdir", default="solve-out", help="directory for model/solution files")
    p.add_argument("--format", choices=("mps", "lp"), default="mps")
    p.add_argument("--dense", action="store_true")
    p.add_argument("--round-places", dest="round_places", type=int, default=None,
                   help="round penalties before building (kept insignificant at 6 places)")
    p.add_argument("--no-warm-start", dest="warm", action="store_false",
                   help="skip writing/passing the no-looks warm start")
    p.add_argument("--solver-options", default="", help="opaque option string passed through")
    p.add_argument("--gap", type=float, default=0.05, help="relative optimality tolerance")
    p.add_argument("--timelimit", type=float, default=600.0, help="seconds, passed to the solver")
    p.add_argument("--plan", default="plan.json", help="decoded plan JSON to write")
    p.add_argument("--report", default="report.json", help="evaluation report JSON to write")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("eval", help="evaluate a plan against a scenario")
    _add_scenario_options(p)
    p.add_argument("--plan", required=True)
    p.add_argument("--label", default="plan")
    p.add_argument("--report", default=None, help="report JSON to write")
    p.add_argument("--figures", default=None, help="directory for figures + .dat companions")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="compare two plans on one scenario")
    _add_scenario_options(p)
    p.add_argument("--plan-a", required=True)
    p.add_argument("--plan-b", required=True)
    p.add_argument("--label-a", default="a")
    p.add_argument("--label-b", default="b")
    p.add_argument("--out", default=None, help="comparison JSON to write")
    p.add_argument("--csv", default=None, help="CSV file to append one row to")
    p.add_argument("--figures", default=None, help="directory for figures + .dat companions")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "gap", None) is not None and not 0.0 <= args.gap <= 1.0:
        sys.stderr.write("error: --gap must be within [0, 1]\n")
        return EXIT_VALIDATION
    try:
        return args.func(args)
    except CommandError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.code
    except (ValueError, OSError) as exc:
        # bad input data or unwritable output paths
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
