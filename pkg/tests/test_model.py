"""Model construction, warm start, feasibility checking, decode/encode."""

import itertools
import math
from dataclasses import replace

import numpy as np
import pytest

from conftest import explicit_scenario, make_sensor, solve_model_exactly
from lookopt.evaluate import objective_value, simulate_gaps
from lookopt.generator import desk_spec, generate
from lookopt.geometry import coverage_sets
from lookopt.model import (
    Assignment,
    InfeasibleAssignmentError,
    build_model,
    check_feasible,
    decode_solution,
    encode_plan,
    round_penalties,
    warm_start,
)
from lookopt.oracle import SearchLimits, solve_exact
from lookopt.plan import Look, LookPlan
from lookopt.scenario import PenaltyCurve, PenaltyTable, precompute_pen


def build_for(scenario, mode="sparse"):
    pen = precompute_pen(scenario)
    cov = coverage_sets(scenario)
    return build_model(scenario, pen, cov, mode=mode), pen, cov


def one_cell_one_swath(covered=True):
    return explicit_scenario(
        [(0, 0, "gentle")],
        [(20.0, "cap", {1} if covered else set())],
        sensors={"cap": make_sensor(budgets={1: (250_000.0, 100)})},  # cost 0.01
        never=100.0,
    )


class TestBuildModel:
    def test_single_covered_cell_optimum_is_zero(self):
        model, _, _ = build_for(one_cell_one_swath())
        obj, values = solve_model_exactly(model)
        assert obj == pytest.approx(0.0, abs=1e-9)
        assert values["X_1_1_1"] == pytest.approx(1.0)
        assert values["G_1_1"] == pytest.approx(0.0, abs=1e-6)
        assert values["Z_1"] == pytest.approx(0.0, abs=1e-6)

    def test_single_uncovered_cell_pays_gap_and_never(self):
        sc = one_cell_one_swath(covered=False)
        model, pen, _ = build_for(sc)
        obj, values = solve_model_exactly(model)
        assert obj == pytest.approx(pen.value(1, 1, 1) + sc.never, abs=1e-9)
        assert values["Z_1"] == pytest.approx(1.0)

    def test_two_cells_two_swaths_matches_enumeration(self):
        # one affordable look per swath (cost 1.0); brute force every pattern
        sc = explicit_scenario(
            [(0, 0, "urgent"), (0, 1, "moderate")],
            [(10.0, "cap", {1, 2}), (25.0, "cap", {1, 2})],
            sensors={"cap": make_sensor(budgets={1: (2_500.0, 1)})},
            never=50.0,
        )
        model, pen, _ = build_for(sc)
        best = math.inf
        for pick1, pick2 in itertools.product((None, 1, 2), repeat=2):
            looks = [Look(c, s, 1) for s, c in ((1, pick1), (2, pick2)) if c is not None]
            best = min(best, objective_value(sc, pen, LookPlan(tuple(looks))))
        obj, _ = solve_model_exactly(model)
        assert obj == pytest.approx(best, abs=1e-9)

    def test_big_m_equals_swath_count(self):
        model, _, _ = build_for(one_cell_one_swath())
        assert model.big_m == 1.0

    def test_gap_mismatch_rejected(self):
        sc = one_cell_one_swath()
        pen = precompute_pen(sc)
        bad = PenaltyTable(np.zeros((2, 2, 3)))
        with pytest.raises(ValueError, match="G = S"):
            build_model(sc, bad, coverage_sets(sc))

    def test_empty_swaths_rejected(self):
        sc = one_cell_one_swath()
        sc = replace(sc, swaths=())
        with pytest.raises(ValueError):
            build_model(sc, precompute_pen(sc), coverage_sets(sc))

    def test_sparse_skips_unusable_variables(self):
        sc = explicit_scenario(
            [(0, 0, "gentle"), (0, 1, "gentle")],
            [(5.0, "cap", {1})],  # cell 2 uncovered
        )
        model, _, _ = build_for(sc)
        assert "X_1_1_1" in model.variables
        assert "X_2_1_1" not in model.variables

    def test_dense_pins_unusable_variables(self):
        sc = explicit_scenario(
            [(0, 0, "gentle"), (0, 1, "gentle")],
            [(5.0, "cap", {1})],
        )
        model, _, _ = build_for(sc, mode="dense")
        assert "X_2_1_1" in model.variables
        fixed = {r.name for r in model.rows if r.tag == "fix8"}
        assert "fix8_2_1_1" in fixed and "fix8_1_0_1" in fixed


class TestWarmStart:
    def test_feasible_on_mixed_sizes(self):
        for seed in range(5):
            model, _, _ = build_for(generate(desk_spec(seed)))
            assert check_feasible(model, warm_start(model)) == []

    def test_feasible_in_dense_mode(self):
        model, _, _ = build_for(generate(desk_spec(2)), mode="dense")
        assert check_feasible(model, warm_start(model)) == []

    def test_objective_is_diagonal_sum_plus_never(self):
        sc = generate(desk_spec(4))
        model, pen, _ = build_for(sc)
        decoded = decode_solution(model, warm_start(model))
        expected = math.fsum(
            [float(pen.pen[c, s, s]) for c in range(1, sc.num_cells + 1)
             for s in range(1, sc.num_swaths + 1)]
            + [sc.never] * sc.num_cells)
        assert decoded.objective == expected

    def test_hand_value(self):
        # pen[1][1][1]=0.1, pen[1][2][2]=0.3, never=10 -> 10.4
        curve = PenaltyCurve(((0.0, 0.0), (10.0, 0.1), (20.0, 0.3)))
        sc = explicit_scenario([(0, 0, "lin")], [(10.0, "cap", {1}), (20.0, "cap", {1})],
                               curves={"lin": curve}, never=10.0)
        model, _, _ = build_for(sc)
        decoded = decode_solution(model, warm_start(model))
        assert decoded.objective == pytest.approx(10.4, abs=1e-12)
        assert len(decoded.plan) == 0


class TestRoundPenalties:
    def test_sixth_decimal(self):
        pen = PenaltyTable(np.full((2, 2, 2), 0.0123456789))
        assert round_penalties(pen, 6).pen[1, 1, 1] == 0.012346

    def test_idempotent_on_rounded_tables(self):
        pen = precompute_pen(generate(desk_spec(1)))
        once = round_penalties(pen, 6)
        twice = round_penalties(once, 6)
        assert np.array_equal(once.pen, twice.pen)

    def test_monotonicity_survives_rounding(self, rng):
        for _ in range(30):
            S = int(rng.integers(1, 5))
            raw = np.sort(rng.uniform(0, 2, size=(3, S + 1, S + 1)), axis=2)
            raw[:, :, 0] = 0.0
            raw[0] = 0.0
            for s in range(S + 1):  # zero the unused upper triangle
                raw[:, s, s + 1:] = 0.0
            pen = PenaltyTable(raw)
            assert round_penalties(pen, int(rng.integers(0, 7))).violations() == []

    def test_negative_places_rejected(self):
        with pytest.raises(ValueError):
            round_penalties(precompute_pen(one_cell_one_swath()), -1)


class TestCheckFeasible:
    def test_all_zeros_violates_gap_selection(self):
        model, _, _ = build_for(one_cell_one_swath())
        zeros = Assignment({name: 0.0 for name in model.variables})
        tags = {v.tag for v in check_feasible(model, zeros)}
        assert "eq3" in tags

    def test_binary_flip_detected(self, rng):
        sc = generate(desk_spec(6))
        model, pen, cov = build_for(sc)
        result = solve_exact(sc, pen, cov)
        base = encode_plan(model, result.plan)
        assert check_feasible(model, base) == []
        binaries = [n for n, v in model.variables.items() if v.binary]
        for _ in range(25):
            name = binaries[int(rng.integers(len(binaries)))]
            flipped = dict(base.values)
            flipped[name] = 1.0 - flipped[name]
            assert check_feasible(model, Assignment(flipped)) != []

    def test_violations_carry_row_tags(self):
        model, _, _ = build_for(one_cell_one_swath())
        ws = warm_start(model)
        broken = dict(ws.values)
        broken["G_1_1"] = 0.0  # gap can no longer match the selected indicator
        tags = {v.tag for v in check_feasible(model, Assignment(broken)) if v.tag}
        assert tags & {"eq2", "eq4"}


class TestDecodeEncode:
    def test_warm_start_decodes_to_empty_plan(self):
        model, _, _ = build_for(generate(desk_spec(0)))
        decoded = decode_solution(model, warm_start(model))
        assert len(decoded.plan) == 0
        assert all(decoded.gaps[c, s] == s
                   for c in range(1, 7) for s in range(0, 5))

    def test_hand_built_single_look(self):
        model, _, _ = build_for(one_cell_one_swath())
        values = {name: 0.0 for name in model.variables}
        values.update({"X_1_1_1": 1.0, "Y_1_0_0": 1.0, "Y_1_1_0": 1.0,
                       "G_1_0": 0.0, "G_1_1": 0.0, "Z_1": 0.0})
        decoded = decode_solution(model, Assignment(values))
        assert decoded.plan == LookPlan((Look(1, 1, 1),))
        assert decoded.gaps[1, 1] == 0
        assert decoded.objective == 0.0

    def test_infeasible_assignment_raises_with_rows(self):
        model, _, _ = build_for(one_cell_one_swath())
        with pytest.raises(InfeasibleAssignmentError) as err:
            decode_solution(model, Assignment({name: 0.0 for name in model.variables}))
        assert err.value.violations

    def test_oracle_plan_round_trip(self):
        for seed in (3, 9, 12):
            sc = generate(desk_spec(seed))
            model, pen, cov = build_for(sc)
            result = solve_exact(sc, pen, cov)
            decoded = decode_solution(model, encode_plan(model, result.plan))
            assert decoded.plan == result.plan
            assert decoded.objective == result.objective

    def test_unknown_look_rejected(self):
        model, _, _ = build_for(one_cell_one_swath())
        with pytest.raises(ValueError, match="no matching variable"):
            encode_plan(model, LookPlan((Look(1, 1, 9),)))


class TestModelProperties:
    def test_decoded_gaps_match_simulation_at_optimum(self):
        for seed in (2, 8):
            sc = generate(desk_spec(seed))
            model, pen, cov = build_for(sc)
            obj, values = solve_model_exactly(model)
            decoded = decode_solution(model, Assignment(values))
            assert np.array_equal(decoded.gaps, simulate_gaps(sc, decoded.plan))
            assert decoded.objective == pytest.approx(obj, abs=1e-6)

    def test_never_scaling_preserves_feasibility(self):
        sc = generate(desk_spec(5))
        scaled = replace(sc, never=sc.never * 3.0)
        model, pen, cov = build_for(sc)
        model2, pen2, _ = build_for(scaled)
        ws = warm_start(model)
        assert check_feasible(model2, ws) == []  # same variables, same rows
        d1 = decode_solution(model, ws)
        d2 = decode_solution(model2, ws)
        never_term = sc.never * sc.num_cells
        assert d2.objective - d1.objective == pytest.approx(2.0 * never_term, rel=1e-12)

    def test_sparse_and_dense_agree_on_optimum(self):
        for seed in (1, 4):
            sc = generate(desk_spec(seed))
            sparse_model, pen, cov = build_for(sc)
            dense_model = build_model(sc, pen, cov, mode="dense")
            obj_sparse, _ = solve_model_exactly(sparse_model)
            obj_dense, _ = solve_model_exactly(dense_model)
            assert obj_sparse == pytest.approx(obj_dense, abs=1e-8)

    def test_low_resolution_cap_vacuous_when_threshold_is_one(self):
        sc = generate(desk_spec(3))  # rmin = 1 everywhere, maxlow = 0
        model, pen, cov = build_for(sc)
        assert not any(r.tag == "eq7" for r in model.rows)
        relaxed = replace(sc, maxlow=10)
        model2, _, _ = build_for(relaxed)
        obj1, _ = solve_model_exactly(model)
        obj2, _ = solve_model_exactly(model2)
        assert obj1 == pytest.approx(obj2, abs=1e-9)

    def test_threshold_resolution_changes_optimum(self):
        # with rmin = 2 and maxlow = 0, the cheap resolution is disallowed
        sc = generate(desk_spec(3))
        strict = replace(sc, cells=tuple(replace(c, rmin=2) for c in sc.cells))
        obj_loose, _ = solve_model_exactly(build_for(sc)[0])
        obj_strict, _ = solve_model_exactly(build_for(strict)[0])
        assert obj_strict >= obj_loose - 1e-9

    def test_maxlow_one_allows_one_cheap_look(self):
        sc = explicit_scenario(
            [(0, 0, "urgent", 2)],
            [(10.0, "cap", {1}), (20.0, "cap", {1})],
            sensors={"cap": make_sensor(budgets={1: (5_000.0, 4), 2: (2_500.0, 4)})},
            never=50.0, resolution_count=2, maxlow=1,
        )
        model, pen, cov = build_for(sc)
        result = solve_exact(sc, pen, cov, limits=SearchLimits())
        obj, _ = solve_model_exactly(model)
        assert obj == pytest.approx(result.objective, abs=1e-9)
        cheap_looks = [lk for lk in result.plan if lk.r < 2]
        assert len(cheap_looks) <= 1
