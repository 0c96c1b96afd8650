"""Plan simulation, objective identities, reports, comparisons."""

import math

import numpy as np
import pytest

from conftest import explicit_scenario, make_sensor, narrative_scenario
from lookopt.evaluate import (
    compare,
    compare_csv_line,
    coverage_report,
    objective_value,
    render_compare,
    render_report,
    simulate_gaps,
    summarize_relative_improvements,
)
from lookopt.generator import desk_spec, generate
from lookopt.geometry import coverage_sets
from lookopt.model import build_model, decode_solution, encode_plan, warm_start
from lookopt.plan import Look, LookPlan
from lookopt.scenario import eval_curve, precompute_pen


EMPTY = LookPlan(())


class TestSimulateGaps:
    def test_empty_plan_counts_up(self):
        sc = generate(desk_spec(0))
        gaps = simulate_gaps(sc, EMPTY)
        for c in range(1, sc.num_cells + 1):
            for s in range(sc.num_swaths + 1):
                assert gaps[c, s] == s

    def test_look_every_swath_keeps_gaps_zero(self):
        sc = explicit_scenario([(0, 0, "gentle")], [(5.0, "cap", {1}), (9.0, "cap", {1})])
        plan = LookPlan((Look(1, 1, 1), Look(1, 2, 1)))
        assert np.all(simulate_gaps(sc, plan)[1] == 0)

    def test_narrative_gap_patterns(self):
        sc = narrative_scenario()
        plan = LookPlan((Look(2, 1, 1), Look(3, 2, 1)))
        gaps = simulate_gaps(sc, plan)
        assert list(gaps[3, 1:]) == [1, 0]   # missed at 20 h, looked at 37 h
        assert list(gaps[1, 1:]) == [1, 2]   # never looked
        assert list(gaps[2, 1:]) == [0, 1]   # looked at 20 h

    def test_invalid_indices_rejected(self):
        sc = generate(desk_spec(0))
        with pytest.raises(ValueError):
            simulate_gaps(sc, LookPlan((Look(99, 1, 1),)))


class TestObjectiveValue:
    def test_empty_plan_equals_warm_start(self):
        sc = generate(desk_spec(4))
        pen = precompute_pen(sc)
        model = build_model(sc, pen, coverage_sets(sc))
        ws_obj = decode_solution(model, warm_start(model)).objective
        assert objective_value(sc, pen, EMPTY) == ws_obj

    def test_narrative_fixture_contributions(self):
        # cells 1..3 on the gentle/urgent/moderate curves, swaths at 20 h and
        # 37 h; plan looks at cell 2 first and cell 3 second.  Narrated
        # anchors: cell 1 pays 0.01 then 0.05; cell 2 avoids 0.42 by being
        # looked at (but owes urgent(17 h) at the second swath); cell 3 pays
        # 0.08 and then resets.  Cell 1 is never looked, so never is owed.
        sc = narrative_scenario()
        pen = precompute_pen(sc)
        assert pen.value(1, 1, 1) == 0.01
        assert pen.value(1, 2, 2) == 0.05
        assert pen.value(2, 1, 1) == 0.42
        assert pen.value(3, 1, 1) == 0.08
        plan = LookPlan((Look(2, 1, 1), Look(3, 2, 1)))
        expected = math.fsum([
            0.01, 0.05,                                     # cell 1, both swaths
            0.0, eval_curve(sc.curves["urgent"], 17.0),     # cell 2
            0.08, 0.0,                                      # cell 3
            sc.never,                                       # cell 1 never looked
        ])
        assert objective_value(sc, pen, plan) == expected

    def test_matches_decoded_objective_for_encoded_plans(self, rng):
        sc = generate(desk_spec(6))
        pen = precompute_pen(sc)
        cov = coverage_sets(sc)
        model = build_model(sc, pen, cov)
        for _ in range(20):
            looks = []
            for sw in sc.swaths:
                spent = 0.0
                for c in sorted(cov.covered[sw.index]):
                    if rng.random() < 0.4:
                        cost = sc.swath_cost(sw, 1)
                        if spent + cost > 1.0:
                            break
                        spent += cost
                        looks.append(Look(c, sw.index, 1))
            plan = LookPlan(tuple(looks))
            decoded = decode_solution(model, encode_plan(model, plan))
            assert objective_value(sc, pen, plan) == decoded.objective


class TestCoverageReport:
    def test_empty_plan(self):
        sc = generate(desk_spec(0))
        report = coverage_report(sc, EMPTY)
        assert report.coverage_pct == 0.0
        short = [v for v in report.violations if "required" in v]
        assert len(short) == sc.num_cells

    def test_full_single_coverage(self):
        sc = explicit_scenario(
            [(0, 0, "gentle"), (0, 1, "gentle")],
            [(5.0, "cap", {1, 2})],
            sensors={"cap": make_sensor(budgets={1: (5_000.0, 10)})},
        )
        plan = LookPlan((Look(1, 1, 1), Look(2, 1, 1)))
        report = coverage_report(sc, plan)
        assert report.coverage_pct == 1.0
        assert report.violations == ()
        total_unique = sum(cc.unique_cells for cc in report.per_class.values())
        total_looks = sum(cc.total_looks for cc in report.per_class.values())
        assert total_unique == total_looks == 2

    def test_repeat_looks_show_in_brackets(self):
        sc = explicit_scenario([(0, 0, "gentle")], [(5.0, "cap", {1}), (9.0, "cap", {1})])
        plan = LookPlan((Look(1, 1, 1), Look(1, 2, 1)))
        report = coverage_report(sc, plan)
        cc = report.per_class["low"]
        assert (cc.unique_cells, cc.total_looks) == (1, 2)
        assert cc.brackets() == "1 [2]"

    def test_unique_cells_sum_matches_distinct_plan_cells(self):
        sc = generate(desk_spec(3))
        cov = coverage_sets(sc)
        from lookopt.heuristic import greedy_plan

        plan = greedy_plan(sc, cov, 1)
        report = coverage_report(sc, plan)
        assert sum(cc.unique_cells for cc in report.per_class.values()) == len(plan.cells_looked())

    def test_budget_and_threshold_violations_reported(self):
        sc = explicit_scenario(
            [(0, 0, "gentle", 1)],
            [(5.0, "cap", {1})],
            sensors={"cap": make_sensor(budgets={1: (2_500.0, 1)})},
        )
        # force a double look in one swath: invalid but must be reported,
        # not raised
        plan = LookPlan((Look(1, 1, 1), Look(1, 1, 1)))
        report = coverage_report(sc, plan)
        assert any("twice" in v for v in report.violations)
        assert any("budget" in v for v in report.violations)

    def test_low_resolution_allowance_violation(self):
        sc = explicit_scenario(
            [(0, 0, "gentle", 2)],
            [(5.0, "cap", {1}), (9.0, "cap", {1})],
            sensors={"cap": make_sensor(budgets={1: (2_500.0, 4), 2: (2_500.0, 4)})},
            resolution_count=2, maxlow=1,
        )
        plan = LookPlan((Look(1, 1, 1), Look(1, 2, 1)))  # two below-threshold looks
        report = coverage_report(sc, plan)
        assert any("threshold" in v for v in report.violations)


class TestCompare:
    def test_identical_reports_zero_deltas(self):
        sc = generate(desk_spec(2))
        plan = LookPlan((Look(1, 1, 1),))
        a = coverage_report(sc, plan, label="x")
        b = coverage_report(sc, plan, label="y")
        cmp = compare(a, b)
        assert cmp.coverage_delta == 0.0
        assert cmp.rel_coverage_improvement == 0.0
        assert all(d == (0, 0) for d in cmp.per_class_delta.values())

    def test_zero_baseline_reports_undefined_marker(self):
        sc = generate(desk_spec(2))
        plan = LookPlan((Look(1, 1, 1),))
        cmp = compare(coverage_report(sc, plan), coverage_report(sc, EMPTY))
        assert cmp.rel_coverage_improvement is None
        assert "n/a" in compare_csv_line(cmp)

    def test_mismatched_scenarios_rejected(self):
        a = coverage_report(generate(desk_spec(1)), EMPTY)
        b = coverage_report(generate(desk_spec(2)), EMPTY)
        with pytest.raises(ValueError, match="different scenarios"):
            compare(a, b)

    def test_relative_improvement_value(self):
        sc = explicit_scenario(
            [(0, 0, "gentle"), (0, 1, "gentle"), (1, 0, "gentle"), (1, 1, "gentle")],
            [(5.0, "cap", {1, 2, 3, 4})],
            sensors={"cap": make_sensor(budgets={1: (7_500.0, 10)})},
        )
        a = coverage_report(sc, LookPlan((Look(1, 1, 1), Look(2, 1, 1), Look(3, 1, 1))))
        b = coverage_report(sc, LookPlan((Look(1, 1, 1), Look(2, 1, 1))))
        cmp = compare(a, b)
        assert cmp.rel_coverage_improvement == pytest.approx(0.5)


class TestReportProperties:
    def test_plan_order_does_not_matter(self, rng):
        sc = generate(desk_spec(5))
        cov = coverage_sets(sc)
        from lookopt.heuristic import greedy_plan

        plan = greedy_plan(sc, cov, 1)
        records = plan.to_records()
        rng.shuffle(records)
        shuffled = LookPlan.from_records(records)
        a = coverage_report(sc, plan)
        b = coverage_report(sc, shuffled)
        assert a == b

    def test_objective_independent_of_never_at_full_coverage(self):
        from dataclasses import replace

        sc = explicit_scenario([(0, 0, "gentle")], [(5.0, "cap", {1})])
        plan = LookPlan((Look(1, 1, 1),))
        pen = precompute_pen(sc)
        high_never = replace(sc, never=sc.never * 100)
        assert objective_value(sc, pen, plan) == objective_value(high_never, pen, plan)

    def test_extra_look_never_hurts(self, rng):
        sc = generate(desk_spec(7))
        pen = precompute_pen(sc)
        cov = coverage_sets(sc)
        for _ in range(25):
            s = int(rng.integers(1, sc.num_swaths + 1))
            covered = sorted(cov.covered[s])
            if not covered:
                continue
            c = covered[int(rng.integers(len(covered)))]
            base = coverage_report(sc, EMPTY, pen=pen)
            extended = coverage_report(sc, LookPlan((Look(c, s, 1),)), pen=pen)
            assert extended.total_penalty <= base.total_penalty + 1e-12
            assert extended.coverage_pct >= base.coverage_pct


class TestSummaries:
    def test_mean_and_median(self):
        mean, median = summarize_relative_improvements([0.1, 0.2, 0.9])
        assert mean == pytest.approx(0.4)
        assert median == pytest.approx(0.2)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            summarize_relative_improvements([])

    def test_render_report_mentions_key_fields(self):
        sc = generate(desk_spec(1))
        text = render_report(coverage_report(sc, EMPTY, label="empty"))
        assert "coverage" in text and "violations" in text and "empty" in text

    def test_render_compare_marks_undefined_improvement(self):
        sc = generate(desk_spec(1))
        cmp = compare(coverage_report(sc, EMPTY), coverage_report(sc, EMPTY))
        assert "n/a" in render_compare(cmp)
