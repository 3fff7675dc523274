"""Tests for the simulator."""
import dataclasses
import json
from fractions import Fraction

import pytest

from fombound.bound import closed_p, error_free_profile, finite_h_prediction
from fombound.construction import ConstructionParams
from fombound.engine import DepartureAssignment, OnlineAlgorithm
from fombound.exceptions import ContractViolation, ScaleOverflow, UnknownAlgorithm
from fombound.simulator import FomSimulator, run, verify_error_budget

from .const import WATERFILLING_P_H3


class Lazy(OnlineAlgorithm):
    """Algorithm that never places any mass."""

    name = "lazy"

    def on_departure(self, state, vertex):
        """Return an empty assignment."""
        return DepartureAssignment(vertex)


class TestSimulator:
    """Test suite for FomSimulator."""

    def setup_method(self):
        """Initialize test."""
        self.params = ConstructionParams.create(3, 2)
        self.simulator = FomSimulator(self.params)

    def test_accessors(self):
        """Test simulator: accessors."""
        assert self.simulator.get_params() is self.params
        assert self.simulator.get_algorithm().name == "waterfilling"
        assert self.simulator.get_trace_path() is None
        assert self.simulator.get_state() is None
        self.simulator.set_track_edges(True)
        assert self.simulator.get_track_edges()

    def test_waterfilling_profile(self):
        """Test simulator: water-filling follows the recurrence exactly."""
        report = self.simulator.run()
        assert report.p == WATERFILLING_P_H3
        assert report.p == error_free_profile(self.params)
        assert report.q == WATERFILLING_P_H3[1:]
        assert report.p_a == Fraction(7, 27)
        assert report.sizes == (1, 2, 4, 8)
        assert report.opt_value == 15
        assert report.vertex_value_sum == 2 * report.alg_value
        assert all(decision.distance == 0 for decision in report.decisions)

    def test_prediction(self):
        """Test simulator: the exact prediction matches the simulated ratio."""
        assert self.simulator.run().ratio == finite_h_prediction(self.params)

    def test_budgets(self):
        """Test simulator: every budget holds for water-filling."""
        report = self.simulator.run()
        checks = verify_error_budget(report, self.params)
        assert {check.name for check in checks} == {
            "recurrence",
            "closed_form",
            "v_level",
            "mass_balance",
            "double_count",
            "triangle",
        }
        assert all(check.passed for check in checks)
        assert all(check.slack >= 0 for check in checks)

    def test_corrupted_report(self):
        """Test budgets: a shifted p_1 fails the recurrence check."""
        report = self.simulator.run()
        shifted = report.p[1] + Fraction(2, report.sizes[1])
        corrupted = dataclasses.replace(report, p=(report.p[0], shifted) + report.p[2:])
        checks = verify_error_budget(corrupted, self.params)
        assert ("recurrence", 1) in [(check.name, check.index) for check in checks if not check.passed]

    def test_triangle_labels(self):
        """Test simulator: every vertex of A is labeled once."""
        report = self.simulator.run()
        assert len(report.triangle_labels) == report.a_size
        assert len(set(report.triangle_labels)) == report.a_size

    def test_report_dict(self):
        """Test simulator: report layout."""
        data = self.simulator.run().to_dict()
        assert data["p"] == ["0", "1/3", "2/9", "7/27"]
        assert data["opt_value"] == 15
        assert data["aggregate_error_budget"] == 42
        assert len(data["partitions"]) == 3
        assert data["ratio_float"] == pytest.approx(float(Fraction(data["ratio"])))

    def test_level_rows(self):
        """Test simulator: one row per level, A has no V-level."""
        rows = self.simulator.run().level_rows()
        assert [row["n"] for row in rows] == [1, 2, 4, 8]
        assert rows[0]["q"] == Fraction(1, 3)
        assert rows[-1]["q"] is None

    def test_trace(self, tmp_path):
        """Test simulator: trace file."""
        path = tmp_path / "trace.jsonl"
        self.simulator.set_trace_path(str(path))
        self.simulator.run()
        records = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
        events = [record["event"] for record in records]
        assert events.count("departure") == 30
        assert events.count("partition") == 3
        assert events.count("label") == 8
        assert records[0] == {"event": "departure", "phase": "level 0", "vertex": 0, "water_level": "1/3"}

    def test_edges(self):
        """Test simulator: tracked edges add up to the matching."""
        self.simulator.set_track_edges(True)
        report = self.simulator.run()
        state = self.simulator.get_state()
        assert state.incident_value(0) == 1
        assert state.total_matching() == report.alg_value


class TestSmallInstances:
    """Test suite for degenerate instances."""

    def test_single_triangle(self):
        """Test simulator: one vertex on each side."""
        report = run(ConstructionParams.create(0, 2))
        assert report.alg_value == 1
        assert report.ratio == 1

    def test_two_vertex_triangle(self):
        """Test simulator: two vertices on each side."""
        params = ConstructionParams.create(0, 2, multiplier=2)
        report = run(params)
        assert report.alg_value == Fraction(3, 2)
        assert report.opt_value == 2
        assert report.ratio == Fraction(3, 4)
        assert report.rho == Fraction(3, 4)
        assert report.q == ()
        assert all(check.passed for check in verify_error_budget(report, params))


class TestRobustness:
    """Test suite for non water-filling algorithms."""

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_levels(self, seed):
        """Test simulator: every budget holds against random algorithms."""
        params = ConstructionParams.create(2, 2, [3], multiplier=2)
        report = run(params, "random", seed=seed)
        assert report.algorithm == f"random:{seed}"
        assert all(check.passed for check in verify_error_budget(report, params))

    def test_contract_violation(self):
        """Test simulator: a violation names the phase."""
        with pytest.raises(ContractViolation) as info:
            FomSimulator(ConstructionParams.create(1, 2), Lazy()).run()
        assert info.value.invariant == "saturation violated"
        assert info.value.detail.startswith("level 0")

    def test_scale_overflow(self):
        """Test simulator: instance too large."""
        with pytest.raises(ScaleOverflow):
            run(ConstructionParams.create(30, 2))

    def test_unknown_algorithm(self):
        """Test simulator: unknown algorithm."""
        with pytest.raises(UnknownAlgorithm):
            run(ConstructionParams.create(1, 2), "greedy")

    @pytest.mark.parametrize("seed", range(50))
    def test_random_sweep(self, seed):
        """Test simulator: level, V-level and triangle budgets across random seeds."""
        params = ConstructionParams.create(3, 2, [3], multiplier=4)
        failed = [check for check in verify_error_budget(run(params, "random", seed=seed), params) if not check.passed]
        assert failed == []


class TestClosedForm:
    """Test suite for water-filling against the exact level profile."""

    @pytest.mark.parametrize("h", [3, 4, 5, 6])
    def test_profile(self, h):
        """Test simulator: exact profile and closed-form deviation with |A| >= 512."""
        params = ConstructionParams.create(h, 2, multiplier=max(1, 512 // 2**h))
        report = run(params)
        assert report.a_size >= 512
        assert report.p == error_free_profile(params)
        for i in range(1, h + 1):
            assert abs(float(report.p[i]) - closed_p(i, 2)) <= i / report.sizes[i]
