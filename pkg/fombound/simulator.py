"""Drive the event schedule against an online algorithm and measure the construction's statistics."""
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Any, Optional, Union

from .adversary import PartitionDecision, partition_level, target_mass, triangle_next_label
from .bound import aggregate_error_budget, error_free_profile
from .const import DEFAULT_ALGORITHM, MAX_SIMULATED_VERTICES
from .construction import ConstructionParams, EventSchedule, build_schedule, level_sizes
from .engine import DepartureAssignment, MatchState, OnlineAlgorithm, get_algorithm
from .exceptions import ContractViolation, ScaleOverflow
from .rational import format_fraction, one_minus_exp_upper

_LOGGER: logging.Logger = logging.getLogger(__package__)


@dataclass(frozen=True)
class SimulationReport:
    """Measured statistics of one run."""

    params: ConstructionParams
    algorithm: str
    sizes: tuple[int, ...]
    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    p_a: Fraction
    rho: Fraction
    alg_value: Fraction
    opt_value: int
    vertex_value_sum: Fraction
    decisions: tuple[PartitionDecision, ...] = field(repr=False, default=())
    triangle_labels: tuple[int, ...] = field(repr=False, default=())

    @property
    def ratio(self) -> Fraction:
        """Return ALG / OPT."""
        return self.alg_value / self.opt_value

    @property
    def a_size(self) -> int:
        """Return |A|."""
        return self.sizes[-1]

    def level_rows(self) -> list[dict[str, Any]]:
        """Return one row per level with n_i, p_i and q_i (q is empty for A)."""
        rows = []
        for i, size in enumerate(self.sizes):
            rows.append({"i": i, "n": size, "p": self.p[i], "q": self.q[i] if i < len(self.q) else None})
        return rows

    def to_dict(self) -> dict[str, Any]:
        """Return the full report with exact values rendered as "p/q" strings."""
        return {
            "params": self.params.to_dict(),
            "algorithm": self.algorithm,
            "sizes": list(self.sizes),
            "p": [format_fraction(value) for value in self.p],
            "q": [format_fraction(value) for value in self.q],
            "p_A": format_fraction(self.p_a),
            "rho": format_fraction(self.rho),
            "alg_value": format_fraction(self.alg_value),
            "opt_value": self.opt_value,
            "ratio": format_fraction(self.ratio),
            "ratio_float": float(self.ratio),
            "aggregate_error_budget": aggregate_error_budget(self.params.h),
            "partitions": [decision.to_record() for decision in self.decisions],
        }


@dataclass(frozen=True)
class BudgetCheck:
    """One error budget verdict: passed iff deviation <= budget."""

    name: str
    index: int
    measured: Fraction
    reference: Fraction
    deviation: Fraction
    budget: Fraction

    @property
    def passed(self) -> bool:
        """Return true if the deviation stays within the budget."""
        return self.deviation <= self.budget

    @property
    def slack(self) -> Fraction:
        """Return budget - deviation."""
        return self.budget - self.deviation


class FomSimulator:
    """Simulation of one instance of the construction against one algorithm."""

    def __init__(self, params: ConstructionParams, algorithm: Union[str, OnlineAlgorithm] = DEFAULT_ALGORITHM) -> None:
        """
        Initialize the instance.

        Parameters:
            params: the instance
            algorithm: an algorithm or its registry name
        """
        self._params = params
        self._algorithm = get_algorithm(algorithm) if isinstance(algorithm, str) else algorithm
        self._trace_path: Optional[str] = None
        self._track_edges = False
        self._state: Optional[MatchState] = None
        self._trace: Optional[IO[str]] = None
        _LOGGER.debug("Initialized simulator for %s with %s", params, self._algorithm.name)

    def get_params(self) -> ConstructionParams:
        """Get the instance."""
        return self._params

    def get_algorithm(self) -> OnlineAlgorithm:
        """Get the algorithm."""
        return self._algorithm

    def get_trace_path(self) -> Optional[str]:
        """Get the trace file path."""
        return self._trace_path

    def set_trace_path(self, value: Optional[str]) -> None:
        """Write one JSON line per departure and adversary decision to this file."""
        self._trace_path = value

    def get_track_edges(self) -> bool:
        """Get whether per-edge values are kept."""
        return self._track_edges

    def set_track_edges(self, value: bool) -> None:
        """Keep per-edge values in the state (memory grows with the number of matched edges)."""
        self._track_edges = value

    def get_state(self) -> Optional[MatchState]:
        """Get the state of the last run."""
        return self._state

    def _emit(self, record: dict[str, Any]) -> None:
        if self._trace is not None:
            self._trace.write(json.dumps(record) + "\n")

    def _depart(self, state: MatchState, vertex: int, phase: str) -> Fraction:
        try:
            assignment = self._algorithm.on_departure(state, vertex)
            if self._trace is not None:
                self._emit(self._departure_record(state, assignment, phase))
            return state.apply_assignment(vertex, assignment)
        except ContractViolation as exception:
            raise ContractViolation(exception.invariant, f"{phase}: {exception.detail}") from exception

    def _departure_record(self, state: MatchState, assignment: DepartureAssignment, phase: str) -> dict[str, Any]:
        record: dict[str, Any] = {"event": "departure", "phase": phase, "vertex": assignment.vertex}
        if assignment.water_level is not None:
            record["water_level"] = format_fraction(assignment.water_level)
        if self._track_edges or not assignment.is_level:
            record["distribution"] = {str(u): format_fraction(inc) for u, inc in state.expand(assignment).items()}
        return record

    def run(self) -> SimulationReport:
        """Execute the schedule and return the measured statistics."""
        vertex_count = 2 * level_sizes(self._params).total
        if vertex_count > MAX_SIMULATED_VERTICES:
            raise ScaleOverflow(f"{vertex_count} vertices exceed the limit of {MAX_SIMULATED_VERTICES}")
        schedule = build_schedule(self._params)
        if self._trace_path is None:
            return self._run(schedule)
        with open(self._trace_path, "w", encoding="utf-8") as handle:
            self._trace = handle
            try:
                return self._run(schedule)
            finally:
                self._trace = None

    def _run(self, schedule: EventSchedule) -> SimulationReport:
        sizes = schedule.sizes
        state = MatchState(self._track_edges)
        self._state = state
        pool = state.arrive_region(schedule.initial, "U_0")
        current = list(schedule.initial)
        p = [Fraction(0)]
        v_levels: list[list[int]] = []
        decisions = []
        for phase in schedule.level_phases():
            i = phase.level
            name = f"level {i}"
            batch = state.arrive_region(phase.batch, f"N+(U_{i})")
            for vertex in current:
                state.connect(vertex, batch)
            for vertex in current:
                self._depart(state, vertex, name)
            d = target_mass(p[-1], sizes[i], sizes[i + 1])
            decision = partition_level(state.region_values(batch), sizes[i + 1], d, n_prev=sizes[i])
            decisions.append(decision)
            p.append(decision.achieved_mass / sizes[i + 1])
            self._emit({"event": "partition", "phase": name, **decision.to_record()})
            _LOGGER.debug("Level %d labeled, p_%d=%s", i, i + 1, p[-1])
            v_level = sorted(decision.v_prev)
            for vertex in v_level:
                self._depart(state, vertex, name)
            v_levels.append(v_level)
            current = sorted(decision.u_next)
            pool = batch

        a_size = sizes.a_size
        triangle_mass = Fraction(0)
        labels = []
        for phase in schedule.triangle_phases():
            name = f"triangle {phase.step}"
            state.arrive(phase.vertex)
            state.connect(phase.vertex, pool)
            triangle_mass += self._depart(state, phase.vertex, name)
            label = triangle_next_label(state.region_candidates(pool))
            state.detach(label)
            labels.append(label)
            self._emit({"event": "label", "phase": name, "vertex": label})
        _LOGGER.debug("Triangle finished, mass %s on |A|=%d", triangle_mass, a_size)

        for vertex in current:
            self._depart(state, vertex, "final")

        q = tuple(sum(state.values(level).values(), Fraction(0)) / sizes[i] for i, level in enumerate(v_levels))
        return SimulationReport(
            params=self._params,
            algorithm=self._algorithm.name,
            sizes=sizes.sizes,
            p=tuple(p),
            q=q,
            p_a=p[-1],
            rho=triangle_mass / a_size,
            alg_value=state.total_matching(),
            opt_value=sizes.total,
            vertex_value_sum=state.vertex_value_sum(),
            decisions=tuple(decisions),
            triangle_labels=tuple(labels),
        )


def run(
    params: ConstructionParams, algorithm_name: str = DEFAULT_ALGORITHM, seed: Optional[int] = None
) -> SimulationReport:
    """Simulate params against a named algorithm; a seed selects "random:<seed>" when the name has none."""
    if seed is not None and algorithm_name == "random":
        algorithm_name = f"random:{seed}"
    return FomSimulator(params, algorithm_name).run()


def verify_error_budget(report: SimulationReport, params: ConstructionParams) -> list[BudgetCheck]:
    """
    Check a report against the adversary's error budgets.

    - recurrence: |p_i - (1 - p_{i-1})/(factor + 1)| <= 1/n_i
    - closed_form: |p_i - error-free p_i| <= i/n_i
    - v_level: |q_i - error-free p_{i+1}| <= (i+3)/n_i
    - mass_balance: (1 - p_i) n_i = p_{i+1} n_{i+1} + q_i n_i exactly
    - double_count: 2 ALG = sum of vertex values exactly
    - triangle: rho <= 1 - exp(-(1 - p_A)) + 2/|A|, exp bounded from above at high precision
    """
    sizes = report.sizes
    reference = error_free_profile(params)
    checks = []
    for i in range(1, params.depth + 1):
        expected = (1 - report.p[i - 1]) / (params.factor(i) + 1)
        checks.append(
            BudgetCheck("recurrence", i, report.p[i], expected, abs(report.p[i] - expected), Fraction(1, sizes[i]))
        )
    for i in range(1, params.depth + 1):
        checks.append(
            BudgetCheck(
                "closed_form", i, report.p[i], reference[i], abs(report.p[i] - reference[i]), Fraction(i, sizes[i])
            )
        )
    for i, q in enumerate(report.q):
        checks.append(
            BudgetCheck("v_level", i, q, reference[i + 1], abs(q - reference[i + 1]), Fraction(i + 3, sizes[i]))
        )
    for i, q in enumerate(report.q):
        lhs = (1 - report.p[i]) * sizes[i]
        rhs = report.p[i + 1] * sizes[i + 1] + q * sizes[i]
        checks.append(BudgetCheck("mass_balance", i, lhs, rhs, abs(lhs - rhs), Fraction(0)))
    doubled = 2 * report.alg_value
    checks.append(
        BudgetCheck(
            "double_count",
            0,
            doubled,
            report.vertex_value_sum,
            abs(doubled - report.vertex_value_sum),
            Fraction(0),
        )
    )
    limit = one_minus_exp_upper(1 - report.p_a)
    checks.append(
        BudgetCheck("triangle", 0, report.rho, limit, max(Fraction(0), report.rho - limit), Fraction(2, report.a_size))
    )
    failed = [check for check in checks if not check.passed]
    if failed:
        _LOGGER.debug("%d of %d budget checks failed, first %s", len(failed), len(checks), failed[0])
    return checks
