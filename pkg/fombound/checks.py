"""Invariant suite run by the check command."""
import logging
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .bound import (
    argmin_l0,
    derivative_scan_l0,
    error_free_profile,
    finite_h_prediction,
    p_after_gamma_levels,
    ratio_general,
    ratio_l0,
    ratio_l3,
)
from .const import DERIVATIVE_PEAK, HEADLINE_BOUND, PRIOR_BOUND, PRIOR_BOUND_LAMBDA, PUBLISHED_OPTIMA
from .construction import ConstructionParams
from .optimizer import FomOptimizer
from .simulator import run, verify_error_budget

_LOGGER: logging.Logger = logging.getLogger(__package__)

ORACLE_POINTS = 100
ORACLE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one invariant check."""

    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b))


def check_oracle_l0(quick: bool) -> tuple[bool, str]:
    """The general evaluator agrees with the closed form without gamma-levels."""
    rng = np.random.default_rng(0)
    worst = max(_relative_gap(ratio_general(lam, ()), ratio_l0(lam)) for lam in rng.uniform(1.1, 20, ORACLE_POINTS))
    return worst <= ORACLE_TOLERANCE, f"worst relative gap {worst:.2e}"


def check_oracle_l3(quick: bool) -> tuple[bool, str]:
    """The general evaluator agrees with the five-term closed form for three gamma-levels."""
    rng = np.random.default_rng(1)
    worst = 0.0
    for lam, g1, g2, g3 in rng.uniform(1.1, 20, (ORACLE_POINTS, 4)):
        worst = max(worst, _relative_gap(ratio_general(lam, (g1, g2, g3)), ratio_l3(lam, g1, g2, g3)))
    return worst <= ORACLE_TOLERANCE, f"worst relative gap {worst:.2e}"


def check_expanded_forms(quick: bool) -> tuple[bool, str]:
    """Expanded finite-h gamma-level forms agree with the exact recurrence."""
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(20 if quick else ORACLE_POINTS):
        h = int(rng.integers(0, 12))
        lam = Fraction(int(rng.integers(11, 100)), 10)
        gammas = tuple(Fraction(int(value), 10) for value in rng.integers(11, 100, 3))
        exact = error_free_profile(ConstructionParams.create(h, lam, gammas))
        expanded = p_after_gamma_levels(float(lam), [float(gamma) for gamma in gammas], h)
        worst = max(worst, max(abs(float(exact[h + j + 1]) - expanded[j]) for j in range(3)))
    return worst <= ORACLE_TOLERANCE, f"worst gap {worst:.2e}"


def check_table_values(quick: bool) -> tuple[bool, str]:
    """The bound at the published parameters reproduces the published values."""
    gaps = []
    for ell in (0, 1, 2, 3):
        lam, gammas, value = PUBLISHED_OPTIMA[ell]
        gaps.append(abs(ratio_general(lam, gammas) - value))
    return max(gaps) <= 1e-6, "gaps " + ", ".join(f"{gap:.1e}" for gap in gaps)


def check_prior_bound(quick: bool) -> tuple[bool, str]:
    """The bound without gamma-levels at lambda = 7 equals the earlier tree bound."""
    value = ratio_l0(PRIOR_BOUND_LAMBDA)
    return round(value, 4) == PRIOR_BOUND, f"ratio_l0({PRIOR_BOUND_LAMBDA}) = {value:.6f}"


def check_closed_form_simulation(quick: bool) -> tuple[bool, str]:
    """Water-filling runs follow the error-free recurrence exactly and stay within the closed-form budget."""
    for h in range(3, 5 if quick else 7):
        params = ConstructionParams.create(h, 2, multiplier=max(1, math.ceil(512 / 2**h)))
        report = run(params, "waterfilling")
        if report.p != error_free_profile(params):
            return False, f"h={h}: measured p differs from the recurrence"
        failed = [check for check in verify_error_budget(report, params) if not check.passed]
        if failed:
            return False, f"h={h}: {failed[0].name} fails at {failed[0].index}"
    return True, "exact agreement"


def check_adversary_robustness(quick: bool) -> tuple[bool, str]:
    """Every budget holds against seeded random algorithms."""
    params = ConstructionParams.create(3, 2, (3,), multiplier=4)
    seeds = range(5 if quick else 50)
    for seed in seeds:
        report = run(params, f"random:{seed}")
        failed = [check for check in verify_error_budget(report, params) if not check.passed]
        if failed:
            return False, f"seed {seed}: {failed[0].name} fails at {failed[0].index}"
    return True, f"{len(seeds)} seeds"


def check_triangle_limit(quick: bool) -> tuple[bool, str]:
    """Water-filling on the bare triangle approaches 1 - 1/e."""
    a_size = 1000 if quick else 10_000
    report = run(ConstructionParams.create(0, 2, multiplier=a_size), "waterfilling")
    rho = float(report.rho)
    limit = 1 - math.exp(-1)
    return limit - 10 / a_size <= rho <= limit + 2 / a_size, f"rho = {rho:.6f} on |A| = {a_size}"


def check_convergence(quick: bool) -> tuple[bool, str]:
    """The exact finite-h prediction converges to the limit bound."""
    limit = ratio_general(2, ())
    gaps = []
    for h in (4, 6) if quick else (4, 6, 8):
        params = ConstructionParams.create(h, 2, multiplier=4)
        gap = abs(float(finite_h_prediction(params)) - limit)
        if gap > 10 * (2.0**-h + 1 / (4 * 2**h)):
            return False, f"h={h}: gap {gap:.2e} above budget"
        gaps.append(gap)
    decreasing = all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
    return decreasing, "gaps " + ", ".join(f"{gap:.2e}" for gap in gaps)


def check_derivative_peak(quick: bool) -> tuple[bool, str]:
    """The derivative of the bound without gamma-levels has an interior local maximum."""
    peak = derivative_scan_l0(8, 12)
    flat = derivative_scan_l0(2, 4)
    passed = peak is not None and abs(peak - DERIVATIVE_PEAK) <= 1e-2 and flat is None
    return passed, f"peak at {peak}, window [2, 4] gives {flat}"


def check_unique_minimum(quick: bool) -> tuple[bool, str]:
    """The bound without gamma-levels has its interior minimum at the published lambda."""
    lam = argmin_l0()
    return abs(lam - PUBLISHED_OPTIMA[0][0]) <= 1e-3, f"argmin {lam:.6f}"


def check_optimizer(quick: bool) -> tuple[bool, str]:
    """The optimizer reproduces the published optima and the headline bound."""
    rows = FomOptimizer().reproduce_table(0 if quick else 3)
    gaps = [abs(row.point.value - PUBLISHED_OPTIMA[row.ell][2]) for row in rows]
    passed = max(gaps) <= 1e-6 and all(row.converged for row in rows)
    if not quick:
        passed = passed and min(row.point.value for row in rows) < HEADLINE_BOUND
    return passed, "values " + ", ".join(f"{row.point.value:.6f}" for row in rows)


CHECKS: list[tuple[str, Callable[[bool], tuple[bool, str]]]] = [
    ("oracle_l0", check_oracle_l0),
    ("oracle_l3", check_oracle_l3),
    ("expanded_forms", check_expanded_forms),
    ("table_values", check_table_values),
    ("prior_bound", check_prior_bound),
    ("closed_form_simulation", check_closed_form_simulation),
    ("adversary_robustness", check_adversary_robustness),
    ("triangle_limit", check_triangle_limit),
    ("convergence", check_convergence),
    ("derivative_peak", check_derivative_peak),
    ("unique_minimum", check_unique_minimum),
    ("optimizer", check_optimizer),
]


def run_checks(quick: bool = False) -> list[CheckResult]:
    """Run every check; an exception inside a check counts as a failure."""
    results = []
    for name, check in CHECKS:
        start = time.perf_counter()
        try:
            passed, detail = check(quick)
        except Exception as exception:  # pylint: disable=broad-except
            _LOGGER.error("Check %s raised %s", name, exception)
            passed, detail = False, f"{exception.__class__.__name__}: {exception}"
        elapsed = time.perf_counter() - start
        _LOGGER.debug("Check %s %s in %.2fs", name, "passed" if passed else "failed", elapsed)
        results.append(CheckResult(name, passed, detail, elapsed))
    return results
