"""Derivative-free minimization of the bound over (lambda, gamma_1..gamma_ell)."""
import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .bound import BoundPoint, ratio_general
from .const import (
    CURVATURE_TOLERANCE,
    DEFAULT_TOLERANCE,
    FD_STEP,
    FUNCTION_TOLERANCE,
    GRID_MAX_DIMENSION,
    HESSIAN_STEP,
    MAX_ITERATIONS_PER_DIMENSION,
    MAX_POLISH_ROUNDS,
    MAX_TABLE_ELL,
    MONOTONE_SLACK,
    RESTART_GRID,
    STATIONARITY_TOLERANCE,
    WARM_START_GAMMA,
)
from .exceptions import InvalidParameters, NonFiniteObjective, OptimizationFailed

_LOGGER: logging.Logger = logging.getLogger(__package__)


def to_parameters(x: Sequence[float]) -> np.ndarray:
    """Map unconstrained coordinates to parameters 1 + exp(x) > 1."""
    return 1.0 + np.exp(np.asarray(x, dtype=float))


def to_coordinates(parameters: Sequence[float]) -> np.ndarray:
    """Map parameters > 1 to unconstrained coordinates ln(param - 1)."""
    values = np.asarray(parameters, dtype=float)
    if np.any(values <= 1):
        raise InvalidParameters(f"parameters must be > 1, got {list(values)}")
    return np.log(values - 1.0)


def bound_objective(x: np.ndarray) -> float:
    """Return ratio_general at 1 + exp(x), raising NonFiniteObjective where it is undefined."""
    parameters = to_parameters(x)
    try:
        value = ratio_general(float(parameters[0]), [float(gamma) for gamma in parameters[1:]])
    except (InvalidParameters, OverflowError, ZeroDivisionError) as exception:
        raise NonFiniteObjective(f"bound undefined at {list(parameters)}: {exception}") from exception
    if not math.isfinite(value):
        raise NonFiniteObjective(f"bound is {value} at {list(parameters)}")
    return value


def fd_gradient(x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Return the central finite-difference gradient of bound_objective."""
    gradient = np.zeros(len(x))
    for i in range(len(x)):
        shift = np.zeros(len(x))
        shift[i] = step
        gradient[i] = (bound_objective(x + shift) - bound_objective(x - shift)) / (2 * step)
    return gradient


def fd_hessian(x: np.ndarray, step: float = HESSIAN_STEP) -> np.ndarray:
    """Return the symmetrized central finite-difference Hessian of bound_objective."""
    dim = len(x)
    hessian = np.zeros((dim, dim))
    basis = np.eye(dim) * step
    for i in range(dim):
        for j in range(i, dim):
            value = (
                bound_objective(x + basis[i] + basis[j])
                - bound_objective(x + basis[i] - basis[j])
                - bound_objective(x - basis[i] + basis[j])
                + bound_objective(x - basis[i] - basis[j])
            ) / (4 * step * step)
            hessian[i, j] = hessian[j, i] = value
    return hessian


@dataclass(frozen=True)
class OptimizationResult:
    """Best point found for one number of gamma-levels, with its local-minimum certificate."""

    ell: int
    point: BoundPoint
    iterations: int
    restarts_used: int
    gradient_norm_fd: float
    hessian_min_eigenvalue: float
    converged: bool
    discarded: int = 0

    def to_dict(self) -> dict[str, Any]:
        """Return a plain representation."""
        return {
            **self.point.to_dict(),
            "iterations": self.iterations,
            "restarts_used": self.restarts_used,
            "discarded": self.discarded,
            "gradient_norm_fd": self.gradient_norm_fd,
            "hessian_min_eigenvalue": self.hessian_min_eigenvalue,
            "converged": self.converged,
        }


def start_points(ell: int, previous: Optional[Sequence[float]] = None) -> list[tuple[float, ...]]:
    """
    Return the multistart initializations in parameter space, warm starts first.

    The full grid over RESTART_GRID is used while ell + 1 <= GRID_MAX_DIMENSION, above that only its
    diagonal. A previous optimum for ell - 1 contributes two warm starts: gamma = WARM_START_GAMMA appended,
    and lambda repeated as a new first gamma-level, which leaves the bound unchanged.
    """
    dim = ell + 1
    points: list[tuple[float, ...]] = []
    if previous is not None:
        previous = tuple(float(value) for value in previous)
        if len(previous) != ell:
            raise InvalidParameters(f"previous optimum needs {ell} parameters, got {len(previous)}")
        points.append((previous[0], previous[0]) + previous[1:])
        points.append(previous + (WARM_START_GAMMA,))
    if dim <= GRID_MAX_DIMENSION:
        points.extend(itertools.product(RESTART_GRID, repeat=dim))
    else:
        points.extend((value,) * dim for value in RESTART_GRID)
    return points


def _nelder_mead(x0: np.ndarray, tolerance: float) -> Any:
    dim = len(x0)
    options = {
        "xatol": tolerance,
        "fatol": FUNCTION_TOLERANCE,
        "maxiter": MAX_ITERATIONS_PER_DIMENSION * dim,
        "maxfev": 2 * MAX_ITERATIONS_PER_DIMENSION * dim,
        "adaptive": dim > 2,
    }
    return minimize(bound_objective, x0, method="Nelder-Mead", options=options)


def run_restart(index: int, start: Sequence[float], tolerance: float) -> Optional[tuple[float, int, tuple, int]]:
    """
    Minimize from one start; returns (value, restart index, parameters, iterations) or None if discarded.

    Polishing restarts the simplex from the optimum until the value stops improving.
    """
    try:
        result = _nelder_mead(to_coordinates(start), tolerance)
        iterations = int(result.nit)
        for _ in range(MAX_POLISH_ROUNDS):
            polished = _nelder_mead(result.x, tolerance)
            iterations += int(polished.nit)
            if polished.fun >= result.fun - FUNCTION_TOLERANCE:
                if polished.fun < result.fun:
                    result = polished
                break
            result = polished
    except NonFiniteObjective as exception:
        _LOGGER.warning("Discarding restart %d from %s: %s", index, list(start), exception.message)
        return None
    parameters = tuple(float(value) for value in to_parameters(result.x))
    _LOGGER.debug("Restart %d from %s reached %.12f", index, list(start), result.fun)
    return float(result.fun), index, parameters, iterations


class FomOptimizer:
    """Multistart Nelder-Mead over the log-shifted parameters."""

    def __init__(self, tolerance: float = DEFAULT_TOLERANCE, restarts: Optional[int] = None, workers: int = 1) -> None:
        """
        Initialize the instance.

        Parameters:
            tolerance: simplex diameter in log-shifted coordinates at which a restart stops
            restarts: use at most this many start points (all when None)
            workers: number of processes running restarts in parallel
        """
        self._tolerance = tolerance
        self._restarts = restarts
        self._workers = workers

    def get_tolerance(self) -> float:
        """Get the simplex tolerance."""
        return self._tolerance

    def set_tolerance(self, value: float) -> None:
        """Set the simplex tolerance."""
        if not value > 0:
            raise InvalidParameters(f"tolerance must be positive, got {value}")
        self._tolerance = value

    def get_restarts(self) -> Optional[int]:
        """Get the restart limit."""
        return self._restarts

    def set_restarts(self, value: Optional[int]) -> None:
        """Set the restart limit."""
        if value is not None and value < 1:
            raise InvalidParameters(f"restarts must be >= 1, got {value}")
        self._restarts = value

    def get_workers(self) -> int:
        """Get the number of worker processes."""
        return self._workers

    def set_workers(self, value: int) -> None:
        """Set the number of worker processes."""
        if value < 1:
            raise InvalidParameters(f"workers must be >= 1, got {value}")
        self._workers = value

    def minimize(
        self,
        ell: int,
        initial: Optional[Sequence[float]] = None,
        previous: Optional[Sequence[float]] = None,
    ) -> OptimizationResult:
        """
        Return the best bound found with ell gamma-levels.

        Parameters:
            ell: number of gamma-levels
            initial: a start point tried before all others
            previous: optimum parameters for ell - 1 gamma-levels, used for warm starts

        Without initial or previous, the ell - 1 optimum is computed first so the warm starts are always
        part of the start set.
        """
        if ell < 0:
            raise InvalidParameters(f"ell must be nonnegative, got {ell}")
        if initial is None and previous is None and ell > 0:
            previous = self.minimize(ell - 1).point.parameters
        starts = start_points(ell, previous)
        if initial is not None:
            initial = tuple(float(value) for value in initial)
            if len(initial) != ell + 1:
                raise InvalidParameters(f"initial point needs {ell + 1} parameters, got {len(initial)}")
            starts.insert(0, initial)
        if self._restarts is not None:
            starts = starts[: self._restarts]
        outcomes = self._run_all(starts)
        completed = [outcome for outcome in outcomes if outcome is not None]
        if not completed:
            raise OptimizationFailed(f"all {len(starts)} restarts for ell={ell} were discarded")
        value, index, parameters, iterations = min(completed, key=lambda outcome: (outcome[0], outcome[1]))
        x = to_coordinates(parameters)
        gradient_norm = float(np.linalg.norm(fd_gradient(x)))
        min_eigenvalue = float(np.min(np.linalg.eigvalsh(fd_hessian(x))))
        converged = gradient_norm <= STATIONARITY_TOLERANCE and min_eigenvalue >= -CURVATURE_TOLERANCE
        if not converged:
            _LOGGER.warning(
                "Optimum for ell=%d not certified: gradient %.3e, smallest eigenvalue %.3e",
                ell,
                gradient_norm,
                min_eigenvalue,
            )
        _LOGGER.debug("ell=%d best value %.12f from restart %d", ell, value, index)
        return OptimizationResult(
            ell=ell,
            point=BoundPoint(parameters[0], parameters[1:], value),
            iterations=iterations,
            restarts_used=len(completed),
            gradient_norm_fd=gradient_norm,
            hessian_min_eigenvalue=min_eigenvalue,
            converged=converged,
            discarded=len(starts) - len(completed),
        )

    def _run_all(self, starts: list[tuple[float, ...]]) -> list[Optional[tuple[float, int, tuple, int]]]:
        indices = range(len(starts))
        tolerances = [self._tolerance] * len(starts)
        if self._workers > 1 and len(starts) > 1:
            with ProcessPoolExecutor(max_workers=self._workers) as executor:
                return list(executor.map(run_restart, indices, starts, tolerances))
        return [run_restart(index, start, self._tolerance) for index, start in zip(indices, starts)]

    def reproduce_table(self, max_ell: int) -> list[OptimizationResult]:
        """Return one optimum per ell = 0..max_ell, each warm started from the previous one."""
        if not 0 <= max_ell <= MAX_TABLE_ELL:
            raise InvalidParameters(f"max_ell must lie in [0, {MAX_TABLE_ELL}], got {max_ell}")
        rows: list[OptimizationResult] = []
        previous = None
        for ell in range(max_ell + 1):
            row = self.minimize(ell, previous=previous)
            if rows and row.point.value > rows[-1].point.value + MONOTONE_SLACK:
                _LOGGER.warning("Value for ell=%d increased to %.12f", ell, row.point.value)
            rows.append(row)
            previous = row.point.parameters
        return rows


def minimize_bound(
    ell: int,
    restarts: Optional[int] = None,
    tolerance: float = DEFAULT_TOLERANCE,
    initial: Optional[Sequence[float]] = None,
    workers: int = 1,
) -> OptimizationResult:
    """Minimize the bound with ell gamma-levels, see FomOptimizer.minimize."""
    optimizer = FomOptimizer(tolerance, restarts, workers)
    return optimizer.minimize(ell, initial=initial)


def reproduce_table(max_ell: int, tolerance: float = DEFAULT_TOLERANCE, workers: int = 1) -> list[OptimizationResult]:
    """Reproduce the optimum for every ell up to max_ell."""
    return FomOptimizer(tolerance, None, workers).reproduce_table(max_ell)
