"""Closed forms and limit evaluation of the competitive ratio upper bound."""
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .const import DERIVATIVE_GRID_POINTS, DERIVATIVE_STEP
from .construction import ConstructionParams, level_sizes
from .exceptions import InvalidParameters
from .rational import Number, parse_rational, parse_real

_LOGGER: logging.Logger = logging.getLogger(__package__)


def _check_real(lam: float, gammas: Sequence[float] = ()) -> None:
    if not lam > 1 or not math.isfinite(lam):
        raise InvalidParameters(f"lambda must be a finite number > 1, got {lam}")
    for j, gamma in enumerate(gammas, start=1):
        if not gamma > 1 or not math.isfinite(gamma):
            raise InvalidParameters(f"gamma_{j} must be a finite number > 1, got {gamma}")


def closed_p(i: int, lam: float) -> float:
    """Return the error-free average matched fraction (1/(lambda+2)) * (1 - (-1/(lambda+1))^i) of U_i."""
    if i < 0:
        raise InvalidParameters(f"level must be nonnegative, got {i}")
    _check_real(lam)
    return (1 - (-1 / (lam + 1)) ** i) / (lam + 2)


def closed_p_exact(i: int, lam: Number) -> Fraction:
    """Rational version of closed_p."""
    if i < 0:
        raise InvalidParameters(f"level must be nonnegative, got {i}")
    lam = parse_rational(lam)
    if lam <= 1:
        raise InvalidParameters(f"lambda must be > 1, got {lam}")
    return (1 - Fraction(-1, 1) ** i / (lam + 1) ** i) / (lam + 2)


def error_free_profile(params: ConstructionParams) -> tuple[Fraction, ...]:
    """
    Return p_0..p_{h+ell} with every adversary error set to zero.

    The lambda-levels coincide with closed_p_exact, the gamma-levels continue the recurrence
    p_i = (1 - p_{i-1}) / (gamma + 1) from p_h.
    """
    profile = [Fraction(0)]
    for i in range(1, params.depth + 1):
        profile.append((1 - profile[-1]) / (params.factor(i) + 1))
    return tuple(profile)


def p_after_gamma_levels(lam: float, gammas: Sequence[float], h: int) -> list[float]:
    """
    Return p_{h+1}..p_{h+ell} for ell <= 3 with the finite-h term (-1/(lambda+1))^h kept.

    These are the expanded expressions, independent of the recurrence used by error_free_profile.
    """
    if len(gammas) > 3:
        raise InvalidParameters(f"expanded forms exist for at most 3 gamma-levels, got {len(gammas)}")
    _check_real(lam, gammas)
    r = -1 / (lam + 1)
    result = []
    if len(gammas) >= 1:
        g1 = gammas[0]
        result.append((1 / (g1 + 1)) * ((lam + 1) / (lam + 2)) * (1 - r ** (h + 1)))
    if len(gammas) >= 2:
        g2 = gammas[1]
        result.append((g1 * (lam + 2) + 1 - r**h) / ((g2 + 1) * (g1 + 1) * (lam + 2)))
    if len(gammas) >= 3:
        g3 = gammas[2]
        result.append(
            ((g2 * g1 + g2 + 1) * (lam + 2) - 1 + r**h) / ((g3 + 1) * (g2 + 1) * (g1 + 1) * (lam + 2))
        )
    return result


@dataclass(frozen=True)
class LimitProfile:
    """Quantities of the construction in the limit h -> infinity."""

    p_star: float
    p_levels: tuple[float, ...]
    weights: tuple[float, ...]
    gamma_bar: float
    rho_limit: float

    @property
    def p_a(self) -> float:
        """Return the limit of p_A."""
        return self.p_levels[-1] if self.p_levels else self.p_star


def limit_profile(lam: float, gammas: Sequence[float] = ()) -> LimitProfile:
    """
    Return the limit profile for the given growth factors.

    Parameters:
        lam: growth factor of the lambda-levels
        gammas: growth factors of the gamma-levels
    """
    lam = float(lam)
    gammas = [float(gamma) for gamma in gammas]
    _check_real(lam, gammas)
    p_star = 1 / (lam + 2)
    levels: list[float] = []
    weights = [1.0]
    previous = p_star
    for gamma in gammas:
        previous = (1 - previous) / (gamma + 1)
        levels.append(previous)
        weights.append(weights[-1] * gamma)
    return LimitProfile(
        p_star=p_star,
        p_levels=tuple(levels),
        weights=tuple(weights),
        gamma_bar=math.fsum(weights[1:]),
        rho_limit=1 - math.exp(-(1 - previous)),
    )


def ratio_l0(lam: float) -> float:
    """Return the bound without gamma-levels."""
    _check_real(lam)
    return ((lam - 1) / lam) * (1 - math.exp(-(lam + 1) / (lam + 2))) + (lam + 1) / (lam * (lam + 2))


def ratio_l3(lam: float, g1: float, g2: float, g3: float) -> float:
    """Return the bound with three gamma-levels as a sum of five separately derived terms."""
    _check_real(lam, (g1, g2, g3))
    gamma_bar = g1 + g1 * g2 + g1 * g2 * g3
    scale = lam + gamma_bar * (lam - 1)
    tail = (g1 * (lam + 2) + 1) / ((g2 + 1) * (g1 + 1) * (lam + 2))
    u_levels = (lam + g1 * (g2 + 1) * (lam - 1)) / (2 * scale)
    last_lambda = (lam**2 + g1) / (2 * (lam + 2) * (g1 + 1) * scale)
    first_gamma = g1 * (lam - 1) / (2 * scale) * tail
    second_gamma = (
        g1 * g2 * (lam - 1) / (2 * scale) * (g2 * (g1 + 1) * (lam + 2) + (lam + 1)) / ((g2 + 1) * (g1 + 1) * (lam + 2))
    )
    triangle = g1 * g2 * g3 * (lam - 1) / scale * (1 - math.exp(-(1 / (g3 + 1)) * (g3 + tail)))
    return u_levels + last_lambda + first_gamma + second_gamma + triangle


def ratio_general(lam: float, gammas: Sequence[float] = ()) -> float:
    """
    Return the upper bound on the competitive ratio for any number of gamma-levels.

    Double counts the matching value level by level: the U-levels below A are fully matched, the
    V-levels keep what the next U-level did not take, A keeps p_A and the triangle adds rho on both sides.
    """
    profile = limit_profile(lam, gammas)
    lam = float(lam)
    ell = len(profile.p_levels)
    weights = profile.weights
    if ell == 0:
        below_a = 1 / (lam - 1)
    else:
        below_a = lam / (lam - 1) + math.fsum(weights[1:ell])
    v_levels = 1 / ((lam + 2) * (lam - 1)) + math.fsum(
        weights[j - 1] * profile.p_levels[j - 1] for j in range(1, ell + 1)
    )
    numerator = 2 * profile.rho_limit * weights[ell] + below_a + v_levels + weights[ell] * profile.p_a
    denominator = 2 * (lam / (lam - 1) + profile.gamma_bar)
    return numerator / denominator


@dataclass(frozen=True)
class BoundPoint:
    """A parameter vector and its bound value."""

    lam: float
    gammas: tuple[float, ...]
    value: float

    @classmethod
    def evaluate(cls, lam: Number, gammas: Iterable[Number] = ()) -> "BoundPoint":
        """Evaluate ratio_general at the given parameters."""
        lam_value = parse_real(lam)
        gamma_values = tuple(parse_real(gamma) for gamma in gammas)
        return cls(lam_value, gamma_values, ratio_general(lam_value, gamma_values))

    @property
    def ell(self) -> int:
        """Return the number of gamma-levels."""
        return len(self.gammas)

    @property
    def parameters(self) -> tuple[float, ...]:
        """Return (lambda, gamma_1, ..., gamma_ell)."""
        return (self.lam,) + self.gammas

    def to_dict(self) -> dict[str, Any]:
        """Return a plain representation."""
        return {"ell": self.ell, "lambda": self.lam, "gammas": list(self.gammas), "value": self.value}


def rho_bound(p_a: Number, a_size: Optional[int] = None) -> float:
    """Return 1 - exp(-(1 - p_A)), plus 2/|A| when the size of A is given."""
    p_a = parse_real(p_a)
    if not 0 <= p_a <= 1:
        raise InvalidParameters(f"p_A must lie in [0, 1], got {p_a}")
    value = 1 - math.exp(-(1 - p_a))
    if a_size is not None:
        if a_size < 1:
            raise InvalidParameters(f"|A| must be positive, got {a_size}")
        value += 2 / a_size
    return value


def aggregate_error_budget(h: int) -> int:
    """Return ((h+5)^2 + h+5)/2 + h+3, the bound on the summed error terms of a run with h lambda-levels."""
    if h < 0:
        raise InvalidParameters(f"h must be nonnegative, got {h}")
    return ((h + 5) ** 2 + h + 5) // 2 + h + 3


def _l0_derivative(lam: float, step: float) -> float:
    return (ratio_l0(lam + step) - ratio_l0(lam - step)) / (2 * step)


def derivative_scan_l0(
    lo: float, hi: float, step: float = DERIVATIVE_STEP, points: int = DERIVATIVE_GRID_POINTS
) -> Optional[float]:
    """
    Locate a local maximum of d(ratio_l0)/d(lambda) on [lo, hi].

    The derivative is taken by central differences on a grid, the grid argmax is refined by golden-section
    search. Returns None when the argmax sits on the window boundary (no interior local maximum).
    """
    if not 1 < lo - step or not lo < hi:
        raise InvalidParameters(f"need 1 < lo < hi, got [{lo}, {hi}]")
    grid = np.linspace(lo, hi, points)
    derivative = np.array([_l0_derivative(float(lam), step) for lam in grid])
    index = int(np.argmax(derivative))
    if index in (0, len(grid) - 1):
        _LOGGER.debug("Derivative of the l=0 bound peaks on the boundary of [%s, %s]", lo, hi)
        return None
    result = minimize_scalar(
        lambda lam: -_l0_derivative(lam, step),
        bracket=(float(grid[index - 1]), float(grid[index]), float(grid[index + 1])),
        method="golden",
    )
    return float(result.x)


def argmin_l0(lo: float = 1.001, hi: float = 100.0) -> float:
    """Return the minimizer of ratio_l0 on [lo, hi] by bounded scalar minimization."""
    _check_real(lo)
    result = minimize_scalar(ratio_l0, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(result.x)


def triangle_water_level_mass(p_a: Fraction, a_size: int) -> Fraction:
    """
    Return the mass water-filling places on A during the triangle phases, starting from uniform p_A.

    At step t the N - t + 1 unlabeled vertices share one level, b_t raises it by min(1/(N-t+1), 1 - level).
    """
    level = p_a
    mass = Fraction(0)
    for remaining in range(a_size, 0, -1):
        increment = min(Fraction(1, remaining), 1 - level)
        mass += remaining * increment
        level += increment
    return mass


def finite_h_prediction(params: ConstructionParams) -> Fraction:
    """Return the exact ratio ALG/OPT of water-filling on a finite instance."""
    sizes = level_sizes(params)
    profile = error_free_profile(params)
    level_mass = sum(((1 - profile[i]) * sizes[i] for i in range(params.depth)), Fraction(0))
    triangle = triangle_water_level_mass(profile[-1], sizes.a_size)
    return (level_mass + triangle) / sizes.total
