"""Parameterized adversarial instance family: level sizes and the arrival/departure schedule."""
import json
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence, Union

from .const import MAX_INTEGER
from .exceptions import InvalidParameters, ScaleOverflow
from .rational import Number, format_fraction, parse_rational

_LOGGER: logging.Logger = logging.getLogger(__package__)


def _cumulative_factors(h: int, lam: Fraction, gammas: Sequence[Fraction]) -> list[Fraction]:
    """Return n_i / n_0 for every level i = 0..h+ell."""
    factors = [Fraction(1)]
    for _ in range(h):
        factors.append(factors[-1] * lam)
    for gamma in gammas:
        factors.append(factors[-1] * gamma)
    return factors


def _validate_shape(h: int, ell: int, lam: Fraction, gammas: Sequence[Fraction]) -> None:
    if h < 0 or ell < 0:
        raise InvalidParameters(f"h and ell must be nonnegative, got h={h}, ell={ell}")
    if len(gammas) != ell:
        raise InvalidParameters(f"expected {ell} gammas, got {len(gammas)}")
    if lam <= 1:
        raise InvalidParameters(f"lambda must be > 1, got {format_fraction(lam)}")
    for j, gamma in enumerate(gammas, start=1):
        if gamma <= 1:
            raise InvalidParameters(f"gamma_{j} must be > 1, got {format_fraction(gamma)}")


def minimal_vertex_scale(h: int, ell: int, lam: Number, gammas: Iterable[Number] = ()) -> int:
    """
    Return the least base size k for which every level size is an integer.

    Parameters:
        h: number of lambda-levels
        ell: number of gamma-levels
        lam: growth factor of the lambda-levels
        gammas: growth factors of the gamma-levels
    """
    lam = parse_rational(lam)
    gamma_values = [parse_rational(gamma) for gamma in gammas]
    _validate_shape(h, ell, lam, gamma_values)
    scale = 1
    for factor in _cumulative_factors(h, lam, gamma_values):
        scale = math.lcm(scale, factor.denominator)
        if scale > MAX_INTEGER:
            raise ScaleOverflow(f"minimal scale exceeds {MAX_INTEGER} for h={h}, ell={ell}")
    return scale


@dataclass(frozen=True)
class ConstructionParams:
    """The tuple (h, ell, k, lambda, gamma_1..gamma_ell) defining one instance of the family."""

    h: int
    ell: int
    lam: Fraction
    gammas: tuple[Fraction, ...]
    scale: int

    def __post_init__(self) -> None:
        """Normalize to exact rationals and validate."""
        object.__setattr__(self, "lam", parse_rational(self.lam))
        object.__setattr__(self, "gammas", tuple(parse_rational(gamma) for gamma in self.gammas))
        _validate_shape(self.h, self.ell, self.lam, self.gammas)
        minimal = minimal_vertex_scale(self.h, self.ell, self.lam, self.gammas)
        if self.scale < 1 or self.scale % minimal != 0:
            raise InvalidParameters(f"scale must be a positive multiple of {minimal}, got {self.scale}")

    @classmethod
    def create(
        cls, h: int, lam: Number, gammas: Iterable[Number] = (), multiplier: int = 1
    ) -> "ConstructionParams":
        """Build parameters with k = multiplier * minimal_vertex_scale."""
        gamma_values = tuple(parse_rational(gamma) for gamma in gammas)
        if multiplier < 1:
            raise InvalidParameters(f"scale multiplier must be >= 1, got {multiplier}")
        minimal = minimal_vertex_scale(h, len(gamma_values), lam, gamma_values)
        return cls(h, len(gamma_values), parse_rational(lam), gamma_values, minimal * multiplier)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ConstructionParams":
        """Build parameters from the instance file layout (h, ell, lambda, gammas, scale_multiplier)."""
        try:
            h = int(data["h"])
            lam = data["lambda"]
        except (KeyError, TypeError, ValueError) as exception:
            raise InvalidParameters(f"instance needs integer h and lambda, got {data}") from exception
        gammas = tuple(data.get("gammas", ()))
        ell = int(data.get("ell", len(gammas)))
        if ell != len(gammas):
            raise InvalidParameters(f"ell={ell} does not match {len(gammas)} gammas")
        return cls.create(h, lam, gammas, int(data.get("scale_multiplier", 1)))

    @classmethod
    def from_file(cls, path: str) -> "ConstructionParams":
        """Load an instance parameter file."""
        try:
            with open(path, encoding="utf-8") as handle:
                data = json.load(handle)
        except (OSError, ValueError) as exception:
            raise InvalidParameters(f"cannot read instance file {path}: {exception}") from exception
        return cls.from_dict(data)

    def to_dict(self) -> dict[str, Any]:
        """Return the instance file layout, with the scale as multiplier of the minimal scale."""
        minimal = minimal_vertex_scale(self.h, self.ell, self.lam, self.gammas)
        return {
            "h": self.h,
            "ell": self.ell,
            "lambda": format_fraction(self.lam),
            "gammas": [format_fraction(gamma) for gamma in self.gammas],
            "scale_multiplier": self.scale // minimal,
        }

    @property
    def depth(self) -> int:
        """Index h+ell of the last level A."""
        return self.h + self.ell

    def factor(self, i: int) -> Fraction:
        """Growth factor n_i / n_{i-1} for 1 <= i <= h+ell."""
        if not 1 <= i <= self.depth:
            raise InvalidParameters(f"level {i} has no growth factor")
        return self.lam if i <= self.h else self.gammas[i - self.h - 1]


@dataclass(frozen=True)
class LevelSizes:
    """Sizes n_0..n_{h+ell} with |U_i| = |V_i| = n_i."""

    sizes: tuple[int, ...]

    @property
    def total(self) -> int:
        """Return |U| = |V| = OPT."""
        return sum(self.sizes)

    @property
    def a_size(self) -> int:
        """Return |A| = |B| = n_{h+ell}."""
        return self.sizes[-1]

    def __getitem__(self, i: int) -> int:
        """Return n_i."""
        return self.sizes[i]

    def __len__(self) -> int:
        """Return the number of levels."""
        return len(self.sizes)


def level_sizes(params: ConstructionParams) -> LevelSizes:
    """Return the exact integer level sizes of an instance."""
    sizes = []
    for factor in _cumulative_factors(params.h, params.lam, params.gammas):
        size = factor * params.scale
        if size.denominator != 1:
            raise InvalidParameters(f"level size {size} is not integral, scale {params.scale} too small")
        if size > MAX_INTEGER:
            raise ScaleOverflow(f"level size exceeds {MAX_INTEGER}")
        sizes.append(int(size))
    return LevelSizes(tuple(sizes))


@dataclass(frozen=True)
class LevelPhase:
    """
    Arrival of N+(U_i), batch departure of U_i, adversary labeling, then departure of V_i.

    The batch is fully adjacent to the current U_i; which batch vertices form U_{i+1} and which V_i is
    decided by the adversary once U_i has departed.
    """

    level: int
    batch: range
    next_size: int
    factor: Fraction

    @property
    def kind(self) -> str:
        """Return the phase kind."""
        return "level"


@dataclass(frozen=True)
class TrianglePhase:
    """Arrival of b_t adjacent to every unlabeled A vertex, its departure, then the labeling of a_t."""

    step: int
    vertex: int

    @property
    def kind(self) -> str:
        """Return the phase kind."""
        return "triangle"


@dataclass(frozen=True)
class FinalPhase:
    """Batch departure of A."""

    a_size: int

    @property
    def kind(self) -> str:
        """Return the phase kind."""
        return "final"


Phase = Union[LevelPhase, TrianglePhase, FinalPhase]


@dataclass(frozen=True)
class EventSchedule:
    """Ordered phases of one instance; vertex ids are dense and follow arrival order."""

    params: ConstructionParams
    sizes: LevelSizes
    initial: range
    phases: tuple[Phase, ...] = field(repr=False)

    @property
    def vertex_count(self) -> int:
        """Return the number of vertices that arrive over the whole schedule."""
        return 2 * self.sizes.total

    def level_phases(self) -> list[LevelPhase]:
        """Return the level phases in order."""
        return [phase for phase in self.phases if isinstance(phase, LevelPhase)]

    def triangle_phases(self) -> list[TrianglePhase]:
        """Return the triangle phases in order."""
        return [phase for phase in self.phases if isinstance(phase, TrianglePhase)]

    def to_records(self) -> list[dict[str, Any]]:
        """Return one flat record per phase for export."""
        records: list[dict[str, Any]] = [
            {"phase": "initial", "index": 0, "first_id": self.initial.start, "size": len(self.initial)}
        ]
        for phase in self.phases:
            if isinstance(phase, LevelPhase):
                records.append(
                    {
                        "phase": phase.kind,
                        "index": phase.level,
                        "first_id": phase.batch.start,
                        "size": len(phase.batch),
                        "next_size": phase.next_size,
                        "factor": format_fraction(phase.factor),
                    }
                )
            elif isinstance(phase, TrianglePhase):
                records.append({"phase": phase.kind, "index": phase.step, "first_id": phase.vertex, "size": 1})
            else:
                records.append({"phase": phase.kind, "index": 0, "first_id": None, "size": phase.a_size})
        return records


def build_schedule(params: ConstructionParams) -> EventSchedule:
    """Build the phased arrival/departure schedule; labels are left to the adversary."""
    sizes = level_sizes(params)
    initial = range(0, sizes[0])
    next_id = sizes[0]
    phases: list[Phase] = []
    for i in range(params.depth):
        batch_size = sizes[i] + sizes[i + 1]
        phases.append(LevelPhase(i, range(next_id, next_id + batch_size), sizes[i + 1], params.factor(i + 1)))
        next_id += batch_size
    for step in range(1, sizes.a_size + 1):
        phases.append(TrianglePhase(step, next_id))
        next_id += 1
    phases.append(FinalPhase(sizes.a_size))
    _LOGGER.debug("Built schedule with sizes %s and %d phases", sizes.sizes, len(phases))
    return EventSchedule(params, sizes, initial, tuple(phases))
