"""Adaptive adversary: level partitioning and triangle labeling."""
import bisect
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping, Optional

from .const import BRUTE_FORCE_LIMIT
from .exceptions import PartitionError
from .rational import Number, format_fraction, parse_rational

_LOGGER: logging.Logger = logging.getLogger(__package__)


@dataclass(frozen=True)
class PartitionDecision:
    """Split of a fresh batch into the next U-level and the sacrificed V-level."""

    u_next: frozenset[int]
    v_prev: frozenset[int]
    achieved_mass: Fraction
    target_mass: Fraction
    swaps: int = 0

    @property
    def distance(self) -> Fraction:
        """Return |achieved_mass - target_mass|."""
        return abs(self.achieved_mass - self.target_mass)

    def to_record(self) -> dict[str, Any]:
        """Return a summary suitable for traces and reports."""
        return {
            "u_next_size": len(self.u_next),
            "v_prev_size": len(self.v_prev),
            "achieved_mass": format_fraction(self.achieved_mass),
            "target_mass": format_fraction(self.target_mass),
            "swaps": self.swaps,
        }


def target_mass(p_prev: Number, n_prev: int, n_next: int) -> Fraction:
    """Return d = (1 - p_prev) * n_prev * n_next / (n_next + n_prev)."""
    p_prev = parse_rational(p_prev)
    if not 0 <= p_prev <= 1:
        raise PartitionError(f"p_prev must lie in [0, 1], got {format_fraction(p_prev)}")
    return (1 - p_prev) * n_prev * n_next / (n_next + n_prev)


def _check_sizes(values: Mapping[int, Fraction], n_next: int, n_prev: Optional[int]) -> None:
    if n_next < 0 or n_next > len(values):
        raise PartitionError(f"cannot pick {n_next} of {len(values)} vertices")
    if n_prev is not None and n_prev + n_next != len(values):
        raise PartitionError(f"expected {n_prev + n_next} vertices, got {len(values)}")


def _best_swap(
    u_side: list[tuple[Fraction, int]], v_side: list[tuple[Fraction, int]], diff: Fraction
) -> Optional[tuple[Fraction, int, int]]:
    """Return (new |diff|, index in u_side, index in v_side) of the best strictly improving swap."""
    v_values = [value for value, _ in v_side]
    best: Optional[tuple[Fraction, int, int, int, int]] = None
    for ui, (u_value, u_id) in enumerate(u_side):
        # swapping u for v moves the mass by v - u, the ideal v is u - diff
        ideal = u_value - diff
        pos = bisect.bisect_left(v_values, ideal)
        for candidate in (pos - 1, pos):
            if not 0 <= candidate < len(v_side):
                continue
            # lowest id among equal values
            vi = bisect.bisect_left(v_values, v_values[candidate])
            v_value, v_id = v_side[vi]
            new = abs(diff + v_value - u_value)
            key = (new, u_id, v_id, ui, vi)
            if best is None or key[:3] < best[:3]:
                best = key
    if best is None or best[0] >= abs(diff):
        return None
    return best[0], best[3], best[4]


def partition_level(
    values: Mapping[int, Number], n_next: int, d: Number, n_prev: Optional[int] = None
) -> PartitionDecision:
    """
    Choose which vertices of a batch form the next U-level.

    Starts from the n_next highest valued vertices and applies best-improvement single swaps between the
    two sides while |m(U) - d| strictly decreases. Ties are broken by the lowest vertex ids. With d equal
    to the proportional share of the batch mass the result satisfies |m(U) - d| <= 1.

    Parameters:
        values: matched fraction of every batch vertex
        n_next: size of the next U-level
        d: target mass
        n_prev: size of the V-level, checked against the batch size when given
    """
    exact = {vertex: parse_rational(value) for vertex, value in values.items()}
    _check_sizes(exact, n_next, n_prev)
    target = parse_rational(d)
    ordered = sorted(exact.items(), key=lambda item: (-item[1], item[0]))
    u_side = sorted((value, vertex) for vertex, value in ordered[:n_next])
    v_side = sorted((value, vertex) for vertex, value in ordered[n_next:])
    mass = sum((value for value, _ in u_side), Fraction(0))
    swaps = 0
    while u_side and v_side:
        swap = _best_swap(u_side, v_side, mass - target)
        if swap is None:
            break
        _, ui, vi = swap
        u_item = u_side.pop(ui)
        v_item = v_side.pop(vi)
        bisect.insort(u_side, v_item)
        bisect.insort(v_side, u_item)
        mass += v_item[0] - u_item[0]
        swaps += 1
    _LOGGER.debug("Partitioned %d vertices after %d swaps, distance %s", len(exact), swaps, abs(mass - target))
    return PartitionDecision(
        frozenset(vertex for _, vertex in u_side), frozenset(vertex for _, vertex in v_side), mass, target, swaps
    )


def brute_force_partition(values: Mapping[int, Number], n_next: int, d: Number) -> PartitionDecision:
    """Return the subset of size n_next closest to d by exhaustive enumeration (small batches only)."""
    exact = {vertex: parse_rational(value) for vertex, value in values.items()}
    _check_sizes(exact, n_next, None)
    if len(exact) > BRUTE_FORCE_LIMIT:
        raise PartitionError(f"brute force is limited to {BRUTE_FORCE_LIMIT} vertices, got {len(exact)}")
    target = parse_rational(d)
    vertices = sorted(exact)
    best: Optional[tuple[Fraction, tuple[int, ...], Fraction]] = None
    for subset in itertools.combinations(vertices, n_next):
        mass = sum((exact[vertex] for vertex in subset), Fraction(0))
        distance = abs(mass - target)
        if best is None or distance < best[0]:
            best = (distance, subset, mass)
    assert best is not None
    chosen = frozenset(best[1])
    return PartitionDecision(chosen, frozenset(vertices) - chosen, best[2], target)


def triangle_next_label(values: Mapping[int, Number]) -> int:
    """Return the unlabeled vertex with the least matched value, ties to the lowest id."""
    if not values:
        raise PartitionError("no unlabeled vertex left to label")
    return min(values, key=lambda vertex: (parse_rational(values[vertex]), vertex))
