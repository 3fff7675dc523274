"""Fractional matching state and the online algorithms playing against the adversary."""
import heapq
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional

import numpy as np

from .const import ALGORITHMS
from .exceptions import ContractViolation, UnknownAlgorithm

_LOGGER: logging.Logger = logging.getLogger(__package__)

ZERO = Fraction(0)
ONE = Fraction(1)


class _Tier:
    """Vertices sharing one matched value; the lowest member id is available in O(log n)."""

    __slots__ = ("value", "members", "region", "_heap")

    def __init__(self, value: Fraction, members: Iterable[int], region: Optional["Region"]) -> None:
        self.value = value
        self.members = set(members)
        self.region = region
        self._heap = sorted(self.members)

    def __len__(self) -> int:
        return len(self.members)

    def lowest(self) -> int:
        while self._heap[0] not in self.members:
            heapq.heappop(self._heap)
        return self._heap[0]

    def add(self, vertex: int) -> None:
        self.members.add(vertex)
        heapq.heappush(self._heap, vertex)


class Region:
    """
    A pool of vertices that is revealed as one neighborhood.

    Every vertex connected to a region is adjacent to all of its current members. Members leave the
    region when they depart or when the adversary labels them.
    """

    def __init__(self, name: str) -> None:
        """Initialize an empty region."""
        self.name = name
        self.tiers: set[_Tier] = set()
        self.size = 0

    def __repr__(self) -> str:
        """Return a short description."""
        return f"Region({self.name}, size={self.size}, tiers={len(self.tiers)})"


@dataclass(frozen=True)
class DepartureAssignment:
    """
    Matching value a departing vertex places on its alive neighbors.

    Either an explicit distribution (neighbor id -> increment) or a water level L, in which case every
    alive neighbor u receives max(0, L - m(u)).
    """

    vertex: int
    distribution: Mapping[int, Fraction] = field(default_factory=dict)
    water_level: Optional[Fraction] = None

    @property
    def is_level(self) -> bool:
        """Return true for a water-level assignment."""
        return self.water_level is not None


class MatchState:
    """Per-vertex and per-edge fractional matching values with aliveness bookkeeping."""

    def __init__(self, track_edges: bool = False) -> None:
        """
        Initialize the instance.

        Parameters:
            track_edges: keep one entry per matched edge for edge_value, memory grows with the number
                of matched edges
        """
        self._tier_of: dict[int, _Tier] = {}
        self._alive: set[int] = set()
        self._neighborhood: dict[int, Region] = {}
        self._matched = ZERO
        self._track_edges = track_edges
        self._edges: dict[tuple[int, int], Fraction] = {}

    # arrivals and structure

    def arrive(self, vertex: int) -> None:
        """Add a single alive vertex with value zero and no neighbors yet."""
        self._tier_of[vertex] = _Tier(ZERO, (vertex,), None)
        self._alive.add(vertex)

    def arrive_region(self, vertices: Iterable[int], name: str = "") -> Region:
        """Add a batch of alive vertices with value zero that will be revealed as one neighborhood."""
        region = Region(name)
        tier = _Tier(ZERO, vertices, region)
        for vertex in tier.members:
            self._tier_of[vertex] = tier
            self._alive.add(vertex)
        if len(tier):
            region.tiers.add(tier)
            region.size = len(tier)
        return region

    def connect(self, vertex: int, region: Region) -> None:
        """Make vertex adjacent to every current member of region."""
        self._neighborhood[vertex] = region

    def detach(self, vertex: int) -> None:
        """Remove a vertex from its region, keeping its value."""
        tier = self._tier_of[vertex]
        if tier.region is None:
            return
        self._move(vertex, tier.value, None)

    def _move(self, vertex: int, value: Fraction, region: Optional[Region]) -> None:
        old = self._tier_of[vertex]
        old.members.discard(vertex)
        if old.region is not None:
            old.region.size -= 1
            if not old.members:
                old.region.tiers.discard(old)
        tier = _Tier(value, (vertex,), region)
        self._tier_of[vertex] = tier
        if region is not None:
            region.tiers.add(tier)
            region.size += 1

    # queries

    def is_alive(self, vertex: int) -> bool:
        """Return true if the vertex has arrived and not departed."""
        return vertex in self._alive

    def value(self, vertex: int) -> Fraction:
        """Return the matched fraction m(vertex)."""
        return self._tier_of[vertex].value

    def values(self, vertices: Iterable[int]) -> dict[int, Fraction]:
        """Return m(v) for every given vertex."""
        return {vertex: self._tier_of[vertex].value for vertex in vertices}

    def remaining(self, vertex: int) -> Fraction:
        """Return 1 - m(vertex)."""
        return ONE - self._tier_of[vertex].value

    def neighborhood(self, vertex: int) -> Optional[Region]:
        """Return the region a vertex is connected to, if any."""
        return self._neighborhood.get(vertex)

    def neighbor_tiers(self, vertex: int) -> list[tuple[Fraction, int]]:
        """Return (value, count) for the alive neighbors of vertex, ascending by value."""
        region = self._neighborhood.get(vertex)
        if region is None:
            return []
        merged: dict[Fraction, int] = {}
        for tier in region.tiers:
            merged[tier.value] = merged.get(tier.value, 0) + len(tier)
        return sorted(merged.items())

    def alive_neighbor_values(self, vertex: int) -> dict[int, Fraction]:
        """Return m(u) for every alive neighbor u of vertex, keyed in ascending id order."""
        region = self._neighborhood.get(vertex)
        if region is None:
            return {}
        members = sorted(member for tier in region.tiers for member in tier.members)
        return self.values(members)

    def region_values(self, region: Region) -> dict[int, Fraction]:
        """Return m(u) for every member of region."""
        return self.values(sorted(member for tier in region.tiers for member in tier.members))

    def region_candidates(self, region: Region) -> dict[int, Fraction]:
        """Return the lowest member id of each tier of region with the tier value."""
        return {tier.lowest(): tier.value for tier in region.tiers}

    def total_matching(self) -> Fraction:
        """Return the total fractional matching value placed so far."""
        return self._matched

    def vertex_value_sum(self) -> Fraction:
        """Return the sum of m(v) over every vertex that ever arrived."""
        tiers = {id(tier): tier for tier in self._tier_of.values()}
        return sum((tier.value * len(tier) for tier in tiers.values()), ZERO)

    def edge_value(self, u: int, v: int) -> Fraction:
        """Return the value on edge {u, v}; requires track_edges."""
        return self._edges.get((min(u, v), max(u, v)), ZERO)

    def incident_value(self, vertex: int) -> Fraction:
        """Return the sum of tracked edge values incident to vertex."""
        return sum((value for edge, value in self._edges.items() if vertex in edge), ZERO)

    def expand(self, assignment: DepartureAssignment) -> dict[int, Fraction]:
        """Return the per-neighbor increments of an assignment evaluated on the current state."""
        if not assignment.is_level:
            return {u: Fraction(inc) for u, inc in sorted(assignment.distribution.items()) if inc}
        level = assignment.water_level
        values = self.alive_neighbor_values(assignment.vertex)
        return {u: level - value for u, value in values.items() if value < level}

    # departures

    def apply_assignment(self, vertex: int, assignment: DepartureAssignment) -> Fraction:
        """
        Validate and apply the assignment of a departing vertex, then mark it departed.

        Returns the mass placed. Raises ContractViolation naming the violated invariant.
        """
        if vertex not in self._alive:
            raise ContractViolation("vertex not alive", f"vertex {vertex}")
        if assignment.vertex != vertex:
            raise ContractViolation(
                "assignment vertex mismatch", f"assignment for {assignment.vertex} applied to {vertex}"
            )
        remaining = self.remaining(vertex)
        if assignment.is_level:
            mass = self._apply_level(vertex, Fraction(assignment.water_level), remaining)
        else:
            mass = self._apply_distribution(vertex, assignment.distribution, remaining)
        self._alive.discard(vertex)
        self._move(vertex, self.value(vertex) + mass, None)
        self._matched += mass
        return mass

    def _apply_level(self, vertex: int, level: Fraction, remaining: Fraction) -> Fraction:
        if level > ONE:
            raise ContractViolation("water level above one", f"level {level} at vertex {vertex}")
        region = self._neighborhood.get(vertex)
        if region is None:
            return ZERO
        raised = [tier for tier in region.tiers if tier.value < level]
        mass = sum((len(tier) * (level - tier.value) for tier in raised), ZERO)
        if mass > remaining:
            raise ContractViolation("departing mass exceeded", f"vertex {vertex} places {mass} > {remaining}")
        unfilled = (raised and level < ONE) or any(level <= tier.value < ONE for tier in region.tiers)
        if mass < remaining and unfilled:
            raise ContractViolation("saturation violated", f"vertex {vertex} keeps {remaining - mass} unplaced")
        if self._track_edges:
            for tier in raised:
                for member in tier.members:
                    self._record_edge(vertex, member, level - tier.value)
        if raised:
            self._merge(region, raised, level)
        return mass

    def _merge(self, region: Region, raised: list[_Tier], level: Fraction) -> None:
        same = [tier for tier in region.tiers if tier.value == level]
        group = raised + same
        target = max(group, key=len)
        target.value = level
        for tier in group:
            if tier is target:
                continue
            for member in tier.members:
                target.add(member)
                self._tier_of[member] = target
            region.tiers.discard(tier)

    def _apply_distribution(self, vertex: int, distribution: Mapping[int, Fraction], remaining: Fraction) -> Fraction:
        region = self._neighborhood.get(vertex)
        increments = {u: Fraction(inc) for u, inc in distribution.items() if inc != 0}
        for u, inc in sorted(increments.items()):
            if inc < 0:
                raise ContractViolation("negative increment", f"{inc} to {u}")
            if region is None or u not in self._alive or self._tier_of[u].region is not region:
                raise ContractViolation("not an alive neighbor", f"{u} is not an alive neighbor of {vertex}")
            if self.value(u) + inc > ONE:
                raise ContractViolation("neighbor capacity exceeded", f"{u} would reach {self.value(u) + inc}")
        mass = sum(increments.values(), ZERO)
        if mass > remaining:
            raise ContractViolation("departing mass exceeded", f"vertex {vertex} places {mass} > {remaining}")
        if mass < remaining and region is not None:
            # every alive neighbor must end up full
            for tier in region.tiers:
                for member in tier.members:
                    if tier.value + increments.get(member, ZERO) < ONE:
                        raise ContractViolation(
                            "saturation violated", f"vertex {vertex} keeps {remaining - mass}, {member} not full"
                        )
        for u, inc in increments.items():
            self._move(u, self.value(u) + inc, region)
            if self._track_edges:
                self._record_edge(vertex, u, inc)
        return mass

    def _record_edge(self, u: int, v: int, inc: Fraction) -> None:
        key = (min(u, v), max(u, v))
        self._edges[key] = self._edges.get(key, ZERO) + inc


def apply_assignment(state: MatchState, vertex: int, assignment: DepartureAssignment) -> MatchState:
    """Apply a departure assignment and return the updated state."""
    state.apply_assignment(vertex, assignment)
    return state


def water_level(tiers: Iterable[tuple[Fraction, int]], remaining: Fraction) -> Optional[Fraction]:
    """
    Return the level L such that raising every value below L to L uses up remaining, capped at 1.

    Tiers are (value, count) pairs in ascending value order. Returns None when nothing can be placed.
    """
    left = remaining
    current = ZERO
    count = 0
    for value, size in tiers:
        if value >= ONE:
            break
        if count:
            cost = count * (value - current)
            if cost >= left:
                return current + left / count
            left -= cost
        current = value
        count += size
    if count == 0 or remaining == 0:
        return None
    return min(current + left / count, ONE)


def water_filling_departure(state: MatchState, vertex: int) -> DepartureAssignment:
    """Raise the least matched alive neighbors of vertex to a common water level."""
    level = water_level(state.neighbor_tiers(vertex), state.remaining(vertex))
    return DepartureAssignment(vertex, water_level=level)


def random_feasible_departure(state: MatchState, vertex: int, seed: int) -> DepartureAssignment:
    """Return a seeded pseudo-random assignment that respects capacities and saturation."""
    capacity = {u: ONE - value for u, value in state.alive_neighbor_values(vertex).items() if value < ONE}
    left = state.remaining(vertex)
    if not capacity or left == 0:
        return DepartureAssignment(vertex)
    rng = np.random.default_rng([seed, vertex])
    weights = {u: int(w) for u, w in zip(capacity, rng.integers(0, 10, size=len(capacity)))}
    placed: dict[int, Fraction] = {}
    open_ = list(capacity)
    while left > 0 and open_:
        active = [u for u in open_ if weights[u] > 0]
        if not active:
            active = open_
            weights.update({u: 1 for u in open_})
        total_weight = sum(weights[u] for u in active)
        share = {u: left * weights[u] / total_weight for u in active}
        capped = [u for u in active if share[u] >= capacity[u] - placed.get(u, ZERO)]
        if not capped:
            for u in active:
                placed[u] = placed.get(u, ZERO) + share[u]
            left = ZERO
            break
        for u in capped:
            gap = capacity[u] - placed.get(u, ZERO)
            placed[u] = capacity[u]
            left -= gap
            open_.remove(u)
    return DepartureAssignment(vertex, distribution={u: inc for u, inc in placed.items() if inc})


class OnlineAlgorithm(ABC):
    """
    A fractional online algorithm.

    Matching value moves only when a vertex departs, and a departing vertex is fully matched unless
    all of its alive neighbors are, so the only decision point is on_departure.
    """

    name = "abstract"

    @abstractmethod
    def on_departure(self, state: MatchState, vertex: int) -> DepartureAssignment:
        """Return the assignment of a departing vertex."""


class WaterFilling(OnlineAlgorithm):
    """The water-filling algorithm."""

    name = "waterfilling"

    def on_departure(self, state: MatchState, vertex: int) -> DepartureAssignment:
        """Return the water-filling assignment."""
        return water_filling_departure(state, vertex)


class RandomFeasible(OnlineAlgorithm):
    """Seeded pseudo-random saturating algorithm, used to exercise the adversary."""

    def __init__(self, seed: int) -> None:
        """Initialize with a seed."""
        self.seed = seed
        self.name = f"random:{seed}"

    def on_departure(self, state: MatchState, vertex: int) -> DepartureAssignment:
        """Return a random feasible assignment."""
        return random_feasible_departure(state, vertex, self.seed)


def get_algorithm(name: str) -> OnlineAlgorithm:
    """Return the algorithm for a name such as "waterfilling" or "random:42"."""
    base, _, argument = name.strip().partition(":")
    if base not in ALGORITHMS:
        raise UnknownAlgorithm(f"unknown algorithm {name!r}, choose one of {', '.join(ALGORITHMS)}")
    if base == "waterfilling":
        if argument:
            raise UnknownAlgorithm(f"waterfilling takes no argument, got {name!r}")
        return WaterFilling()
    try:
        seed = int(argument) if argument else 0
    except ValueError as exception:
        raise UnknownAlgorithm(f"random needs an integer seed, got {name!r}") from exception
    if seed < 0:
        raise UnknownAlgorithm(f"random needs a nonnegative seed, got {name!r}")
    return RandomFeasible(seed)
