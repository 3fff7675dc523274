"""Tests for the adversary."""
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fombound.adversary import brute_force_partition, partition_level, target_mass, triangle_next_label
from fombound.exceptions import PartitionError

from .const import PARTITION_VALUES

batch_values = st.lists(st.integers(min_value=0, max_value=20), min_size=2, max_size=9).map(
    lambda numerators: {vertex: Fraction(numerator, 20) for vertex, numerator in enumerate(numerators)}
)


class TestTargetMass:
    """Test suite for target_mass."""

    def test_examples(self):
        """Test target mass: examples."""
        assert target_mass(0, 1, 2) == Fraction(2, 3)
        assert target_mass(Fraction(1, 3), 2, 4) == Fraction(8, 9)
        assert target_mass("1/3", 2, 4) == Fraction(8, 9)

    def test_out_of_range(self):
        """Test target mass: p outside [0, 1]."""
        with pytest.raises(PartitionError):
            target_mass(Fraction(3, 2), 1, 2)
        with pytest.raises(PartitionError):
            target_mass(-1, 1, 2)


class TestPartitionLevel:
    """Test suite for partition_level."""

    def test_example(self):
        """Test partition: one swap from the top two."""
        decision = partition_level(PARTITION_VALUES, 2, 1)
        assert decision.achieved_mass == Fraction(9, 10)
        assert decision.u_next == frozenset({1, 2})
        assert decision.v_prev == frozenset({0, 3})
        assert decision.swaps == 1
        assert decision.distance == Fraction(1, 10)

    def test_exact_hit(self):
        """Test partition: the target is reachable exactly."""
        values = {0: Fraction(1), 1: Fraction(1), 2: Fraction(0), 3: Fraction(0)}
        decision = partition_level(values, 2, 1)
        assert decision.achieved_mass == 1
        assert decision.distance == 0

    def test_uniform_batch(self):
        """Test partition: equal values need no swaps and take the lowest ids."""
        values = {vertex: Fraction(1, 3) for vertex in range(6)}
        decision = partition_level(values, 4, Fraction(4, 3), n_prev=2)
        assert decision.swaps == 0
        assert decision.u_next == frozenset(range(4))
        assert decision.achieved_mass == Fraction(4, 3)

    def test_record(self):
        """Test partition: trace record."""
        record = partition_level(PARTITION_VALUES, 2, 1).to_record()
        assert record == {
            "u_next_size": 2,
            "v_prev_size": 2,
            "achieved_mass": "9/10",
            "target_mass": "1",
            "swaps": 1,
        }

    def test_size_errors(self):
        """Test partition: inconsistent sizes."""
        with pytest.raises(PartitionError):
            partition_level(PARTITION_VALUES, 5, 1)
        with pytest.raises(PartitionError):
            partition_level(PARTITION_VALUES, 2, 1, n_prev=3)

    @settings(deadline=None)
    @given(batch_values, st.data())
    def test_proportional_target(self, values, data):
        """Test partition: a proportional target is met within one unit of mass."""
        n_next = data.draw(st.integers(min_value=1, max_value=len(values) - 1))
        d = sum(values.values()) * Fraction(n_next, len(values))
        decision = partition_level(values, n_next, d, n_prev=len(values) - n_next)
        assert len(decision.u_next) == n_next
        assert decision.u_next | decision.v_prev == frozenset(values)
        assert decision.achieved_mass == sum(values[vertex] for vertex in decision.u_next)
        assert decision.distance <= 1

    @settings(deadline=None)
    @given(batch_values, st.data())
    def test_never_better_than_exhaustive(self, values, data):
        """Test partition: exhaustive search is at least as close."""
        n_next = data.draw(st.integers(min_value=0, max_value=len(values)))
        d = Fraction(data.draw(st.integers(min_value=0, max_value=20 * n_next)), 20)
        local = partition_level(values, n_next, d)
        exhaustive = brute_force_partition(values, n_next, d)
        assert exhaustive.distance <= local.distance
        assert len(exhaustive.u_next) == n_next


class TestBruteForce:
    """Test suite for brute_force_partition."""

    def test_example(self):
        """Test brute force: best distance on the example batch."""
        assert brute_force_partition(PARTITION_VALUES, 2, 1).distance == Fraction(1, 10)

    def test_limit(self):
        """Test brute force: refuses large batches."""
        with pytest.raises(PartitionError):
            brute_force_partition({vertex: 0 for vertex in range(30)}, 2, 1)


class TestTriangleLabel:
    """Test suite for triangle_next_label."""

    def test_least_matched(self):
        """Test triangle label: least matched vertex."""
        assert triangle_next_label({4: Fraction(1, 2), 7: Fraction(1, 3), 9: Fraction(2, 3)}) == 7

    def test_ties(self):
        """Test triangle label: ties go to the lowest id."""
        assert triangle_next_label({8: Fraction(1, 4), 3: Fraction(1, 4), 5: Fraction(1, 2)}) == 3

    def test_empty(self):
        """Test triangle label: nothing left."""
        with pytest.raises(PartitionError):
            triangle_next_label({})
