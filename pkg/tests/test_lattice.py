import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lattice_embed.errors import DimensionMismatchError, InvertedBoundsError, NonFiniteCoordinateError
from lattice_embed.lattice import (
    ContinuousPoint,
    Lattice,
    LatticePoint,
    continuous_join,
    continuous_meet,
    embed,
    generate_box_lattice,
    grid_distance,
    grid_is_uniform,
    is_adjacent,
    is_discrete_image,
    is_sublattice,
    join,
    meet,
    precedes,
)

P = LatticePoint.of
DIMENSIONS = [1, 2, 3, 4, 5]


def points(dimension, count):
    coords = st.tuples(*[st.integers(min_value=-50, max_value=50)] * dimension)
    return st.tuples(*[coords.map(LatticePoint)] * count)


axiom_settings = settings(max_examples=1000, deadline=None)


class TestMeetJoin:
    def test_meet_examples(self):
        """Test component-wise minimum"""
        assert meet(P(1, 3), P(2, 2)) == P(1, 2)
        assert meet(P(5, 5), P(5, 5)) == P(5, 5)
        assert meet(P(-1, 4, 0), P(2, -7, 0)) == P(-1, -7, 0)

    def test_join_examples(self):
        """Test component-wise maximum"""
        assert join(P(1, 3), P(2, 2)) == P(2, 3)
        assert join(P(0, 0), P(0, 0)) == P(0, 0)
        assert join(P(-1, 4), P(2, -7)) == P(2, 4)

    def test_dimension_mismatch_names_both_dimensions(self):
        with pytest.raises(DimensionMismatchError) as exc:
            meet(P(1, 2), P(1, 2, 3))
        assert exc.value.left == 2
        assert exc.value.right == 3
        assert "2" in str(exc.value) and "3" in str(exc.value)

    def test_join_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            join(P(1), P(1, 2))

    @pytest.mark.parametrize("dimension", DIMENSIONS)
    def test_lattice_axioms(self, dimension):
        """Commutativity, associativity, idempotency and absorption"""
        @axiom_settings
        @given(points(dimension, 3))
        def check(triple):
            a, b, c = triple
            assert meet(a, b) == meet(b, a)
            assert join(a, b) == join(b, a)
            assert meet(a, meet(b, c)) == meet(meet(a, b), c)
            assert join(a, join(b, c)) == join(join(a, b), c)
            assert meet(a, a) == a
            assert join(a, a) == a
            assert meet(a, join(a, b)) == a
            assert join(a, meet(a, b)) == a
        check()

    @pytest.mark.parametrize("dimension", DIMENSIONS)
    def test_distributivity_modularity_monotonicity(self, dimension):
        @axiom_settings
        @given(points(dimension, 3))
        def check(triple):
            a, b, c = triple
            assert meet(a, join(b, c)) == join(meet(a, b), meet(a, c))
            assert join(a, meet(b, c)) == meet(join(a, b), join(a, c))
            if precedes(a, b):
                assert join(a, meet(c, b)) == meet(join(a, c), b)
                assert precedes(meet(a, c), meet(b, c))
                assert precedes(join(a, c), join(b, c))
        check()

    def test_precedes_is_induced_by_meet(self):
        assert precedes(P(0, 1), P(1, 1))
        assert not precedes(P(0, 2), P(1, 1))
        assert meet(P(0, 1), P(1, 1)) == P(0, 1)


class TestGridDistance:
    def test_examples(self):
        assert grid_distance(P(0, 0), P(1, 0)) == 1.0
        assert grid_distance(P(3, 4), P(3, 4)) == 0.0
        assert grid_distance(P(0, 0), P(3, 4)) == 5.0

    def test_adjacency_examples(self):
        assert is_adjacent(P(0, 0), P(0, 1))
        assert not is_adjacent(P(0, 0), P(1, 1))
        assert not is_adjacent(P(2, 2), P(2, 2))
        assert not is_adjacent(P(0, 0), P(0, 2))

    @settings(max_examples=500, deadline=None)
    @given(st.integers(min_value=1, max_value=5).flatmap(lambda n: points(n, 2)))
    def test_unit_distance_iff_adjacent(self, pair):
        a, b = pair
        assert (grid_distance(a, b) == 1.0) == is_adjacent(a, b)

    def test_uniformity_on_box(self):
        """Every adjacent pair of a 10^3 box lies exactly one unit apart"""
        box = generate_box_lattice(P(0, 0, 0), P(9, 9, 9))
        pairs = box.adjacent_pairs()
        assert len(pairs) == 3 * 9 * 10 * 10
        assert grid_is_uniform(box)
        for i, j in pairs[:500]:
            assert grid_distance(box.points[i], box.points[j]) == 1.0

    def test_distance_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            grid_distance(P(0), P(0, 0))


class TestEmbedding:
    def test_embed_examples(self):
        assert embed(P(1, -2)).coords == (1.0, -2.0)
        assert embed(P(0, 0, 0)).coords == (0.0, 0.0, 0.0)
        assert embed(meet(P(1, 3), P(2, 2))) == continuous_meet(embed(P(1, 3)), embed(P(2, 2)))
        assert embed(meet(P(1, 3), P(2, 2))).coords == (1.0, 2.0)

    @settings(max_examples=1000, deadline=None)
    @given(st.integers(min_value=1, max_value=5).flatmap(lambda n: points(n, 2)))
    def test_embedding_preserves_operations(self, pair):
        a, b = pair
        assert embed(meet(a, b)) == continuous_meet(embed(a), embed(b))
        assert embed(join(a, b)) == continuous_join(embed(a), embed(b))
        assert (embed(a) == embed(b)) == (a == b)

    def test_continuous_point_rejects_non_finite(self):
        with pytest.raises(NonFiniteCoordinateError):
            ContinuousPoint((1.0, math.nan))
        with pytest.raises(NonFiniteCoordinateError):
            ContinuousPoint((math.inf,))

    def test_continuous_point_as_array(self):
        x = np.asarray(ContinuousPoint((1, 2)))
        assert x.dtype == float
        assert x.tolist() == [1.0, 2.0]


class TestLatticePoint:
    def test_integer_coordinates(self):
        assert LatticePoint((np.int64(3), -1)).coords == (3, -1)
        assert LatticePoint((2.0, 0.0)).coords == (2, 0)
        assert all(type(c) is int for c in LatticePoint((np.float64(1.0), np.int32(4))).coords)

    @pytest.mark.parametrize("coords", [(1.5, 2), (0, -0.25), (math.nan, 1), (math.inf,), ("1", 2)])
    def test_rejects_non_integer_coordinates(self, coords):
        with pytest.raises(ValueError):
            LatticePoint(coords)


class TestLattice:
    def test_box_examples(self):
        """Test box generation counts and order"""
        assert generate_box_lattice(P(0, 0), P(1, 1)).points == (P(0, 0), P(0, 1), P(1, 0), P(1, 1))
        assert generate_box_lattice(P(2), P(2)).points == (P(2),)
        assert len(generate_box_lattice(P(0, 0, 0), P(2, 2, 2))) == 27

    def test_box_rejects_inverted_bounds(self):
        with pytest.raises(InvertedBoundsError):
            generate_box_lattice(P(0, 3), P(1, 2))

    def test_box_is_sorted_and_discrete(self):
        box = generate_box_lattice(P(-1, -1, 0), P(1, 2, 1))
        assert list(box.points) == sorted(set(box.points))
        assert is_discrete_image(box)
        assert is_sublattice(box)

    def test_from_points_deduplicates_and_sorts(self):
        lattice = Lattice.from_points([(1, 0), (0, 1), (1, 0)])
        assert lattice.points == (P(0, 1), P(1, 0))
        assert lattice.index_of(P(1, 0)) == 1
        assert P(0, 1) in lattice
        assert P(5, 5) not in lattice

    def test_mixed_dimensions_rejected(self):
        with pytest.raises(DimensionMismatchError):
            Lattice.from_points([(0, 0), (0, 0, 0)])

    def test_empty_lattice_needs_dimension(self):
        with pytest.raises(ValueError):
            Lattice([])
        empty = Lattice([], dimension=3)
        assert len(empty) == 0
        assert empty.embedded().shape == (0, 3)

    def test_without_removes_points(self):
        box = generate_box_lattice(P(-1, -1), P(1, 1))
        punctured = box.without([(0, 0)])
        assert len(punctured) == 8
        assert P(0, 0) not in punctured
        assert not is_sublattice(punctured)

    def test_adjacent_pairs_use_indices(self):
        lattice = Lattice.from_points([(0, 0), (0, 1), (1, 1), (3, 3)])
        assert lattice.adjacent_pairs() == [(0, 1), (1, 2)]

    def test_embedded_positions(self):
        lattice = generate_box_lattice(P(0, 0), P(1, 1))
        np.testing.assert_array_equal(lattice.embedded(), [[0, 0], [0, 1], [1, 0], [1, 1]])
