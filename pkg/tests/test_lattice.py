from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from heightlab.errors import DisconnectedDiscretization, EmptyDiscretization, PointOutsideDomain
from heightlab.lattice import (
    ContinuumDomain,
    DiscreteDomain,
    discretize,
    graph_neighbors,
    hausdorff_gap,
    lattice_neighbors,
    parity,
)

SIMPLEX = ContinuumDomain.standard_simplex(2)


def test_unit_interval_n4():
    D = discretize(ContinuumDomain.box([0], [1]), 4)
    assert D.points == tuple((i,) for i in range(5))
    assert D.boundary == {(0,), (4,)}


def test_unit_square_n2():
    D = discretize(ContinuumDomain.box([0, 0], [1, 1]), 2)
    assert len(D) == 9
    assert len(D.boundary) == 8
    assert D.interior == ((1, 1),)


def test_simplex_n3_points():
    D = discretize(SIMPLEX, 3)
    assert set(D.points) == {(i, j) for i in range(4) for j in range(4) if i + j <= 3}
    assert len(D) == 10


def test_polytope_json_round_trip():
    R = ContinuumDomain.from_json({"dim": 2, "shape": {"type": "polytope", "halfspaces": [
        {"a": [-1, 0], "b": 0}, {"a": [0, -1], "b": 0}, {"a": [1, 1], "b": "1"}]}})
    assert discretize(R, 3).points == discretize(SIMPLEX, 3).points
    assert ContinuumDomain.from_json(R.to_json()) == R


def test_empty_and_disconnected():
    with pytest.raises(EmptyDiscretization):
        discretize(ContinuumDomain.box([F(1, 3)], [F(2, 5)]), 2)
    with pytest.raises(DisconnectedDiscretization):
        DiscreteDomain.from_points([(0,), (2,)])


def test_hausdorff_gap_values():
    # the lattice {0, 1/4, ..., 1} misses the midpoints of [0, 1] by 1/8
    assert hausdorff_gap(ContinuumDomain.box([0], [1]), discretize(ContinuumDomain.box([0], [1]), 4)) == F(1, 8)
    sq = ContinuumDomain.box([0, 0], [1, 1])
    assert hausdorff_gap(sq, discretize(sq, 2), F(1, 8)) <= F(1, 2)
    assert hausdorff_gap(SIMPLEX, discretize(SIMPLEX, 1)) <= 1


@pytest.mark.parametrize("R", [ContinuumDomain.box([0, 0], [1, 1]), SIMPLEX, ContinuumDomain.box([0], [1])])
def test_hausdorff_gap_shrinks_with_n(R):
    gaps = [hausdorff_gap(R, discretize(R, n)) for n in (2, 4, 8, 16)]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_hausdorff_gap_monotone_in_pitch():
    R = SIMPLEX
    D = discretize(R, 2)
    assert hausdorff_gap(R, D, F(1, 4)) <= hausdorff_gap(R, D, F(1, 8)) <= hausdorff_gap(R, D, F(1, 16))


def test_graph_neighbors_examples():
    D = discretize(ContinuumDomain.box([0, 0], [2, 2]), 1)
    assert graph_neighbors((0, 0), D) == [(1, 0), (0, 1)]
    assert len(graph_neighbors((1, 1), D)) == 4
    L = DiscreteDomain.from_points([(i,) for i in range(5)])
    assert graph_neighbors((2,), L) == [(1,), (3,)]
    with pytest.raises(PointOutsideDomain):
        graph_neighbors((7,), L)


def test_csv_export():
    D = discretize(ContinuumDomain.box([0], [1]), 2)
    assert D.to_csv().splitlines() == ["z1,is_boundary", "0,1", "1,0", "2,1"]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3), st.lists(st.integers(1, 4), min_size=3, max_size=3), st.integers(1, 4))
def test_boundary_partition(m, his, n):
    R = ContinuumDomain.box([0] * m, his[:m])
    D = discretize(R, n)
    for z in D.points:
        k = len(graph_neighbors(z, D))
        assert (k < 2 * m) == (z in D.boundary)
        for w in lattice_neighbors(z):
            assert (parity(z) + parity(w)) % 2 == 1
