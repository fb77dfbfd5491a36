import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heightlab.enumeration import ClosedForm1D, sigma
from heightlab.errors import Disconnected, NoSimplexFits, SlopeOutOfRange
from heightlab.height import AffineProfile, MinCoordsProfile, QuadraticProfile, TentProfile
from heightlab.lattice import ContinuumDomain
from heightlab.simplicial import (
    PiecewiseAffineProfile,
    SimplexDomain,
    SimplexId,
    approximation_sweep,
    interpolate_on_mesh,
    macro_entropy,
    rademacher_approx,
    simplex_containing,
    simplex_vertices,
    simplices_inside,
)

SQ = ContinuumDomain.box([0, 0], [1, 1])
UNIT = ContinuumDomain.box([0], [1])


def test_simplex_containing_examples():
    s = simplex_containing((F("1.1"), F("-0.5"), F("2.3")))
    assert s.v == (1, -1, 2) and s.perm == (2, 3, 1)
    assert simplex_containing((F("0.7"), F("0.2"))).perm == (1, 2)
    assert simplex_containing((F(1, 2), F(1, 2))).perm == (1, 2)


def test_vertex_paths():
    assert simplex_vertices(SimplexId((0, 0), (2, 1))) == [(0, 0), (0, 1), (1, 1)]
    assert simplex_vertices(SimplexId((0, 0), (1, 2))) == [(0, 0), (1, 0), (1, 1)]


def test_simplices_inside_counts():
    assert len(simplices_inside(SQ, 1)) == 2
    assert simplices_inside(SQ, 1).volume() == 1
    assert len(simplices_inside(SQ, F(1, 2))) == 8
    # Kuhn diagonals run along x = y, so only the two triangles of the corner cell
    # fit inside x + y <= 1 at scale 1/2
    assert len(simplices_inside(ContinuumDomain.standard_simplex(2), F(1, 2))) == 2
    with pytest.raises(NoSimplexFits):
        simplices_inside(ContinuumDomain.box([0, 0], [F(1, 3), F(1, 3)]), 1)


def test_disconnected_domain():
    with pytest.raises(Disconnected):
        SimplexDomain(F(1), (SimplexId((0, 0), (1, 2)), SimplexId((3, 3), (1, 2))))


def test_interpolation_examples():
    K = simplices_inside(SQ, F(1, 2))
    p = AffineProfile((F(1, 3), F(-1, 2)), F(1, 5))
    hK = interpolate_on_mesh(p, K)
    for g in hK.simplex_gradients().values():
        assert g == p.s
    for x in itertools.product([F(k, 9) for k in range(10)], repeat=2):
        assert hK.value(x) == p.value(x)
    K1 = simplices_inside(SQ, 1)
    hm = interpolate_on_mesh(MinCoordsProfile(2), K1)
    for x in itertools.product([F(k, 7) for k in range(8)], repeat=2):
        assert hm.value(x) == min(x)
    K4 = simplices_inside(SQ, F(1, 4))
    q = QuadraticProfile(F(1, 4), 2, F(1))
    hq = interpolate_on_mesh(q, K4)
    # second derivatives of (x^2 + y^2)/4 are 1/2; linear interpolation error <= l^2 * 2 * (1/2) / 2
    bound = float(F(1, 4)) ** 2 / 2
    worst = max(abs(float(hq.value(x)) - float(q.value(x)))
                for x in itertools.product([F(k, 64) for k in range(65)], repeat=2))
    assert worst <= bound


def test_rademacher_examples():
    _, _, rep = rademacher_approx(MinCoordsProfile(2), SQ, 0.2, F(1, 2))
    assert rep.max_value_error == 0 and rep.bad_gradient_fraction == 0
    _, _, rep = rademacher_approx(AffineProfile((F(1, 2), 0), 0), SQ, 0.2, F(1))
    assert rep.passed
    result, reports = approximation_sweep(QuadraticProfile(F(1, 4), 2, F(1)), SQ, 0.2)
    assert result is not None and result[2].scale >= F(1, 16)


def test_macro_entropy_examples():
    model = ClosedForm1D()
    K = simplices_inside(UNIT, F(1, 4))
    assert macro_entropy(interpolate_on_mesh(AffineProfile((F(1, 3),), 0), K), model) == pytest.approx(sigma(1 / 3))
    tent = interpolate_on_mesh(TentProfile(F(1, 2), F(1, 4), F(1, 2)), K)
    assert macro_entropy(tent, model) == pytest.approx(sigma(0.5))
    assert macro_entropy(interpolate_on_mesh(AffineProfile((1,), 0), K), model) == 0
    bad = PiecewiseAffineProfile(K, {x: 2 * x[0] for x in K.vertices()}, check=False)
    with pytest.raises(SlopeOutOfRange):
        macro_entropy(bad, model)


def test_json_round_trips():
    K = simplices_inside(SQ, F(1, 2))
    assert SimplexDomain.from_json(K.to_json()) == K
    h = interpolate_on_mesh(MinCoordsProfile(2), K)
    again = PiecewiseAffineProfile.from_json(h.to_json())
    assert again.vertex_values == h.vertex_values


@pytest.mark.parametrize("m", [2, 3])
def test_tiling_volume(m):
    sims = [SimplexId((0,) * m, p) for p in itertools.permutations(range(1, m + 1))]
    assert sum(s.volume() for s in sims) == 1


@pytest.mark.parametrize("scale", [F(1), F(1, 2), F(1, 3)])
def test_isometry_and_paths(scale):
    lengths = None
    for m in (2, 3):
        for perm in itertools.permutations(range(1, m + 1)):
            s = SimplexId((1,) * m, perm, scale)
            assert s.volume() == scale ** m / math.factorial(m)
            verts = s.vertices()
            for i, (a, b) in enumerate(zip(verts, verts[1:])):
                d = tuple(y - x for x, y in zip(a, b))
                assert d == tuple(scale if j == perm[i] - 1 else 0 for j in range(m))
            edges = sorted(sum(abs(x - y) for x, y in zip(a, b)) for a, b in itertools.combinations(verts, 2))
            if m == 3:
                lengths = lengths or edges
                assert edges == lengths


@settings(max_examples=50, deadline=None)
@given(st.lists(st.fractions(-3, 3, max_denominator=12), min_size=3, max_size=3))
def test_located_simplex_contains_point(w):
    s = simplex_containing(w, F(1, 2))
    assert s.contains(w)


@settings(max_examples=30, deadline=None)
@given(st.fractions(-5, 5, max_denominator=7))
def test_macro_entropy_shift_invariant(c):
    K = simplices_inside(SQ, F(1, 2))
    h = interpolate_on_mesh(MinCoordsProfile(2), K)
    model = lambda g: -abs(g[0] - g[1]) / 3 - 0.1
    assert macro_entropy(h.shifted(c), model) == pytest.approx(macro_entropy(h, model))
