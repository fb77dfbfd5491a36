import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from heightlab.errors import EmptyCarrier, NotExtendable
from heightlab.height import affine_height, validate_height_function
from heightlab.kirszbraun import (
    PartialHeightFunction,
    _check_by_propagation,
    _arrays,
    check_extendable,
    count_extensions,
    extend_max,
    extend_min,
)
from heightlab.lattice import DiscreteDomain

LINE2 = DiscreteDomain.from_points([(0,), (1,)])
LINE3 = DiscreteDomain.from_points([(0,), (1,), (2,)])
GRID3 = DiscreteDomain.cube(2, 3, lo=-1)


def test_witnesses():
    w = check_extendable(PartialHeightFunction(LINE3, {(0,): 0, (2,): 1}))
    assert w.kind == "parity" and w.points == ((2,),)
    w = check_extendable(PartialHeightFunction(LINE3, {(0,): 0, (2,): 4}))
    assert w.kind == "lipschitz" and set(w.points) == {(0,), (2,)}
    D = DiscreteDomain.cube(2, 2)
    assert check_extendable(PartialHeightFunction(D, {(0, 0): 0, (1, 1): 2})) is None


def test_extension_examples():
    p = PartialHeightFunction(LINE3, {(0,): 0, (2,): 2})
    assert extend_min(p)[(1,)] == 1 and extend_max(p)[(1,)] == 1
    p = PartialHeightFunction(LINE2, {(0,): 0})
    assert extend_min(p)[(1,)] == -1 and extend_max(p)[(1,)] == 1
    p = PartialHeightFunction(GRID3, {(0, 0): 0})
    lo, hi = extend_min(p), extend_max(p)
    for z in GRID3.points:
        assert lo[z] == -sum(map(abs, z)) and hi[z] == sum(map(abs, z))


def test_count_examples():
    assert count_extensions(PartialHeightFunction(LINE3, {(0,): 0, (2,): 0})).count == 2
    assert count_extensions(PartialHeightFunction(LINE3, {(0,): 0, (2,): 2})).count == 1
    G = DiscreteDomain.cube(2, 3)
    ring = {z: affine_height((0, 0), 0, z) for z in G.boundary}
    assert count_extensions(PartialHeightFunction(G, ring)).count == 2


def test_errors():
    with pytest.raises(EmptyCarrier):
        extend_min(PartialHeightFunction(LINE3, {}))
    with pytest.raises(NotExtendable) as info:
        extend_max(PartialHeightFunction(LINE3, {(0,): 0, (2,): 1}))
    assert info.value.witness.kind == "parity"


def _random_partial(rng, feasible_bias=0.7):
    m = int(rng.integers(1, 3))
    if m == 1:
        D = DiscreteDomain.from_points([(i,) for i in range(int(rng.integers(3, 14)))])
    else:
        D = DiscreteDomain.cube(2, int(rng.integers(2, 5)))
    k = int(rng.integers(1, min(len(D), 5) + 1))
    S = [D.points[i] for i in rng.choice(len(D), size=k, replace=False)]
    if rng.random() < feasible_bias:
        s = tuple(int(rng.integers(-4, 5)) / 4 for _ in range(m))
        vals = {z: affine_height(s, 0, z) + 2 * int(rng.integers(-1, 2)) * (i == 0) for i, z in enumerate(S)}
    else:
        vals = {z: int(rng.integers(-5, 6)) for z in S}
    return PartialHeightFunction(D, vals)


def test_soundness_minimality_completeness():
    rng = np.random.default_rng(11)
    checked_free = 0
    for _ in range(150):
        p = _random_partial(rng)
        D = p.domain
        w = check_extendable(p)
        pinned = p.values
        free = len(D) - len(pinned)
        if w is None:
            lo, hi = extend_min(p), extend_max(p)
            for h in (lo, hi):
                assert validate_height_function(h.values, D)
                assert all(h[z] == v for z, v in pinned.items())
            if free <= 12:
                checked_free += 1
                allowed = lambda z, v: z not in pinned or v == pinned[z]
                ext = oracles.height_functions(D.points, allowed, max(map(abs, pinned.values())) + len(D))
                assert len(ext) == count_extensions(p).count >= 1
                for z in D.points:
                    assert lo[z] == min(e[z] for e in ext)
                    assert hi[z] == max(e[z] for e in ext)
        else:
            allowed = lambda z, v: z not in pinned or v == pinned[z]
            if free <= 12:
                assert oracles.count(D.points, allowed, 12 + len(D)) == 0
    assert checked_free > 30


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_propagation_matches_pairwise(seed):
    rng = np.random.default_rng(seed)
    D = DiscreteDomain.cube(2, 6)
    S = [D.points[i] for i in rng.choice(len(D), size=int(rng.integers(2, 12)), replace=False)]
    p = PartialHeightFunction(D, {z: affine_height((0.5, -0.25), 0, z) + 2 * int(rng.integers(-1, 2))
                                  for z in S})
    pairwise = check_extendable(p)
    prop = _check_by_propagation(*_arrays(p))
    assert (pairwise is None) == (prop is None)
    if prop is not None:
        (x, y) = prop.points
        assert abs(p.values[x] - p.values[y]) > sum(abs(a - b) for a, b in zip(x, y))
