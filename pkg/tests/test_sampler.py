import hashlib
from collections import Counter

import numpy as np
import pytest

import oracles
from heightlab.enumeration import SiteConstraint
from heightlab.errors import EmptySet, UnsupportedDimension
from heightlab.height import HeightFunction, affine_height, validate_height_function
from heightlab.lattice import ContinuumDomain, DiscreteDomain, discretize
from heightlab.sampler import ExactSampler, GlauberChain, emit_field, field_ppm, randbelow, sample_glauber, site_generator

LINE3 = DiscreteDomain.from_points([(0,), (1,), (2,)])


def test_randbelow_big_bounds_uniformish():
    g = site_generator(5, 0)
    big = 3 << 200
    draws = [randbelow(g, big) for _ in range(2000)]
    assert all(0 <= d < big for d in draws)
    assert 0.4 < np.mean([d < big // 2 for d in draws]) < 0.6


def test_exact_sampler_two_states():
    s = ExactSampler(LINE3, SiteConstraint.pinned({(0,): 0, (2,): 0}))
    counts = Counter(s.sample_values(seed)[1] for seed in range(4000))
    assert set(counts) == {-1, 1}
    assert abs(counts[1] - 2000) < 4 * np.sqrt(1000)


def test_rigid_sample():
    D = DiscreteDomain.from_points([(i,) for i in range(6)])
    s = ExactSampler(D, SiteConstraint.pinned({(0,): 0, (5,): 5}))
    assert s.total == 1
    assert s.sample(9).as_tuple() == (0, 1, 2, 3, 4, 5)


def test_empty_set():
    with pytest.raises(EmptySet):
        ExactSampler(LINE3, SiteConstraint.pinned({(0,): 0, (2,): 4}))


def test_samples_satisfy_constraint():
    D = DiscreteDomain.cube(2, 4)
    c = SiteConstraint.pinned({z: affine_height((0, 0), 0, z) for z in D.boundary})
    s = ExactSampler(D, c)
    for seed in range(30):
        h = s.sample(seed)
        assert validate_height_function(h.values, D) and c.satisfied_by(h.values)
    S = GlauberChain(D, c).run(1, 20, chains=30)
    for row in S:
        vals = dict(zip(D.points, row.tolist()))
        assert validate_height_function(vals, D) and c.satisfied_by(vals)


def test_glauber_single_free_site_one_sweep():
    chain = GlauberChain(LINE3, SiteConstraint.pinned({(0,): 0, (2,): 0}))
    S = chain.run(4, 1, chains=20000)
    frac = np.mean(S[:, 1] == 1)
    assert abs(frac - 0.5) < 4 * 0.5 / np.sqrt(20000)


@pytest.mark.parametrize("pins,D", [
    ({(0,): 0, (2,): 0}, LINE3),
    ({(0,): 0, (3,): 1}, DiscreteDomain.from_points([(i,) for i in range(4)])),
])
def test_detailed_balance(pins, D):
    chain = GlauberChain(D, SiteConstraint.pinned(pins))
    states = [tuple(h[z] for z in D.points) for h in
              oracles.height_functions(D.points, lambda z, v: z not in pins or v == pins[z])]
    for site in range(len(D)):
        P = chain.single_site_kernel(states, site)
        assert np.allclose(P.sum(axis=1), 1)
        assert np.allclose(P, P.T)  # uniform stationary law: detailed balance means symmetry


def test_glauber_thread_independence():
    D = DiscreteDomain.cube(2, 8)
    c = SiteConstraint.pinned({z: affine_height((0, 0), 0, z) for z in D.boundary})
    runs = [GlauberChain(D, c).run(3, 10, chains=50, threads=t) for t in (1, 4, 8)]
    assert all(np.array_equal(runs[0], r) for r in runs[1:])


def test_diamond_cone_bound():
    R = ContinuumDomain.polytope([{"a": [1, 1], "b": 1}, {"a": [-1, 1], "b": 1},
                                  {"a": [1, -1], "b": 1}, {"a": [-1, -1], "b": 1}])
    n = 24
    D = discretize(R, n)
    c = SiteConstraint.pinned({z: affine_height((0, 0), 0, z) for z in D.boundary})
    h = sample_glauber(D, c, seed=1, sweeps=20, threads=2)
    assert max(abs(v) for v in h.values.values()) / n <= 1


def test_emit_field(tmp_path):
    D = DiscreteDomain.cube(2, 3)
    h = HeightFunction(D, {z: affine_height((1, 0), 0, z) for z in D.points})
    a = emit_field(h, tmp_path / "a.csv", tmp_path / "a.ppm")
    b = emit_field(h, tmp_path / "b.csv", tmp_path / "b.ppm")
    assert a[0].read_bytes() == b[0].read_bytes() and a[1].read_bytes() == b[1].read_bytes()
    rows = [r for r in a[0].read_text().splitlines() if not r.startswith("#")]
    assert len(rows) == 1 + 9
    ppm = a[1].read_bytes()
    assert ppm.startswith(b"P6\n") and b"\n3 3\n255\n" in ppm
    assert len(ppm.split(b"\n3 3\n255\n", 1)[1]) == 27


def test_constant_field_uses_mid_palette():
    D = DiscreteDomain.from_points([(0, 0)])
    body = field_ppm(HeightFunction(D, {(0, 0): 0})).split(b"255\n", 1)[1]
    assert body == bytes([255, 255, 191])


def test_image_needs_2d(tmp_path):
    D = DiscreteDomain.cube(3, 2)
    h = HeightFunction(D, {z: affine_height((1, 1, 1), 0, z) for z in D.points})
    with pytest.raises(UnsupportedDimension):
        emit_field(h, tmp_path / "x.csv", tmp_path / "x.ppm")
