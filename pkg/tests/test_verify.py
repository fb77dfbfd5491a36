import json
import math
from fractions import Fraction as F

import numpy as np
import pytest

from heightlab.enumeration import ClosedForm1D, build_surface_tension_table, sigma
from heightlab.errors import InfeasibleBoundary
from heightlab.height import AffineProfile, TentProfile
from heightlab.lattice import ContinuumDomain, discretize
from heightlab.simplicial import simplices_inside
from heightlab import verify as V

UNIT = ContinuumDomain.box([0], [1])
SQ = ContinuumDomain.box([0, 0], [1, 1])
MODEL = ClosedForm1D()


def test_minimizer_examples():
    r = V.minimize_macro_entropy(UNIT, AffineProfile((F(1, 2),), 0), F(1, 16), MODEL)
    assert r.value == pytest.approx(sigma(0.5), abs=1e-6)
    for x, v in r.profile.vertex_values.items():
        assert v == pytest.approx(float(x[0]) / 2, abs=1e-4)
    hist = r.history
    assert all(b <= a for a, b in zip(hist, hist[1:]))
    rigid = V.minimize_macro_entropy(UNIT, AffineProfile((1,), 0), F(1, 8), MODEL)
    assert rigid.value == 0


def test_minimizer_2d_affine_boundary_with_table():
    T = build_surface_tension_table(2, 5, [4, 6, 8])
    s = (F(1, 2), F(-1, 4))
    r = V.minimize_macro_entropy(SQ, AffineProfile(s, 0), F(1, 4), T)
    assert r.value == pytest.approx(T.convexified()(s), abs=1e-4)
    assert r.profile.lipschitz_constant() <= 1 + 1e-9


class _TwoPoint(AffineProfile):
    """Boundary data 0 at x=0 and 2 at x=1: not 1-Lipschitz."""

    def value(self, x):
        return F(0) if x[0] == 0 else F(2)


def test_infeasible_boundary():
    with pytest.raises(InfeasibleBoundary):
        V.minimize_macro_entropy(UNIT, _TwoPoint((0,), 0), F(1, 4), MODEL)


def test_simplicial_profile_slope_one():
    K = simplices_inside(UNIT, 1)
    rep = V.check_simplicial_profile(K, AffineProfile((1,), 0), MODEL, F(1, 4), [4, 8, 16, 32], 1)
    # the macroscopic side is rigid; the ball itself only collapses to one state
    # while its radius eps*n stays at most 2
    assert all(i["rhs"] == 0 for i in rep.instances)
    assert [i["count"] for i in rep.instances[:2]] == ["1", "1"]
    assert all(i["lhs"] < 0 for i in rep.instances[2:])


def test_general_profile_affine_matches_simplicial():
    p = AffineProfile((F(1, 2),), 0)
    gen = V.check_general_profile(p, UNIT, MODEL, F(1, 4), 32, 0.15)
    simp = V.check_simplicial_profile(simplices_inside(UNIT, 1), p, MODEL, F(1, 4), [32], 1)
    assert gen.instances[0]["rhs"] == simp.instances[0]["lhs"]
    assert gen.instances[0]["lhs"] == pytest.approx(simp.instances[0]["rhs"])


def test_general_profile_tent():
    rep = V.check_general_profile(TentProfile(F(1, 2), F(1, 4), F(1, 2)), UNIT, MODEL, F(1, 4), 32, 0.15)
    assert rep.instances[0]["lhs"] == pytest.approx(sigma(0.5))
    assert rep.verdict
    steep = V.check_general_profile(TentProfile(F(1, 2), F(1, 2), F(1)), UNIT, MODEL, F(1, 16), 32, 0.15)
    assert steep.instances[0]["lhs"] == 0


def test_variational_delta_monotone():
    b = AffineProfile((F(1, 2),), 0)
    e = [V.check_variational(UNIT, b, MODEL, d, 32, F(1, 8), 1).instances[0]["rhs"]
         for d in (F(1, 16), F(1, 8), F(1, 4))]
    assert e[0] >= e[1] >= e[2]


def test_mu_is_a_probability():
    import oracles

    n = 12
    D = discretize(UNIT, n)
    hB = {(0,): 0, (n,): 6}
    delta = F(1, 6)
    assert V.measure_mu(D, hB, delta, None).probability == 1
    assert V.measure_mu(D, hB, delta, [V.Ball(AffineProfile((F(1, 2),), 3), F(1, 20))]).count == 0
    a = V.Ball(AffineProfile((F(1, 2),), 0), F(1, 6))
    t = V.Ball(TentProfile(F(3, 4), F(3, 4), 1), F(1, 6), closed=True)
    mu = V.measure_mu(D, hB, delta, [a, t])
    # brute force: enumerate the delta-boundary set and test membership directly
    states = oracles.height_functions(D.points, lambda z, v: z not in hB or abs(v - hB[z]) < delta * n)

    def inside(h, ball):
        r = ball.radius * n
        return all((abs(h[z] - n * ball.center.value((F(z[0], n),))) <= r) if ball.closed
                   else (abs(h[z] - n * ball.center.value((F(z[0], n),))) < r) for z in D.points)

    hits = sum(1 for h in states if inside(h, a) or inside(h, t))
    assert mu.total == len(states)
    assert mu.probability == F(hits, len(states))
    ma = V.measure_mu(D, hB, delta, [a]).probability
    mt = V.measure_mu(D, hB, delta, [t]).probability
    both = F(sum(1 for h in states if inside(h, a) and inside(h, t)), len(states))
    assert mu.probability == ma + mt - both


def test_robustness_lemmas():
    rep = V.check_robustness_lemmas(seed=1, instances=50)
    assert rep.verdict
    assert sum(1 for i in rep.instances if i["check"] == "profile change") == 50


def test_near_one_and_kirszbraun_bounds():
    assert V.check_near_one_bound().verdict
    cases = [(n, F(1, 4), s, s + d) for n in (36, 48, 60) for s in (F(0), F(1, 4), F(-1, 4))
             for d in (F(0), F(1, 20))]
    rep = V.check_kirszbraun_entropy_inequality(cases)
    assert rep.verdict and all(i["hypotheses"] for i in rep.instances)


def test_report_json_is_deterministic():
    K = simplices_inside(UNIT, 1)
    a = V.check_simplicial_profile(K, AffineProfile((F(1, 2),), 0), MODEL, F(1, 4), [8, 16], 0.5)
    b = V.check_simplicial_profile(K, AffineProfile((F(1, 2),), 0), MODEL, F(1, 4), [8, 16], 0.5, threads=4)
    da, db = a.to_dict(), b.to_dict()
    da.pop("runtime_seconds"), db.pop("runtime_seconds")
    assert da == db
    json.loads(a.to_json())
