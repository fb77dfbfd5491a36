"""Desk-scale numerical checks of the profile theorem, the variational
principle, the large deviations principle and the robustness lemmas.

Every check compares an exactly counted microscopic entropy with a
macroscopic quantity computed independently (closed form or tabulated
surface tension integrated over a simplicial mesh) and records the gaps.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .enumeration import (
    CountResult,
    Interval,
    SiteConstraint,
    ball_constraint,
    count_ball,
    count_constrained,
    count_delta_boundary,
    delta_boundary_constraint,
    ent_local_count,
    sigma,
)
from .errors import InfeasibleBoundary
from .height import AffineProfile, Profile, rounded_profile_heights
from .lattice import ContinuumDomain, DiscreteDomain, as_fraction, discretize, l1
from .simplicial import (
    PiecewiseAffineProfile,
    SimplexDomain,
    approximation_sweep,
    interpolate_on_mesh,
    macro_entropy,
    simplices_inside,
)


@dataclass
class VerificationReport:
    claim: str
    instances: list = field(default_factory=list)
    tolerance: float | None = None
    verdict: bool = False
    runtime_seconds: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def trend(self) -> list:
        return [inst.get("gap") for inst in self.instances]

    def to_dict(self) -> dict:
        out = asdict(self)
        out["trend"] = self.trend
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(type(obj).__name__)


def _non_increasing(values: Sequence[float], slack: float = 1e-12) -> bool:
    return all(b <= a + slack for a, b in zip(values, values[1:]))


# ---------------------------------------------------------------------------
# profile theorem
# ---------------------------------------------------------------------------


def _as_pwa(p: Profile, K: SimplexDomain) -> PiecewiseAffineProfile:
    return p if isinstance(p, PiecewiseAffineProfile) else interpolate_on_mesh(p, K)


def check_simplicial_profile(K: SimplexDomain, hK: Profile, model, epsilon, n_list: Sequence[int],
                             tolerance: float, threads: int = 1) -> VerificationReport:
    """Ball entropy around ``hK`` on ``K_n`` versus the macroscopic entropy of ``hK``.

    Passes when ``|gap|`` is non-increasing over the last three sizes and the
    final ``|gap|`` is within ``tolerance``.
    """
    t0 = time.perf_counter()
    epsilon = as_fraction(epsilon)
    pwa = _as_pwa(hK, K)
    rhs = macro_entropy(pwa, model)
    region = K.as_continuum()
    rep = VerificationReport("simplicial profile theorem", tolerance=tolerance)
    for n in n_list:
        Kn = discretize(region, n)
        c = count_ball(Kn, hK, epsilon * K.scale, threads=threads)
        # an empty ball (windows too narrow for the parity) has entropy +inf
        lhs = math.inf if c.count == 0 else c.entropy
        rep.instances.append({"n": n, "sites": len(Kn), "count": str(c.count), "lhs": lhs, "rhs": rhs,
                              "gap": lhs - rhs})
    gaps = [abs(i["gap"]) for i in rep.instances]
    rep.verdict = _non_increasing(gaps[-3:]) and gaps[-1] <= tolerance
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def check_general_profile(p: Profile, R: ContinuumDomain, model, delta, n: int, tolerance: float,
                          epsilon: float = 0.2, scales=None, threads: int = 1) -> VerificationReport:
    """Macroscopic entropy of a simplicial approximation of ``p`` versus the
    ball entropy ``Ent(B(R_n, p, delta))``."""
    t0 = time.perf_counter()
    kw = {} if scales is None else {"scales": scales}
    result, reports = approximation_sweep(p, R, epsilon, **kw)
    rep = VerificationReport("profile theorem", tolerance=tolerance)
    if result is None:
        rep.notes.append("approximation sweep inconclusive; using the finest scale tried")
        K = simplices_inside(R, reports[-1].scale)
        hK = interpolate_on_mesh(p, K, check=False)
        scale = reports[-1].scale
    else:
        K, hK, approx = result
        scale = approx.scale
    lhs = macro_entropy(hK, model)
    Rn = discretize(R, n)
    c = count_ball(Rn, p, delta, threads=threads)
    rhs = c.entropy
    rep.instances.append({"n": n, "delta": str(as_fraction(delta)), "scale": str(scale), "count": str(c.count),
                          "lhs": lhs, "rhs": rhs, "gap": lhs - rhs,
                          "approximation": [r.to_dict() for r in reports]})
    rep.verdict = abs(lhs - rhs) <= tolerance
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# convex minimisation of the macroscopic entropy
# ---------------------------------------------------------------------------


@dataclass
class MinimizeResult:
    profile: PiecewiseAffineProfile
    value: float
    iterations: int
    converged: bool
    history: list


class _MeshProblem:
    """Vertex-value parametrisation of piecewise-affine profiles on a mesh."""

    def __init__(self, K: SimplexDomain):
        self.K = K
        self.vertices = K.vertices()
        self.index = {x: i for i, x in enumerate(self.vertices)}
        self.scale = float(K.scale)
        sims = K.simplices
        self.path = np.array([[self.index[x] for x in s.vertices()] for s in sims], dtype=np.int64)
        self.perm = np.array([[p - 1 for p in s.perm] for s in sims], dtype=np.int64)
        self.m = K.dim
        incident = np.bincount(self.path.ravel(), minlength=len(self.vertices))
        self.boundary = incident < math.factorial(self.m + 1)

    def grads(self, h: np.ndarray) -> np.ndarray:
        diffs = (h[self.path[:, 1:]] - h[self.path[:, :-1]]) / self.scale
        g = np.empty_like(diffs)
        np.put_along_axis(g, self.perm, diffs, axis=1)
        return g

    def objective(self, h: np.ndarray, model) -> float:
        g = np.clip(self.grads(h), -1.0, 1.0)
        return float(np.mean([model(tuple(row)) for row in g]))

    def gradient(self, h: np.ndarray, model) -> np.ndarray:
        g = np.clip(self.grads(h), -1.0, 1.0)
        dm = np.array([model.gradient(tuple(row)) for row in g])
        dpath = np.take_along_axis(dm, self.perm, axis=1) / self.scale / len(g)
        out = np.zeros(len(self.vertices))
        np.add.at(out, self.path[:, 1:], dpath)
        np.subtract.at(out, self.path[:, :-1], dpath)
        return out

    def profile(self, h: np.ndarray) -> PiecewiseAffineProfile:
        return PiecewiseAffineProfile(self.K, dict(zip(self.vertices, h.tolist())), check=True, tol=1e-9)


def _max_step(prob: _MeshProblem, h, d, lower, upper) -> float:
    ell = prob.scale
    diff = h[prob.path[:, 1:]] - h[prob.path[:, :-1]]
    ddiff = d[prob.path[:, 1:]] - d[prob.path[:, :-1]]
    t = np.inf
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(ddiff > 0, (ell - diff) / ddiff, np.inf)
        dn = np.where(ddiff < 0, (-ell - diff) / ddiff, np.inf)
        t = min(t, float(up.min()), float(dn.min()))
        if lower is not None:
            t = min(t, float(np.where(d < 0, (lower - h) / d, np.inf).min()))
            t = min(t, float(np.where(d > 0, (upper - h) / d, np.inf).min()))
    return max(t, 0.0)


def _tangent_direction(prob: _MeshProblem, h, d, free, lower, upper, tol=1e-12) -> np.ndarray:
    """Remove components of d that push along active constraints."""
    ell = prob.scale
    rows = []
    for _ in range(len(h) + 1):
        diff = h[prob.path[:, 1:]] - h[prob.path[:, :-1]]
        ddiff = d[prob.path[:, 1:]] - d[prob.path[:, :-1]]
        act = ((diff >= ell - tol) & (ddiff > tol)) | ((diff <= -ell + tol) & (ddiff < -tol))
        new = []
        for s, i in zip(*np.nonzero(act)):
            r = np.zeros(len(h))
            r[prob.path[s, i + 1]] += 1.0
            r[prob.path[s, i]] -= 1.0
            new.append(r)
        if lower is not None:
            for v in np.nonzero(((h <= lower + tol) & (d < -tol)) | ((h >= upper - tol) & (d > tol)))[0]:
                r = np.zeros(len(h))
                r[v] = 1.0
                new.append(r)
        if not new:
            return d
        rows.extend(new)
        A = np.array(rows)[:, free]
        df = d[free]
        coef, *_ = np.linalg.lstsq(A @ A.T, A @ df, rcond=None)
        d = d.copy()
        d[free] = df - A.T @ coef
        d[np.abs(d) < 1e-15] = 0.0
    return d


def minimize_macro_entropy(R: ContinuumDomain, boundary: Profile, scale, model, max_iter: int = 20000,
                           stall_tol: float = 1e-6, stall_window: int = 100, init=None,
                           vertex_bounds=None) -> MinimizeResult:
    """Minimise the macroscopic entropy over piecewise-affine profiles on the
    scale-``scale`` Kuhn mesh of R with boundary vertices pinned to ``boundary``.

    Steps follow the negative gradient, restricted to the tangent cone of
    the active slope constraints and shortened so every simplex keeps
    ``|grad|_inf <= 1``; a backtracking rule accepts only decreasing steps.
    Tabulated surface tensions are replaced by their lower convex envelope.
    ``vertex_bounds`` optionally maps vertices to ``(lo, hi)`` boxes.
    """
    model = model.convexified() if hasattr(model, "convexified") else model
    K = simplices_inside(R, scale)
    prob = _MeshProblem(K)
    verts = prob.vertices
    bidx = np.nonzero(prob.boundary)[0]
    bvals = {i: float(boundary.value(verts[i])) for i in bidx}
    for i, j in itertools.combinations(bidx, 2):
        if abs(bvals[i] - bvals[j]) > float(l1(verts[i], verts[j])) + 1e-12:
            raise InfeasibleBoundary(f"boundary data at {verts[i]} and {verts[j]} is not 1-Lipschitz")
    free = ~prob.boundary
    lower = upper = None
    if vertex_bounds is not None:
        lower = np.array([float(vertex_bounds[x][0]) if x in vertex_bounds else -np.inf for x in verts])
        upper = np.array([float(vertex_bounds[x][1]) if x in vertex_bounds else np.inf for x in verts])

    if init is None:
        X = np.array([[float(c) for c in x] for x in verts])
        B = X[bidx]
        bv = np.array([bvals[i] for i in bidx])
        d = np.abs(X[:, None, :] - B[None, :, :]).sum(axis=2)
        h = 0.5 * ((bv[None, :] - d).max(axis=1) + (bv[None, :] + d).min(axis=1))
    else:
        h = np.array([float(init.value(x)) if isinstance(init, Profile) else float(init[x]) for x in verts])
    for i in bidx:
        h[i] = bvals[i]

    f = prob.objective(h, model)
    history = [f]
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = prob.gradient(h, model)
        grad[~free] = 0.0
        d = _tangent_direction(prob, h, -grad, free, lower, upper)
        gnorm2 = float(d @ d)
        if gnorm2 < 1e-28:
            converged = True
            break
        tmax = _max_step(prob, h, d, lower, upper)
        t = min(step, tmax)
        accepted = False
        while t > 1e-16:
            cand = h + t * d
            fc = prob.objective(cand, model)
            if fc <= f - 1e-4 * t * gnorm2:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            converged = True
            break
        h, f = cand, fc
        history.append(f)
        step = min(2 * t, 1e6)
        if len(history) > stall_window and history[-1 - stall_window] - f < stall_tol:
            converged = True
            break
    return MinimizeResult(prob.profile(h), f, it, converged, history)


def check_variational(R: ContinuumDomain, boundary: Profile, model, delta, n: int, scale,
                      tolerance: float, threads: int = 1) -> VerificationReport:
    """Minimal macroscopic entropy versus ``Ent(M(R_n, h_∂, delta))`` with the
    microscopic boundary data obtained by parity rounding ``n * boundary``."""
    t0 = time.perf_counter()
    res = minimize_macro_entropy(R, boundary, scale, model)
    Rn = discretize(R, n)
    hB = rounded_profile_heights(boundary, sorted(Rn.boundary), n)
    c = count_delta_boundary(Rn, hB, delta, threads=threads)
    rep = VerificationReport("variational principle", tolerance=tolerance)
    rep.instances.append({"n": n, "delta": str(as_fraction(delta)), "scale": str(as_fraction(scale)),
                          "count": str(c.count), "lhs": res.value, "rhs": c.entropy,
                          "gap": res.value - c.entropy, "iterations": res.iterations,
                          "converged": res.converged})
    rep.verdict = abs(res.value - c.entropy) <= tolerance
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# large deviations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Ball:
    """Sup-norm ball ``{h : |h(z/n) - center(z/n)| < radius}`` at lattice points
    (``<=`` when ``closed``)."""

    center: Profile
    radius: Fraction
    closed: bool = False

    def constraint(self, D: DiscreteDomain) -> SiteConstraint:
        n = D.n
        r = as_fraction(self.radius) * n
        return SiteConstraint({
            z: Interval.around(n * as_fraction(self.center.value(tuple(Fraction(c, n) for c in z))), r,
                               strict=not self.closed)
            for z in D.points})


@dataclass
class MuResult:
    probability: Fraction
    count: int
    total: int
    sites: int

    @property
    def rate(self) -> float:
        """Empirical rate ``-(1/|R_n|) ln mu``."""
        if self.count == 0:
            return math.inf
        return -math.log(self.probability) / self.sites


def measure_mu(D: DiscreteDomain, hB: dict, delta, balls: Sequence[Ball] | None, threads: int = 1) -> MuResult:
    """Uniform measure of ``M(R_n, hB, delta)`` on a finite union of balls
    (``balls=None`` is the whole space), counted exactly by inclusion-exclusion."""
    base = delta_boundary_constraint(D, hB, delta)
    total = count_constrained(D, base, threads=threads).count
    if total == 0:
        raise InfeasibleBoundary("the delta-boundary set is empty")
    if balls is None:
        return MuResult(Fraction(1), total, total, len(D))
    cons = [b.constraint(D) for b in balls]
    hit = 0
    for k in range(1, len(cons) + 1):
        for subset in itertools.combinations(cons, k):
            c = base
            for s in subset:
                c = c.intersect(s)
            hit += (-1) ** (k + 1) * count_constrained(D, c, threads=threads).count
    return MuResult(Fraction(hit, total), hit, total, len(D))


def rate_function(p: Profile, R: ContinuumDomain, boundary: Profile, model, E: float, scale) -> float:
    """``I(p) = Ent(p) - E`` when p matches the boundary data, else infinity."""
    K = simplices_inside(R, scale)
    prob = _MeshProblem(K)
    for i in np.nonzero(prob.boundary)[0]:
        x = prob.vertices[i]
        if abs(float(p.value(x)) - float(boundary.value(x))) > 1e-12:
            return math.inf
    return macro_entropy(_as_pwa(p, K), model) - E


def ldp_report(R: ContinuumDomain, boundary: Profile, model, delta, n: int, scale,
               events: dict, threads: int = 1) -> VerificationReport:
    """Exact ``mu_{delta,n}`` of named events versus the rate function.

    ``events`` maps names to lists of :class:`Ball`.  For each event the
    report gives ``mu``, the empirical rate, ``I`` at the ball centres and
    the ball-restricted minimum of ``I`` (a bracket for ``inf_A I``, which
    is not computed exactly).  The verdict requires the empirical rates to
    be ordered like the bracket lower ends.
    """
    t0 = time.perf_counter()
    best = minimize_macro_entropy(R, boundary, scale, model)
    E = best.value
    Rn = discretize(R, n)
    hB = rounded_profile_heights(boundary, sorted(Rn.boundary), n)
    rep = VerificationReport("large deviations principle")
    rep.notes.append("inf of I over an open ball is bracketed by I at the ball-restricted minimiser "
                     "and I at the ball centre; it is not computed exactly")
    rep.notes.append(f"E = {E!r} from the mesh minimiser at scale {as_fraction(scale)}")
    for name, balls in events.items():
        mu = measure_mu(Rn, hB, delta, balls, threads=threads)
        centre_I = [rate_function(b.center, R, boundary, model, E, scale) for b in balls] if balls else [0.0]
        inner = []
        for b in balls or []:
            K = simplices_inside(R, scale)
            bounds = {x: (float(b.center.value(x)) - float(b.radius), float(b.center.value(x)) + float(b.radius))
                      for x in K.vertices()}
            if math.isinf(rate_function(b.center, R, boundary, model, E, scale)):
                inner.append(math.inf)
                continue
            r = minimize_macro_entropy(R, boundary, scale, model, init=b.center, vertex_bounds=bounds)
            inner.append(r.value - E)
        rep.instances.append({"event": name, "mu": str(mu.probability), "mu_float": float(mu.probability),
                              "count": str(mu.count), "total": str(mu.total), "rate": mu.rate,
                              "I_centres": centre_I, "I_ball_min": inner if balls else [0.0],
                              "gap": mu.rate - min(inner if balls else [0.0])})
    rates = [i["rate"] for i in rep.instances]
    lows = [min(i["I_ball_min"]) for i in rep.instances]
    order_ok = all((ra < rb) == (la < lb) for (ra, la), (rb, lb)
                   in itertools.combinations(zip(rates, lows), 2) if abs(la - lb) > 1e-6)
    rep.verdict = order_ok
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


# ---------------------------------------------------------------------------
# robustness lemmas
# ---------------------------------------------------------------------------


def _random_pwa_1d(rng, scale: Fraction, lip: Fraction = Fraction(1)) -> PiecewiseAffineProfile:
    K = simplices_inside(ContinuumDomain.box([0], [1]), scale)
    steps = int(1 / scale)
    vals = [Fraction(0)]
    for _ in range(steps):
        num = int(rng.integers(-8, 9))
        vals.append(vals[-1] + lip * scale * Fraction(num, 8))
    verts = K.vertices()
    return PiecewiseAffineProfile(K, dict(zip(verts, vals)))


def check_robustness_lemmas(seed: int = 0, instances: int = 50, n: int = 24,
                            threads: int = 1) -> VerificationReport:
    """Exact count inequalities behind the robustness lemmas on 1D instances.

    * profile change: ``B(R_n, h, 2 eps) ⊇ B(R_n, h~, eps)`` whenever
      ``max |h - h~| <= eps`` (checked by counting the intersection);
    * domain shrink: ``|B(R_n, h, eps)| >= |B(R~_n, h, (c/3) eps^2)|`` for
      ``R~ ⊂ R`` and ``Lip(h) <= 1 - c eps``;
    * macroscopic robustness: profiles whose gradients agree off a set of
      relative measure ``eps`` have entropies within ``eps ln 2``.
    """
    t0 = time.perf_counter()
    rng = np.random.Generator(np.random.Philox(key=seed))
    rep = VerificationReport("robustness lemmas")
    R = ContinuumDomain.box([0], [1])
    Rn = discretize(R, n)
    ok = True
    for k in range(instances):
        eps = Fraction(int(rng.integers(2, 7)), 16)
        h = _random_pwa_1d(rng, Fraction(1, 8))
        other = _random_pwa_1d(rng, Fraction(1, 8))
        diff = max(abs(other.vertex_values[x] - h.vertex_values[x]) for x in h.domain.vertices())
        t = min(Fraction(1), eps / diff) if diff else Fraction(1)
        ht = PiecewiseAffineProfile(h.domain, {x: (1 - t) * h.vertex_values[x] + t * other.vertex_values[x]
                                               for x in h.domain.vertices()})
        small = ball_constraint(Rn, ht, eps)
        big = ball_constraint(Rn, h, 2 * eps)
        n_small = count_constrained(Rn, small, threads=threads).count
        n_both = count_constrained(Rn, small.intersect(big), threads=threads).count
        n_big = count_constrained(Rn, big, threads=threads).count
        passed = n_both == n_small and n_big >= n_small
        ok &= passed
        rep.instances.append({"check": "profile change", "k": k, "eps": str(eps), "small": str(n_small),
                              "big": str(n_big), "gap": 0.0 if passed else 1.0, "passed": passed})

    for eps, c, (a, b) in [(Fraction(1, 2), Fraction(1), (Fraction(1, 8), Fraction(7, 8))),
                           (Fraction(1, 3), Fraction(1, 2), (Fraction(1, 4), Fraction(3, 4))),
                           (Fraction(1, 4), Fraction(1), (Fraction(0), Fraction(7, 8)))]:
        lip = 1 - c * eps
        h = AffineProfile((lip,), 0)
        Rt = ContinuumDomain.box([a], [b])
        big = count_ball(Rn, h, eps, threads=threads).count
        small = count_ball(discretize(Rt, n), h, c / 3 * eps * eps, threads=threads).count
        passed = big >= small
        ok &= passed
        rep.instances.append({"check": "domain shrink", "eps": str(eps), "c": str(c), "inner": [str(a), str(b)],
                              "outer_count": str(big), "inner_count": str(small),
                              "gap": 0.0 if passed else 1.0, "passed": passed})

    from .enumeration import ClosedForm1D

    model = ClosedForm1D()
    K = simplices_inside(R, Fraction(1, 16))
    for eps_num in (1, 2, 4):
        eps = Fraction(eps_num, 16)
        base = interpolate_on_mesh(AffineProfile((Fraction(1, 4),), 0), K)
        vals = dict(base.vertex_values)
        verts = K.vertices()
        # steepen the first eps_num cells and flatten the next eps_num to keep the endpoints
        for j in range(1, len(verts)):
            bump = Fraction(1, 2) * K.scale if j <= eps_num else (-Fraction(1, 2) * K.scale if j <= 2 * eps_num else 0)
            vals[verts[j]] = vals[verts[j - 1]] + base.vertex_values[verts[j]] - base.vertex_values[verts[j - 1]] + bump
        bumped = PiecewiseAffineProfile(K, vals)
        bad = Fraction(2 * eps_num, 16)
        delta_ent = abs(macro_entropy(bumped, model) - macro_entropy(base, model))
        bound = float(bad) * math.log(2)
        passed = delta_ent <= bound
        ok &= passed
        rep.instances.append({"check": "macro robustness", "bad_fraction": str(bad), "delta_ent": delta_ent,
                              "bound": bound, "gap": delta_ent, "passed": passed})

    rep.verdict = bool(ok)
    rep.runtime_seconds = time.perf_counter() - t0
    return rep


def check_near_one_bound(deltas=(0.05, 0.1, 0.2, 0.3), n_list=(8, 16, 32, 64)) -> VerificationReport:
    """1D entropy at slope ``1 - delta`` against the binomial bound
    ``H(delta) + ln(n+1)/n`` with ``H`` the natural-log binary entropy."""
    rep = VerificationReport("entropy near slope one")
    ok = True
    for d in deltas:
        s = as_fraction(1) - as_fraction(d)
        H = -(d * math.log(d) + (1 - d) * math.log(1 - d))
        for n in n_list:
            e = ent_local_count(1, (s,), n).entropy
            bound = H + math.log(n + 1) / n
            passed = abs(e) <= bound
            ok &= passed
            rep.instances.append({"delta": d, "n": n, "ent": e, "bound": bound, "gap": abs(e) - bound,
                                  "passed": passed})
    rep.verdict = ok
    return rep


def check_kirszbraun_entropy_inequality(cases: Sequence[tuple]) -> VerificationReport:
    """``|M(Q_nhat, h)| >= |M(Q_n, h)|`` for 1D cubes under the lemma's hypotheses.

    Each case is ``(n, delta, s, s_hat)``; ``nhat = ceil((1 + delta) n)``.
    Boundary data are the rounded planes of slopes ``s`` and ``s_hat``.
    """
    rep = VerificationReport("entropy estimate from the Kirszbraun theorem")
    ok = True
    for n, delta, s, s_hat in cases:
        delta, s, s_hat = as_fraction(delta), as_fraction(s), as_fraction(s_hat)
        eps = delta * delta / (2 + delta)
        nhat = math.ceil((1 + delta) * n)
        hyp = (abs(s) <= 1 - 3 * delta and abs(s - s_hat) <= delta * delta / (1 + delta)
               and 1 <= eps * n and 0 < delta < Fraction(1, 3))
        small = ent_local_count(1, (s,), n).count
        large = ent_local_count(1, (s_hat,), nhat).count
        passed = (not hyp) or large >= small
        ok &= passed
        rep.instances.append({"n": n, "nhat": nhat, "delta": str(delta), "s": str(s), "s_hat": str(s_hat),
                              "hypotheses": hyp, "count_n": str(small), "count_nhat": str(large),
                              "gap": float(math.log(small) / n - math.log(large) / nhat), "passed": passed})
    rep.verdict = ok
    return rep


def entropy_bound_ok(c: CountResult, kind: str = "exact", delta=None, n: int | None = None) -> bool:
    """Lower bounds on microscopic entropy: ``-ln 2`` for exact boundaries and
    ``-ln 2 - ln ceil(2 delta n)/|R_n|`` for delta-boundaries and balls."""
    e = c.entropy
    if e is None:
        return True
    if kind == "exact":
        return e >= -math.log(2)
    slack = math.log(math.ceil(2 * as_fraction(delta) * n)) / c.site_count
    return e >= -math.log(2) - slack
