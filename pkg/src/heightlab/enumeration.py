"""Exact counting of height functions under per-site constraints.

The counting engine is a frontier (transfer-matrix) dynamic program: sites
are swept in lexicographic order and the state is the vector of values on
the sites that still have an unprocessed neighbour.  Counts are Python
integers, so results are exact at any size.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import EmptySet, InstanceTooLarge, UnboundedInstance, UnsatisfiableParity
from .height import AffineSpec, Profile, affine_height
from .lattice import DiscreteDomain, as_fraction, lattice_neighbors, parity

DEFAULT_BUDGET = 2_000_000
LN2 = math.log(2.0)
_PARALLEL_MIN_STATES = 2048


# ---------------------------------------------------------------------------
# constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    """Rational interval with independently open or closed ends (None = unbounded)."""

    lo: Fraction | None = None
    hi: Fraction | None = None
    lo_open: bool = False
    hi_open: bool = False

    @classmethod
    def point(cls, v) -> "Interval":
        v = as_fraction(v)
        return cls(v, v)

    @classmethod
    def around(cls, center, radius, strict: bool = True) -> "Interval":
        c, r = as_fraction(center), as_fraction(radius)
        return cls(c - r, c + r, strict, strict)

    def intersect(self, other: "Interval") -> "Interval":
        lo, lo_open = self.lo, self.lo_open
        if other.lo is not None and (lo is None or other.lo > lo or (other.lo == lo and other.lo_open)):
            lo, lo_open = other.lo, other.lo_open
        hi, hi_open = self.hi, self.hi_open
        if other.hi is not None and (hi is None or other.hi < hi or (other.hi == hi and other.hi_open)):
            hi, hi_open = other.hi, other.hi_open
        return Interval(lo, hi, lo_open, hi_open)

    def shift(self, c) -> "Interval":
        c = as_fraction(c)
        return Interval(None if self.lo is None else self.lo + c, None if self.hi is None else self.hi + c,
                        self.lo_open, self.hi_open)

    def integer_bounds(self, par: int) -> tuple:
        """Smallest and largest integers of parity ``par`` inside the interval."""
        lo = hi = None
        if self.lo is not None:
            k = math.floor(self.lo) + 1 if self.lo_open else math.ceil(self.lo)
            lo = k if k % 2 == par else k + 1
        if self.hi is not None:
            k = math.ceil(self.hi) - 1 if self.hi_open else math.floor(self.hi)
            hi = k if k % 2 == par else k - 1
        return lo, hi

    def contains(self, y) -> bool:
        y = as_fraction(y)
        if self.lo is not None and (y < self.lo or (self.lo_open and y == self.lo)):
            return False
        if self.hi is not None and (y > self.hi or (self.hi_open and y == self.hi)):
            return False
        return True


class SiteConstraint:
    """Per-site windows on height values; sites without a window are free."""

    def __init__(self, windows: Mapping | None = None):
        self.windows = dict(windows or {})

    @classmethod
    def pinned(cls, values: Mapping) -> "SiteConstraint":
        for z, v in values.items():
            v = as_fraction(v)
            if v.denominator != 1 or (v.numerator - parity(z)) % 2:
                raise UnsatisfiableParity(f"pinned value {v} at {z} has the wrong parity")
        return cls({z: Interval.point(v) for z, v in values.items()})

    @classmethod
    def around(cls, centers: Mapping, radius, strict: bool = True) -> "SiteConstraint":
        return cls({z: Interval.around(c, radius, strict) for z, c in centers.items()})

    def intersect(self, other: "SiteConstraint") -> "SiteConstraint":
        out = dict(self.windows)
        for z, w in other.windows.items():
            out[z] = out[z].intersect(w) if z in out else w
        return SiteConstraint(out)

    def shift(self, c) -> "SiteConstraint":
        return SiteConstraint({z: w.shift(c) for z, w in self.windows.items()})

    def pins(self) -> dict:
        return {z: int(w.lo) for z, w in self.windows.items()
                if w.lo is not None and w.lo == w.hi and not (w.lo_open or w.hi_open)}

    def allows(self, z, v) -> bool:
        return z not in self.windows or self.windows[z].contains(v)

    def satisfied_by(self, values: Mapping) -> bool:
        return all(w.contains(values[z]) for z, w in self.windows.items())


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CountResult:
    """Exact cardinality of a set of height functions and its entropy."""

    count: int
    site_count: int

    @property
    def entropy(self) -> float | None:
        if self.count == 0:
            return None
        return -math.log(self.count) / self.site_count


def entropy_of_set(c: CountResult) -> float:
    """Microscopic entropy ``-ln|A| / |R_n|``."""
    if c.count < 1:
        raise EmptySet("entropy of an empty set is undefined")
    return -math.log(c.count) / c.site_count


# ---------------------------------------------------------------------------
# frontier dynamic programming
# ---------------------------------------------------------------------------


def _propagate_windows(D: DiscreteDomain, c: SiteConstraint):
    """Integer windows per site after arc consistency on |h(z) - h(w)| <= 1.

    Returns ``(lo, hi)`` lists indexed like ``D.points``; windows already
    have the site's parity at both ends.  ``None`` marks an empty instance.
    """
    pts = D.points
    lo = [None] * len(pts)
    hi = [None] * len(pts)
    for z, w in c.windows.items():
        if z not in D:
            continue
        i = D.index(z)
        if w.lo is not None and w.lo == w.hi and not (w.lo_open or w.hi_open):
            if w.lo.denominator != 1 or (w.lo.numerator - parity(z)) % 2:
                raise UnsatisfiableParity(f"pinned value {w.lo} at {z} has the wrong parity")
        lo[i], hi[i] = w.integer_bounds(parity(z))
    nbrs = [[D.index(w) for w in lattice_neighbors(z) if w in D] for z in pts]

    def relax(bound, sign):
        queue = [i for i in range(len(pts)) if bound[i] is not None]
        while queue:
            nxt = []
            for i in queue:
                cand = bound[i] - sign
                for j in nbrs[i]:
                    b = bound[j]
                    if b is None or (sign > 0 and cand > b) or (sign < 0 and cand < b):
                        bound[j] = cand
                        nxt.append(j)
            queue = nxt

    relax(lo, +1)
    relax(hi, -1)
    if any(b is None for b in lo) or any(b is None for b in hi):
        raise UnboundedInstance("some site has no finite window; pin or bound at least one site")
    if any(a > b for a, b in zip(lo, hi)):
        return None
    return lo, hi


def _keeper(indices):
    if len(indices) == 0:
        return lambda ext: ()
    if len(indices) == 1:
        i = indices[0]
        return lambda ext: (ext[i],)
    from operator import itemgetter

    return itemgetter(*indices)


class FrontierDP:
    """Frontier transfer-matrix counter for one domain and constraint.

    ``budget`` caps the number of distinct frontier states per step;
    ``threads`` splits each step's states into chunks processed concurrently
    (results are merged by exact addition, so they do not depend on it).
    """

    def __init__(self, D: DiscreteDomain, constraint: SiteConstraint,
                 budget: int = DEFAULT_BUDGET, threads: int = 1):
        self.domain = D
        self.constraint = constraint
        self.budget = budget
        self.threads = max(1, int(threads))
        windows = _propagate_windows(D, constraint)
        self.empty = windows is None
        if self.empty:
            return
        self.lo, self.hi = windows
        N = len(D.points)
        nbr_idx = [[D.index(w) for w in lattice_neighbors(z) if w in D] for z in D.points]
        last = [max([i] + nb) for i, nb in enumerate(nbr_idx)]
        frontier: list[int] = []
        self.steps = []
        for k in range(N):
            prev_pos = [frontier.index(j) for j in nbr_idx[k] if j < k]
            ext = frontier + [k]
            keep = [p for p, j in enumerate(ext) if last[j] > k]
            self.steps.append((prev_pos, _keeper(keep)))
            frontier = [ext[p] for p in keep]
        self._layers = None

    # -- transitions ---------------------------------------------------------

    def _candidates(self, k: int, state: tuple):
        prev_pos, _ = self.steps[k]
        lo, hi = self.lo[k], self.hi[k]
        if not prev_pos:
            return range(lo, hi + 1, 2)
        u = state[prev_pos[0]]
        out = []
        for v in (u - 1, u + 1):
            if lo <= v <= hi and all(abs(state[p] - v) == 1 for p in prev_pos[1:]):
                out.append(v)
        return out

    def _advance(self, k: int, items):
        _, keep = self.steps[k]
        out: dict = {}
        get = out.get
        for state, cnt in items:
            for v in self._candidates(k, state):
                new = keep(state + (v,))
                out[new] = get(new, 0) + cnt
        return out

    def _step(self, k: int, layer: dict, pool) -> dict:
        if pool is None or len(layer) < _PARALLEL_MIN_STATES:
            out = self._advance(k, layer.items())
        else:
            items = list(layer.items())
            size = -(-len(items) // self.threads)
            chunks = [items[i:i + size] for i in range(0, len(items), size)]
            out = {}
            for part in pool.map(lambda ch: self._advance(k, ch), chunks):
                for s, cnt in part.items():
                    out[s] = out.get(s, 0) + cnt
        if len(out) > self.budget:
            raise InstanceTooLarge(f"{len(out)} frontier states at site {k} exceed budget {self.budget}")
        return out

    def _run(self, keep_layers: bool):
        layer = {(): 1}
        layers = [layer] if keep_layers else None
        pool = ThreadPoolExecutor(self.threads) if self.threads > 1 else None
        try:
            for k in range(len(self.domain.points)):
                layer = self._step(k, layer, pool)
                if keep_layers:
                    layers.append(layer)
        finally:
            if pool is not None:
                pool.shutdown()
        return layer, layers

    def count(self) -> int:
        if self.empty:
            return 0
        final, _ = self._run(keep_layers=False)
        return sum(final.values())

    # -- completions, used by the exact sampler ---------------------------------

    def completion_tables(self) -> list[dict]:
        """``G[k][state]`` = number of ways to finish from the frontier state
        reached after placing sites ``0..k-1`` (``G[0][()]`` is the total)."""
        if self._layers is None:
            _, layers = self._run(keep_layers=True)
            N = len(self.domain.points)
            G = [None] * (N + 1)
            G[N] = {s: 1 for s in layers[N]}
            for k in range(N - 1, -1, -1):
                _, keep = self.steps[k]
                nxt = G[k + 1]
                g = {}
                for state in layers[k]:
                    total = 0
                    for v in self._candidates(k, state):
                        total += nxt.get(keep(state + (v,)), 0)
                    g[state] = total
                G[k] = g
            self._layers = G
        return self._layers


def count_constrained(D: DiscreteDomain, c: SiteConstraint, budget: int = DEFAULT_BUDGET,
                      threads: int = 1) -> CountResult:
    """Exact number of height functions on D satisfying the site windows."""
    return CountResult(FrontierDP(D, c, budget, threads).count(), len(D))


def count_exact_boundary(D: DiscreteDomain, hB: Mapping, **kw) -> CountResult:
    """``|M(R_n, hB)|``: boundary values pinned to ``hB``."""
    pins = {z: hB[z] for z in D.boundary}
    return count_constrained(D, SiteConstraint.pinned(pins), **kw)


def delta_boundary_constraint(D: DiscreteDomain, hB: Mapping, delta) -> SiteConstraint:
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    return SiteConstraint.around({z: hB[z] for z in D.boundary}, delta * D.n, strict=True)


def count_delta_boundary(D: DiscreteDomain, hB: Mapping, delta, **kw) -> CountResult:
    """``|M(R_n, hB, delta)|``: ``|h(z) - hB(z)| < delta n`` on the boundary."""
    return count_constrained(D, delta_boundary_constraint(D, hB, delta), **kw)


def ball_constraint(D: DiscreteDomain, p: Profile, delta) -> SiteConstraint:
    delta = as_fraction(delta)
    if delta <= 0:
        raise ValueError("delta must be positive")
    n = D.n
    centers = {z: n * as_fraction(p.value(tuple(Fraction(zi, n) for zi in z))) for z in D.points}
    return SiteConstraint.around(centers, delta * n, strict=True)


def count_ball(D: DiscreteDomain, p: Profile, delta, **kw) -> CountResult:
    """``|B(R_n, p, delta)|``: ``|p(z/n) - h(z)/n| < delta`` at every site."""
    return count_constrained(D, ball_constraint(D, p, delta), **kw)


def cube_domain(m: int, n: int) -> DiscreteDomain:
    """``Q_n = [0, n)^m ∩ Z^m``."""
    return DiscreteDomain.cube(m, n)


def ent_local_n(m: int, s: Sequence, n: int, **kw) -> float:
    """Entropy of the cube ``Q_n`` with boundary pinned to the rounded plane of slope s."""
    return ent_local_count(m, s, n, **kw).entropy


def ent_local_count(m: int, s: Sequence, n: int, **kw) -> CountResult:
    s = tuple(as_fraction(v) for v in s)
    if len(s) != m:
        raise ValueError("slope dimension mismatch")
    AffineSpec(s)
    if n < 2:
        raise ValueError("n must be >= 2")
    Q = cube_domain(m, n)
    hB = {z: affine_height(s, 0, z) for z in Q.boundary}
    return count_exact_boundary(Q, hB, **kw)


# ---------------------------------------------------------------------------
# surface tension models
# ---------------------------------------------------------------------------


def sigma(s: float) -> float:
    """1D surface tension ``((1+s)/2) ln((1+s)/2) + ((1-s)/2) ln((1-s)/2)``."""
    s = float(s)
    if abs(s) > 1 + 1e-12:
        from .errors import SlopeOutOfRange

        raise SlopeOutOfRange(f"slope {s} outside [-1, 1]")
    out = 0.0
    for q in ((1 + s) / 2, (1 - s) / 2):
        if q > 0:
            out += q * math.log(q)
    return out


class ClosedForm1D:
    """Exact surface tension of the one-dimensional model."""

    kind = "closedForm1D"
    m = 1

    def __call__(self, s) -> float:
        s = s[0] if isinstance(s, (tuple, list)) else s
        return sigma(s)

    def gradient(self, s) -> tuple:
        s = float(s[0] if isinstance(s, (tuple, list)) else s)
        s = max(-1 + 1e-12, min(1 - 1e-12, s))
        return (0.5 * math.log((1 + s) / (1 - s)),)

    def convexified(self) -> "ClosedForm1D":
        return self


def fit_extrapolation(ns: Sequence[int], values: Sequence[float]) -> tuple:
    """Least-squares fit ``value ≈ a + b ln(n)/n + c/n``; returns ``(a, b, c)``.

    With fewer than three sizes the ``c/n`` term is dropped.
    """
    import numpy as np

    if all(v == 0.0 for v in values):
        return 0.0, 0.0, 0.0
    ns = np.asarray(ns, dtype=float)
    cols = [np.ones_like(ns), np.log(ns) / ns]
    if len(ns) >= 3:
        cols.append(1.0 / ns)
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), np.asarray(values, dtype=float), rcond=None)
    coef = [float(c) for c in coef] + [0.0] * (3 - len(coef))
    return tuple(coef)


@dataclass
class TabulatedSurfaceTension:
    """Surface tension interpolated from finite-size cube entropies.

    ``axis`` is the per-coordinate slope grid (rationals in [-1, 1]);
    ``values`` maps grid slopes to their extrapolated entropy and ``raw``
    maps ``(slope, n)`` to ``ent_n``.  Evaluation is multilinear
    interpolation clamped to ``[-ln 2, 0]``.
    """

    m: int
    axis: tuple
    n_list: tuple
    values: dict
    raw: dict = field(default_factory=dict)
    extrapolation: str = "a + b*ln(n)/n + c/n least squares"
    kind: str = "table"

    def _node(self, s) -> float:
        return self.values[s]

    def __call__(self, s) -> float:
        import bisect

        s = (s,) if not isinstance(s, (tuple, list)) else tuple(s)
        if len(s) != self.m:
            raise ValueError("slope dimension mismatch")
        axis_f = [float(a) for a in self.axis]
        brackets = []
        for si in s:
            si = float(si)
            if si < -1 - 1e-12 or si > 1 + 1e-12:
                from .errors import SlopeOutOfRange

                raise SlopeOutOfRange(f"slope {s} outside [-1, 1]^m")
            si = min(max(si, axis_f[0]), axis_f[-1])
            j = min(max(bisect.bisect_right(axis_f, si) - 1, 0), len(axis_f) - 2)
            t = (si - axis_f[j]) / (axis_f[j + 1] - axis_f[j])
            brackets.append(((j, 1 - t), (j + 1, t)))
        total = 0.0
        for corner in itertools.product(*brackets):
            w = math.prod(c[1] for c in corner)
            if w:
                total += w * self._node(tuple(self.axis[c[0]] for c in corner))
        return min(0.0, max(-LN2, total))

    def gradient(self, s, h: float = 1e-6) -> tuple:
        s = [float(v) for v in ((s,) if not isinstance(s, (tuple, list)) else s)]
        out = []
        for i in range(self.m):
            up, dn = list(s), list(s)
            up[i] = min(1.0, s[i] + h)
            dn[i] = max(-1.0, s[i] - h)
            out.append((self(tuple(up)) - self(tuple(dn))) / (up[i] - dn[i]))
        return tuple(out)

    def convexified(self) -> "TabulatedSurfaceTension":
        """Copy whose node values are the lower convex envelope of the nodes."""
        import numpy as np
        from scipy.optimize import linprog

        nodes = sorted(self.values)
        X = np.array([[float(c) for c in s] for s in nodes])
        v = np.array([self.values[s] for s in nodes])
        env = {}
        for s, x in zip(nodes, X):
            A_eq = np.vstack([X.T, np.ones(len(nodes))])
            b_eq = np.concatenate([x, [1.0]])
            res = linprog(v, A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * len(nodes), method="highs")
            env[s] = min(float(res.fun), self.values[s]) if res.status == 0 else self.values[s]
        return TabulatedSurfaceTension(self.m, self.axis, self.n_list, env, dict(self.raw),
                                       self.extrapolation + "; lower convex envelope", self.kind)


def slope_axis(points: int) -> tuple:
    """``points`` equally spaced rationals from -1 to 1."""
    if points < 2:
        raise ValueError("grid needs at least two points per axis")
    return tuple(Fraction(-1) + Fraction(2 * i, points - 1) for i in range(points))


def build_surface_tension_table(m: int, axis, n_list: Sequence[int], budget: int = DEFAULT_BUDGET,
                                threads: int = 1) -> TabulatedSurfaceTension:
    """Tabulate ``ent_n(s)`` on the grid ``axis^m`` for each n and extrapolate."""
    axis = slope_axis(axis) if isinstance(axis, int) else tuple(sorted(as_fraction(a) for a in axis))
    n_list = tuple(int(n) for n in n_list)
    slopes = list(itertools.product(axis, repeat=m))
    jobs = [(s, n) for s in slopes for n in n_list]

    def run(job):
        s, n = job
        return ent_local_n(m, s, n, budget=budget)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            ents = list(pool.map(run, jobs))
    else:
        ents = [run(j) for j in jobs]
    raw = dict(zip(jobs, ents))
    values = {}
    for s in slopes:
        a = fit_extrapolation(n_list, [raw[(s, n)] for n in n_list])
        values[s] = a[0]
    return TabulatedSurfaceTension(m, axis, n_list, values, raw)
