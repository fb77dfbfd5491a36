"""Continuum domains, their lattice discretizations and lattice geometry.

All coordinates of continuum domains are rationals (``fractions.Fraction``),
so membership of a scaled lattice point ``z / n`` is decided exactly.
Lattice points are plain tuples of ints.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DisconnectedDiscretization,
    EmptyDiscretization,
    PointOutsideDomain,
)

Point = tuple  # tuple[int, ...]


def as_fraction(x) -> Fraction:
    """Convert ints, Fractions, "p/q" strings or floats (exactly) to Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def fraction_str(x: Fraction) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parity(z: Sequence[int]) -> int:
    return sum(z) % 2


def l1(a: Sequence, b: Sequence):
    return sum(abs(x - y) for x, y in zip(a, b))


def unit_vector(m: int, i: int, sign: int = 1) -> Point:
    return tuple(sign if j == i else 0 for j in range(m))


def lattice_neighbors(z: Point) -> list[Point]:
    """All 2m neighbors of z in Z^m, ordered -e1, +e1, -e2, +e2, ..."""
    out = []
    for i in range(len(z)):
        for sign in (-1, 1):
            w = list(z)
            w[i] += sign
            out.append(tuple(w))
    return out


@dataclass(frozen=True)
class Halfspace:
    """The closed half-space ``a . x <= b``."""

    a: tuple
    b: Fraction

    def contains(self, x: Sequence) -> bool:
        return sum(ai * xi for ai, xi in zip(self.a, x)) <= self.b

    def on_boundary(self, x: Sequence) -> bool:
        return sum(ai * xi for ai, xi in zip(self.a, x)) == self.b


@dataclass(frozen=True)
class ContinuumDomain:
    """A compact, connected, regular-closed region of R^m.

    Use the constructors :meth:`box`, :meth:`polytope` and
    :meth:`simplex_union` rather than instantiating directly.
    """

    dim: int
    kind: str
    lo: tuple = ()
    hi: tuple = ()
    halfspaces: tuple = ()
    simplices: tuple = ()

    @classmethod
    def box(cls, lo: Sequence, hi: Sequence) -> "ContinuumDomain":
        lo = tuple(as_fraction(v) for v in lo)
        hi = tuple(as_fraction(v) for v in hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box needs matching non-empty lo/hi")
        if any(l >= h for l, h in zip(lo, hi)):
            raise ValueError("box must have non-empty interior")
        return cls(dim=len(lo), kind="box", lo=lo, hi=hi)

    @classmethod
    def polytope(cls, halfspaces: Iterable) -> "ContinuumDomain":
        hs = []
        for h in halfspaces:
            if isinstance(h, Halfspace):
                hs.append(h)
            elif isinstance(h, dict):
                hs.append(Halfspace(tuple(as_fraction(v) for v in h["a"]), as_fraction(h["b"])))
            else:
                a, b = h
                hs.append(Halfspace(tuple(as_fraction(v) for v in a), as_fraction(b)))
        if not hs:
            raise ValueError("polytope needs at least one half-space")
        dim = len(hs[0].a)
        dom = cls(dim=dim, kind="polytope", halfspaces=tuple(hs))
        dom.bounding_box()  # rejects unbounded or empty systems
        return dom

    @classmethod
    def simplex_union(cls, simplices: Iterable) -> "ContinuumDomain":
        simplices = tuple(simplices)
        if not simplices:
            raise ValueError("simplex union must be non-empty")
        return cls(dim=len(simplices[0].v), kind="simplexUnion", simplices=simplices)

    @classmethod
    def standard_simplex(cls, m: int) -> "ContinuumDomain":
        """The unit simplex {x >= 0, sum x <= 1}."""
        hs = [(unit_vector(m, i, -1), 0) for i in range(m)]
        hs.append(((1,) * m, 1))
        return cls.polytope(hs)

    def contains(self, x: Sequence) -> bool:
        if self.kind == "box":
            return all(l <= xi <= h for l, xi, h in zip(self.lo, x, self.hi))
        if self.kind == "polytope":
            return all(h.contains(x) for h in self.halfspaces)
        return any(s.contains(x) for s in self.simplices)

    def bounding_box(self) -> tuple[tuple, tuple]:
        """Rational axis-aligned box containing the domain (tight for boxes)."""
        if self.kind == "box":
            return self.lo, self.hi
        if self.kind == "simplexUnion":
            verts = [v for s in self.simplices for v in s.vertices()]
            lo = tuple(min(v[i] for v in verts) for i in range(self.dim))
            hi = tuple(max(v[i] for v in verts) for i in range(self.dim))
            return lo, hi
        from scipy.optimize import linprog

        A = np.array([[float(a) for a in h.a] for h in self.halfspaces])
        b = np.array([float(h.b) for h in self.halfspaces])
        lo, hi = [], []
        for i in range(self.dim):
            c = np.zeros(self.dim)
            c[i] = 1.0
            bounds = [(None, None)] * self.dim
            r_lo = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            r_hi = linprog(-c, A_ub=A, b_ub=b, bounds=bounds, method="highs")
            if r_lo.status != 0 or r_hi.status != 0:
                raise ValueError("polytope is empty or unbounded")
            # widened to the enclosing integers; membership is still exact
            lo.append(Fraction(math.floor(r_lo.fun - 1e-9)))
            hi.append(Fraction(math.ceil(-r_hi.fun + 1e-9)))
        return tuple(lo), tuple(hi)

    def volume(self) -> float:
        if self.kind == "box":
            return float(math.prod(h - l for l, h in zip(self.lo, self.hi)))
        if self.kind == "simplexUnion":
            return float(sum(s.volume() for s in self.simplices))
        verts = self._polytope_vertices()
        if self.dim == 1:
            return float(verts.max() - verts.min())
        from scipy.spatial import ConvexHull

        return float(ConvexHull(verts).volume)

    def _polytope_vertices(self) -> np.ndarray:
        from scipy.optimize import linprog
        from scipy.spatial import HalfspaceIntersection

        A = np.array([[float(a) for a in h.a] for h in self.halfspaces])
        b = np.array([float(h.b) for h in self.halfspaces])
        if self.dim == 1:
            left = max(float(h.b / h.a[0]) for h in self.halfspaces if h.a[0] < 0)
            right = min(float(h.b / h.a[0]) for h in self.halfspaces if h.a[0] > 0)
            return np.array([[left], [right]])
        norms = np.linalg.norm(A, axis=1)
        c = np.zeros(self.dim + 1)
        c[-1] = -1.0
        res = linprog(c, A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                      bounds=[(None, None)] * self.dim + [(0, None)], method="highs")
        interior = res.x[:-1]
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), interior)
        return hs.intersections

    def sample_grid(self, pitch: Fraction) -> list[tuple]:
        """All points of the grid ``pitch * Z^m`` lying in the domain."""
        lo, hi = self.bounding_box()
        ranges = [range(math.floor(l / pitch), math.ceil(h / pitch) + 1) for l, h in zip(lo, hi)]
        out = []
        for k in itertools.product(*ranges):
            x = tuple(pitch * ki for ki in k)
            if self.contains(x):
                out.append(x)
        return out

    def boundary_sample(self, pitch: Fraction) -> list[tuple]:
        """Grid points of pitch ``pitch`` lying on the topological boundary.

        Exact for boxes and for polytopes whose facets pass through the
        grid; for simplex unions a grid point counts as boundary when one of
        its grid neighbours leaves the domain.
        """
        pts = self.sample_grid(pitch)
        if self.kind == "box":
            return [x for x in pts if any(xi == l or xi == h for xi, l, h in zip(x, self.lo, self.hi))]
        if self.kind == "polytope":
            return [x for x in pts if any(h.on_boundary(x) for h in self.halfspaces)]
        out = []
        for x in pts:
            for i in range(self.dim):
                for sgn in (-1, 1):
                    y = list(x)
                    y[i] += sgn * pitch
                    if not self.contains(y):
                        out.append(x)
                        break
                else:
                    continue
                break
        return out

    def to_json(self) -> dict:
        if self.kind == "box":
            shape = {"type": "box", "lo": [fraction_str(v) for v in self.lo],
                     "hi": [fraction_str(v) for v in self.hi]}
        elif self.kind == "polytope":
            shape = {"type": "polytope", "halfspaces": [
                {"a": [fraction_str(v) for v in h.a], "b": fraction_str(h.b)} for h in self.halfspaces]}
        else:
            shape = {"type": "simplexUnion", "simplices": [s.to_json() for s in self.simplices]}
        return {"dim": self.dim, "shape": shape}

    @classmethod
    def from_json(cls, obj: dict) -> "ContinuumDomain":
        shape = obj["shape"] if "shape" in obj else obj
        kind = shape["type"]
        if kind == "box":
            dom = cls.box(shape["lo"], shape["hi"])
        elif kind == "polytope":
            dom = cls.polytope(shape["halfspaces"])
        elif kind == "simplexUnion":
            from .simplicial import SimplexId

            dom = cls.simplex_union(SimplexId.from_json(s, shape.get("scale")) for s in shape["simplices"])
        else:
            raise ValueError(f"unknown domain shape {kind!r}")
        if "dim" in obj and obj["dim"] != dom.dim:
            raise ValueError("dim does not match shape")
        return dom


@dataclass(frozen=True)
class DiscreteDomain:
    """Finite connected set of lattice points with its inner boundary."""

    n: int
    points: tuple
    boundary: frozenset
    dim: int
    _index: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_index", {z: i for i, z in enumerate(self.points)})

    @classmethod
    def from_points(cls, points: Iterable, n: int = 1, check_connected: bool = True) -> "DiscreteDomain":
        pts = tuple(sorted(set(tuple(int(c) for c in z) for z in points)))
        if not pts:
            raise EmptyDiscretization("no lattice points")
        dim = len(pts[0])
        pset = set(pts)
        boundary = frozenset(z for z in pts if any(w not in pset for w in lattice_neighbors(z)))
        dom = cls(n=n, points=pts, boundary=boundary, dim=dim)
        if check_connected and not dom.is_connected():
            raise DisconnectedDiscretization("lattice points do not form a connected subgraph")
        return dom

    @classmethod
    def cube(cls, m: int, n: int, lo: int = 0) -> "DiscreteDomain":
        """The discrete hypercube ``{lo, ..., lo+n-1}^m`` at scale n."""
        return cls.from_points(itertools.product(range(lo, lo + n), repeat=m), n=n)

    def __len__(self) -> int:
        return len(self.points)

    def __contains__(self, z) -> bool:
        return z in self._index

    def index(self, z) -> int:
        return self._index[z]

    @property
    def interior(self) -> tuple:
        return tuple(z for z in self.points if z not in self.boundary)

    def neighbors(self, z) -> list:
        return graph_neighbors(z, self)

    def is_connected(self) -> bool:
        start = self.points[0]
        seen = {start}
        queue = deque([start])
        while queue:
            z = queue.popleft()
            for w in lattice_neighbors(z):
                if w in self._index and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.points)

    def edges(self) -> list[tuple]:
        out = []
        for z in self.points:
            for i in range(self.dim):
                w = list(z)
                w[i] += 1
                w = tuple(w)
                if w in self._index:
                    out.append((z, w))
        return out

    def graph_distances(self, source) -> dict:
        """Graph distance within the domain from ``source`` to every point."""
        dist = {source: 0}
        queue = deque([source])
        while queue:
            z = queue.popleft()
            for w in lattice_neighbors(z):
                if w in self._index and w not in dist:
                    dist[w] = dist[z] + 1
                    queue.append(w)
        return dist

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"z{i + 1}" for i in range(self.dim)] + ["is_boundary"])
        for z in self.points:
            writer.writerow(list(z) + [int(z in self.boundary)])
        return buf.getvalue()


def discretize(R: ContinuumDomain, n: int) -> DiscreteDomain:
    """Lattice points ``{z : z/n in R}`` with their inner boundary."""
    if n < 1:
        raise ValueError("scale n must be >= 1")
    lo, hi = R.bounding_box()
    ranges = [range(math.ceil(l * n), math.floor(h * n) + 1) for l, h in zip(lo, hi)]
    pts = [z for z in itertools.product(*ranges)
           if R.contains(tuple(Fraction(zi, n) for zi in z))]
    if not pts:
        raise EmptyDiscretization(f"no lattice points of scale {n} inside the domain")
    return DiscreteDomain.from_points(pts, n=n)


def graph_neighbors(z, D: DiscreteDomain) -> list:
    """In-domain lattice neighbours of z in the order -e1, +e1, -e2, ..."""
    if z not in D:
        raise PointOutsideDomain(f"{z} is not in the domain")
    return [w for w in lattice_neighbors(z) if w in D]


def hausdorff_gap(R: ContinuumDomain, D: DiscreteDomain, pitch: Fraction | None = None) -> Fraction:
    """ℓ1 Hausdorff distance between ``D/n`` and R, evaluated on a sample grid.

    ``D/n`` lies inside R by construction, so only the distance from R to
    ``D/n`` contributes.  R is sampled on the grid of the given pitch
    (default ``1/(2n)``); nested grids give values that only grow as the
    pitch shrinks.
    """
    n = D.n
    pitch = Fraction(1, 2 * n) if pitch is None else as_fraction(pitch)
    if pitch > Fraction(1, 2 * n):
        raise ValueError("sampling pitch must be at most 1/(2n)")
    samples = R.sample_grid(pitch)
    lat = np.array(D.points, dtype=np.int64)
    best = Fraction(0)
    # distances are compared as integers after scaling by n * denominator
    den = pitch.denominator * n // math.gcd(pitch.denominator, n)
    lat_scaled = lat * (den // n)
    for x in samples:
        xs = np.array([int(xi * den) for xi in x], dtype=np.int64)
        d = int(np.abs(lat_scaled - xs).sum(axis=1).min())
        cand = Fraction(d, den)
        if cand > best:
            best = cand
    return best


def domain_from_json(obj: dict) -> ContinuumDomain:
    return ContinuumDomain.from_json(obj)
