"""Kuhn simplices, simplex domains and piecewise-affine profiles.

The scale-``ℓ`` Kuhn simplex ``ℓC(v, perm)`` is the closure of the points
``x`` with ``floor(x/ℓ) = v`` whose fractional parts are ranked by ``perm``
(largest first).  Its vertices form a monotone lattice path from ``ℓv``
stepping ``ℓ e_perm(1)``, ``ℓ e_perm(2)``, ...
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import Disconnected, MeshOutsideDomain, NoSimplexFits, SlopeOutOfRange
from .height import Profile
from .lattice import ContinuumDomain, as_fraction, fraction_str

PERM_SLACK = 1e-12


@dataclass(frozen=True)
class SimplexId:
    """Kuhn simplex ``scale * C(v, perm)``; ``perm`` is 1-based."""

    v: tuple
    perm: tuple
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "v", tuple(int(c) for c in self.v))
        object.__setattr__(self, "perm", tuple(int(c) for c in self.perm))
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if sorted(self.perm) != list(range(1, len(self.v) + 1)):
            raise ValueError(f"{self.perm} is not a permutation of 1..{len(self.v)}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    @property
    def dim(self) -> int:
        return len(self.v)

    def vertices(self) -> list[tuple]:
        return simplex_vertices(self)

    def volume(self) -> Fraction:
        return self.scale ** self.dim / math.factorial(self.dim)

    def barycenter(self) -> tuple:
        verts = self.vertices()
        return tuple(sum(c) / len(verts) for c in zip(*verts))

    def contains(self, x: Sequence) -> bool:
        f = [as_fraction(xi) / self.scale - vi for xi, vi in zip(x, self.v)]
        if any(fi < 0 or fi > 1 for fi in f):
            return False
        ranked = [f[p - 1] for p in self.perm]
        return all(a >= b for a, b in zip(ranked, ranked[1:]))

    def to_json(self) -> dict:
        return {"v": list(self.v), "perm": list(self.perm)}

    @classmethod
    def from_json(cls, obj: dict, scale=None) -> "SimplexId":
        return cls(tuple(obj["v"]), tuple(obj["perm"]), as_fraction(obj.get("scale", scale or 1)))


def simplex_containing(w: Sequence, scale=1) -> SimplexId:
    """Kuhn simplex of the given scale containing w.

    Ties among fractional parts are ranked by smaller coordinate index first,
    so points on shared faces are assigned deterministically.
    """
    scale = as_fraction(scale)
    u = [as_fraction(wi) / scale for wi in w]
    v = tuple(math.floor(ui) for ui in u)
    frac = [ui - vi for ui, vi in zip(u, v)]
    order = sorted(range(len(u)), key=lambda i: (-frac[i], i))
    return SimplexId(v, tuple(i + 1 for i in order), scale)


def simplex_vertices(sid: SimplexId) -> list[tuple]:
    x = [sid.scale * vi for vi in sid.v]
    out = [tuple(x)]
    for p in sid.perm:
        x[p - 1] += sid.scale
        out.append(tuple(x))
    return out


@dataclass(frozen=True)
class SimplexDomain:
    """Connected finite union of Kuhn simplices of one scale."""

    scale: Fraction
    simplices: tuple
    _set: frozenset = field(default=None, compare=False, repr=False)
    _by_base: dict = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        sims = tuple(sorted(set(self.simplices), key=lambda s: (s.v, s.perm)))
        if not sims:
            raise NoSimplexFits("empty simplex domain")
        if any(s.scale != self.scale for s in sims):
            raise ValueError("all simplices must share the domain scale")
        object.__setattr__(self, "simplices", sims)
        object.__setattr__(self, "_set", frozenset(sims))
        by_base = defaultdict(list)
        for s in sims:
            by_base[s.v].append(s)
        object.__setattr__(self, "_by_base", dict(by_base))
        if not self._connected():
            raise Disconnected("simplices do not form a connected union")

    def _connected(self) -> bool:
        owners = defaultdict(list)
        for i, s in enumerate(self.simplices):
            for x in s.vertices():
                owners[x].append(i)
        seen, stack = {0}, [0]
        while stack:
            i = stack.pop()
            for x in self.simplices[i].vertices():
                for j in owners[x]:
                    if j not in seen:
                        seen.add(j)
                        stack.append(j)
        return len(seen) == len(self.simplices)

    @property
    def dim(self) -> int:
        return self.simplices[0].dim

    def __len__(self) -> int:
        return len(self.simplices)

    def __contains__(self, sid) -> bool:
        return sid in self._set

    def volume(self) -> Fraction:
        return len(self.simplices) * self.simplices[0].volume()

    def vertices(self) -> list[tuple]:
        return sorted({x for s in self.simplices for x in s.vertices()})

    def locate(self, x: Sequence) -> SimplexId | None:
        """A simplex of the domain containing x, or None."""
        sid = simplex_containing(x, self.scale)
        if sid in self._set:
            return sid
        for shift in itertools.product((0, -1), repeat=self.dim):
            base = tuple(v + d for v, d in zip(sid.v, shift))
            for s in self._by_base.get(base, ()):
                if s.contains(x):
                    return s
        return None

    def contains(self, x: Sequence) -> bool:
        return self.locate(x) is not None

    def as_continuum(self) -> ContinuumDomain:
        return ContinuumDomain.simplex_union(self.simplices)

    def to_json(self) -> dict:
        return {"scale": fraction_str(self.scale), "simplices": [s.to_json() for s in self.simplices]}

    @classmethod
    def from_json(cls, obj: dict) -> "SimplexDomain":
        scale = as_fraction(obj["scale"])
        return cls(scale, tuple(SimplexId.from_json(s, scale) for s in obj["simplices"]))


def simplex_gradient(sid: SimplexId, values: Mapping) -> tuple:
    """Gradient of the affine interpolant of vertex values on one simplex."""
    verts = sid.vertices()
    grad = [None] * sid.dim
    for i, p in enumerate(sid.perm, start=1):
        grad[p - 1] = (values[verts[i]] - values[verts[i - 1]]) / sid.scale
    return tuple(grad)


class PiecewiseAffineProfile(Profile):
    """Vertex values on a simplex domain, affine on every simplex.

    Values may be Fractions (exact) or floats; the per-simplex gradient bound
    ``|grad|_inf <= 1`` is checked on construction (with slack ``tol`` for
    floats) unless ``check=False``.
    """

    def __init__(self, domain: SimplexDomain, vertex_values: Mapping, check: bool = True, tol: float = 1e-9):
        self.domain = domain
        self.vertex_values = dict(vertex_values)
        missing = [x for x in domain.vertices() if x not in self.vertex_values]
        if missing:
            raise ValueError(f"no value at mesh vertex {missing[0]}")
        self._grads = {s: simplex_gradient(s, self.vertex_values) for s in domain.simplices}
        if check:
            lip = self.lipschitz_constant()
            slack = 0 if isinstance(lip, Fraction) else tol
            if lip > 1 + slack:
                raise ValueError(f"piecewise-affine profile has slope {lip} > 1")

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def lipschitz(self):
        return self.lipschitz_constant()

    def lipschitz_constant(self):
        return max(max(abs(g) for g in grad) for grad in self._grads.values())

    def simplex_gradients(self) -> dict:
        return dict(self._grads)

    def _locate(self, x) -> SimplexId:
        sid = self.domain.locate(x)
        if sid is None:
            raise MeshOutsideDomain(f"{tuple(x)} is outside the simplex domain")
        return sid

    def value(self, x):
        sid = self._locate(x)
        x0 = sid.vertices()[0]
        grad = self._grads[sid]
        base = self.vertex_values[x0]
        if isinstance(base, Fraction) and all(isinstance(g, Fraction) for g in grad):
            return base + sum((g * (as_fraction(xi) - ci) for g, xi, ci in zip(grad, x, x0)), Fraction(0))
        return float(base) + sum(float(g) * (float(xi) - float(ci)) for g, xi, ci in zip(grad, x, x0))

    def gradient(self, x) -> tuple:
        return self._grads[self._locate(x)]

    def shifted(self, c) -> "PiecewiseAffineProfile":
        return PiecewiseAffineProfile(self.domain, {x: v + c for x, v in self.vertex_values.items()}, check=False)

    def to_json(self) -> dict:
        def enc(v):
            return fraction_str(v) if isinstance(v, (Fraction, int)) else repr(float(v))

        return {
            "type": "piecewiseAffine",
            "domain": self.domain.to_json(),
            "vertices": [{"x": [fraction_str(c) for c in x], "h": enc(v)}
                         for x, v in sorted(self.vertex_values.items())],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "PiecewiseAffineProfile":
        dom = SimplexDomain.from_json(obj["domain"])

        def dec(v):
            return float(v) if ("e" in v or "." in v) else as_fraction(v)

        vals = {tuple(as_fraction(c) for c in e["x"]): dec(str(e["h"])) for e in obj["vertices"]}
        return cls(dom, vals)


# ---------------------------------------------------------------------------
# meshing and approximation
# ---------------------------------------------------------------------------


def simplices_inside(R: ContinuumDomain, scale) -> SimplexDomain:
    """All scale-``scale`` Kuhn simplices contained in R.

    A simplex is kept when its vertices and barycenter lie in R.  This is
    exact for convex R, and for unions of Kuhn simplices whose scale is an
    integer multiple of ``scale`` (the finer triangulation refines the
    coarser one).
    """
    scale = as_fraction(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    lo, hi = R.bounding_box()
    ranges = [range(math.floor(l / scale), math.ceil(h / scale)) for l, h in zip(lo, hi)]
    perms = list(itertools.permutations(range(1, R.dim + 1)))
    found = []
    for v in itertools.product(*ranges):
        for perm in perms:
            sid = SimplexId(v, perm, scale)
            if all(R.contains(x) for x in sid.vertices()) and R.contains(sid.barycenter()):
                found.append(sid)
    if not found:
        raise NoSimplexFits(f"no simplex of scale {scale} fits inside the domain")
    return SimplexDomain(scale, tuple(found))


def interpolate_on_mesh(p: Profile, K: SimplexDomain, check: bool = True) -> PiecewiseAffineProfile:
    """Piecewise-affine interpolant of p at the vertices of K."""
    values = {}
    for x in K.vertices():
        try:
            values[x] = p.value(x)
        except MeshOutsideDomain as exc:
            raise MeshOutsideDomain(f"mesh vertex {x} is outside the profile's domain") from exc
    return PiecewiseAffineProfile(K, values, check=check)


def simplex_sample_points(sid: SimplexId, subdiv: int) -> np.ndarray:
    """Grid points of pitch ``scale/subdiv`` in the closed simplex (floats)."""
    m = sid.dim
    base = np.array([float(sid.scale * v) for v in sid.v])
    step = float(sid.scale) / subdiv
    pts = []
    # monotone sequences subdiv >= k_perm(1) >= ... >= k_perm(m) >= 0
    for ks in itertools.combinations_with_replacement(range(subdiv, -1, -1), m):
        off = np.zeros(m)
        for rank, p in enumerate(sid.perm):
            off[p - 1] = ks[rank] * step
        pts.append(base + off)
    return np.array(pts)


def _profile_float(p: Profile, x: np.ndarray) -> float:
    return float(p.value(tuple(Fraction(float(v)) for v in x)))


@dataclass
class ApproxReport:
    """Measured conclusions of the simplicial approximation at one scale."""

    scale: Fraction
    epsilon: float
    missing_volume: float
    hausdorff: float
    max_value_error: float
    bad_gradient_fraction: float
    volume_ok: bool
    value_ok: bool
    gradient_ok: bool

    @property
    def passed(self) -> bool:
        return self.volume_ok and self.value_ok and self.gradient_ok

    def to_dict(self) -> dict:
        return {
            "scale": fraction_str(self.scale), "epsilon": self.epsilon,
            "missing_volume": self.missing_volume, "hausdorff": self.hausdorff,
            "max_value_error": self.max_value_error,
            "bad_gradient_fraction": self.bad_gradient_fraction,
            "a": self.volume_ok, "b": self.value_ok, "c": self.gradient_ok, "passed": self.passed,
        }


def _sampled_hausdorff(R: ContinuumDomain, K: SimplexDomain, pitch: Fraction) -> float:
    inside = [x for x in R.sample_grid(pitch)]
    in_k = np.array([[float(c) for c in x] for x in inside if K.contains(x)]
                    + [[float(c) for c in x] for x in K.vertices()])
    worst = 0.0
    for x in inside:
        if K.contains(x):
            continue
        d = np.abs(in_k - np.array([float(c) for c in x])).sum(axis=1).min()
        worst = max(worst, float(d))
    return worst


def rademacher_approx(p: Profile, R: ContinuumDomain, epsilon: float, scale):
    """Simplicial approximation of ``p`` on ``R`` at one mesh scale.

    Returns ``(K, h_K, report)``.  The report measures the three conclusions:
    (a) ``|R \\ K| < eps`` and Hausdorff distance ``< eps``; (b) sup-distance
    between ``h_K`` and ``p`` below ``eps * scale / 2``, sampled at all
    vertices and on a pitch ``scale/8`` grid inside each simplex; (c) the
    volume fraction of simplices where ``|grad h_K - grad p|_2 >= eps`` (with
    ``grad p`` taken at the barycenter) below ``eps``.
    """
    scale = as_fraction(scale)
    K = simplices_inside(R, scale)
    hK = interpolate_on_mesh(p, K, check=False)

    missing = max(R.volume() - float(K.volume()), 0.0)
    haus = _sampled_hausdorff(R, K, scale / 4)

    max_err = 0.0
    for x in K.vertices():
        max_err = max(max_err, abs(float(hK.vertex_values[x]) - float(p.value(x))))
    grads = hK.simplex_gradients()
    bad = 0
    for sid in K.simplices:
        g = np.array([float(c) for c in grads[sid]])
        x0 = np.array([float(c) for c in sid.vertices()[0]])
        h0 = float(hK.vertex_values[sid.vertices()[0]])
        for x in simplex_sample_points(sid, 8):
            approx = h0 + float(g @ (x - x0))
            max_err = max(max_err, abs(approx - _profile_float(p, x)))
        gp = np.array([float(c) for c in p.gradient(sid.barycenter())])
        if np.linalg.norm(g - gp) >= epsilon:
            bad += 1
    frac = bad / len(K)

    report = ApproxReport(
        scale=scale, epsilon=epsilon, missing_volume=missing, hausdorff=haus,
        max_value_error=max_err, bad_gradient_fraction=frac,
        volume_ok=missing < epsilon and haus < epsilon,
        value_ok=max_err < epsilon * float(scale) / 2,
        gradient_ok=frac < epsilon,
    )
    return K, hK, report


def approximation_sweep(p: Profile, R: ContinuumDomain, epsilon: float,
                        scales=(Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16))):
    """Run :func:`rademacher_approx` along decreasing scales.

    Returns ``(result, reports)`` where ``result`` is the first passing
    ``(K, h_K, report)`` or None when the sweep is inconclusive.
    """
    reports = []
    for scale in scales:
        try:
            K, hK, rep = rademacher_approx(p, R, epsilon, scale)
        except NoSimplexFits:
            continue
        reports.append(rep)
        if rep.passed:
            return (K, hK, rep), reports
    return None, reports


def macro_entropy(h: PiecewiseAffineProfile, model) -> float:
    """Volume-normalised integral of the surface tension of the gradient."""
    total = 0.0
    vol = 0.0
    for sid, grad in h.simplex_gradients().items():
        g = tuple(float(c) for c in grad)
        if max(abs(c) for c in g) > 1 + 1e-9:
            raise SlopeOutOfRange(f"slope {g} outside [-1, 1]^m on {sid}")
        w = float(sid.volume())
        total += w * model(tuple(max(-1.0, min(1.0, c)) for c in g))
        vol += w
    return total / vol
