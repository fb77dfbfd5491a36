"""Height functions, parity-rounded affine height functions and Lipschitz profiles."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import DomainNotCellCovered, InvalidHeightFunction, UnsupportedProfile
from .lattice import (
    ContinuumDomain,
    DiscreteDomain,
    as_fraction,
    fraction_str,
    hausdorff_gap,
    l1,
    parity,
)


def parity_round(y, z) -> int:
    """Closest integer to ``y`` with the parity of the lattice point ``z``.

    ``z`` may also be given directly as a parity bit (0 or 1).  When ``y`` is
    an integer of the wrong parity both neighbours are equally close and the
    upper one, ``y + 1``, is returned.
    """
    y = as_fraction(y)
    p = z % 2 if isinstance(z, int) else parity(z)
    k = math.floor(y)
    lower = k if k % 2 == p else k - 1
    upper = lower + 2
    if y - lower < upper - y:
        return lower
    return upper


def affine_value(s: Sequence, b, z: Sequence) -> Fraction:
    return sum((as_fraction(si) * zi for si, zi in zip(s, z)), Fraction(0)) + as_fraction(b)


def affine_height(s: Sequence, b, z: Sequence) -> int:
    """Value of the parity-rounded affine height function at z."""
    return parity_round(affine_value(s, b, z), z)


@dataclass(frozen=True)
class AffineSpec:
    s: tuple
    b: Fraction = Fraction(0)

    def __post_init__(self):
        s = tuple(as_fraction(v) for v in self.s)
        if any(abs(v) > 1 for v in s):
            raise ValueError(f"slope {s} outside [-1, 1]^m")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "b", as_fraction(self.b))


@dataclass(frozen=True)
class HeightCheck:
    """Result of :func:`validate_height_function`; truthy when valid."""

    ok: bool
    edge: tuple | None = None
    point: tuple | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def validate_height_function(values: Mapping, D: DiscreteDomain) -> HeightCheck:
    for z in D.points:
        if z not in values:
            return HeightCheck(False, point=z, reason="missing value")
        if (values[z] - parity(z)) % 2:
            return HeightCheck(False, point=z, reason="parity")
    for z, w in D.edges():
        if abs(values[z] - values[w]) != 1:
            return HeightCheck(False, edge=(z, w), reason="adjacent values must differ by exactly 1")
    return HeightCheck(True)


@dataclass(frozen=True)
class HeightFunction:
    """A parity-respecting graph homomorphism from a discrete domain to Z."""

    domain: DiscreteDomain
    values: Mapping = field(hash=False)

    def __post_init__(self):
        vals = {z: int(self.values[z]) for z in self.domain.points}
        object.__setattr__(self, "values", vals)
        check = validate_height_function(vals, self.domain)
        if not check:
            raise InvalidHeightFunction(f"{check.reason} at {check.edge or check.point}")

    def __getitem__(self, z) -> int:
        return self.values[z]

    def as_tuple(self) -> tuple:
        return tuple(self.values[z] for z in self.domain.points)

    def restrict(self, points) -> dict:
        return {z: self.values[z] for z in points}

    def boundary_values(self) -> dict:
        return self.restrict(sorted(self.domain.boundary))

    def to_csv(self) -> str:
        return height_csv(self.values, self.domain.dim)


def height_csv(values: Mapping, dim: int) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"z{i + 1}" for i in range(dim)] + ["h"])
    for z in sorted(values):
        writer.writerow(list(z) + [values[z]])
    return buf.getvalue()


def read_height_csv(text: str) -> dict:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if rows and not rows[0][0].lstrip("-").isdigit():
        rows = rows[1:]
    return {tuple(int(c) for c in r[:-1]): int(r[-1]) for r in rows}


def affine_height_function(spec: AffineSpec, D: DiscreteDomain) -> HeightFunction:
    return HeightFunction(D, {z: affine_height(spec.s, spec.b, z) for z in D.points})


# ---------------------------------------------------------------------------
# Lipschitz profiles
# ---------------------------------------------------------------------------


class Profile:
    """Base class of asymptotic height functions evaluable at rational points."""

    dim: int
    lipschitz: Fraction | None = None

    def value(self, x) -> Fraction:
        raise NotImplementedError

    def __call__(self, x) -> Fraction:
        return self.value(x)

    def gradient(self, x) -> tuple:
        raise NotImplementedError

    def rounded_height(self, z, n: int) -> int:
        """Parity rounding of ``n * p(z / n)`` at the lattice point z."""
        return parity_round(n * self.value(tuple(Fraction(zi, n) for zi in z)), z)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AffineProfile(Profile):
    s: tuple
    b: Fraction = Fraction(0)

    def __post_init__(self):
        spec = AffineSpec(self.s, self.b)
        object.__setattr__(self, "s", spec.s)
        object.__setattr__(self, "b", spec.b)

    @property
    def dim(self) -> int:
        return len(self.s)

    @property
    def spec(self) -> AffineSpec:
        return AffineSpec(self.s, self.b)

    @property
    def lipschitz(self) -> Fraction:
        return max(abs(v) for v in self.s)

    def value(self, x) -> Fraction:
        return affine_value(self.s, self.b, [as_fraction(v) for v in x])

    def gradient(self, x=None) -> tuple:
        return self.s

    def to_json(self) -> dict:
        return {"type": "affine", "s": [fraction_str(v) for v in self.s], "b": fraction_str(self.b)}


@dataclass(frozen=True)
class TentProfile(Profile):
    """1D tent ``top - slope * |x - peak|``."""

    peak: Fraction
    top: Fraction
    slope: Fraction
    dim: int = 1

    def __post_init__(self):
        for name in ("peak", "top", "slope"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 0 <= abs(self.slope) <= 1:
            raise ValueError("tent slope must lie in [-1, 1]")

    @property
    def lipschitz(self) -> Fraction:
        return abs(self.slope)

    def value(self, x) -> Fraction:
        return self.top - self.slope * abs(as_fraction(x[0]) - self.peak)

    def gradient(self, x) -> tuple:
        return (self.slope if as_fraction(x[0]) < self.peak else -self.slope,)

    def to_json(self) -> dict:
        return {"type": "tent", "peak": fraction_str(self.peak), "top": fraction_str(self.top),
                "slope": fraction_str(self.slope)}


@dataclass(frozen=True)
class MinCoordsProfile(Profile):
    """``x -> min_i x_i``; gradient is the basis vector of the smallest coordinate."""

    dim: int = 2

    @property
    def lipschitz(self) -> Fraction:
        return Fraction(1)

    def value(self, x) -> Fraction:
        return min(as_fraction(v) for v in x)

    def gradient(self, x) -> tuple:
        vals = [as_fraction(v) for v in x]
        i = vals.index(min(vals))
        return tuple(Fraction(int(j == i)) for j in range(self.dim))

    def to_json(self) -> dict:
        return {"type": "min", "dim": self.dim}


@dataclass(frozen=True)
class QuadraticProfile(Profile):
    """``coef * |x|_2^2`` with a declared Lipschitz certificate.

    The certificate ``lipschitz`` must bound ``2 * coef * max_i |x_i|`` on
    the domain the profile is used on; it is not inferred.
    """

    coef: Fraction
    dim: int = 2
    lipschitz: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "coef", as_fraction(self.coef))
        if self.lipschitz is not None:
            object.__setattr__(self, "lipschitz", as_fraction(self.lipschitz))

    def value(self, x) -> Fraction:
        return self.coef * sum(as_fraction(v) ** 2 for v in x)

    def gradient(self, x) -> tuple:
        return tuple(2 * self.coef * as_fraction(v) for v in x)

    def to_json(self) -> dict:
        out = {"type": "quadratic", "coef": fraction_str(self.coef), "dim": self.dim}
        if self.lipschitz is not None:
            out["lipschitz"] = fraction_str(self.lipschitz)
        return out


BUILTIN_PROFILES = {"tent": TentProfile, "min": MinCoordsProfile, "quadratic": QuadraticProfile}


def profile_from_json(obj: dict) -> Profile:
    kind = obj["type"]
    if kind == "affine":
        return AffineProfile(tuple(obj["s"]), obj.get("b", 0))
    if kind == "tent":
        return TentProfile(obj["peak"], obj["top"], obj["slope"])
    if kind == "min":
        return MinCoordsProfile(int(obj.get("dim", 2)))
    if kind == "quadratic":
        lip = obj.get("lipschitz")
        return QuadraticProfile(obj["coef"], int(obj.get("dim", 2)), as_fraction(lip) if lip is not None else None)
    if kind == "piecewiseAffine":
        from .simplicial import PiecewiseAffineProfile

        return PiecewiseAffineProfile.from_json(obj)
    raise ValueError(f"unknown profile type {kind!r}")


def lipschitz_constant(p: Profile) -> Fraction:
    """ℓ1 Lipschitz constant: exact for affine and piecewise-affine profiles,
    the declared certificate for builtins."""
    from .simplicial import PiecewiseAffineProfile

    if isinstance(p, AffineProfile):
        return max(abs(v) for v in p.s)
    if isinstance(p, PiecewiseAffineProfile):
        return p.lipschitz_constant()
    if getattr(p, "lipschitz", None) is None:
        raise UnsupportedProfile(f"{type(p).__name__} has no declared Lipschitz bound")
    return p.lipschitz


def rounded_profile_heights(p: Profile, points, n: int) -> dict:
    """Boundary data ``z -> [n p(z/n)]_{z mod 2}`` on the given lattice points."""
    return {z: p.rounded_height(z, n) for z in points}


def boundary_gap(hB: Mapping, p: Profile, R: ContinuumDomain, D: DiscreteDomain) -> Fraction:
    """Finite-n value of the boundary convergence criterion.

    The supremum over boundary lattice points z of the supremum over sampled
    boundary points x of R with ``|x - z/n|_1 <= d_n`` of ``|hB(z)/n - p(x)|``,
    where ``d_n`` is the sampled Hausdorff distance.
    """
    n = D.n
    pitch = Fraction(1, 2 * n)
    d_n = hausdorff_gap(R, D, pitch)
    samples = [(x, p.value(x)) for x in R.boundary_sample(pitch)]
    worst = Fraction(0)
    for z in sorted(D.boundary):
        if z not in hB:
            continue
        zn = tuple(Fraction(zi, n) for zi in z)
        hz = Fraction(hB[z], n)
        for x, px in samples:
            if l1(x, zn) <= d_n:
                worst = max(worst, abs(hz - px))
    return worst


def kirszbraun_interpolate(h: HeightFunction):
    """Rescale ``h`` to ``x = z/n`` and interpolate linearly on Kuhn simplices.

    Returns a :class:`~heightlab.simplicial.PiecewiseAffineProfile` on the
    union of the lattice cells all of whose corners lie in the domain.
    """
    from .simplicial import PiecewiseAffineProfile, SimplexDomain, SimplexId

    D = h.domain
    m, n = D.dim, D.n
    scale = Fraction(1, n)
    corners = list(itertools.product((0, 1), repeat=m))
    simplices, covered = [], set()
    for z in D.points:
        cell = [tuple(zi + ci for zi, ci in zip(z, c)) for c in corners]
        if all(w in D for w in cell):
            covered.update(cell)
            for perm in itertools.permutations(range(1, m + 1)):
                simplices.append(SimplexId(z, perm, scale))
    missing = [z for z in D.points if z not in covered]
    if missing:
        raise DomainNotCellCovered(f"lattice point {missing[0]} is not a corner of any full cell")
    K = SimplexDomain(scale, tuple(simplices))
    values = {tuple(Fraction(zi, n) for zi in z): Fraction(h[z], n) for z in D.points}
    return PiecewiseAffineProfile(K, values)
