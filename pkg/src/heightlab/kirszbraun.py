"""Extension of partially specified height functions.

A parity-respecting assignment on a subset S extends to a height function
on the whole domain when every pair of pinned values is 1-Lipschitz in the
ℓ1 distance.  The extensions ``max_x (h(x) - |x - y|_1)`` and
``min_x (h(x) + |x - y|_1)`` are the pointwise smallest and largest ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .enumeration import CountResult, SiteConstraint, count_constrained
from .errors import EmptyCarrier, NotExtendable
from .height import HeightFunction
from .lattice import DiscreteDomain, parity

PAIRWISE_LIMIT = 4096
_CHUNK = 1 << 16


@dataclass(frozen=True)
class PartialHeightFunction:
    domain: DiscreteDomain
    values: Mapping

    def __post_init__(self):
        vals = {tuple(z): int(v) for z, v in self.values.items()}
        outside = [z for z in vals if z not in self.domain]
        if outside:
            raise ValueError(f"pinned point {outside[0]} is outside the domain")
        object.__setattr__(self, "values", vals)

    @property
    def carrier(self) -> tuple:
        return tuple(sorted(self.values))


@dataclass(frozen=True)
class Witness:
    """Why a partial height function has no extension.

    ``kind`` is ``"parity"`` (``points`` holds the offending site) or
    ``"lipschitz"`` (``points`` holds a pair whose values differ by more
    than their ℓ1 distance).
    """

    kind: str
    points: tuple
    detail: str = ""

    def __str__(self) -> str:
        return f"{self.kind} violation at {self.points}: {self.detail}"


def _arrays(p: PartialHeightFunction):
    S = p.carrier
    return S, np.array(S, dtype=np.int64).reshape(len(S), -1), np.array([p.values[z] for z in S], dtype=np.int64)


def check_extendable(p: PartialHeightFunction) -> Witness | None:
    """Return None when ``p`` extends, otherwise a :class:`Witness`."""
    for z in p.carrier:
        if (p.values[z] - parity(z)) % 2:
            return Witness("parity", (z,), f"value {p.values[z]} has the wrong parity")
    S, X, h = _arrays(p)
    if len(S) <= 1:
        return None
    if len(S) <= PAIRWISE_LIMIT:
        for i in range(len(S) - 1):
            d = np.abs(X[i + 1:] - X[i]).sum(axis=1)
            bad = np.nonzero(np.abs(h[i + 1:] - h[i]) > d)[0]
            if bad.size:
                j = i + 1 + int(bad[0])
                return _lipschitz_witness(S[i], S[j], h[i], h[j])
        return None
    return _check_by_propagation(S, X, h)


def _lipschitz_witness(x, y, hx, hy) -> Witness:
    d = sum(abs(a - b) for a, b in zip(x, y))
    return Witness("lipschitz", (x, y), f"|{hx} - {hy}| = {abs(int(hx) - int(hy))} > {d}")


def _check_by_propagation(S, X, h) -> Witness | None:
    """ℓ1 distance transform of the pinned values over their bounding box."""
    lo = X.min(axis=0)
    shape = tuple(X.max(axis=0) - lo + 1)
    floor = int(h.min()) - int(sum(shape)) - 2
    env = np.full(shape, floor, dtype=np.int64)
    env[tuple((X - lo).T)] = h
    for ax in range(env.ndim):
        env = np.moveaxis(env, ax, 0)
        for i in range(1, env.shape[0]):
            np.maximum(env[i], env[i - 1] - 1, out=env[i])
        for i in range(env.shape[0] - 2, -1, -1):
            np.maximum(env[i], env[i + 1] - 1, out=env[i])
        env = np.moveaxis(env, 0, ax)
    lower = env[tuple((X - lo).T)]
    bad = np.nonzero(lower > h)[0]
    if not bad.size:
        return None
    j = int(bad[0])
    i = int(np.argmax(h - np.abs(X - X[j]).sum(axis=1)))
    return _lipschitz_witness(S[i], S[j], h[i], h[j])


def _extend(p: PartialHeightFunction, sign: int) -> HeightFunction:
    if not p.values:
        raise EmptyCarrier("cannot extend from an empty carrier")
    w = check_extendable(p)
    if w is not None:
        raise NotExtendable(w)
    _, X, h = _arrays(p)
    D = p.domain
    Y = np.array(D.points, dtype=np.int64).reshape(len(D), -1)
    out = np.empty(len(D), dtype=np.int64)
    step = max(1, _CHUNK // max(1, len(X)))
    for a in range(0, len(Y), step):
        d = np.abs(Y[a:a + step, None, :] - X[None, :, :]).sum(axis=2)
        if sign < 0:
            out[a:a + step] = (h[None, :] - d).max(axis=1)
        else:
            out[a:a + step] = (h[None, :] + d).min(axis=1)
    return HeightFunction(D, dict(zip(D.points, out.tolist())))


def extend_min(p: PartialHeightFunction) -> HeightFunction:
    """Pointwise smallest extension ``y -> max_x (h(x) - |x - y|_1)``."""
    return _extend(p, -1)


def extend_max(p: PartialHeightFunction) -> HeightFunction:
    """Pointwise largest extension ``y -> min_x (h(x) + |x - y|_1)``."""
    return _extend(p, +1)


def count_extensions(p: PartialHeightFunction, **kw) -> CountResult:
    """Exact number of height functions on the domain agreeing with ``p``."""
    w = check_extendable(p)
    if w is not None:
        raise NotExtendable(w)
    return count_constrained(p.domain, SiteConstraint.pinned(p.values), **kw)
