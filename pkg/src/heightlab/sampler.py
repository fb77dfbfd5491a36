"""Random height functions: exact uniform sampling and heat-bath dynamics.

Randomness comes from Philox counter-based streams keyed by
``(seed, site index)``, so a sample depends only on the seed, never on the
order in which sites are processed or on the number of worker threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping

import numpy as np

from .enumeration import DEFAULT_BUDGET, FrontierDP, SiteConstraint, _propagate_windows
from .errors import EmptySet, UnsupportedDimension
from .height import HeightFunction, height_csv
from .lattice import DiscreteDomain, lattice_neighbors, parity

RNG_ALGORITHM = "numpy.random.Philox(key=seed<<64|site)"
FORMAT_VERSION = "heightlab/1"


def site_generator(seed: int, site: int) -> np.random.Generator:
    key = ((int(seed) % (1 << 64)) << 64) | int(site)
    return np.random.Generator(np.random.Philox(key=key))


def randbelow(gen: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in ``[0, bound)`` for arbitrarily large bounds."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    if bound < (1 << 62):
        return int(gen.integers(0, bound))
    bits = bound.bit_length()
    words = -(-bits // 64)
    while True:
        r = 0
        for w in gen.integers(0, 1 << 63, size=words, dtype=np.int64, endpoint=False).tolist():
            r = (r << 63) | w
        r >>= words * 63 - bits
        if r < bound:
            return r


class ExactSampler:
    """Uniform sampler over the height functions allowed by a constraint.

    Sites are visited in the counting engine's sweep order; each value is
    drawn with probability proportional to its number of completions, read
    from tables built by one backward pass over the frontier states.
    """

    def __init__(self, D: DiscreteDomain, c: SiteConstraint, budget: int = DEFAULT_BUDGET):
        self.domain = D
        self.dp = FrontierDP(D, c, budget)
        if self.dp.empty:
            raise EmptySet("no height function satisfies the constraint")
        self.tables = self.dp.completion_tables()
        self.total = self.tables[0].get((), 0)
        if self.total == 0:
            raise EmptySet("no height function satisfies the constraint")

    def sample_values(self, seed: int) -> tuple:
        dp, G = self.dp, self.tables
        state: tuple = ()
        out = []
        for k in range(len(self.domain.points)):
            _, keep = dp.steps[k]
            options = []
            for v in dp._candidates(k, state):
                nxt = keep(state + (v,))
                w = G[k + 1].get(nxt, 0)
                if w:
                    options.append((v, nxt, w))
            if len(options) == 1:
                v, state, _ = options[0]
            else:
                r = randbelow(site_generator(seed, k), sum(o[2] for o in options))
                for v, nxt, w in options:
                    if r < w:
                        state = nxt
                        break
                    r -= w
            out.append(v)
        return tuple(out)

    def sample(self, seed: int) -> HeightFunction:
        return HeightFunction(self.domain, dict(zip(self.domain.points, self.sample_values(seed))))


def sample_exact(D: DiscreteDomain, c: SiteConstraint, seed: int, budget: int = DEFAULT_BUDGET) -> HeightFunction:
    return ExactSampler(D, c, budget).sample(seed)


class GlauberChain:
    """Heat-bath dynamics on height functions, run for many chains at once.

    One sweep updates all even sites and then all odd sites; each update
    redraws the site uniformly among the values compatible with its
    neighbours and its window.  Mixing is not certified: outputs are
    approximate samples.
    """

    def __init__(self, D: DiscreteDomain, c: SiteConstraint, init: Mapping | None = None):
        windows = _propagate_windows(D, c)
        if windows is None:
            raise EmptySet("no height function satisfies the constraint")
        self.domain = D
        self.lo = np.array(windows[0], dtype=np.int64)
        self.hi = np.array(windows[1], dtype=np.int64)
        # the propagated lower envelope is itself a feasible height function
        # (the minimal Kirszbraun extension when the constraint is pins only)
        base = self.lo if init is None else np.array([init[z] for z in D.points], dtype=np.int64)
        check = HeightFunction(D, dict(zip(D.points, base.tolist())))
        if not c.satisfied_by(check.values):
            raise ValueError("initial state violates the constraint")
        self.init = base
        self.nbrs = [np.array([D.index(w) for w in lattice_neighbors(z) if w in D], dtype=np.int64)
                     for z in D.points]
        free = [i for i in range(len(D)) if self.lo[i] != self.hi[i]]
        self.colors = [[i for i in free if parity(D.points[i]) == p] for p in (0, 1)]

    def _update_sites(self, S: np.ndarray, sites, gens) -> None:
        chains = S.shape[0]
        for i in sites:
            u = gens[i].random(chains)
            nb = self.nbrs[i]
            if nb.size:
                vals = S[:, nb]
                mn, mx = vals.min(axis=1), vals.max(axis=1)
                lo = np.where(mx - mn == 2, mn + 1, mn - 1)
                hi = mn + 1
            else:
                lo = np.full(chains, self.lo[i])
                hi = np.full(chains, self.hi[i])
            lo = np.maximum(lo, self.lo[i])
            hi = np.minimum(hi, self.hi[i])
            k = (hi - lo) // 2 + 1
            S[:, i] = lo + 2 * np.floor(u * k).astype(np.int64)

    def run(self, seed: int, sweeps: int, chains: int = 1, threads: int = 1) -> np.ndarray:
        """States after ``sweeps`` sweeps, shape ``(chains, |D|)``."""
        S = np.tile(self.init, (chains, 1))
        gens = {i: site_generator(seed, i) for color in self.colors for i in color}
        pool = ThreadPoolExecutor(threads) if threads > 1 else None
        try:
            for _ in range(sweeps):
                for color in self.colors:
                    if pool is None:
                        self._update_sites(S, color, gens)
                    else:
                        parts = [color[t::threads] for t in range(threads)]
                        list(pool.map(lambda part: self._update_sites(S, part, gens), parts))
        finally:
            if pool is not None:
                pool.shutdown()
        return S

    def single_site_kernel(self, states: list, site: int) -> np.ndarray:
        """Transition matrix of one heat-bath update at ``site`` on ``states``."""
        index = {s: a for a, s in enumerate(states)}
        P = np.zeros((len(states), len(states)))
        i = site
        for a, s in enumerate(states):
            nb = [s[j] for j in self.nbrs[i]]
            cands = [v for v in range(self.lo[i], self.hi[i] + 1, 2) if all(abs(v - u) == 1 for u in nb)]
            for v in cands:
                t = list(s)
                t[i] = v
                P[a, index[tuple(t)]] += 1.0 / len(cands)
        return P


def sample_glauber(D: DiscreteDomain, c: SiteConstraint, seed: int, sweeps: int,
                   threads: int = 1) -> HeightFunction:
    chain = GlauberChain(D, c)
    S = chain.run(seed, sweeps, chains=1, threads=threads)
    return HeightFunction(D, dict(zip(D.points, S[0].tolist())))


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

_PALETTE = np.array([[49, 54, 149], [255, 255, 191], [165, 0, 38]], dtype=float)


def _colour(t: float) -> bytes:
    t = min(max(t, 0.0), 1.0) * (len(_PALETTE) - 1)
    j = min(int(t), len(_PALETTE) - 2)
    c = _PALETTE[j] + (t - j) * (_PALETTE[j + 1] - _PALETTE[j])
    return bytes(int(round(v)) for v in c)


def field_ppm(h: HeightFunction) -> bytes:
    """Binary PPM heat map of a 2D field; sites outside the domain are black.

    Columns follow z1, rows follow z2 with the largest z2 on top.  A
    constant field is drawn entirely in the middle palette colour.
    """
    D = h.domain
    if D.dim != 2:
        raise UnsupportedDimension("image output needs a 2D field")
    xs = [z[0] for z in D.points]
    ys = [z[1] for z in D.points]
    x0, y0 = min(xs), min(ys)
    width, height = max(xs) - x0 + 1, max(ys) - y0 + 1
    vals = list(h.values.values())
    vmin, vmax = min(vals), max(vals)
    body = bytearray()
    for row in range(height):
        y = y0 + height - 1 - row
        for col in range(width):
            z = (x0 + col, y)
            if z not in D:
                body += b"\x00\x00\x00"
            elif vmax == vmin:
                body += _colour(0.5)
            else:
                body += _colour((h[z] - vmin) / (vmax - vmin))
    header = f"P6\n# {FORMAT_VERSION} field\n{width} {height}\n255\n".encode()
    return header + bytes(body)


def emit_field(h: HeightFunction, csv_path, ppm_path=None, header: str = "") -> list[Path]:
    """Write a field as CSV (always) and, for 2D fields, as a PPM image."""
    if ppm_path is not None and h.domain.dim != 2:
        raise UnsupportedDimension("image output needs a 2D field")
    csv_path = Path(csv_path)
    meta = f"# {FORMAT_VERSION} field dim={h.domain.dim} {header}".rstrip() + "\n"
    csv_path.write_text(meta + height_csv(h.values, h.domain.dim))
    written = [csv_path]
    if ppm_path is not None:
        ppm_path = Path(ppm_path)
        ppm_path.write_bytes(field_ppm(h))
        written.append(ppm_path)
    return written
