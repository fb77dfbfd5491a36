"""A random height function on a diamond with flat boundary data, drawn
by heat-bath dynamics and written as CSV plus a PPM heat map."""

from pathlib import Path

from heightlab.enumeration import SiteConstraint
from heightlab.height import affine_height
from heightlab.lattice import ContinuumDomain, discretize
from heightlab.sampler import GlauberChain, emit_field
from heightlab.height import HeightFunction

out = Path(__file__).with_name("output")
out.mkdir(exist_ok=True)

diamond = ContinuumDomain.polytope([{"a": [1, 1], "b": 1}, {"a": [-1, 1], "b": 1},
                                    {"a": [1, -1], "b": 1}, {"a": [-1, -1], "b": 1}])
n = 24
D = discretize(diamond, n)
c = SiteConstraint.pinned({z: affine_height((0, 0), 0, z) for z in D.boundary})
S = GlauberChain(D, c).run(seed=2024, sweeps=400, chains=1, threads=4)
h = HeightFunction(D, dict(zip(D.points, S[0].tolist())))

paths = emit_field(h, out / "diamond.csv", out / "diamond.ppm", header="mode=approximate sweeps=400")
print(f"{len(D)} sites, heights in [{min(h.values.values())}, {max(h.values.values())}]")
print("wrote", *[str(p) for p in paths])
