"""Extending a few pinned heights to a whole square, and what goes wrong
when the pins are too steep."""

from heightlab.errors import NotExtendable
from heightlab.kirszbraun import PartialHeightFunction, count_extensions, extend_max, extend_min
from heightlab.lattice import DiscreteDomain

D = DiscreteDomain.cube(2, 5)
pins = {(0, 0): 0, (4, 4): 4, (4, 0): 2}
p = PartialHeightFunction(D, pins)


def show(h):
    for y in reversed(range(5)):
        print("   " + " ".join(f"{h[(x, y)]:3d}" for x in range(5)))


print("smallest extension")
show(extend_min(p))
print("largest extension")
show(extend_max(p))
print("number of extensions:", count_extensions(p).count)

# pins that climb faster than the lattice distance allows have no extension
try:
    extend_min(PartialHeightFunction(D, {(0, 0): 0, (1, 1): 4}))
except NotExtendable as exc:
    print("\nrejected:", exc.witness)
