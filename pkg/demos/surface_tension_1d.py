"""Finite-size entropies of the one dimensional model against the exact
surface tension, and the table that extrapolates them."""

from fractions import Fraction

from heightlab.enumeration import build_surface_tension_table, ent_local_count, sigma

# On the segment Q_n = {0, ..., n-1} a height function pinned at both ends is a
# +-1 walk, so the count is a binomial coefficient.
res = ent_local_count(1, (0,), 4)
print(f"n=4, s=0: {res.count} walks, entropy {res.entropy:.5f}")

print("\n  s      n=8      n=16     n=32     n=64    sigma(s)")
slopes = [Fraction(k, 4) for k in range(0, 4)]
for s in slopes:
    row = [ent_local_count(1, (s,), n).entropy for n in (8, 16, 32, 64)]
    print(f"{str(s):>4} " + " ".join(f"{v:8.4f}" for v in row) + f"  {sigma(float(s)):8.4f}")

# the finite-size error decays like ln(n)/n; fitting it away recovers sigma closely
table = build_surface_tension_table(1, 9, [8, 16, 32, 64])
print("\nextrapolated table minus sigma:")
for s in slopes:
    print(f"  s={str(s):>4}: {table.values[(s,)] - sigma(float(s)):+.5f}")
