"""Minimal macroscopic entropy in 1D with boundary values (0, 1/2), checked
against exact counts, and the probabilities of two balls of profiles."""

from fractions import Fraction

from heightlab import verify as V
from heightlab.enumeration import ClosedForm1D, sigma
from heightlab.height import AffineProfile, TentProfile
from heightlab.lattice import ContinuumDomain

R = ContinuumDomain.box([0], [1])
model = ClosedForm1D()
boundary = AffineProfile((Fraction(1, 2),), 0)

res = V.minimize_macro_entropy(R, boundary, Fraction(1, 16), model)
print(f"minimal macroscopic entropy {res.value:.6f} after {res.iterations} steps "
      f"(sigma(1/2) = {sigma(0.5):.6f})")

rep = V.check_variational(R, boundary, model, Fraction(1, 10), 64, Fraction(1, 16), 0.1)
inst = rep.instances[0]
print(f"counted entropy with boundary slack 1/10 at n=64: {inst['rhs']:.4f}, gap {inst['gap']:+.4f}")

# the straight profile is the typical one; a tent with the same endpoints is exponentially rare
tent = TentProfile(Fraction(3, 4), Fraction(3, 4), 1)
r = Fraction(1, 20)
ldp = V.ldp_report(R, boundary, model, Fraction(1, 10), 64, Fraction(1, 16),
                   {"straight": [V.Ball(boundary, r)], "tent": [V.Ball(tent, r)]})
for inst in ldp.instances:
    print(f"{inst['event']:>9}: mu = {inst['mu_float']:.3e}, rate {inst['rate']:.4f}, "
          f"I bracket [{min(inst['I_ball_min']):.4f}, {min(inst['I_centres']):.4f}]")
