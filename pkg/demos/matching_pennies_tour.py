"""Matching pennies with and without noise.

The deterministic flow circles the mixed equilibrium on a level set of the
cross entropy. With small noise the process drifts out to the pure profiles
and spends most of its time near the four corners.
"""

import numpy as np

from replab import (
    DiffusionSpec, OdeConfig, SdeConfig, corner_H_exponents, corner_mass, cross_entropy,
    integrate_ode, maximal_support_equilibrium, simulate_sde,
)
from replab.figures import bundled_game
from replab.ode import cross_entropy_path

g = bundled_game("matching_pennies")
eq = maximal_support_equilibrium(g)
print("equilibrium", eq.eq[0], eq.eq[1], "value", eq.value)

start = ([0.8, 0.2], [0.5, 0.5])
orbit = integrate_ode(g, OdeConfig(t_end=50, init=start))
V = cross_entropy_path(eq.eq, orbit)
print(f"V(0) = {cross_entropy(eq.eq, start):.6f}, drift over the orbit {np.ptp(V):.1e}")

spec = DiffusionSpec.from_effective(0.2, 0.2)
path = simulate_sde(g, spec, SdeConfig(t_end=2000, init=start, seed=1, thin=100))
cm = corner_mass(path, radius=0.1, burn_in=200)
print("time share near each corner:\n", np.round(cm.masses, 3), "\nelsewhere", round(cm.residual, 3))

rep = corner_H_exponents(g, spec)
for c in rep.corners:
    print(c.name, "Lambda", round(c.Lambda["V"], 4), c.label["V"])
print("boundary cycle:", " -> ".join(rep.cycle))
