"""Matching pennies with a dominated third row.

The deterministic flow abandons the third row. Face exponents tell which
boundary pieces attract the noisy process.
"""

from replab import (
    DiffusionSpec, OdeConfig, classify_3x2_faces, integrate_ode, maximal_support_equilibrium,
)
from replab.figures import bundled_game

g = bundled_game("mp_3x2")
rep = maximal_support_equilibrium(g)
print("maximal-support equilibrium", rep.eq[0], rep.eq[1])
print("anti-equilibrium", rep.anti[0], rep.anti[1])

tr = integrate_ode(g, OdeConfig(t_end=100, init=([0.2, 0.2, 0.6], [0.3, 0.7])))
print(f"x3 after t=100: {tr.x[-1, 2]:.2e}")

for s in (0.2, 0.5, 0.9):
    faces = classify_3x2_faces(g, DiffusionSpec.uniform(s, s, 3, 2))
    print(f"sigma {s}: top vertex {faces.top_label}, face X3=0 {faces.face_label}, "
          f"min H1 {faces.H1_min:.4f} >= {faces.H1_bound:.4f}")
