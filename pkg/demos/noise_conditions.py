"""Small- and large-noise conditions for the 3x2 game across noise levels."""

import numpy as np

from replab import DiffusionSpec, check_noise_conditions, maximal_support_equilibrium
from replab.figures import bundled_game

g = bundled_game("mp_3x2")
rep = maximal_support_equilibrium(g)
for s in np.array([0.2, 0.5, 1.0, 1.5, 2.0, 3.0, 4.0]):
    c = check_noise_conditions(g, DiffusionSpec.uniform(s, s, 3, 2), rep, exact=True)
    print(f"sigma {s:3.1f}  small {str(c.small):5s} ({c.small_margin:+.3f})  "
          f"large {str(c.large):5s} ({c.large_margin:+.3f})")
