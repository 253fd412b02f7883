"""Watch a Harish-Chandra series settle onto its plane wave.

Deep inside the chamber phi_xi(x) approaches e^{<xi, x>}. With weak
couplings and a purely imaginary spectral point the gap shrinks by roughly
a factor e along each step of x = t rho.
"""

import numpy as np

from hyperwave import Couplings, asymptotics_gap, build_table, rho

g = Couplings(0.001 + 0.0005j, 0.0015 - 0.0005j, 0.0005 + 0.001j)
xi = np.array([2.3j, 0.8j])
r = rho(2).astype(float)

for family in ("bc", "t", "cs"):
    table = build_table(family, xi, g, 30)
    gaps = [asymptotics_gap(table, t * r) for t in range(2, 9)]
    print(family, " ".join(f"{v:.2e}" for v in gaps))

# the Toda chain keeps its a_j = 2 nearest-neighbour terms whatever g is,
# so its gap levels off much higher than the other two
