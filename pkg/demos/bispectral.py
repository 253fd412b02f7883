"""The same function solves a difference equation in xi.

Phi_xi(x) is an eigenfunction of the hyperoctahedral Calogero-Sutherland
operator in x and, at the same time, of a family of difference operators
shifting xi by unit vectors. Here both sides of the first two difference
equations are compared at a generic point.
"""

import numpy as np

from hyperwave import Couplings, difference_check, eigen_residual

g = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
xi = np.array([0.31 + 0.42j, -0.17 + 0.23j])
x = np.array([5.0, 2.5])

for family in ("bc", "t", "cs"):
    eig = eigen_residual(family, xi, x, g, 30, use_wavefunction=True)
    print(f"{family:2s} differential residual {eig:.1e}")
    for ell in (1, 2):
        rep = difference_check(family, ell, xi, x, g, 30)
        print(f"   difference l={ell}: lhs {rep.lhs:.6e}  rhs {rep.rhs:.6e}  residual {rep.residual:.1e}")
