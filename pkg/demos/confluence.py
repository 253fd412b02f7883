"""Degenerate the BC_n Sutherland wave function into Toda and Morse ones.

Kind M slides x along rho_M and sends g_M to infinity; kind L slides along
rho_L and sends g_L to infinity. Both the series and the symmetrized wave
function converge exponentially in the shift c.
"""

import numpy as np

from hyperwave import Couplings
from hyperwave.confluence import (
    log_linear_fit, scan, series_confluence_error, wavefunction_confluence_error,
)

g = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
xi = np.array([0.31 + 0.42j, -0.17 + 0.23j])
x = np.array([3.0, 1.0])
cs = (4, 6, 8, 10)

for kind, target in (("M", "Toda"), ("L", "Morse")):
    for label, fn in (("series", series_confluence_error), ("Phi", wavefunction_confluence_error)):
        errs = scan(fn, cs, kind=kind, xi=xi, x=x, g=g, N=30)
        slope, r2 = log_linear_fit(cs, errs)
        print(f"bc -> {target:5s} {label:6s}", " ".join(f"{e:.2e}" for e in errs),
              f"  d log(err)/dc = {slope:.3f}")
