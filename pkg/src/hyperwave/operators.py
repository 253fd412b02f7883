"""Potentials, the Schroedinger operators L^r and eigen-equation residuals.

L^r = sum_j d^2/dx_j^2 + potential^r(x). On a plane wave e^{<xi - nu, x>}
the Laplacian acts by <xi - nu, xi - nu>, so applying L^r to a truncated
series is exact up to the truncation itself.
"""

from __future__ import annotations

import math

import numpy as np

from .core import DEFAULT_TOL, Couplings, Family, Tolerances, as_family, check_chamber
from .hcseries import DEFAULT_N, CoeffTable, build_table, denominators, reduced_sums
from .wavefn import combine, orbit_data


def _inv_sinh2(t):
    return 1.0 / np.sinh(t) ** 2


def potential(family, x, g: Couplings, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Everything in L^r except the Laplacian."""
    family = as_family(family)
    x = check_chamber(family, np.asarray(x, dtype=float), margin=tol.tau_x)
    n = len(x)
    gS, gM, gL = g.triple
    cS = gS * (gS + 2 * gL - 1)
    cL = gL * (gL - 1)
    cM = gM * (gM - 1)
    terms: list[complex] = []
    if family is Family.BC:
        for j in range(n):
            terms.append(-0.25 * cS * _inv_sinh2(x[j] / 2))
            terms.append(-cL * _inv_sinh2(x[j]))
        for j in range(n):
            for k in range(j + 1, n):
                terms.append(-0.5 * cM * (_inv_sinh2((x[j] + x[k]) / 2) + _inv_sinh2((x[j] - x[k]) / 2)))
    elif family is Family.T:
        a = g.aux(n)
        for j in range(n - 1):
            terms.append(-a[j] * math.exp(-x[j] + x[j + 1]))
        if n > 1:
            terms.append(-a[n - 2] * math.exp(-x[n - 2] - x[n - 1]))
        terms.append(-0.25 * cS * _inv_sinh2(x[-1] / 2))
        terms.append(-cL * _inv_sinh2(x[-1]))
    else:
        a_n = g.aux(n)[-1]
        for j in range(n):
            terms.append(-gS * math.exp(-x[j]) - a_n * math.exp(-2 * x[j]))
        for j in range(n):
            for k in range(j + 1, n):
                terms.append(-0.5 * cM * _inv_sinh2((x[j] - x[k]) / 2))
    return complex(sum(terms, 0j))


def apply_L_to_series(family, table: CoeffTable, x, tol: Tolerances = DEFAULT_TOL) -> complex:
    """L^r applied termwise to the truncated series of ``table`` at x."""
    family = table.family if family is None else as_family(family)
    if family is not table.family:
        raise ValueError(f"table was built for {table.family.value}, not {family.value}")
    x = np.asarray(x, dtype=float)
    V = potential(family, x, table.g, tol)
    lat = table.lattice
    shifted = table.xi[None, :] - lat.nus
    lap = np.einsum("ij,ij->i", shifted, shifted)
    terms = table.coeffs * np.exp(shifted @ x) * (lap + V)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def _series_residual_sums(lat, coeffs: np.ndarray, xis: np.ndarray, x: np.ndarray, V: complex):
    # (L - <xi,xi>) acting on e^{<xi - nu, x>} multiplies it by d_nu + V with
    # d_nu = <nu - 2xi, nu>, which avoids subtracting two large numbers.
    d = denominators(lat, xis)
    res, _ = reduced_sums(lat, coeffs * (d + V), x)
    val, _ = reduced_sums(lat, coeffs, x)
    return res, val


def eigen_residual(family, xi, x, g: Couplings, N: int = DEFAULT_N, use_wavefunction: bool = False,
                   tol: Tolerances = DEFAULT_TOL) -> float:
    """|L^r f - <xi,xi> f| / |f| for f = phi_xi or f = Phi_xi."""
    family = as_family(family)
    x = check_chamber(family, np.asarray(x, dtype=float), margin=tol.tau_x)
    xi = np.asarray(xi, dtype=complex).ravel()
    V = potential(family, x, g, tol)
    if use_wavefunction:
        data = orbit_data(family, xi, g, N, tol)
        res, val = _series_residual_sums(data.lattice, data.coeffs, data.orbit, x, V)
        lt = data.log_terms(x)
        return abs(combine(lt, res)) / abs(combine(lt, val))
    table = build_table(family, xi, g, N, tol=tol)
    res, val = _series_residual_sums(table.lattice, table.coeffs[:, None], xi[None, :], x, V)
    return float(abs(res[0]) / abs(val[0]))


def laplacian_fd(f, x, h: float = 1e-3, order: int = 4) -> complex:
    """Central finite-difference Laplacian of f at x (order 2 or 4)."""
    x = np.asarray(x, dtype=float)
    f0 = f(x)
    total = 0j
    for j in range(len(x)):
        e = np.zeros_like(x)
        e[j] = h
        if order == 2:
            total += (f(x + e) - 2 * f0 + f(x - e)) / h**2
        elif order == 4:
            total += (-f(x + 2 * e) + 16 * f(x + e) - 30 * f0 + 16 * f(x - e) - f(x - 2 * e)) / (12 * h**2)
        else:
            raise ValueError("stencil order must be 2 or 4")
    return total


def apply_L_fd(family, f, x, g: Couplings, h: float = 1e-3, order: int = 4,
               tol: Tolerances = DEFAULT_TOL) -> complex:
    """L^r f at x with the Laplacian replaced by a finite-difference stencil."""
    return laplacian_fd(f, x, h, order) + potential(family, x, g, tol) * f(np.asarray(x, dtype=float))


def series_function(table: CoeffTable):
    """x -> truncated series value, without chamber checks (for stencils)."""
    lat = table.lattice
    shifted = table.xi[None, :] - lat.nus

    def f(x):
        t = table.coeffs * np.exp(shifted @ np.asarray(x, dtype=float))
        return complex(math.fsum(t.real), math.fsum(t.imag))

    return f
