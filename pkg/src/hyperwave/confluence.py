"""Confluent limits bc -> t (kind M) and bc -> cs (kind L).

Kind M translates x -> x + c rho_M and replaces g_M by the positive root of
g(g-1) = e^c. Kind L translates x -> x + c rho_L, doubles g_S and replaces
g_L by the positive root of g(g-1) = e^{2c}/16. The couplings grow like
e^{c/2}, so the translated series is never summed directly: its
coefficients solve the same recurrence with the pre-scaled input
e^{-c l <alpha, rho_K>} a^bc_{alpha,l}(g^(c)), which stays bounded.
"""

from __future__ import annotations

import math

import numpy as np

from .bispectral import E_eigenvalue, U_coeff, V_coeff, signed_sets
from .core import (
    DEFAULT_TOL, Couplings, Family, Tolerances, check_chamber, orbit_matrix, rho_L, rho_M,
)
from .hcseries import DEFAULT_N, CoeffTable, build_table, reduced_sums, series_eval, solve_batch
from .operators import potential
from .special import log_c_function, log_c_function_batch, log_confluence_prefactor
from .wavefn import combine, guard, wavefunction

KINDS = ("M", "L")


def _kind(kind: str) -> str:
    k = str(kind).upper()
    if k not in KINDS:
        raise ValueError(f"confluence kind must be M or L, got {kind!r}")
    return k


def target_family(kind: str) -> Family:
    return Family.T if _kind(kind) == "M" else Family.CS


def rho_K(kind: str, n: int) -> np.ndarray:
    return rho_M(n) if _kind(kind) == "M" else rho_L(n)


def coupling_path(kind: str, g: Couplings, c: float) -> Couplings:
    """g^(c): the source bc couplings whose limit is the target family at g."""
    if _kind(kind) == "M":
        return g.replace(gM=(1 + math.sqrt(1 + 4 * math.exp(c))) / 2)
    return g.replace(gS=2 * g.gS, gL=(1 + math.sqrt(1 + math.exp(2 * c) / 4)) / 2)


def _target_couplings(g: Couplings, n: int) -> Couplings:
    # the limits land on the normalized auxiliary couplings
    if g.a is not None and not np.allclose(g.a, g.replace(a=None).aux(n)):
        raise ValueError("confluent limits produce the normalized auxiliary couplings only")
    return g.replace(a=None)


def _shift(kind: str, c: float, n: int):
    return (float(c), rho_K(kind, n))


# ---------------------------------------------------------------------------
# series level

def translated_table(kind: str, xi, g: Couplings, c: float, N: int = DEFAULT_N,
                     regularize: bool = True, tol: Tolerances = DEFAULT_TOL) -> CoeffTable:
    """Coefficients of e^{-c<xi,rho_K>} phi^bc_xi(x + c rho_K; g^(c)) as a series in x."""
    xi = np.asarray(xi, dtype=complex)
    return build_table(Family.BC, xi, coupling_path(kind, g, c), N, regularize=regularize, tol=tol,
                       shift=_shift(kind, c, len(xi)))


def translated_series_direct(kind: str, xi, x, g: Couplings, c: float, N: int = DEFAULT_N,
                             tol: Tolerances = DEFAULT_TOL) -> complex:
    """e^{-c<xi,rho_K>} Delta_U phi^bc_xi(x + c rho_K; g^(c)) summed literally.

    Only sensible for moderate c; used to cross-check translated_table.
    """
    xi = np.asarray(xi, dtype=complex)
    x = np.asarray(x, dtype=float)
    rk = rho_K(kind, len(xi))
    table = build_table(Family.BC, xi, coupling_path(kind, g, c), N, regularize=True, tol=tol)
    return series_eval(table, x + c * rk).value * np.exp(-c * np.dot(xi, rk))


def series_confluence_error(kind: str, xi, x, g: Couplings, c: float, N: int = DEFAULT_N,
                            tol: Tolerances = DEFAULT_TOL) -> float:
    """|e^{-c<xi,rho_K>} Delta_U phi^bc(x + c rho_K; g^(c)) - Delta_U phi^target(x; g)|."""
    xi = np.asarray(xi, dtype=complex)
    x = check_chamber(Family.BC, np.asarray(x, dtype=float))
    src = translated_table(kind, xi, g, c, N, tol=tol)
    tgt = build_table(target_family(kind), xi, _target_couplings(g, len(xi)), N, regularize=True, tol=tol)
    assert src.flagged == tgt.flagged  # the regularizer depends on xi only
    return abs(series_eval(src, x).value - series_eval(tgt, x).value)


def coefficient_limit_error(kind: str, xi, g: Couplings, c: float, max_level: int = 8,
                            tol: Tolerances = DEFAULT_TOL) -> float:
    """max over level(nu) <= max_level of |a_hat^bc_nu - Delta_U a^target_nu| / max(1, |Delta_U a^target_nu|)."""
    xi = np.asarray(xi, dtype=complex)
    src = translated_table(kind, xi, g, c, max_level, tol=tol)
    tgt = build_table(target_family(kind), xi, _target_couplings(g, len(xi)), max_level,
                      regularize=True, tol=tol)
    return float(np.max(np.abs(src.coeffs - tgt.coeffs) / np.maximum(1.0, np.abs(tgt.coeffs))))


# ---------------------------------------------------------------------------
# wave-function level

def translated_wavefunction(kind: str, xi, x, g: Couplings, c: float, N: int = DEFAULT_N,
                            tol: Tolerances = DEFAULT_TOL) -> complex:
    """gamma_K(g^(c)) Phi^bc_xi(x + c rho_K; g^(c)), assembled in log scale.

    Each orbit term is exp(log gamma_K + log C^bc(w xi) + c<w xi, rho_K> + <w xi, x>)
    times the translated series of w xi, so no e^{c ...} is ever formed.
    """
    kind = _kind(kind)
    xi = np.asarray(xi, dtype=complex).ravel()
    n = len(xi)
    x = check_chamber(Family.BC, np.asarray(x, dtype=float))
    guard(xi, tol)
    gc = coupling_path(kind, g, c)
    rk = rho_K(kind, n)
    orbit = orbit_matrix(xi)
    log_gamma_k = log_confluence_prefactor(kind, gc, n)
    if log_gamma_k is None:
        return 0j
    logs = log_gamma_k + log_c_function_batch(Family.BC, orbit, gc) + c * (orbit @ rk) + orbit @ x
    lat, A = solve_batch(Family.BC, orbit, gc, N, tol, shift=(c, rk))
    sums, _ = reduced_sums(lat, A, x)
    return combine(logs, sums)


def wavefunction_confluence_error(kind: str, xi, x, g: Couplings, c: float, N: int = DEFAULT_N,
                                  tol: Tolerances = DEFAULT_TOL) -> float:
    """|gamma_K(g^(c)) Phi^bc(x + c rho_K; g^(c)) - Phi^target(x; g)| / |Phi^target(x; g)|."""
    xi = np.asarray(xi, dtype=complex)
    ref = wavefunction(target_family(kind), xi, x, _target_couplings(g, len(xi)), N, tol)
    return abs(translated_wavefunction(kind, xi, x, g, c, N, tol) - ref) / abs(ref)


def c_function_limit_error(kind: str, xi, g: Couplings, c: float) -> float:
    """Relative gap between gamma_K(g^(c)) e^{c<xi,rho_K>} C^bc(xi; g^(c)) and C^target(xi; g)."""
    xi = np.asarray(xi, dtype=complex)
    n = len(xi)
    gc = coupling_path(kind, g, c)
    lhs = log_confluence_prefactor(kind, gc, n) + c * np.dot(xi, rho_K(kind, n)) + log_c_function(Family.BC, xi, gc)
    rhs = log_c_function(target_family(kind), xi, g)
    return abs(np.exp(lhs - rhs) - 1)


# ---------------------------------------------------------------------------
# operator and difference-data level

def potential_limit_error(kind: str, x, g: Couplings, c: float, tol: Tolerances = DEFAULT_TOL) -> float:
    """|potential^bc(x + c rho_K; g^(c)) - potential^target(x; g)|."""
    x = np.asarray(x, dtype=float)
    src = potential(Family.BC, x + c * rho_K(kind, len(x)), coupling_path(kind, g, c), tol)
    return abs(src - potential(target_family(kind), x, _target_couplings(g, len(x)), tol))


def _scale_exponent(kind: str, n: int, size: int, k: int | None = None) -> float:
    # exponent multiplying c in the rescaling of V (k = n), U (k = |K|) or E (k = n)
    k = n if k is None else k
    if _kind(kind) == "M":
        return 0.5 * size * (2 * k - 1 - size)
    return float(size)


def difference_data_limit_errors(kind: str, xi, x, g: Couplings, c: float) -> dict[str, float]:
    """Max relative errors of the rescaled V, U and E against their targets."""
    kind = _kind(kind)
    xi = np.asarray(xi, dtype=complex)
    x = np.asarray(x, dtype=float)
    n = len(xi)
    gc = coupling_path(kind, g, c)
    gt = _target_couplings(g, n)
    tgt = target_family(kind)

    def rel(a, b):
        return abs(a - b) / max(1.0, abs(b))

    errs = {"V": 0.0, "U": 0.0, "E": 0.0}
    for size in range(1, n + 1):
        for s in signed_sets(n, size):
            scale = math.exp(-c * _scale_exponent(kind, n, size))
            errs["V"] = max(errs["V"], rel(scale * V_coeff(Family.BC, s, xi, gc), V_coeff(tgt, s, xi, gt)))
    for size in range(0, n + 1):
        for K in _subsets(n, size):
            for p in range(0, size + 1):
                scale = math.exp(-c * _scale_exponent(kind, n, p, size))
                errs["U"] = max(errs["U"], rel(scale * U_coeff(Family.BC, K, p, xi, gc), U_coeff(tgt, K, p, xi, gt)))
    xs = x + c * rho_K(kind, n)
    for ell in range(1, n + 1):
        scale = math.exp(-c * _scale_exponent(kind, n, ell))
        errs["E"] = max(errs["E"], rel(scale * E_eigenvalue(Family.BC, ell, xs), E_eigenvalue(tgt, ell, x)))
    return errs


def _subsets(n: int, size: int):
    import itertools
    return itertools.combinations(range(n), size)


# ---------------------------------------------------------------------------
# scans

def scan(fn, cs, **kw) -> np.ndarray:
    return np.array([fn(c=c, **kw) for c in cs], dtype=float)


def strictly_decreasing(values) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) < 0))


def log_linear_fit(cs, errors) -> tuple[float, float]:
    """Least-squares line through (c, log error): (slope, R^2)."""
    c = np.asarray(cs, dtype=float)
    y = np.log(np.asarray(errors, dtype=float))
    slope, icept = np.polyfit(c, y, 1)
    resid = y - (slope * c + icept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
