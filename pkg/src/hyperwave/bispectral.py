"""Difference equations in the spectral variable.

The coefficients V_{eps J}, U_{K,p} are rational in xi; E_ell is the
eigenvalue in x. ``difference_residual`` checks

    sum_{|J| <= ell, eps} U_{J^c, ell-|J|} V_{eps J} Phi_{xi + e_{eps J}} = E_ell Phi_xi

with every shifted wave function built from its own coefficient tables.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL, Couplings, Family, Tolerances, as_family, check_chamber, singular_hyperplanes,
)
from .errors import RationalPole
from .hcseries import DEFAULT_N
from .wavefn import evaluate, orbit_data


@dataclass(frozen=True)
class SignedIndexSet:
    """J with a sign per element; e_{eps J} = sum_{j in J} eps_j e_j (0-based j)."""

    J: tuple[int, ...]
    eps: tuple[int, ...]

    def __post_init__(self):
        if len(self.J) != len(self.eps) or len(set(self.J)) != len(self.J):
            raise ValueError("J must be distinct indices with one sign each")
        if any(e not in (1, -1) for e in self.eps):
            raise ValueError("signs must be +-1")

    def shift(self, n: int) -> np.ndarray:
        e = np.zeros(n)
        for j, s in zip(self.J, self.eps):
            e[j] = s
        return e


def _check(z: complex, what: str, tol: float) -> None:
    if abs(z) < tol:
        raise RationalPole(f"{what} has a pole: argument {z:.3e} vanishes", obj=what, argument=z)


def v_factor(family, z, g: Couplings, tol: float = DEFAULT_TOL.tau_int) -> complex:
    z = complex(z)
    _check(z, "v(z)", tol)
    if as_family(family) is Family.T:
        return 1 / z
    return 1 + g.gM / z


def w_factor(family, z, g: Couplings, tol: float = DEFAULT_TOL.tau_int) -> complex:
    z = complex(z)
    _check(z, "w(z) at z", tol)
    _check(1 + 2 * z, "w(z) at 1+2z", tol)
    gS, gM, gL = g.triple
    if as_family(family) is Family.CS:
        return 0.5 / z * (0.5 + gS / (1 + 2 * z))
    return (1 + (0.5 * gS + gL) / z) * (1 + gS / (1 + 2 * z))


def _product(family, chosen, others, xi, g, pair_shift: int, tol) -> complex:
    # chosen: list of (index, sign); others: indices paired with every chosen one
    r = 1 + 0j
    for j, e in chosen:
        z = e * xi[j]
        r *= w_factor(family, z, g, tol)
        for k in others:
            r *= v_factor(family, z + xi[k], g, tol) * v_factor(family, z - xi[k], g, tol)
    for (j, e), (jp, ep) in itertools.combinations(chosen, 2):
        s = e * xi[j] + ep * xi[jp]
        second = s + 1 if pair_shift > 0 else -s - 1
        r *= v_factor(family, s, g, tol) * v_factor(family, second, g, tol)
    return r


def V_coeff(family, epsJ: SignedIndexSet, xi, g: Couplings, tol: float = DEFAULT_TOL.tau_int) -> complex:
    xi = np.asarray(xi, dtype=complex)
    rest = [k for k in range(len(xi)) if k not in epsJ.J]
    return _product(family, list(zip(epsJ.J, epsJ.eps)), rest, xi, g, +1, tol)


def U_coeff(family, K, p: int, xi, g: Couplings, tol: float = DEFAULT_TOL.tau_int) -> complex:
    xi = np.asarray(xi, dtype=complex)
    K = tuple(sorted(K))
    if not 0 <= p <= len(K):
        raise ValueError(f"p={p} outside 0..{len(K)}")
    total = 0j
    for I in itertools.combinations(K, p):
        rest = [k for k in K if k not in I]
        for eps in itertools.product((1, -1), repeat=p):
            total += _product(family, list(zip(I, eps)), rest, xi, g, -1, tol)
    return (-1) ** p * total


def E_eigenvalue(family, ell: int, x) -> complex:
    family = as_family(family)
    x = np.asarray(x, dtype=float)
    n = len(x)
    if not 1 <= ell <= n:
        raise ValueError(f"ell={ell} outside 1..{n}")
    if family is Family.BC:
        s = math.fsum(math.prod(math.sinh(x[j] / 2) ** 2 for j in J)
                      for J in itertools.combinations(range(n), ell))
        return complex(4**ell * s)
    if family is Family.CS:
        return complex(math.fsum(math.exp(sum(x[j] for j in J)) for J in itertools.combinations(range(n), ell)))
    val = math.exp(x[:ell].sum())
    if ell == n:
        val += math.exp(x[: n - 1].sum()) * (math.exp(-x[-1]) - 2)
    return complex(val)


def signed_sets(n: int, size: int):
    for J in itertools.combinations(range(n), size):
        for eps in itertools.product((1, -1), repeat=size):
            yield SignedIndexSet(J, eps)


# ---------------------------------------------------------------------------
# residuals

def shift_targets(xi, ell: int) -> list[np.ndarray]:
    xi = np.asarray(xi, dtype=complex)
    return [xi + s.shift(len(xi)) for k in range(ell + 1) for s in signed_sets(len(xi), k)]


def prescreen(xi, ell: int, tol: Tolerances = DEFAULT_TOL, seed: int = 0, size: float = 1e-3):
    """Return xi, or a seeded perturbation of it, with all shift targets regular.

    The second value reports whether a perturbation was applied.
    """
    xi = np.asarray(xi, dtype=complex)
    rng = np.random.default_rng(seed)
    cand = xi
    for attempt in range(20):
        if not any(singular_hyperplanes(t, tol.pole_guard) for t in shift_targets(cand, ell)):
            return cand, attempt > 0
        u = rng.standard_normal(len(xi)) + 1j * rng.standard_normal(len(xi))
        cand = xi + size * u / np.linalg.norm(u)
    raise RationalPole("could not move the shift targets off the singular hyperplanes",
                       obj="shifted spectral points", xi=xi)


class _PhiCache:
    def __init__(self, family, x, g, N, tol):
        self.family, self.x, self.g, self.N, self.tol = family, x, g, N, tol
        self.memo: dict[tuple, complex] = {}

    def __call__(self, xi) -> complex:
        key = tuple(np.round(np.asarray(xi) * 1e12).tolist())
        if key not in self.memo:
            data = orbit_data(self.family, xi, self.g, self.N, self.tol)
            self.memo[key] = evaluate(data, self.x, self.tol).value
        return self.memo[key]


def difference_lhs(family, ell: int, xi, x, g: Couplings, N: int = DEFAULT_N,
                   tol: Tolerances = DEFAULT_TOL, phi=None) -> complex:
    """General form: sum over |J| <= ell of U_{J^c, ell-|J|} V_{eps J} Phi_{xi + e_{eps J}}."""
    family = as_family(family)
    xi = np.asarray(xi, dtype=complex)
    n = len(xi)
    phi = phi or _PhiCache(family, x, g, N, tol)
    terms = []
    for k in range(ell + 1):
        for s in signed_sets(n, k):
            rest = [j for j in range(n) if j not in s.J]
            coef = U_coeff(family, rest, ell - k, xi, g, tol.tau_int) * V_coeff(family, s, xi, g, tol.tau_int)
            terms.append(coef * phi(xi + s.shift(n)))
    t = np.array(terms)
    return complex(math.fsum(t.real), math.fsum(t.imag))


def difference_lhs_special(family, ell: int, xi, x, g: Couplings, N: int = DEFAULT_N,
                           tol: Tolerances = DEFAULT_TOL, phi=None) -> complex:
    """The ell = 1, 2 forms written with differences Phi_shift - Phi.

    For ell = 2 the single-shift sum also carries -Phi: the J = empty
    coefficient satisfies U_{[n],2} = -sum V_pair - sum U_{[n]\\j,1} V_{eps j},
    so that is the rearrangement equivalent to the general form.
    """
    family = as_family(family)
    xi = np.asarray(xi, dtype=complex)
    n = len(xi)
    phi = phi or _PhiCache(family, x, g, N, tol)
    p0 = phi(xi)
    terms = []
    if ell == 1:
        for s in signed_sets(n, 1):
            terms.append(V_coeff(family, s, xi, g, tol.tau_int) * (phi(xi + s.shift(n)) - p0))
    elif ell == 2:
        for s in signed_sets(n, 2):
            terms.append(V_coeff(family, s, xi, g, tol.tau_int) * (phi(xi + s.shift(n)) - p0))
        for s in signed_sets(n, 1):
            rest = [j for j in range(n) if j != s.J[0]]
            coef = U_coeff(family, rest, 1, xi, g, tol.tau_int) * V_coeff(family, s, xi, g, tol.tau_int)
            terms.append(coef * (phi(xi + s.shift(n)) - p0))
    else:
        raise ValueError("specialized forms exist for ell = 1, 2 only")
    t = np.array(terms)
    return complex(math.fsum(t.real), math.fsum(t.imag))


@dataclass(frozen=True)
class DifferenceReport:
    residual: float
    lhs: complex
    rhs: complex
    xi_used: np.ndarray
    perturbed: bool


def difference_check(family, ell: int, xi, x, g: Couplings, N: int = DEFAULT_N,
                     specialized: bool = False, tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> DifferenceReport:
    family = as_family(family)
    x = check_chamber(family, np.asarray(x, dtype=float))
    xi_used, moved = prescreen(xi, ell, tol, seed)
    phi = _PhiCache(family, x, g, N, tol)
    lhs_fn = difference_lhs_special if specialized else difference_lhs
    lhs = lhs_fn(family, ell, xi_used, x, g, N, tol, phi)
    rhs = E_eigenvalue(family, ell, x) * phi(xi_used)
    return DifferenceReport(abs(lhs - rhs) / abs(rhs), lhs, rhs, xi_used, moved)


def difference_residual(family, ell: int, xi, x, g: Couplings, N: int = DEFAULT_N,
                        tol: Tolerances = DEFAULT_TOL, seed: int = 0) -> float:
    """|LHS - E_ell Phi_xi| / |E_ell Phi_xi| via the general form."""
    return difference_check(family, ell, xi, x, g, N, False, tol, seed).residual
