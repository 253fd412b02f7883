"""Hyperoctahedrally symmetrized wave functions.

Phi_xi(x) = sum_{w in W} C(w xi) phi_{w xi}(x). All 2^n n! coefficient tables
are solved in one batched sweep. Each orbit term is carried as
log C(w xi) + <w xi, x> plus a reduced series value, and the terms are added
after factoring out the largest real exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    DEFAULT_TOL, Couplings, Tolerances, as_family, check_chamber, orbit_matrix,
    singular_hyperplanes,
)
from .errors import ExtrapolationDivergence, NearSingularSpectral
from .hcseries import DEFAULT_N, Lattice, reduced_sums, solve_batch, tail_estimate
from .special import log_c_function_batch


@dataclass(frozen=True, eq=False)
class OrbitData:
    """Everything about Phi_xi that does not depend on x."""

    family: object
    xi: np.ndarray
    orbit: np.ndarray       # (|W|, n), rows follow hyperoctahedral_group order
    log_c: np.ndarray       # (|W|,), real part -inf where C vanishes
    lattice: Lattice
    coeffs: np.ndarray      # (size, |W|)

    def log_terms(self, x: np.ndarray) -> np.ndarray:
        return self.log_c + self.orbit @ x


def guard(xi, tol: Tolerances = DEFAULT_TOL) -> None:
    hits = singular_hyperplanes(xi, tol.pole_guard)
    if hits:
        h = hits[0]
        raise NearSingularSpectral(
            f"xi={np.asarray(xi).tolist()} lies {h.distance:.2e} from the hyperplane {h.describe()}; "
            "use wavefunction_regular",
            obj=f"hyperplane {h.describe()}", hyperplane=h.describe(), distance=h.distance,
        )


def orbit_data(family, xi, g: Couplings, N: int = DEFAULT_N, tol: Tolerances = DEFAULT_TOL,
               check: bool = True) -> OrbitData:
    family = as_family(family)
    xi = np.asarray(xi, dtype=complex).ravel()
    if check:
        guard(xi, tol)
    orbit = orbit_matrix(xi)
    log_c = log_c_function_batch(family, orbit, g)
    lat, A = solve_batch(family, orbit, g, N, tol)
    return OrbitData(family, xi, orbit, log_c, lat, A)


def combine(log_terms: np.ndarray, values: np.ndarray) -> complex:
    """sum_w exp(log_terms[w]) * values[w] with a common exponent factored out."""
    live = np.isfinite(log_terms.real) & (values != 0)
    if not live.any():
        return 0j
    m = float(np.max(log_terms.real[live]))
    t = np.exp(log_terms[live] - m) * values[live]
    s = complex(math.fsum(t.real), math.fsum(t.imag))
    return s * math.exp(m) if s else 0j


@dataclass(frozen=True)
class WaveValue:
    value: complex
    tail_bound: float


def evaluate(data: OrbitData, x, tol: Tolerances = DEFAULT_TOL) -> WaveValue:
    x = check_chamber(data.family, np.asarray(x, dtype=float))
    sums, level_abs = reduced_sums(data.lattice, data.coeffs, x)
    lt = data.log_terms(x)
    tails = np.array([tail_estimate(level_abs[:, b]) for b in range(level_abs.shape[1])])
    live = np.isfinite(lt.real)
    tail = float(np.sum(np.exp(lt.real[live]) * tails[live])) if live.any() else 0.0
    return WaveValue(combine(lt, sums), tail)


def wavefunction(family, xi, x, g: Couplings, N: int = DEFAULT_N, tol: Tolerances = DEFAULT_TOL) -> complex:
    """Phi^r_xi(x; g) for xi away from the hyperplanes 2xi_j, xi_j +- xi_k in Z."""
    return evaluate(orbit_data(family, xi, g, N, tol), x, tol).value


def orbit_terms(family, xi, x, g: Couplings, N: int = DEFAULT_N, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """The individual terms C(w xi) phi_{w xi}(x), unguarded, in group order."""
    data = orbit_data(family, xi, g, N, tol, check=False)
    x = check_chamber(data.family, np.asarray(x, dtype=float))
    sums, _ = reduced_sums(data.lattice, data.coeffs, x)
    return np.exp(data.log_terms(x)) * sums


@dataclass(frozen=True)
class RegularValue:
    value: complex
    error: float
    offsets: tuple[float, ...]
    samples: tuple[complex, ...]
    direction: np.ndarray


def _neville_at_zero(h: np.ndarray, y: np.ndarray) -> complex:
    p = [complex(v) for v in y]
    k = len(p)
    for m in range(1, k):
        for i in range(k - m):
            p[i] = (h[i + m] * p[i] - h[i] * p[i + 1]) / (h[i + m] - h[i])
    return p[0]


def wavefunction_regular(family, xi0, x, g: Couplings, N: int = DEFAULT_N,
                         offsets=(1e-2, 1e-3, 1e-4), seed: int = 0,
                         tol: Tolerances = DEFAULT_TOL) -> RegularValue:
    """Phi at xi0 as the limit delta -> 0 of Phi(xi0 + delta u).

    u is a random real unit vector fixed by ``seed``. The samples are
    extrapolated to delta = 0 by polynomial interpolation; the error estimate
    is the change when the largest offset is dropped.
    """
    xi0 = np.asarray(xi0, dtype=complex).ravel()
    offsets = tuple(float(d) for d in offsets)
    if len(offsets) < 2 or any(d <= 0 for d in offsets):
        raise ValueError("need at least two positive offsets")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(len(xi0))
    u /= np.linalg.norm(u)
    samples = []
    for d in offsets:
        data = orbit_data(family, xi0 + d * u, g, N, tol, check=False)
        samples.append(evaluate(data, x, tol).value)
    y = np.array(samples)
    h = np.array(offsets)
    mags = np.abs(y)
    growth = mags.max() / max(mags.min(), np.finfo(float).tiny)
    limit = math.sqrt(h.max() / h.min())
    if growth > limit:
        raise ExtrapolationDivergence(
            f"|Phi| changes by a factor {growth:.3g} over offsets {offsets}, consistent with a pole",
            obj="Phi near a singular hyperplane", xi=xi0, samples=samples,
        )
    full = _neville_at_zero(h, y)
    coarse = _neville_at_zero(h[1:], y[1:])
    return RegularValue(full, float(abs(full - coarse)), offsets, tuple(samples), u)


def plane_wave_gap(family, xi, x, g: Couplings, N: int = DEFAULT_N, tol: Tolerances = DEFAULT_TOL) -> float:
    """|Phi_xi(x) - sum_w C(w xi) e^{<w xi, x>}|."""
    data = orbit_data(family, xi, g, N, tol)
    x = check_chamber(data.family, np.asarray(x, dtype=float))
    sums, _ = reduced_sums(data.lattice, data.coeffs, x)
    return abs(combine(data.log_terms(x), sums - data.coeffs[0]))


def plane_wave_envelope(family, xi, x, g: Couplings, N: int = DEFAULT_N, tol: Tolerances = DEFAULT_TOL) -> float:
    """sum_w |C(w xi)| |phi_{w xi}(x) - e^{<w xi, x>}|, an upper bound for plane_wave_gap.

    The orbit terms interfere, so the gap itself oscillates as x moves; this
    bound does not.
    """
    data = orbit_data(family, xi, g, N, tol)
    x = check_chamber(data.family, np.asarray(x, dtype=float))
    sums, _ = reduced_sums(data.lattice, data.coeffs, x)
    lt = data.log_terms(x).real
    live = np.isfinite(lt)
    return float(math.fsum(np.exp(lt[live]) * np.abs(sums - data.coeffs[0])[live]))
