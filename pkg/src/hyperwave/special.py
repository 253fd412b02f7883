"""Gamma-function kernel and the gamma-built objects of the wave function:
one-variable c-factors, the full c-function, the confluence prefactors and
the weight relating the bc wave function to the BC_n hypergeometric function.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, Couplings, Family, as_family, check_chamber
from .errors import PoleOfGamma

# Lanczos kernel, g = 671/128 - 1/2, 14 terms; ~1e-15 relative on Re z >= 1/2.
_LANCZOS_SHIFT = 5.24218750000000000
_LANCZOS_C0 = 0.999999999999997092
_LANCZOS_COEF = np.array([
    57.1562356658629235, -59.5979603554754912, 14.1360979747417471,
    -0.491913816097620199, 0.339946499848118887e-4, 0.465236289270485756e-4,
    -0.983744753048795646e-4, 0.158088703224912494e-3, -0.210264441724104883e-3,
    0.217439618115212643e-3, -0.164318106536763890e-3, 0.844182239838527433e-4,
    -0.261908384015814087e-4, 0.368991826595316234e-5,
])
_SQRT_2PI = 2.5066282746310005
_LOG_PI = math.log(math.pi)
_LOG_I_HALF = complex(-math.log(2.0), math.pi / 2)  # principal log(i/2)


def _lanczos(z: np.ndarray) -> np.ndarray:
    # log Gamma(z) for Re z >= 1/2; the rational sum stays off the negative
    # real axis there, so every log below is on its principal branch.
    t = z + _LANCZOS_SHIFT
    ser = np.full_like(z, _LANCZOS_C0)
    for j, c in enumerate(_LANCZOS_COEF):
        ser = ser + c / (z + (j + 1))
    return (z + 0.5) * np.log(t) - t + np.log(_SQRT_2PI * ser / z)


def _log_sin_pi_upper(z: np.ndarray) -> np.ndarray:
    # Analytic log sin(pi z) on Im z >= 0 that is real on (0, 1):
    # sin(pi z) = (i/2) e^{-i pi z} (1 - e^{2 pi i z}).
    q = np.exp(2j * np.pi * z)
    return -1j * np.pi * z + np.log1p(-q) + _LOG_I_HALF


def _pole_mask(z: np.ndarray, tol: float) -> np.ndarray:
    k = np.round(z.real)
    return (k <= 0) & (np.abs(z - k) < tol)


def log_gamma(z, tol: float = DEFAULT_TOL.tau_int):
    """Principal-branch log Gamma(z), vectorized.

    On the negative real axis (a branch cut) the limit from the upper half
    plane is returned.
    """
    scalar = np.isscalar(z)
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    poles = _pole_mask(za, tol)
    if poles.any():
        bad = complex(za[poles][0])
        raise PoleOfGamma(f"Gamma has a pole at z={bad}", obj="Gamma(z)", z=bad)
    out = np.empty_like(za)
    right = za.real >= 0.5
    if right.any():
        out[right] = _lanczos(za[right])
    left = ~right
    if left.any():
        zl = za[left]
        lower = zl.imag < 0
        zu = np.where(lower, np.conj(zl), zl)
        val = _LOG_PI - _log_sin_pi_upper(zu) - _lanczos(1.0 - zu)
        out[left] = np.where(lower, np.conj(val), val)
    return complex(out[0]) if scalar else out.reshape(np.shape(z))


def gamma(z) -> complex:
    return cmath.exp(log_gamma(complex(z)))


# ---------------------------------------------------------------------------
# gamma ratios with pole bookkeeping

def _nonpositive_int(z: complex, tol: float) -> int | None:
    k = round(z.real)
    if k <= 0 and abs(z - k) < tol:
        return -k
    return None


def log_gamma_ratio(num, den, num_slope=None, den_slope=None,
                    tol: float = DEFAULT_TOL.tau_int) -> complex | None:
    """log of prod Gamma(num) / prod Gamma(den), or None when the ratio is 0.

    Arguments sitting exactly on poles are paired off as a limit: each
    argument is read as an affine function of a common variable with the
    given slope, so Gamma(-k + s*eps) ~ (-1)^k / (k! s eps). A surplus of
    numerator poles raises PoleOfGamma.
    """
    num = [complex(v) for v in num]
    den = [complex(v) for v in den]
    num_slope = num_slope or [1] * len(num)
    den_slope = den_slope or [1] * len(den)
    acc = 0j
    npoles = dpoles = 0
    for z, s in zip(num, num_slope):
        k = _nonpositive_int(z, tol)
        if k is None:
            acc += log_gamma(z)
        else:
            npoles += 1
            acc += _log_pole_residue(k, s)
    for z, s in zip(den, den_slope):
        k = _nonpositive_int(z, tol)
        if k is None:
            acc -= log_gamma(z)
        else:
            dpoles += 1
            acc -= _log_pole_residue(k, s)
    if npoles > dpoles:
        raise PoleOfGamma(
            f"gamma ratio is singular: numerator arguments {num} over {den}",
            obj="Gamma ratio", numerator=num, denominator=den,
        )
    if dpoles > npoles:
        return None
    return acc


def _log_pole_residue(k: int, slope: float) -> complex:
    # log of (-1)^k / (k! * slope)
    return complex(-math.lgamma(k + 1) - math.log(abs(slope)),
                   math.pi * (k % 2) + (math.pi if slope < 0 else 0.0))


def _exp_or_zero(v: complex | None) -> complex:
    return 0j if v is None else cmath.exp(v)


# ---------------------------------------------------------------------------
# c-functions

def _c_factor_args(family: Family, kind: str, z: complex, g: Couplings):
    gS, gM, gL = g.triple
    if kind == "v":
        if family is Family.T:
            return [z], [], [1], []
        return [z], [gM + z], [1], [1]
    if kind == "w":
        if family is Family.CS:
            return [2 * z], [0.5 + gS + z], [2], [1]
        return [2 * z, 0.5 * gS + z], [gS + 2 * z, 0.5 * gS + gL + z], [2, 1], [2, 1]
    raise ValueError(f"unknown c-factor kind {kind!r}")


def log_c_factor(family, kind: str, z, g: Couplings) -> complex | None:
    num, den, ns, ds = _c_factor_args(as_family(family), kind, complex(z), g)
    return log_gamma_ratio(num, den, ns, ds)


def c_factor(family, kind: str, z, g: Couplings) -> complex:
    """c_v(z) or c_w(z) for the given family."""
    return _exp_or_zero(log_c_factor(family, kind, z, g))


@dataclass(frozen=True)
class CFunctionValue:
    """value * exp(log_scale); value has unit modulus unless the product is 0."""

    value: complex
    log_scale: float

    @classmethod
    def from_log(cls, logv: complex | None) -> "CFunctionValue":
        if logv is None:
            return cls(0j, 0.0)
        return cls(cmath.exp(1j * logv.imag), logv.real)

    def to_complex(self) -> complex:
        return self.value * math.exp(self.log_scale) if self.value else 0j

    def log(self) -> complex | None:
        if self.value == 0:
            return None
        return complex(self.log_scale, cmath.phase(self.value))


def log_c_function(family, xi, g: Couplings) -> complex | None:
    family = as_family(family)
    xi = [complex(v) for v in xi]
    n = len(xi)
    total = 0j
    factors = [("w", xi[j]) for j in range(n)]
    for j in range(n):
        for k in range(j + 1, n):
            factors.append(("v", xi[j] + xi[k]))
            factors.append(("v", xi[j] - xi[k]))
    for kind, z in factors:
        try:
            lv = log_c_factor(family, kind, z, g)
        except PoleOfGamma as exc:
            raise PoleOfGamma(
                f"c_{kind}({z}) is singular in C^{family.value}({xi})",
                obj=f"c_{kind}", factor=kind, argument=z, xi=xi,
            ) from exc
        if lv is None:
            return None
        total += lv
    return total


def c_function(family, xi, g: Couplings) -> CFunctionValue:
    """C^r(xi; g), accumulated in log scale."""
    return CFunctionValue.from_log(log_c_function(family, xi, g))


def log_c_function_batch(family, xis: np.ndarray, g: Couplings) -> np.ndarray:
    """log C^r for each row of ``xis``; -inf real part encodes a zero value."""
    family = as_family(family)
    xis = np.asarray(xis, dtype=complex)
    B, n = xis.shape
    gS, gM, gL = g.triple
    num, den = [], []
    w = xis
    num.append(2 * w)
    if family is Family.CS:
        den.append(0.5 + gS + w)
    else:
        num.append(0.5 * gS + w)
        den.append(gS + 2 * w)
        den.append(0.5 * gS + gL + w)
    ju, ku = np.triu_indices(n, 1)
    if len(ju):
        pair = np.concatenate([xis[:, ju] + xis[:, ku], xis[:, ju] - xis[:, ku]], axis=1)
        num.append(pair)
        if family is not Family.T:
            den.append(gM + pair)
    allargs = np.concatenate([a.ravel() for a in num + den])
    if _pole_mask(allargs, DEFAULT_TOL.tau_int).any():
        out = np.empty(B, dtype=complex)
        for b in range(B):
            lv = log_c_function(family, xis[b], g)
            out[b] = complex(-np.inf, 0.0) if lv is None else lv
        return out
    total = np.zeros(B, dtype=complex)
    for a in num:
        total += log_gamma(a).sum(axis=1)
    for a in den:
        total -= log_gamma(a).sum(axis=1)
    return total


# ---------------------------------------------------------------------------
# confluence prefactors and the hypergeometric weight

def log_confluence_prefactor(kind: str, g: Couplings, n: int) -> complex | None:
    gS, gM, gL = g.triple
    if kind == "M":
        lv = log_gamma_ratio([gM], [])
        return None if lv is None else n * (n - 1) * lv
    if kind == "L":
        # slopes in g_S, so g_S = 0 is read as the limit Gamma(g_S)/Gamma(g_S/2) -> 1/2
        lv = log_gamma_ratio([gS, 0.5 * gS + gL], [0.5 * gS, 0.5 + 0.5 * gS], [1, 0.5], [0.5, 0.5])
        return None if lv is None else n * lv
    raise ValueError(f"unknown confluence kind {kind!r}")


def confluence_prefactor(kind: str, g: Couplings, n: int) -> complex:
    """gamma_M(g) = Gamma(g_M)^{n(n-1)} or
    gamma_L(g) = (Gamma(g_S) Gamma(g_S/2 + g_L) / (Gamma(g_S/2) Gamma(1/2 + g_S/2)))^n."""
    if kind == "M":
        # integer power: evaluate without the 2*pi*i ambiguity of n(n-1)*log
        return complex(gamma(g.gM) ** (n * (n - 1))) if n > 1 else 1 + 0j
    return _exp_or_zero(log_confluence_prefactor(kind, g, n))


def weight_and_rho(x, g: Couplings, n: int | None = None):
    """delta(x; g) and rho_g, with Phi^bc = delta * C^bc(rho_g) * F_{BC_n}."""
    x = check_chamber(Family.BC, x)
    n = len(x) if n is None else n
    if n != len(x):
        raise ValueError("dimension mismatch")
    gS, gM, gL = g.triple

    def pw(base: float, e: complex) -> complex:
        return complex(base) ** e if e != 0 else 1 + 0j

    delta = 1 + 0j
    for j in range(n):
        delta *= pw(2 * math.sinh(x[j] / 2), gS) * pw(2 * math.sinh(x[j]), gL)
    for j in range(n):
        for k in range(j + 1, n):
            delta *= pw(2 * math.sinh((x[j] + x[k]) / 2), gM) * pw(2 * math.sinh((x[j] - x[k]) / 2), gM)
    rho_g = np.array([(n - 1 - j) * gM + 0.5 * gS + gL for j in range(n)], dtype=complex)
    return delta, rho_g
