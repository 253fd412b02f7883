"""Shared domain types: families, couplings, the dominance-ordered lattice,
the BC_n-adapted root sets and the hyperoctahedral group.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import ChamberViolation


class Family(str, enum.Enum):
    """Which Hamiltonian: hyperoctahedral Calogero-Sutherland, boundary Toda,
    or Calogero-Sutherland in a Morse potential."""

    BC = "bc"
    T = "t"
    CS = "cs"

    def __str__(self) -> str:
        return self.value


def as_family(family) -> Family:
    return family if isinstance(family, Family) else Family(str(family).lower())


@dataclass(frozen=True)
class Tolerances:
    tau_int: float = 1e-9      # integer proximity in regularity tests
    tau_den: float = 1e-8      # recurrence denominator threshold
    tau_x: float = 1e-6        # chamber-wall margin for sinh arguments
    pole_guard: float = 1e-4   # switch to the extrapolation path below this
    pole_radius: float = 0.5   # hyperplanes absorbed by the regularizer

    def __post_init__(self):
        for name in ("tau_int", "tau_den", "tau_x", "pole_guard", "pole_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"tolerance {name} must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True)
class Couplings:
    """Coupling triple g = (g_S, g_M, g_L) plus optional auxiliary vector a.

    With ``a=None`` the normalized configuration a_j = 2 (j < n), a_n = 1/4
    is used for whatever n the computation has.
    """

    gS: complex = 0.0
    gM: complex = 0.0
    gL: complex = 0.0
    a: tuple[complex, ...] | None = None

    def __post_init__(self):
        for name in ("gS", "gM", "gL"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if self.a is not None:
            object.__setattr__(self, "a", tuple(complex(v) for v in self.a))

    @property
    def triple(self) -> tuple[complex, complex, complex]:
        return (self.gS, self.gM, self.gL)

    def aux(self, n: int) -> tuple[complex, ...]:
        if self.a is None:
            return normalized_aux(n)
        if len(self.a) != n:
            raise ValueError(f"auxiliary couplings have length {len(self.a)}, expected {n}")
        return self.a

    def replace(self, **kw) -> "Couplings":
        d = dict(gS=self.gS, gM=self.gM, gL=self.gL, a=self.a)
        d.update(kw)
        return Couplings(**d)


def normalized_aux(n: int) -> tuple[complex, ...]:
    return tuple([2.0 + 0j] * (n - 1) + [0.25 + 0j])


# ---------------------------------------------------------------------------
# special vectors and the dominance order

def rho_M(n: int) -> np.ndarray:
    return np.arange(n - 1, -1, -1, dtype=np.int64)


def rho_L(n: int) -> np.ndarray:
    return np.ones(n, dtype=np.int64)


def rho(n: int) -> np.ndarray:
    return np.arange(n, 0, -1, dtype=np.int64)


def dominance_geq(nu: Sequence[int]) -> bool:
    """True iff every prefix sum of ``nu`` is nonnegative."""
    if len(nu) < 1:
        raise ValueError("empty composition")
    return bool(np.all(np.cumsum(np.asarray(nu, dtype=np.int64)) >= 0))


def level(nu: Sequence[int]) -> int:
    """The grading <nu, rho>, i.e. the sum of the prefix sums of ``nu``."""
    return int(np.cumsum(np.asarray(nu, dtype=np.int64)).sum())


def enumerate_level(n: int, m: int) -> list[tuple[int, ...]]:
    """All nu >= 0 in Z^n with <nu, rho> = m.

    The prefix sums S_1..S_n are nonnegative and sum to m, so they are
    generated coordinate by coordinate with the remaining budget as the
    pruning bound. Output order is lexicographic in the prefix sums
    (descending), which fixes the memo-table layout.
    """
    if m < 0:
        raise ValueError("level must be nonnegative")
    out: list[tuple[int, ...]] = []
    prefix = [0] * n

    def rec(k: int, remaining: int) -> None:
        if k == n - 1:
            prefix[k] = remaining
            nu = [prefix[0]] + [prefix[i] - prefix[i - 1] for i in range(1, n)]
            out.append(tuple(nu))
            return
        for s in range(remaining, -1, -1):
            prefix[k] = s
            rec(k + 1, remaining - s)

    rec(0, m)
    return out


# ---------------------------------------------------------------------------
# roots

@dataclass(frozen=True)
class Root:
    """A root of R = R_S u R_M^+ u R_M^- u R_L; ``kind`` is S, M+, M- or L."""

    kind: str
    alpha: tuple[int, ...]

    @property
    def height(self) -> int:
        return level(self.alpha)


@lru_cache(maxsize=None)
def root_system(n: int) -> tuple[Root, ...]:
    roots = []
    for j in range(n):
        roots.append(Root("S", _unit(n, {j: 1})))
    for j in range(n):
        for k in range(j + 1, n):
            roots.append(Root("M-", _unit(n, {j: 1, k: -1})))
            roots.append(Root("M+", _unit(n, {j: 1, k: 1})))
    for j in range(n):
        roots.append(Root("L", _unit(n, {j: 2})))
    return tuple(roots)


def _unit(n: int, entries: dict[int, int]) -> tuple[int, ...]:
    v = [0] * n
    for j, c in entries.items():
        v[j] = c
    return tuple(v)


# ---------------------------------------------------------------------------
# hyperoctahedral group

@dataclass(frozen=True)
class SignedPermutation:
    """w = (eps, sigma) acting by (w xi)_j = eps_j xi_{sigma^{-1}(j)}.

    ``sigma`` is stored 0-based as the tuple (sigma(0), ..., sigma(n-1)).
    """

    eps: tuple[int, ...]
    sigma: tuple[int, ...]

    def __post_init__(self):
        if len(self.eps) != len(self.sigma):
            raise ValueError("eps and sigma differ in length")
        if sorted(self.sigma) != list(range(len(self.sigma))):
            raise ValueError(f"not a permutation: {self.sigma}")
        if any(e not in (1, -1) for e in self.eps):
            raise ValueError(f"signs must be +-1: {self.eps}")

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def sigma_inv(self) -> tuple[int, ...]:
        inv = [0] * self.n
        for i, s in enumerate(self.sigma):
            inv[s] = i
        return tuple(inv)

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls((1,) * n, tuple(range(n)))

    def act(self, xi):
        xi = np.asarray(xi)
        if xi.shape[-1] != self.n:
            raise ValueError(f"dimension mismatch: group of rank {self.n}, point of length {xi.shape[-1]}")
        inv = self.sigma_inv
        return np.asarray(self.eps) * xi[..., list(inv)]

    def __mul__(self, other: "SignedPermutation") -> "SignedPermutation":
        if other.n != self.n:
            raise ValueError("rank mismatch")
        inv = self.sigma_inv
        sigma = tuple(self.sigma[other.sigma[i]] for i in range(self.n))
        eps = tuple(self.eps[j] * other.eps[inv[j]] for j in range(self.n))
        return SignedPermutation(eps, sigma)


def act(w: SignedPermutation, xi) -> np.ndarray:
    return w.act(xi)


@lru_cache(maxsize=None)
def hyperoctahedral_group(n: int) -> tuple[SignedPermutation, ...]:
    """All 2^n n! signed permutations in a fixed order (identity first)."""
    return tuple(
        SignedPermutation(eps, sigma)
        for sigma in itertools.permutations(range(n))
        for eps in itertools.product((1, -1), repeat=n)
    )


def orbit_matrix(xi) -> np.ndarray:
    """Stack of w xi for all w, rows in the order of hyperoctahedral_group."""
    xi = np.asarray(xi, dtype=complex)
    return np.array([w.act(xi) for w in hyperoctahedral_group(len(xi))])


# ---------------------------------------------------------------------------
# regularity of spectral points

@dataclass(frozen=True)
class Hyperplane:
    """Linear form <coef, xi> = value with an integer value."""

    coef: tuple[int, ...]
    value: int
    distance: float

    def describe(self) -> str:
        terms = []
        for j, c in enumerate(self.coef):
            if c:
                terms.append(f"{'+' if c > 0 else '-'}{abs(c) if abs(c) != 1 else ''}xi_{j + 1}")
        lhs = "".join(terms).lstrip("+")
        return f"{lhs} = {self.value}"


def _forms(n: int) -> Iterator[tuple[int, ...]]:
    for j in range(n):
        yield _unit(n, {j: 2})
    for j in range(n):
        for k in range(j + 1, n):
            yield _unit(n, {j: 1, k: 1})
            yield _unit(n, {j: 1, k: -1})


def singular_hyperplanes(xi, radius: float, positive_only: bool = False) -> list[Hyperplane]:
    """Hyperplanes 2xi_j in Z, xi_j +- xi_k in Z lying within ``radius`` of xi
    (distance measured in the linear form)."""
    xi = np.asarray(xi, dtype=complex)
    n = len(xi)
    hits = []
    for coef in _forms(n):
        val = complex(np.dot(coef, xi))
        k = int(round(val.real))
        if positive_only and k <= 0:
            continue
        d = abs(val - k)
        if d < radius:
            hits.append(Hyperplane(coef, k, d))
    return sorted(hits, key=lambda h: h.distance)


def is_regular(xi, tol: float = DEFAULT_TOL.tau_int) -> bool:
    """Membership in C^n_reg: no 2xi_j in Z, no xi_j +- xi_k in Z."""
    return not singular_hyperplanes(xi, tol)


def is_regular_plus(xi, tol: float = DEFAULT_TOL.tau_int) -> bool:
    """Membership in C^n_{reg,+}: only positive integers are excluded."""
    return not singular_hyperplanes(xi, tol, positive_only=True)


# ---------------------------------------------------------------------------
# chambers

def in_chamber(family, x, margin: float = 0.0) -> bool:
    family = as_family(family)
    x = np.asarray(x, dtype=float)
    gaps = -np.diff(x)
    if family is Family.BC:
        return bool(np.all(gaps > margin) and x[-1] > margin)
    if family is Family.T:
        return bool(x[-1] > margin)
    return bool(np.all(gaps > margin))


def check_chamber(family, x, margin: float = 0.0) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or not np.all(np.isfinite(x)):
        raise ChamberViolation("position must be a finite real vector", obj="A^r", x=x)
    if not in_chamber(family, x, margin):
        fam = as_family(family)
        raise ChamberViolation(
            f"x={x.tolist()} is outside the {fam.value} chamber (margin {margin})",
            obj=f"A^{fam.value}", x=x, family=fam.value,
        )
    return x

