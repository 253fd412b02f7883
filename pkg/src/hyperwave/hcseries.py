"""Harish-Chandra coefficients, the local regularizer and truncated series.

The coefficient lattice {nu >= 0 : <nu, rho> <= N} and its recurrence edges
(nu, nu - l*alpha) depend only on (n, N); they are built once and cached.
Family and couplings only enter through the edge weights a_{alpha,l}(g), and
the spectral point only through the denominators <nu - 2xi, nu>. That split
lets one sparse triangular sweep solve for many spectral points at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .core import (
    DEFAULT_TOL, Couplings, Family, Tolerances, as_family, check_chamber, enumerate_level,
    in_chamber, rho, root_system,
)
from .errors import ChamberViolation, SpectralPlaneSingularity

DEFAULT_N = 30


# ---------------------------------------------------------------------------
# recurrence coefficients a^r_{alpha,l}(g)

def _root_law(family: Family, alpha: tuple[int, ...], g: Couplings) -> tuple[complex, bool]:
    """(base, proportional): a_{alpha,l} = base*l if proportional else base*[l == 1]."""
    n = len(alpha)
    gS, gM, gL = g.triple
    nz = [j for j, c in enumerate(alpha) if c]
    vals = [alpha[j] for j in nz]
    single = len(nz) == 1
    if family is Family.BC:
        if single and vals == [1]:
            return gS * (gS + 2 * gL - 1), True
        if single and vals == [2]:
            return 4 * gL * (gL - 1), True
        return 2 * gM * (gM - 1), True
    if family is Family.T:
        a = g.aux(n)
        if single and nz == [n - 1]:
            if vals == [1]:
                return gS * (gS + 2 * gL - 1), True
            return 4 * gL * (gL - 1), True
        if len(nz) == 2 and nz[1] == nz[0] + 1:
            j = nz[0]
            if vals == [1, -1]:
                return a[j], False
            if vals == [1, 1] and j == n - 2:
                return a[n - 2], False
        return 0j, True
    # cs
    if single and vals == [1]:
        return gS, False
    if single and vals == [2]:
        return g.aux(n)[n - 1], False
    if vals == [1, -1]:
        return 2 * gM * (gM - 1), True
    return 0j, True


def recurrence_coeff(family, alpha, l: int, g: Couplings) -> complex:
    """a^r_{alpha,l}(g); zero for (family, alpha) pairs outside the tables."""
    if l < 1:
        raise ValueError("l must be >= 1")
    base, proportional = _root_law(as_family(family), tuple(int(v) for v in alpha), g)
    if proportional:
        return complex(base * l)
    return complex(base) if l == 1 else 0j


# ---------------------------------------------------------------------------
# the coefficient lattice

@dataclass(frozen=True, eq=False)
class Lattice:
    n: int
    N: int
    nus: np.ndarray          # (size, n), ordered by level
    offsets: np.ndarray      # level m occupies nus[offsets[m]:offsets[m+1]]
    norms: np.ndarray        # <nu, nu>
    prefix: np.ndarray       # prefix sums of each nu
    edge_child: np.ndarray
    edge_parent: np.ndarray
    edge_root: np.ndarray
    edge_l: np.ndarray
    edge_offsets: np.ndarray  # edges of children at level m
    _index: dict = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.nus)

    def index(self, nu) -> int:
        return self._index[tuple(int(v) for v in nu)]

    def levels(self) -> np.ndarray:
        return np.repeat(np.arange(self.N + 1), np.diff(self.offsets))


@lru_cache(maxsize=32)
def lattice(n: int, N: int) -> Lattice:
    if n < 1 or N < 0:
        raise ValueError("need n >= 1 and N >= 0")
    blocks = [np.array(enumerate_level(n, m), dtype=np.int64).reshape(-1, n) for m in range(N + 1)]
    nus = np.concatenate(blocks)
    offsets = np.concatenate([[0], np.cumsum([len(b) for b in blocks])])
    prefix = np.cumsum(nus, axis=1)
    base = (N + 1) ** np.arange(n, dtype=np.int64)
    keys = prefix @ base
    order = np.argsort(keys)
    skeys = keys[order]
    lev = np.repeat(np.arange(N + 1), np.diff(offsets))

    children, parents, roots, ls = [], [], [], []
    for r, root in enumerate(root_system(n)):
        a_pre = np.cumsum(np.array(root.alpha, dtype=np.int64))
        h = int(a_pre.sum())
        for l in range(1, N // h + 1):
            pp = prefix - l * a_pre
            ok = (lev >= l * h) & np.all(pp >= 0, axis=1)
            if not ok.any():
                continue
            idx = np.nonzero(ok)[0]
            pos = np.searchsorted(skeys, pp[idx] @ base)
            children.append(idx)
            parents.append(order[pos])
            roots.append(np.full(len(idx), r))
            ls.append(np.full(len(idx), l))
    child = np.concatenate(children) if children else np.zeros(0, np.int64)
    parent = np.concatenate(parents) if parents else np.zeros(0, np.int64)
    root_ix = np.concatenate(roots) if roots else np.zeros(0, np.int64)
    l_arr = np.concatenate(ls) if ls else np.zeros(0, np.int64)
    srt = np.argsort(child, kind="stable")
    child, parent, root_ix, l_arr = child[srt], parent[srt], root_ix[srt], l_arr[srt]
    edge_offsets = np.searchsorted(child, offsets)
    index = {tuple(v): i for i, v in enumerate(nus.tolist())}
    for arr in (nus, offsets, prefix, child, parent, root_ix, l_arr, edge_offsets):
        arr.setflags(write=False)
    return Lattice(n, N, nus, offsets, np.einsum("ij,ij->i", nus, nus), prefix,
                   child, parent, root_ix, l_arr, edge_offsets, index)


def edge_weights(family, g: Couplings, lat: Lattice, shift: tuple[float, np.ndarray] | None = None) -> np.ndarray:
    """a^r_{alpha,l}(g) per lattice edge.

    ``shift=(c, v)`` multiplies each weight by exp(-c l <alpha, v>), the
    recurrence input of the translated series x -> x + c v.
    """
    family = as_family(family)
    roots = root_system(lat.n)
    laws = [_root_law(family, r.alpha, g) for r in roots]
    base = np.array([b for b, _ in laws], dtype=complex)[lat.edge_root]
    prop = np.array([p for _, p in laws])[lat.edge_root]
    l = lat.edge_l
    w = np.where(prop, base * l, np.where(l == 1, base, 0))
    if shift is not None:
        c, v = shift
        heights = np.array([np.dot(r.alpha, v) for r in roots], dtype=float)[lat.edge_root]
        w = w * np.exp(-c * l * heights)
    return w


# ---------------------------------------------------------------------------
# tables

@dataclass(frozen=True, eq=False)
class CoeffTable:
    """Harish-Chandra coefficients a_nu(xi; g) for level(nu) <= N.

    With ``regularized`` set, stored values are Delta_U(xi) * a_nu and the
    nu = 0 entry equals Delta_U. ``shift`` records a translated recurrence
    input (see edge_weights).
    """

    family: Family
    xi: np.ndarray
    g: Couplings
    N: int
    coeffs: np.ndarray
    lattice: Lattice
    regularized: bool = False
    delta_u: complex = 1 + 0j
    flagged: tuple[tuple[int, ...], ...] = ()
    shift: tuple[float, tuple[int, ...]] | None = None

    def __getitem__(self, nu) -> complex:
        nu = tuple(int(v) for v in nu)
        try:
            return complex(self.coeffs[self.lattice.index(nu)])
        except KeyError:
            if len(nu) == self.lattice.n and np.any(np.cumsum(nu) < 0):
                return 0j
            raise KeyError(f"{nu} is not stored (level cap {self.N})") from None

    @property
    def entries(self) -> dict[tuple[int, ...], complex]:
        return {tuple(v): complex(c) for v, c in zip(self.lattice.nus.tolist(), self.coeffs)}

    def level_slice(self, m: int) -> slice:
        return slice(int(self.lattice.offsets[m]), int(self.lattice.offsets[m + 1]))


def denominators(lat: Lattice, xis: np.ndarray) -> np.ndarray:
    """<nu - 2xi, nu> for every lattice point (rows) and spectral point (cols)."""
    return lat.norms[:, None] - 2.0 * (lat.nus @ xis.T)


def _raise_singular(lat: Lattice, xis: np.ndarray, d: np.ndarray, bad: np.ndarray, offset: int):
    i, b = np.argwhere(bad)[0]
    nu = tuple(int(v) for v in lat.nus[offset + i])
    raise SpectralPlaneSingularity(
        f"recurrence denominator <nu-2xi,nu> = {complex(d[i, b]):.3e} nearly vanishes at nu={nu} "
        f"for xi={xis[b].tolist()}; rebuild with regularize=True",
        obj="hyperplane <mu-2xi,mu> = 0", nu=nu, xi=xis[b], denominator=complex(d[i, b]),
    )


def solve_batch(family, xis, g: Couplings, N: int, tol: Tolerances = DEFAULT_TOL,
                shift=None) -> tuple[Lattice, np.ndarray]:
    """Unregularized coefficients for every row of ``xis``: (lattice, (size, B))."""
    xis = np.atleast_2d(np.asarray(xis, dtype=complex))
    B, n = xis.shape
    lat = lattice(n, N)
    w = edge_weights(family, g, lat, shift)
    den = denominators(lat, xis)
    A = np.zeros((lat.size, B), dtype=complex)
    A[0] = 1.0
    for m in range(1, N + 1):
        s, e = lat.offsets[m], lat.offsets[m + 1]
        d = den[s:e]
        bad = np.abs(d) < tol.tau_den * (1.0 + lat.norms[s:e, None])
        if bad.any():
            _raise_singular(lat, xis, d, bad, s)
        A[s:e] = _level_rhs(lat, w, A, m) / d
    return lat, A


def _level_rhs(lat: Lattice, w: np.ndarray, A: np.ndarray, m: int) -> np.ndarray:
    s, e = lat.offsets[m], lat.offsets[m + 1]
    es, ee = lat.edge_offsets[m], lat.edge_offsets[m + 1]
    we = w[es:ee]
    nz = we != 0
    if not nz.any():
        return np.zeros((e - s,) + A.shape[1:], dtype=complex)
    M = sp.csr_matrix((we[nz], (lat.edge_child[es:ee][nz] - s, lat.edge_parent[es:ee][nz])),
                      shape=(e - s, s))
    return M @ A[:s]


def _solve_regularized(lat: Lattice, w: np.ndarray, xi: np.ndarray, pole_radius: float):
    d = denominators(lat, xi[None, :])[:, 0]
    near = np.abs(d) < pole_radius * (1.0 + lat.norms)
    near[0] = False
    F = np.nonzero(near)[0]
    # anc[i, f]: mu_f <= nu_i in the dominance order (mu_f itself included)
    anc = np.all(lat.prefix[:, None, :] - lat.prefix[None, F, :] >= 0, axis=2)
    is_f = np.zeros((lat.size, len(F)), dtype=bool)
    is_f[F, np.arange(len(F))] = True
    dF = d[F]
    # r_nu = a_nu * prod_{f in anc(nu)} d_f is division-free at flagged nu
    child, parent = lat.edge_child, lat.edge_parent
    extra = anc[child] & ~anc[parent] & ~is_f[child]
    factor = np.where(extra, dF[None, :], 1.0).prod(axis=1) if len(F) else np.ones(len(child))
    wf = w * factor
    div = np.where(near, 1.0, d)
    r = np.zeros(lat.size, dtype=complex)
    r[0] = 1.0
    for m in range(1, lat.N + 1):
        s, e = lat.offsets[m], lat.offsets[m + 1]
        r[s:e] = _level_rhs(lat, wf, r[:, None], m)[:, 0] / div[s:e]
    outside = np.where(~anc, dF[None, :], 1.0).prod(axis=1) if len(F) else np.ones(lat.size)
    delta_u = complex(np.prod(dF)) if len(F) else 1 + 0j
    flagged = tuple(tuple(int(v) for v in lat.nus[i]) for i in F)
    return r * outside, delta_u, flagged


def build_table(family, xi, g: Couplings, N: int = DEFAULT_N, regularize: bool = False,
                pole_radius: float | None = None, tol: Tolerances = DEFAULT_TOL,
                shift: tuple[float, np.ndarray] | None = None) -> CoeffTable:
    """Fill the coefficient table level by level.

    a_nu = sum_{alpha,l} a_{alpha,l}(g) a_{nu - l alpha} / <nu - 2xi, nu>.
    With ``regularize`` the product Delta_U of the forms <mu - 2xi, mu> with
    |<mu - 2xi, mu>| < pole_radius (1 + <mu, mu>) is absorbed without ever
    dividing by those forms.
    """
    family = as_family(family)
    xi = np.asarray(xi, dtype=complex).ravel()
    if not np.all(np.isfinite(xi)):
        raise ValueError("spectral point must be finite")
    if N < 0:
        raise ValueError("truncation level must be >= 0")
    shift_rec = None if shift is None else (float(shift[0]), tuple(int(v) for v in shift[1]))
    if regularize:
        lat = lattice(len(xi), N)
        w = edge_weights(family, g, lat, shift)
        radius = tol.pole_radius if pole_radius is None else pole_radius
        coeffs, delta_u, flagged = _solve_regularized(lat, w, xi, radius)
        return CoeffTable(family, xi, g, N, coeffs, lat, True, delta_u, flagged, shift_rec)
    lat, A = solve_batch(family, xi[None, :], g, N, tol, shift)
    return CoeffTable(family, xi, g, N, A[:, 0], lat, shift=shift_rec)


# ---------------------------------------------------------------------------
# series evaluation

@dataclass(frozen=True)
class SeriesValue:
    value: complex
    tail_bound: float
    levels_used: int
    certified: bool = False


def _fsum_complex(v: np.ndarray) -> complex:
    return complex(math.fsum(v.real), math.fsum(v.imag))


def reduced_sums(lat: Lattice, coeffs: np.ndarray, x: np.ndarray):
    """Sum_nu c_nu e^{-<nu,x>} per column plus per-level absolute sums.

    Returns (sums (B,), level_abs (N+1, B)). Each column is accumulated with
    exactly rounded summation.
    """
    coeffs = np.asarray(coeffs)
    col = coeffs.ndim == 1
    C = coeffs[:, None] if col else coeffs
    terms = C * np.exp(-(lat.nus @ x))[:, None]
    level_abs = np.add.reduceat(np.abs(terms), lat.offsets[:-1], axis=0)
    sums = np.array([_fsum_complex(terms[:, b]) for b in range(terms.shape[1])])
    return (sums[0], level_abs[:, 0]) if col else (sums, level_abs)


def tail_estimate(level_abs: np.ndarray) -> float:
    """(sum of the last two level magnitudes) / (1 - q), q = their ratio capped at 0.9."""
    S = np.asarray(level_abs, dtype=float)
    if len(S) < 2:
        return float(S[-1] / (1 - 0.9))
    prev, last = S[-2], S[-1]
    if prev > 0:
        q = min(last / prev, 0.9)
    else:
        q = 0.0 if last == 0 else 0.9
    return float((prev + last) / (1 - q))


def is_certified(x: np.ndarray, eps_hat: float = 0.1) -> bool:
    return in_chamber(Family.BC, np.asarray(x) - eps_hat * rho(len(x)))


def series_eval(table: CoeffTable, x, tol: Tolerances = DEFAULT_TOL) -> SeriesValue:
    """Truncated sum_{level(nu) <= N} a_nu e^{<xi - nu, x>} with a tail estimate."""
    x = np.asarray(x, dtype=float)
    if x.shape != (table.lattice.n,):
        raise ChamberViolation(f"position has shape {x.shape}, expected ({table.lattice.n},)",
                               obj="A^r", x=x)
    check_chamber(table.family, x)
    s, level_abs = reduced_sums(table.lattice, table.coeffs, x)
    lead = np.exp(np.dot(table.xi, x))
    return SeriesValue(complex(lead * s), float(abs(lead) * tail_estimate(level_abs)),
                       table.N, is_certified(x))


def asymptotics_gap(table: CoeffTable, x, tol: Tolerances = DEFAULT_TOL) -> float:
    """|phi_xi(x) - e^{<xi,x>}| for purely imaginary xi."""
    if np.any(np.abs(table.xi.real) > tol.tau_int):
        raise ValueError(f"plane-wave asymptotics needs Re(xi) = 0, got xi={table.xi.tolist()}")
    x = check_chamber(table.family, np.asarray(x, dtype=float))
    s, _ = reduced_sums(table.lattice, table.coeffs, x)
    # subtract the nu = 0 term before scaling to avoid cancellation
    lead = np.exp(np.dot(table.xi, x))
    return float(abs(lead) * abs(s - table.coeffs[0]))


# ---------------------------------------------------------------------------
# export / import

def _num(v: float) -> str:
    return format(float(v), ".17g")


def write_table(table: CoeffTable, path) -> Path:
    """Line-delimited records: a header, then one {family, nu, re, im} per nu."""
    path = Path(path)
    fam = table.family.value
    g = table.g
    header = {
        "record": "header", "family": fam, "n": table.lattice.n, "N": table.N,
        "xi": [[v.real, v.imag] for v in table.xi],
        "g": [[z.real, z.imag] for z in g.triple],
        "a": None if g.a is None else [[z.real, z.imag] for z in g.a],
        "regularized": table.regularized,
        "delta_u": [table.delta_u.real, table.delta_u.imag],
        "flagged": [list(mu) for mu in table.flagged],
        "shift": None if table.shift is None else [table.shift[0], list(table.shift[1])],
    }
    with path.open("w") as fh:
        fh.write(json.dumps(header) + "\n")
        for nu, c in zip(table.lattice.nus.tolist(), table.coeffs):
            fh.write('{"family": "%s", "nu": %s, "re": %s, "im": %s}\n'
                     % (fam, json.dumps(nu), _num(c.real), _num(c.imag)))
    return path


def read_table(path) -> CoeffTable:
    path = Path(path)
    with path.open() as fh:
        header = json.loads(fh.readline())
        if header.get("record") != "header":
            raise ValueError(f"{path}: first record must be the header")
        n, N = int(header["n"]), int(header["N"])
        lat = lattice(n, N)
        coeffs = np.full(lat.size, np.nan, dtype=complex)
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            coeffs[lat.index(rec["nu"])] = complex(rec["re"], rec["im"])
    if np.isnan(coeffs).any():
        raise ValueError(f"{path}: table is missing entries")
    cpx = lambda p: complex(p[0], p[1])  # noqa: E731
    g = Couplings(*[cpx(p) for p in header["g"]],
                  a=None if header["a"] is None else tuple(cpx(p) for p in header["a"]))
    shift = header.get("shift")
    return CoeffTable(
        as_family(header["family"]), np.array([cpx(p) for p in header["xi"]]), g, N, coeffs, lat,
        bool(header["regularized"]), cpx(header["delta_u"]),
        tuple(tuple(mu) for mu in header["flagged"]),
        None if shift is None else (float(shift[0]), tuple(shift[1])),
    )
