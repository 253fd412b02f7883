"""Command-line front end: ``hyperwave {eval,verify,table,scan}``.

A run is described by a flat TOML file and/or flags (flags win). Complex
numbers are written as [re, im] pairs in the file and as Python complex
literals on the command line, e.g. ``--xi 0.31+0.42j,-0.17+0.23j``.

Exit codes: 0 success, 1 a verification check failed, 2 an error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import bispectral, confluence, hcseries, operators, wavefn
from .core import (
    Couplings, Family, Tolerances, as_family, hyperoctahedral_group, in_chamber, orbit_matrix,
    rho, singular_hyperplanes,
)
from .errors import HyperwaveError, PoleOfGamma, SpectralPlaneSingularity
from .special import c_function

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
SUITES = ("eigen", "difference", "asymptotics", "confluence", "analyticity")

# thresholds used by ``verify``
EIGEN_TOL = 1e-8
ROUNDOFF_FLOOR = 1e-13
DIFF_TOL = {1: 1e-6, 2: 1e-6}
DIFF_TOL_HIGH = 1e-5
PATH_AGREEMENT_TOL = 1e-12
ASYMPTOTIC_TOL = 1e-6
COEFF_LIMIT_TOL = 1e-6
W_INVARIANCE_TOL = 1e-10
BOUNDED_FACTOR = 2.0


class ConfigError(HyperwaveError, ValueError):
    module = "cli"


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class RunConfig:
    family: str = "bc"
    n: int | None = None
    g: tuple[complex, complex, complex] = (0j, 0j, 0j)
    a: tuple[complex, ...] | None = None
    xi: tuple[complex, ...] = ()
    x: tuple[float, ...] = ()
    N: int = hcseries.DEFAULT_N
    tau_int: float = 1e-9
    tau_den: float = 1e-8
    tau_x: float = 1e-6
    pole_guard: float = 1e-4
    pole_radius: float = 0.5
    seed: int = 0
    # command-specific
    suite: tuple[str, ...] = SUITES
    ell: tuple[int, ...] = ()
    c_grid: tuple[float, ...] = (4.0, 6.0, 8.0, 10.0)
    n_grid: tuple[int, ...] = (10, 20, 30)
    t_grid: tuple[float, ...] = (2, 3, 4, 5, 6, 7, 8)
    kind: str = "M"
    regularize: bool = False
    offsets: tuple[float, ...] = (1e-2, 1e-3, 1e-4)
    out: str | None = None
    scan: str = "confluence-series"

    def __post_init__(self):
        try:
            fam = as_family(self.family)
        except ValueError:
            raise ConfigError(f"unknown family {self.family!r}", obj="family") from None
        object.__setattr__(self, "family", fam.value)
        if not self.xi:
            raise ConfigError("xi is required", obj="xi")
        n = len(self.xi) if self.n is None else int(self.n)
        object.__setattr__(self, "n", n)
        for name in ("xi", "x"):
            vec = getattr(self, name)
            if vec and len(vec) != n:
                raise ConfigError(f"{name} has length {len(vec)}, expected n={n}", obj=name)
        if self.a is not None and len(self.a) != n:
            raise ConfigError(f"a has length {len(self.a)}, expected n={n}", obj="a")
        if len(self.g) != 3:
            raise ConfigError("g must be a triple (gS, gM, gL)", obj="g")
        for name in ("tau_int", "tau_den", "tau_x", "pole_guard", "pole_radius"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"tolerance {name} must be positive", obj=name)
        if self.N < 0:
            raise ConfigError("N must be >= 0", obj="N")
        bad = [s for s in self.suite if s not in SUITES]
        if bad:
            raise ConfigError(f"unknown suite(s) {bad}; choose from {SUITES}", obj="suite")

    @property
    def fam(self) -> Family:
        return as_family(self.family)

    @property
    def couplings(self) -> Couplings:
        return Couplings(*self.g, a=self.a)

    @property
    def tol(self) -> Tolerances:
        return Tolerances(self.tau_int, self.tau_den, self.tau_x, self.pole_guard, self.pole_radius)

    @property
    def xi_arr(self) -> np.ndarray:
        return np.array(self.xi, dtype=complex)

    @property
    def x_arr(self) -> np.ndarray:
        if not self.x:
            # a point deep in every chamber
            return 2.0 * rho(self.n).astype(float)
        return np.array(self.x, dtype=float)


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def _complex_list(v) -> tuple[complex, ...]:
    if isinstance(v, str):
        return tuple(_as_complex(s) for s in v.split(",") if s.strip())
    return tuple(_as_complex(s) for s in v)


def _float_list(v) -> tuple[float, ...]:
    if isinstance(v, str):
        return tuple(float(s) for s in v.split(",") if s.strip())
    return tuple(float(s) for s in v)


def _int_list(v) -> tuple[int, ...]:
    return tuple(int(s) for s in _float_list(v))


def _str_list(v) -> tuple[str, ...]:
    if isinstance(v, str):
        return tuple(s.strip() for s in v.split(",") if s.strip())
    return tuple(str(s) for s in v)


_CONVERT = {
    "family": str, "n": int, "g": _complex_list, "a": _complex_list, "xi": _complex_list,
    "x": _float_list, "N": int, "tau_int": float, "tau_den": float, "tau_x": float,
    "pole_guard": float, "pole_radius": float, "seed": int, "suite": _str_list, "ell": _int_list,
    "c_grid": _float_list, "n_grid": _int_list, "t_grid": _float_list, "kind": str,
    "regularize": bool, "offsets": _float_list, "out": str, "scan": str,
}


def load_config(path: str | None, overrides: dict) -> RunConfig:
    raw: dict = {}
    if path:
        try:
            with open(path, "rb") as fh:
                raw = tomllib.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}", obj="config file") from None
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"malformed config {path}: {exc}", obj="config file") from None
    raw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    kw, extras = {}, {}
    for key, val in raw.items():
        if key not in known:
            extras[key] = val
            continue
        try:
            kw[key] = _CONVERT[key](val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {val!r} ({exc})", obj=key) from None
    if extras:
        raise ConfigError(f"unknown config keys: {sorted(extras)}", obj="config file")
    return RunConfig(**kw)


# ---------------------------------------------------------------------------
# output

class Output:
    """Human table on stdout plus optional JSON-lines records."""

    def __init__(self, records_path: str | None, stream=None):
        self.stream = stream or sys.stdout
        self.records_path = records_path
        self.records: list[dict] = []

    def line(self, text: str = "") -> None:
        if self.records_path != "-":
            print(text, file=self.stream)

    def value(self, name: str, z, extra: str = "") -> None:
        z = complex(z)
        self.line(f"{name:<28} {z.real: .17g} {z.imag:+.17g}j {extra}".rstrip())
        self.records.append({"name": name, "re": z.real, "im": z.imag})

    def flush(self) -> None:
        if not self.records_path:
            return
        text = "".join(json.dumps(r) + "\n" for r in self.records)
        if self.records_path == "-":
            self.stream.write(text)
        else:
            Path(self.records_path).write_text(text)


@dataclass
class Check:
    name: str
    value: float
    threshold: float
    passed: bool


def _threads(args) -> int:
    if args.threads:
        return max(1, int(args.threads))
    env = os.environ.get("HYPERWAVE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"HYPERWAVE_THREADS must be an integer, got {env!r}", obj="threads") from None
    return 1


def _pmap(fn, items, threads: int) -> list:
    # ordered map; results come back in submission order either way
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands

def cmd_eval(cfg: RunConfig, out: Output, threads: int = 1) -> int:
    fam, g, tol, xi, x = cfg.fam, cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    out.line(f"# eval family={fam.value} n={cfg.n} N={cfg.N}")
    try:
        table = hcseries.build_table(fam, xi, g, cfg.N, tol=tol)
        sv = hcseries.series_eval(table, x, tol)
        out.value("phi", sv.value, "(certified tail)" if sv.certified else "(empirical tail)")
        out.value("tail_bound", sv.tail_bound)
    except SpectralPlaneSingularity as exc:
        reg = hcseries.build_table(fam, xi, g, cfg.N, regularize=True, tol=tol)
        out.line(f"# phi is singular here ({exc}); reporting the regularized series")
        out.value("delta_u", reg.delta_u)
        out.value("delta_u_phi", hcseries.series_eval(reg, x, tol).value)
    hits = singular_hyperplanes(xi, tol.pole_guard)
    if hits:
        out.line(f"# xi is {hits[0].distance:.2e} from {hits[0].describe()}: extrapolating")
        rv = wavefn.wavefunction_regular(fam, xi, x, g, cfg.N, cfg.offsets, cfg.seed, tol)
        out.value("Phi", rv.value)
        out.value("extrapolation_error", rv.error)
        for d, s in zip(rv.offsets, rv.samples):
            out.value(f"Phi_sample[delta={d:g}]", s)
    else:
        out.value("Phi", wavefn.wavefunction(fam, xi, x, g, cfg.N, tol))
    for k, (w, wxi) in enumerate(zip(hyperoctahedral_group(cfg.n), orbit_matrix(xi))):
        label = f"C[eps={w.eps},sigma={tuple(s + 1 for s in w.sigma)}]"
        try:
            out.value(label, c_function(fam, wxi, g).to_complex())
        except PoleOfGamma:
            out.line(f"{label:<28} pole")
    return EXIT_OK


def _monotone(values, floor: float = ROUNDOFF_FLOOR) -> bool:
    return all(b < a or (a <= floor and b <= floor) for a, b in zip(values, values[1:]))


def _suite_eigen(cfg: RunConfig, threads: int) -> list[Check]:
    fam, g, tol, xi, x = cfg.fam, cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    res = _pmap(lambda N: operators.eigen_residual(fam, xi, x, g, N, True, tol), cfg.n_grid, threads)
    rows = [Check(f"eigen Phi N={N}", r, float("nan"), True) for N, r in zip(cfg.n_grid[:-1], res)]
    rows.append(Check(f"eigen Phi N={cfg.n_grid[-1]}", res[-1], EIGEN_TOL, res[-1] <= EIGEN_TOL))
    rows.append(Check("eigen Phi monotone in N", res[-1], ROUNDOFF_FLOOR, _monotone(res)))
    r = operators.eigen_residual(fam, xi, x, g, cfg.N, False, tol)
    rows.append(Check(f"eigen phi N={cfg.N}", r, EIGEN_TOL, r <= EIGEN_TOL))
    return rows


def _suite_difference(cfg: RunConfig, threads: int) -> list[Check]:
    fam, g, tol, xi, x = cfg.fam, cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    ells = cfg.ell or tuple(range(1, min(cfg.n, 2) + 1))

    def run(ell):
        gen = bispectral.difference_check(fam, ell, xi, x, g, cfg.N, False, tol, cfg.seed)
        rows = [Check(f"difference l={ell}", gen.residual, DIFF_TOL.get(ell, DIFF_TOL_HIGH),
                      gen.residual <= DIFF_TOL.get(ell, DIFF_TOL_HIGH))]
        if ell <= 2:
            sp_ = bispectral.difference_check(fam, ell, xi, x, g, cfg.N, True, tol, cfg.seed)
            gap = abs(gen.lhs - sp_.lhs) / abs(gen.rhs)
            rows.append(Check(f"difference l={ell} two paths", gap, PATH_AGREEMENT_TOL, gap <= PATH_AGREEMENT_TOL))
        return rows

    return [row for rows in _pmap(run, ells, threads) for row in rows]


def _suite_asymptotics(cfg: RunConfig, threads: int) -> list[Check]:
    fam, g, tol = cfg.fam, cfg.couplings, cfg.tol
    xi = 1j * cfg.xi_arr.imag
    table = hcseries.build_table(fam, xi, g, cfg.N, tol=tol)
    r = rho(cfg.n).astype(float)
    gaps = [hcseries.asymptotics_gap(table, t * r, tol) for t in cfg.t_grid]
    dec = all(b < a for a, b in zip(gaps, gaps[1:]))
    return [Check("asymptotics strictly decreasing", gaps[-1], float("nan"), dec),
            Check(f"asymptotics gap t={cfg.t_grid[-1]:g}", gaps[-1], ASYMPTOTIC_TOL, gaps[-1] <= ASYMPTOTIC_TOL)]


def _suite_confluence(cfg: RunConfig, threads: int) -> list[Check]:
    g, tol, xi, x = cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    if not in_chamber(Family.BC, x):
        raise ConfigError(f"confluence needs x in the bc chamber, got {x.tolist()}", obj="x")
    rows = []
    for kind in confluence.KINDS:
        for label, fn in (("series", confluence.series_confluence_error),
                          ("wave", confluence.wavefunction_confluence_error)):
            errs = _pmap(lambda c: fn(kind, xi, x, g, c, cfg.N, tol), cfg.c_grid, threads)
            dec = all(b < a for a, b in zip(errs, errs[1:]))
            rows.append(Check(f"confluence {kind} {label} decreasing", errs[-1], float("nan"), dec))
        e = confluence.coefficient_limit_error(kind, xi, g, 20.0, 8, tol)
        rows.append(Check(f"confluence {kind} coefficients c=20", e, COEFF_LIMIT_TOL, e <= COEFF_LIMIT_TOL))
    return rows


def _suite_analyticity(cfg: RunConfig, threads: int) -> list[Check]:
    fam, g, tol, xi, x = cfg.fam, cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    rows = []
    if not singular_hyperplanes(xi, tol.pole_guard):
        base = wavefn.wavefunction(fam, xi, x, g, cfg.N, tol)
        worst = max(abs(wavefn.wavefunction(fam, w.act(xi), x, g, cfg.N, tol) - base)
                    for w in hyperoctahedral_group(cfg.n)) / abs(base)
        rows.append(Check("W-invariance", worst, W_INVARIANCE_TOL, worst <= W_INVARIANCE_TOL))
    probes = [("2xi_1=1", np.concatenate([[0.5], xi[1:]]))]
    if cfg.n >= 2:
        probes.append(("xi_1-xi_2=1", np.concatenate([[xi[1] + 1], xi[1:]])))
    for label, p in probes:
        rv = wavefn.wavefunction_regular(fam, p, x, g, cfg.N, cfg.offsets, cfg.seed, tol)
        mags = np.abs(rv.samples)
        factor = float(mags.max() / mags.min())
        rows.append(Check(f"bounded near {label}", factor, BOUNDED_FACTOR, factor < BOUNDED_FACTOR))
    return rows


_SUITE_FN = {"eigen": _suite_eigen, "difference": _suite_difference, "asymptotics": _suite_asymptotics,
             "confluence": _suite_confluence, "analyticity": _suite_analyticity}


def cmd_verify(cfg: RunConfig, out: Output, threads: int = 1) -> int:
    out.line(f"# verify family={cfg.family} n={cfg.n} N={cfg.N} suites={','.join(cfg.suite)}")
    out.line(f"{'check':<40} {'value':>12} {'threshold':>10}  result")
    ok = True
    for suite in cfg.suite:
        for row in _SUITE_FN[suite](cfg, threads):
            ok &= row.passed
            thr = "-" if math.isnan(row.threshold) else f"{row.threshold:.1e}"
            out.line(f"{row.name:<40} {row.value:>12.3e} {thr:>10}  {'pass' if row.passed else 'FAIL'}")
            out.records.append({"name": row.name, "re": row.value, "im": 0.0,
                                "threshold": None if math.isnan(row.threshold) else row.threshold,
                                "pass": row.passed})
    out.line("# all checks passed" if ok else "# some checks FAILED")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_table(cfg: RunConfig, out: Output, threads: int = 1) -> int:
    if not cfg.out:
        raise ConfigError("table needs an output path (--out)", obj="out")
    table = hcseries.build_table(cfg.fam, cfg.xi_arr, cfg.couplings, cfg.N, cfg.regularize, tol=cfg.tol)
    try:
        path = hcseries.write_table(table, cfg.out)
    except OSError as exc:
        raise ConfigError(f"cannot write {cfg.out}: {exc}", obj="out") from None
    out.line(f"# wrote {table.lattice.size} coefficients to {path}")
    if table.regularized:
        out.value("delta_u", table.delta_u)
    return EXIT_OK


def cmd_scan(cfg: RunConfig, out: Output, threads: int = 1) -> int:
    fam, g, tol, xi, x = cfg.fam, cfg.couplings, cfg.tol, cfg.xi_arr, cfg.x_arr
    what = cfg.scan
    if what in ("confluence-series", "confluence-wave", "confluence-c"):
        fn = {"confluence-series": lambda c: confluence.series_confluence_error(cfg.kind, xi, x, g, c, cfg.N, tol),
              "confluence-wave": lambda c: confluence.wavefunction_confluence_error(cfg.kind, xi, x, g, c, cfg.N, tol),
              "confluence-c": lambda c: confluence.c_function_limit_error(cfg.kind, xi, g, c)}[what]
        grid, param = cfg.c_grid, "c"
    elif what == "asymptotics":
        table = hcseries.build_table(fam, 1j * xi.imag, g, cfg.N, tol=tol)
        r = rho(cfg.n).astype(float)
        fn, grid, param = (lambda t: hcseries.asymptotics_gap(table, t * r, tol)), cfg.t_grid, "t"
    elif what == "truncation":
        fn = lambda N: operators.eigen_residual(fam, xi, x, g, int(N), True, tol)  # noqa: E731
        grid, param = cfg.n_grid, "N"
    else:
        raise ConfigError(f"unknown scan {what!r}", obj="scan")
    out.line(f"# scan {what} over {param}")
    for p, v in zip(grid, _pmap(fn, grid, threads)):
        out.value(f"{what}[{param}={p:g}]", v)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "table": cmd_table, "scan": cmd_scan}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--family", choices=[f.value for f in Family])
    common.add_argument("--n", type=int)
    common.add_argument("--g", help="gS,gM,gL as complex literals")
    common.add_argument("--a", help="auxiliary couplings a_1..a_n")
    common.add_argument("--xi", help="spectral point, comma separated complex literals")
    common.add_argument("--x", help="position, comma separated reals")
    common.add_argument("--N", type=int, help="truncation level")
    for name in ("tau-int", "tau-den", "tau-x", "pole-guard", "pole-radius"):
        common.add_argument(f"--{name}", type=float)
    common.add_argument("--seed", type=int)
    common.add_argument("--records", help="write JSON-lines records here ('-' for stdout)")
    common.add_argument("--threads", type=int, help="worker cap (default: $HYPERWAVE_THREADS or 1)")

    p = argparse.ArgumentParser(prog="hyperwave", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="evaluate phi, Phi and the c-function")
    v = sub.add_parser("verify", parents=[common], help="run residual checks")
    v.add_argument("--suite", help=f"comma separated subset of {','.join(SUITES)}")
    v.add_argument("--ell", help="difference-equation orders")
    v.add_argument("--c-grid")
    v.add_argument("--n-grid")
    t = sub.add_parser("table", parents=[common], help="export a coefficient table")
    t.add_argument("--out")
    t.add_argument("--regularize", action="store_true", default=None)
    s = sub.add_parser("scan", parents=[common], help="convergence scans")
    s.add_argument("--scan", choices=["confluence-series", "confluence-wave", "confluence-c",
                                      "asymptotics", "truncation"])
    s.add_argument("--kind", choices=["M", "L"])
    s.add_argument("--c-grid")
    s.add_argument("--n-grid")
    s.add_argument("--t-grid")
    return p


def _overrides(args) -> dict:
    names = ["family", "n", "g", "a", "xi", "x", "N", "seed", "suite", "ell", "c_grid", "n_grid",
             "t_grid", "kind", "regularize", "out", "scan"]
    ov = {k: getattr(args, k, None) for k in names}
    for k in ("tau_int", "tau_den", "tau_x", "pole_guard", "pole_radius"):
        ov[k] = getattr(args, k, None)
    return ov


def _error_record(exc: Exception) -> dict:
    if isinstance(exc, HyperwaveError):
        return exc.record()
    return {"error": type(exc).__name__, "module": "cli", "object": "", "message": str(exc), "detail": {}}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Output(args.records)
    try:
        cfg = load_config(args.config, _overrides(args))
        code = COMMANDS[args.command](cfg, out, _threads(args))
    except (HyperwaveError, ValueError, ArithmeticError, OSError) as exc:
        out.flush()
        print(json.dumps(_error_record(exc), default=str), file=sys.stderr)
        return EXIT_ERROR
    out.flush()
    return code


if __name__ == "__main__":
    sys.exit(main())
