from fractions import Fraction

import numpy as np
import pytest

from hyperwave.core import Couplings, root_system
from hyperwave.errors import ChamberViolation, SpectralPlaneSingularity
from hyperwave.hcseries import (
    asymptotics_gap, build_table, edge_weights, lattice, read_table, recurrence_coeff, series_eval,
    tail_estimate, write_table,
)

import oracles

G = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
XI2 = np.array([0.31 + 0.42j, -0.17 + 0.23j])


def recurrence_defect(table):
    """max over nu != 0 of |d_nu a_nu - sum a_{alpha,l} a_{nu - l alpha}| / scale, by dictionary lookup."""
    entries = table.entries
    n = len(table.xi)
    worst = 0.0
    for nu, val in entries.items():
        if not any(nu):
            continue
        d = sum(v * v for v in nu) - 2 * np.dot(nu, table.xi)
        acc, scale = 0j, abs(d * val)
        for root in root_system(n):
            l = 1
            while True:
                p = tuple(v - l * a for v, a in zip(nu, root.alpha))
                if sum(np.cumsum(p)) < 0:
                    break
                if p in entries:
                    t = recurrence_coeff(table.family, root.alpha, l, table.g) * entries[p]
                    acc += t
                    scale = max(scale, abs(t))
                l += 1
        worst = max(worst, abs(d * val - acc) / max(scale, 1e-300))
    return worst


def test_recurrence_coeff_examples():
    gS, gM, gL = G.triple
    assert recurrence_coeff("bc", (1, 0), 2, G) == pytest.approx(2 * gS * (gS + 2 * gL - 1))
    assert recurrence_coeff("t", (1, -1), 1, G) == 2
    assert recurrence_coeff("t", (1, -1), 2, G) == 0
    assert recurrence_coeff("t", (1, 0), 1, G) == 0
    assert recurrence_coeff("t", (1, 1), 1, G) == 2
    assert recurrence_coeff("cs", (0, 2), 1, G) == 0.25
    assert recurrence_coeff("cs", (1, 1), 1, G) == 0
    with pytest.raises(ValueError):
        recurrence_coeff("bc", (1, 0), 0, G)


def test_build_table_examples():
    t = build_table("cs", XI2, G, 5)
    assert t[(0, 0)] == 1
    gS, gM, gL = G.triple
    xi = 0.21 + 0.4j
    t1 = build_table("bc", [xi], G, 3)
    assert t1[(1,)] == pytest.approx(gS * (gS + 2 * gL - 1) / (1 - 2 * xi), rel=1e-14)
    free = build_table("cs", [xi], Couplings(0, 0, 0, a=(0,)), 10)
    assert np.all(free.coeffs[1:] == 0)


@pytest.mark.parametrize("family", ["bc", "t", "cs"])
def test_recurrence_consistency(family):
    for n, xi in ((1, XI2[:1]), (2, XI2), (3, np.array([0.31 + 0.42j, -0.17 + 0.23j, 0.55 - 0.11j]))):
        table = build_table(family, xi, G, 12 if n == 3 else 20)
        assert recurrence_defect(table) < 1e-12


@pytest.mark.parametrize("family", ["bc", "t", "cs"])
def test_exact_rational_oracle(family):
    xi = [Fraction(1, 3), Fraction(-2, 7)]
    g = [Fraction(3, 5), Fraction(7, 4), Fraction(-2, 9)]
    exact = oracles.exact_table(family, xi, g, [2, Fraction(1, 4)], 6)
    table = build_table(family, [float(v) for v in xi], Couplings(*map(float, g)), 6)
    assert set(exact) == set(table.entries)
    for nu, v in exact.items():
        assert abs(table[nu] - float(v)) <= 1e-12 * max(1, abs(float(v)))


def test_singular_denominator_named():
    with pytest.raises(SpectralPlaneSingularity) as err:
        build_table("bc", [0.5, 0.1], G, 4)
    assert err.value.detail["nu"] == (1, 0)


def test_regularized_table():
    xi = np.array([0.5 + 1e-9, -0.17 + 0.23j])
    reg = build_table("bc", xi, G, 10, regularize=True)
    assert reg[(0, 0)] == reg.delta_u
    assert (1, 0) in reg.flagged
    # away from the hyperplane the regularized table is Delta_U times the plain one
    xi2 = np.array([0.43 + 0.1j, -0.17 + 0.23j])
    reg2 = build_table("t", xi2, G, 10, regularize=True)
    plain = build_table("t", xi2, G, 10)
    assert len(reg2.flagged) > 0
    assert np.allclose(reg2.coeffs, reg2.delta_u * plain.coeffs, rtol=1e-12, atol=1e-14)


def test_regularized_residue_is_finite_on_hyperplane():
    xi = np.array([0.5, -0.17 + 0.23j])
    reg = build_table("bc", xi, G, 8, regularize=True)
    assert reg.delta_u == 0
    assert np.all(np.isfinite(reg.coeffs))
    assert np.any(reg.coeffs != 0)


def test_series_eval_trivial_cases():
    x = np.array([3.0, 1.0])
    t0 = build_table("bc", XI2, G, 0)
    v = series_eval(t0, x)
    assert v.value == pytest.approx(np.exp(XI2 @ x))
    assert v.tail_bound > 0
    flat = build_table("bc", XI2, Couplings(0, 1, 0), 20)
    assert series_eval(flat, x).value == pytest.approx(np.exp(XI2 @ x), rel=1e-15)
    assert series_eval(flat, x).tail_bound == 0


def test_series_eval_chamber():
    t = build_table("bc", XI2, G, 5)
    with pytest.raises(ChamberViolation):
        series_eval(t, [1.0, 3.0])
    assert not series_eval(build_table("cs", XI2, G, 5), [1.0, -3.0]).certified
    assert series_eval(t, [3.0, 1.0]).certified


@pytest.mark.parametrize("family", ["bc", "cs"])
def test_ode_oracle(family):
    xi = 0.3j
    g = G.triple
    pts = [4.0, 2.0, 1.0]
    ref = oracles.ode_solution(family, xi, g, pts)
    table = build_table(family, [xi], G, 40)
    for p in pts:
        assert abs(series_eval(table, [p]).value / ref[p] - 1) < 1e-8


def test_tail_bound_is_an_upper_estimate():
    x = np.array([3.0, 1.0])
    exact = series_eval(build_table("bc", XI2, G, 40), x).value
    for N in (4, 8, 12):
        v = series_eval(build_table("bc", XI2, G, N), x)
        assert abs(exact - v.value) <= v.tail_bound


def test_tail_estimate_rules():
    assert tail_estimate([1.0]) == pytest.approx(10.0)
    assert tail_estimate([1.0, 0.5, 0.25]) == pytest.approx(0.75 / 0.5)
    assert tail_estimate([1.0, 1.0, 2.0]) == pytest.approx(3.0 / 0.1)
    assert tail_estimate([1.0, 0.0, 0.0]) == 0


def test_asymptotics_gap_examples():
    xi = np.array([0.42j, 0.23j])
    x = np.array([4.0, 2.0])
    assert asymptotics_gap(build_table("bc", xi, Couplings(), 10), x) == 0
    assert asymptotics_gap(build_table("bc", xi, G, 0), x) == 0
    table = build_table("bc", xi, G, 30)
    gaps = [asymptotics_gap(table, t * np.array([2.0, 1.0])) for t in range(2, 9)]
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
    with pytest.raises(ValueError):
        asymptotics_gap(build_table("bc", XI2, G, 3), x)


def test_coefficient_bound_no_growth():
    # sup_{level m} |Delta_U a_nu| e^{-eps m} shows no growth over the last half of the levels
    N = 30
    rng = np.random.default_rng(11)
    for _ in range(3):
        xi = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        table = build_table("bc", xi, G, N, regularize=True)
        sup = np.array([np.max(np.abs(table.coeffs[table.level_slice(m)])) for m in range(1, N + 1)])
        for eps in (0.5, 1.0):
            seq = sup * np.exp(-eps * np.arange(1, N + 1))
            tail = np.log(seq[N // 2:])
            slope = np.polyfit(np.arange(len(tail)), tail, 1)[0]
            assert slope < 0.05 and seq[N // 2:].max() <= seq.max()


@pytest.mark.parametrize("kind,target,vec", [("M", "t", [1, 0]), ("L", "cs", [1, 1])])
def test_coefficient_degeneration(kind, target, vec):
    from hyperwave.confluence import coupling_path
    n = 2
    lat = lattice(n, 6)
    errs = []
    for c in (10, 20, 30):
        gc = coupling_path(kind, G, c)
        w = edge_weights("bc", gc, lat, shift=(c, np.array(vec)))
        errs.append(np.max(np.abs(w - edge_weights(target, G, lat))))
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-10
    assert errs[1] / errs[0] < 1e-3


def test_export_round_trip(tmp_path):
    x = np.array([2.5, 0.7])
    for reg in (False, True):
        table = build_table("t", XI2, G, 12, regularize=reg)
        path = write_table(table, tmp_path / f"t{reg}.jsonl")
        back = read_table(path)
        assert back.regularized == reg and back.delta_u == table.delta_u
        a, b = series_eval(table, x).value, series_eval(back, x).value
        assert abs(a - b) <= 1e-15 * abs(a)
    lines = path.read_text().splitlines()
    assert '"delta_u"' in lines[0]
    assert len(lines) == 1 + lattice(2, 12).size
