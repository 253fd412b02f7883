import numpy as np
import pytest

from hyperwave.confluence import potential_limit_error
from hyperwave.core import Couplings
from hyperwave.errors import ChamberViolation
from hyperwave.hcseries import build_table, series_eval
from hyperwave.operators import (
    apply_L_fd, apply_L_to_series, eigen_residual, potential, series_function,
)

import oracles

G = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
XI = {1: np.array([0.31 + 0.42j]), 2: np.array([0.31 + 0.42j, -0.17 + 0.23j]),
      3: np.array([0.31 + 0.42j, -0.17 + 0.23j, 0.55 - 0.11j])}


def test_potential_examples():
    x = 0.8
    assert potential("cs", [x], G) == pytest.approx(-G.gS * np.exp(-x) - 0.25 * np.exp(-2 * x))
    for fam, pt in (("bc", [3.0, 1.0]), ("t", [1.0, 3.0]), ("cs", [1.0, -3.0])):
        assert potential(fam, pt, Couplings(0, 0, 0, a=(0, 0))) == 0
    g = Couplings(1, 2, 1)
    assert potential("bc", [3.0, 1.0], g) == pytest.approx(
        oracles.potential_ref("bc", [3.0, 1.0], g.triple, None), rel=1e-13)


@pytest.mark.parametrize("family,x", [("bc", [2.9, 1.3, 0.4]), ("t", [0.3, 1.9, 0.7]), ("cs", [0.9, -0.2, -1.4])])
def test_potential_against_retranscription(family, x):
    ref = oracles.potential_ref(family, x, G.triple, G.aux(3))
    assert potential(family, x, G) == pytest.approx(ref, rel=1e-13)


def test_potential_wall_margin():
    with pytest.raises(ChamberViolation):
        potential("bc", [1.0, 1.0 - 1e-8], G)


def test_apply_L_plane_wave():
    table = build_table("bc", XI[2], Couplings(0, 1, 0), 0)
    x = np.array([2.0, 1.0])
    lhs = apply_L_to_series("bc", table, x)
    assert lhs == pytest.approx(np.dot(XI[2], XI[2]) * np.exp(XI[2] @ x), rel=1e-14)


@pytest.mark.parametrize("family,x", [("bc", [2.0, 0.9]), ("t", [0.5, 1.2]), ("cs", [1.0, -0.5])])
def test_finite_difference_second_order(family, x):
    table = build_table(family, XI[2], G, 30)
    f = series_function(table)
    exact = apply_L_to_series(family, table, x)
    e1 = abs(apply_L_fd(family, f, x, G, h=1e-2, order=2) - exact)
    e2 = abs(apply_L_fd(family, f, x, G, h=5e-3, order=2) - exact)
    assert 3.5 <= e1 / e2 <= 4.5
    assert abs(apply_L_fd(family, f, x, G) - exact) <= 1e-6 * abs(exact)


def test_termwise_residual_within_tail_budget():
    x = np.array([2.5, 1.0])
    for N in (10, 20, 30):
        table = build_table("bc", XI[2], G, N)
        sv = series_eval(table, x)
        res = abs(apply_L_to_series("bc", table, x) - np.dot(XI[2], XI[2]) * sv.value)
        # each omitted level contributes at most its own size times |<nu, nu - 2 xi>| ~ N^2
        assert res <= max(sv.tail_bound * (N + 2) ** 2, 1e-13 * abs(sv.value))


def test_free_case_residual():
    free = Couplings(0, 0, 0, a=(0, 0))
    for fam in ("bc", "t", "cs"):
        x = [3.0, 1.0]
        assert eigen_residual(fam, XI[2], x, free, 10) < 1e-15
        assert eigen_residual(fam, XI[2], x, free, 10, use_wavefunction=True) < 1e-14


@pytest.mark.parametrize("family", ["bc", "t", "cs"])
def test_residual_decreases_in_N(family):
    x = np.array([2.0, 0.8])
    res = [eigen_residual(family, XI[2], x, G, N) for N in (10, 15, 20, 25, 30)]
    assert all(b < a or b < 1e-13 for a, b in zip(res, res[1:]))
    assert res[-1] < 1e-8


def test_geometric_rate():
    x = np.array([2.0, 1.0])  # gaps >= 1
    res = np.array([eigen_residual("bc", XI[2], x, G, N) for N in (4, 8, 12, 16)])
    steps = res[1:] / res[:-1]
    assert np.all(steps < 0.2)


@pytest.mark.parametrize("kind", ["M", "L"])
def test_potential_degeneration(kind):
    x = [1.7, 0.6]
    errs = [potential_limit_error(kind, x, G, c) for c in (10, 20, 30)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-12
