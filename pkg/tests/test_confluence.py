import math

import numpy as np
import pytest

from hyperwave.confluence import (
    c_function_limit_error, coefficient_limit_error, coupling_path, log_linear_fit, scan,
    series_confluence_error, strictly_decreasing, translated_series_direct, translated_table,
    wavefunction_confluence_error,
)
from hyperwave.core import Couplings
from hyperwave.hcseries import series_eval

G = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
XI2 = np.array([0.31 + 0.42j, -0.17 + 0.23j])
X2 = np.array([3.0, 1.0])
CS = (4, 6, 8, 10)


def test_coupling_path_examples():
    assert coupling_path("M", G, 0).gM == pytest.approx((1 + math.sqrt(5)) / 2)
    for c in (0, 3.5, 12):
        gc = coupling_path("L", G, c)
        assert gc.gS == 2 * G.gS and gc.gM == G.gM
        assert gc.gL * (gc.gL - 1) == pytest.approx(math.exp(2 * c) / 16)
    assert coupling_path("L", G, 0).gL == pytest.approx((1 + math.sqrt(5 / 4)) / 2)
    gm = coupling_path("M", G, 7).gM
    assert gm * (gm - 1) == pytest.approx(math.exp(7))


def test_zero_couplings_n1():
    # kind M leaves n = 1 untouched; kind L still carries the growing g_L
    g = Couplings(0, 0, 0)
    assert all(series_confluence_error("M", [0.37j], [1.2], g, c, 10) == 0 for c in (2, 4, 6))
    errs = [series_confluence_error("L", [0.37j], [1.2], g, c, 10) for c in (2, 4, 6)]
    assert strictly_decreasing(errs) and errs[-1] < 1e-8


def test_n1_kind_M_is_a_parameter_limit():
    # rho_M = 0 for n = 1 and g_M does not enter: both sides coincide exactly
    for c in (2, 6):
        assert wavefunction_confluence_error("M", [0.31 + 0.42j], [1.5], G, c) < 1e-13


@pytest.mark.parametrize("kind", ["M", "L"])
def test_series_confluence_decreases(kind):
    errs = scan(series_confluence_error, CS, kind=kind, xi=XI2, x=X2, g=G, N=30)
    assert strictly_decreasing(errs)
    slope, r2 = log_linear_fit(CS, errs)
    assert slope < 0 and r2 > 0.98


@pytest.mark.parametrize("kind", ["M", "L"])
def test_wavefunction_confluence_decreases(kind):
    errs = scan(wavefunction_confluence_error, CS, kind=kind, xi=XI2, x=X2, g=G, N=30)
    assert strictly_decreasing(errs)
    slope, r2 = log_linear_fit(CS, errs)
    assert slope < 0 and r2 > 0.98
    if kind == "L":
        assert errs[-1] <= 1e-3


@pytest.mark.parametrize("kind", ["M", "L"])
def test_c_function_limit_not_slower(kind):
    c_err = scan(c_function_limit_error, CS, kind=kind, xi=XI2, g=G)
    w_err = scan(wavefunction_confluence_error, CS, kind=kind, xi=XI2, x=X2, g=G, N=30)
    assert strictly_decreasing(c_err)
    assert log_linear_fit(CS, c_err)[0] <= log_linear_fit(CS, w_err)[0] + 0.05


@pytest.mark.parametrize("kind", ["M", "L"])
def test_coefficient_limit(kind):
    assert coefficient_limit_error(kind, XI2, G, 20.0, 8) <= 1e-6


@pytest.mark.parametrize("kind", ["M", "L"])
def test_translated_series_identity(kind):
    for c in (1.0, 3.0):
        direct = translated_series_direct(kind, XI2, X2, G, c, 30)
        scaled = series_eval(translated_table(kind, XI2, G, c, 30), X2).value
        assert abs(direct - scaled) <= 1e-12 * max(1, abs(direct))


def test_target_needs_normalized_aux():
    with pytest.raises(ValueError):
        series_confluence_error("M", XI2, X2, G.replace(a=(1, 1)), 4.0, 5)


@pytest.mark.parametrize("g", [Couplings(0, 0, 0), Couplings(0.37, 0.61, 0.23)])
def test_wavefunction_confluence_real_and_zero_couplings(g):
    errs = scan(wavefunction_confluence_error, CS, kind="L", xi=XI2, x=X2, g=g, N=30)
    assert strictly_decreasing(errs) and errs[-1] < 1e-3
