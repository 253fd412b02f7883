import numpy as np
import pytest

from hyperwave.core import Couplings, hyperoctahedral_group
from hyperwave.errors import ChamberViolation, ExtrapolationDivergence, NearSingularSpectral
from hyperwave.hcseries import build_table
from hyperwave.special import weight_and_rho
from hyperwave.wavefn import (
    orbit_terms, plane_wave_envelope, plane_wave_gap, wavefunction, wavefunction_regular,
)

G = Couplings(0.37 + 0.1j, 0.61 - 0.05j, 0.23 + 0.07j)
XI2 = np.array([0.31 + 0.42j, -0.17 + 0.23j])
X2 = np.array([3.0, 1.0])


def test_free_n1_is_cosh():
    xi, x = 0.37 + 0.2j, 1.7
    assert wavefunction("bc", [xi], [x], Couplings(), 10) == pytest.approx(2 * np.cosh(xi * x), rel=1e-14)


@pytest.mark.parametrize("family", ["bc", "t", "cs"])
def test_w_invariance(family):
    base = wavefunction(family, XI2, X2, G)
    for w in hyperoctahedral_group(2):
        assert abs(wavefunction(family, w.act(XI2), X2, G) - base) <= 1e-10 * abs(base)


def test_w_invariance_n3_random():
    xi = np.array([0.31 + 0.42j, -0.17 + 0.23j, 0.55 - 0.11j])
    x = np.array([6.0, 4.0, 2.0])
    base = wavefunction("bc", xi, x, G, 20)
    rng = np.random.default_rng(0)
    W = hyperoctahedral_group(3)
    for k in rng.choice(len(W), 5, replace=False):
        assert abs(wavefunction("bc", W[k].act(xi), x, G, 20) - base) <= 1e-10 * abs(base)


def test_divided_by_weight_stays_bounded_near_wall():
    # Phi / delta is the (smooth) hypergeometric function; approach x_2 -> x_1 slowly
    vals = []
    for gap in (0.8, 0.6, 0.4, 0.3):
        x = np.array([2.0, 2.0 - gap])
        delta, _ = weight_and_rho(x, G)
        vals.append(wavefunction("bc", XI2, x, G) / delta)
    mags = np.abs(vals)
    assert np.all(np.isfinite(mags)) and mags.max() / mags.min() < 5


def test_guard_and_chamber():
    with pytest.raises(NearSingularSpectral) as err:
        wavefunction("bc", [0.5 + 1e-6, 0.2 + 0.1j], X2, G)
    assert "2xi_1 = 1" in err.value.obj
    with pytest.raises(ChamberViolation):
        wavefunction("bc", XI2, [1.0, 3.0], G)


def test_regular_path_matches_plain_on_generic_point():
    rv = wavefunction_regular("bc", XI2, X2, G)
    assert abs(rv.value - wavefunction("bc", XI2, X2, G)) <= max(10 * rv.error, 1e-9)


@pytest.mark.parametrize("xi0", [np.array([0.5, -0.17 + 0.23j]), np.array([0.83 + 0.23j, -0.17 + 0.23j])])
def test_bounded_at_removable_hyperplanes(xi0):
    rv = wavefunction_regular("bc", xi0, X2, G)
    mags = np.abs(rv.samples)
    assert mags.max() / mags.min() < 2
    assert rv.error < 1e-4 * abs(rv.value)


def test_single_orbit_terms_blow_up_where_sum_is_bounded():
    xi0 = np.array([0.5, -0.17 + 0.23j])
    u = np.array([0.6, 0.8])
    peaks = []
    for d in (1e-2, 1e-3, 1e-4):
        terms = orbit_terms("bc", xi0 + d * u, X2, G)
        peaks.append(np.max(np.abs(terms)))
    ratios = [peaks[i + 1] / peaks[i] for i in range(2)]
    assert all(8 < r < 12 for r in ratios)       # simple pole: grows like 1/delta
    # and the unsymmetrized regularized table compensates it with Delta_U -> 0
    reg = build_table("bc", xi0, G, 10, regularize=True)
    assert reg.delta_u == 0 and np.all(np.isfinite(reg.coeffs))


def test_extrapolation_divergence_detected(monkeypatch):
    import hyperwave.wavefn as wf

    class Fake:
        def __init__(self, v):
            self.value = v

    calls = iter([1.0, 10.0, 100.0])
    monkeypatch.setattr(wf, "orbit_data", lambda *a, **k: None)
    monkeypatch.setattr(wf, "evaluate", lambda *a, **k: Fake(next(calls)))
    with pytest.raises(ExtrapolationDivergence):
        wf.wavefunction_regular("bc", XI2, X2, G)


def test_plane_wave_asymptotics_of_phi():
    # the orbit terms interfere, so the gap oscillates under a decaying envelope
    xi = np.array([0.42j, 0.23j])
    ts = np.arange(2, 9)
    gaps = [plane_wave_gap("bc", xi, t * np.array([2.0, 1.0]), G) for t in ts]
    env = [plane_wave_envelope("bc", xi, t * np.array([2.0, 1.0]), G) for t in ts]
    assert all(b < a for a, b in zip(env, env[1:]))
    assert all(gp <= ev * (1 + 1e-12) for gp, ev in zip(gaps, env))
    assert np.polyfit(ts, np.log(gaps), 1)[0] < -0.5


def test_reproducible_direction():
    a = wavefunction_regular("bc", XI2, X2, G, seed=3)
    b = wavefunction_regular("bc", XI2, X2, G, seed=3)
    assert a.value == b.value and np.array_equal(a.direction, b.direction)


@pytest.mark.parametrize("family", ["bc", "t", "cs"])
def test_orbit_sum_matches_termwise_assembly(family):
    # rebuild Phi from scalar c-functions and one series table per orbit element
    from hyperwave.hcseries import series_eval
    from hyperwave.special import c_function

    ref = sum(c_function(family, w.act(XI2), G).to_complex()
              * series_eval(build_table(family, w.act(XI2), G, 30), X2).value
              for w in hyperoctahedral_group(2))
    assert abs(wavefunction(family, XI2, X2, G) - ref) <= 1e-12 * abs(ref)
