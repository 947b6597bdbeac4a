import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vwave.boundary import InitialData
from vwave.charsolver import CharState
from vwave.lattice import interp_bilinear_many
from vwave.physmap import (dalembert, energy_series, extract_isochrone, jacobian, locate,
                           oracle_error, sample_profile, total_energy, trace_characteristic)
from vwave.singular import find_first_singularity
from vwave.wavespeed import InvalidInput, WaveSpeedModel

from conftest import solve

C1 = WaveSpeedModel("constant", (1.0,))
C2 = WaveSpeedModel("constant", (2.0,))


def test_jacobian_rest_state():
    J, det = jacobian(CharState(0, 0, 0, 1, 1, 0, 0), C1)
    assert np.allclose(J, [[0.5, -0.5], [0.5, 0.5]]) and det == pytest.approx(0.5)


def test_jacobian_degenerate_columns():
    J, det = jacobian(CharState(0, math.pi, 0.4, 3, 2, 0, 0), C2)
    assert det == pytest.approx(0, abs=1e-15) and np.allclose(J[:, 0], 0, atol=1e-15)
    J, det = jacobian(CharState(0, 0, math.pi, 3, 2, 0, 0), C2)
    assert det == pytest.approx(0, abs=1e-15) and np.allclose(J[:, 1], 0, atol=1e-15)


@given(st.floats(-7, 7), st.floats(-7, 7), st.floats(0.01, 100), st.floats(0.01, 100),
       st.floats(-3, 3))
def test_det_formula_nonnegative(w, z, p, q, u):
    m = WaveSpeedModel()
    J, det = jacobian(CharState(u, w, z, p, q, 0, 0), m)
    assert det >= 0
    assert det == pytest.approx(np.linalg.det(J), rel=1e-9, abs=1e-12)


@pytest.fixture(scope="module")
def rest_grid():
    return solve(InitialData(offset=0.0), C1, -2, 2, 200)


def test_isochrone_of_linear_field(rest_grid):
    G = rest_grid
    XY = extract_isochrone(G, 1.0)
    assert len(XY) > 10
    assert np.max(np.abs(XY.sum(axis=1) - 2.0)) <= G.h**2
    assert np.all(np.diff(XY[:, 0]) > 0)


def test_isochrone_edges(rest_grid):
    G = rest_grid
    L = extract_isochrone(G, 0.0)
    assert np.allclose(L.sum(axis=1), 0) and len(L) == G.N + 1
    assert extract_isochrone(G, 50.0).shape == (0, 2)
    assert extract_isochrone(G, -1.0).shape == (0, 2)
    with pytest.raises(InvalidInput):
        sample_profile(G, 50.0)


def test_isochrone_self_consistent(blowup_pair):
    G = blowup_pair[0]
    for tau in (0.3, 0.9, 1.3):
        XY = extract_isochrone(G, tau)
        t = interp_bilinear_many(G, "t", XY[:, 0], XY[:, 1])
        assert np.max(np.abs(t - tau)) <= G.h**2


def test_constant_profile():
    G = solve(InitialData(offset=0.4), WaveSpeedModel(), -2, 2, 100)
    for tau in (0.0, 0.3, 0.6):
        P = sample_profile(G, tau)
        assert np.allclose(P.u, 0.4, atol=1e-13)
        assert np.all(P.points[:, 4] == 0) and total_energy(P) == 0
        assert np.all(np.diff(P.x) > 0)


def test_zero_data_energy_zero():
    G = solve(InitialData(), WaveSpeedModel(), -2, 2, 100)
    assert energy_series(G, [0.0, 0.4, 0.8]) == [0.0, 0.0, 0.0]


def test_energy_at_zero_closed_form():
    # u0 = exp(-x^2/s^2), c = 2: E(0) = (1/2) int c^2 u0x^2 = 2 sqrt(pi/2)/s
    s = 0.5
    exact = 2 * math.sqrt(math.pi / 2) / s
    err = [total_energy(sample_profile(solve(InitialData(A0=1.0, sigma0=s), C2, -4, 4, n), 0.0))
           - exact for n in (200, 400)]
    assert abs(err[1]) / exact < 1e-3
    assert 3.5 < err[0] / err[1] < 4.5


def test_dalembert_profile_second_order():
    init = InitialData(A0=1.0, sigma0=0.5, A1=0.3, sigma1=0.7)
    err = [max(oracle_error(solve(init, C2, -4, 4, n), init, [0.4, 0.8])) for n in (200, 400)]
    assert 3.5 < err[0] / err[1] < 4.5


def test_dalembert_closed_form_mass():
    init = InitialData(A1=1.0, sigma1=0.5)
    # u(0, t) -> (1/2c) int u1 = sqrt(pi) s / (2c) for large t
    assert dalembert(init, 2.0, np.array([0.0]), 20.0)[0] == pytest.approx(
        math.sqrt(math.pi) * 0.5 / 4, rel=1e-12)


def test_two_marks_after_blowup(blowup_pair):
    G = blowup_pair[0]
    sp = find_first_singularity(G)
    P = sample_profile(G, sp.xt[1] + 0.02)
    assert len(P.singular_marks) == 2
    lo, hi = P.singular_marks
    assert lo < sp.xt[0] + 0.05 and hi > sp.xt[0] - 0.05
    Pb = sample_profile(G, sp.xt[1] - 0.05)
    assert Pb.singular_marks == []


def test_profile_resample_and_csv(tmp_path, blowup_pair):
    from vwave.io import read_csv
    P = sample_profile(blowup_pair[0], 0.5, n=101)
    assert P.points.shape == (101, 5)
    P.to_csv(tmp_path / "p.csv", "r", "conservative")
    assert list(read_csv(tmp_path / "p.csv")) == ["x", "u", "R", "S", "E"]
    assert open(tmp_path / "p.csv").readline().startswith("# run=r tau=0.5")


def test_backward_characteristic_constant_speed():
    G = solve(InitialData(A0=0.5, sigma0=0.5), C2, -3, 3, 300)
    for method in ("grid", "ode"):
        cv = trace_characteristic(G, (0.5, 0.2), -1, t_end=0.6, method=method)
        t, x = cv.samples[:, 0], cv.samples[:, 1]
        assert np.all(np.diff(t) > 0)
        assert np.max(np.abs(x - (0.5 - 2 * (t - 0.2)))) < 1e-9


def test_grid_characteristic_speed(blowup_pair, sin_model):
    # dx/dt = -c(u) along columns; compare to centered differences of the image
    G = blowup_pair[0]
    cv = trace_characteristic(G, (-0.2, 0.4), -1, t_end=0.8)
    t, x = cv.samples[:, 0], cv.samples[:, 1]
    u = np.array([locate_u(G, a, b) for a, b in cv.XY])
    dxdt = np.gradient(x, t)
    assert np.max(np.abs(dxdt[2:-2] + sin_model.c(u[2:-2]))) < 5e-3


def locate_u(G, X, Y):
    return float(interp_bilinear_many(G, "u", np.array([X]), np.array([Y]))[0])


def test_forward_characteristic_and_truncation(blowup_pair):
    G = blowup_pair[0]
    cv = trace_characteristic(G, (0.0, 0.3), +1)
    assert cv.kind == "forward-characteristic" and np.all(np.diff(cv.samples[:, 0]) > 0)
    assert np.all(np.diff(cv.samples[:, 1]) > 0)
    cvo = trace_characteristic(G, (0.0, 0.3), +1, t_end=10.0, method="ode", dt=0.02)
    assert cvo.truncated
    with pytest.raises(InvalidInput):
        trace_characteristic(G, (0.0, 0.3), 2)


def test_locate_roundtrip(blowup_pair):
    G = blowup_pair[0]
    X, Y = locate(G, 0.3, 0.7)
    x = interp_bilinear_many(G, "x", np.array([X]), np.array([Y]))[0]
    t = interp_bilinear_many(G, "t", np.array([X]), np.array([Y]))[0]
    assert abs(x - 0.3) < 1e-10 and abs(t - 0.7) < 1e-10
