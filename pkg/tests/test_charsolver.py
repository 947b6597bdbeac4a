import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vwave.boundary import InitialData, Packet, build_boundary_trace
from vwave.charsolver import (CharState, NumericError, eval_rhs, integrate_goursat,
                              normalize_angle, path_independence_residual, theta)
from vwave.wavespeed import InvalidInput, WaveSpeedModel

from conftest import solve


@pytest.mark.parametrize("w,z,expected", [(0, 0, 1), (math.pi, 0, 0), (0, math.pi, 0),
                                          (3 * math.pi, 0, 0), (-math.pi + 1e-9, 0, 1)])
def test_theta(w, z, expected):
    assert theta(w, z) == expected


angles = st.floats(-10, 10)
pos = st.floats(0.1, 50)


@given(angles, pos, st.floats(-3, 3))
def test_rhs_equal_angles_decouple(w, p, u):
    r = eval_rhs(CharState(u, w, w, p, 2 * p, 0, 0), WaveSpeedModel())
    assert r.w_Y == r.z_X == r.p_Y == r.q_X == 0


@given(angles, angles, pos, pos)
def test_rhs_constant_speed(w, z, p, q):
    r = eval_rhs(CharState(0.4, w, z, p, q, 0, 0), WaveSpeedModel("constant", (2.0,)))
    assert r.w_Y == r.z_X == r.p_Y == r.q_X == 0
    assert r.u_X == pytest.approx(math.sin(w) * p / 8)


@given(angles, pos, pos, st.floats(-3, 3))
def test_rhs_frozen_and_jacobian_identities(z, p, q, u):
    m = WaveSpeedModel()
    c = m.c(u)
    r = eval_rhs(CharState(u, math.pi, z, p, q, 0, 0), m, "dissipative")
    assert r.w_Y == r.z_X == r.p_Y == r.q_X == 0
    assert abs(r.x_X) < 1e-15 * p and abs(r.t_X) < 1e-15 * p and abs(r.u_X) < 1e-15 * p
    r = eval_rhs(CharState(u, 0.3, z, p, q, 0, 0), m)
    assert r.x_X == pytest.approx(c * r.t_X, rel=1e-15)
    assert r.x_Y == pytest.approx(-c * r.t_Y, rel=1e-15)


def test_rhs_nonfinite():
    with pytest.raises(NumericError):
        eval_rhs(CharState(0, math.nan, 0, 1, 1, 0, 0), WaveSpeedModel())


def test_normalize_angle():
    assert normalize_angle(math.pi) == pytest.approx(math.pi)
    assert normalize_angle(-math.pi) == pytest.approx(math.pi)
    assert normalize_angle(3 * math.pi + 0.1) == pytest.approx(-math.pi + 0.1)


def test_constant_state_exact():
    k = 0.7
    m = WaveSpeedModel()
    G = solve(InitialData(offset=k), m, -2.5, 2.5, 500)
    v = G.valid
    c = m.c(k)
    Xg, Yg = np.meshgrid(G.X, G.Y, indexing="ij")
    assert np.max(np.abs(G.u[v] - k)) <= 1e-12
    assert np.max(np.abs(G.x[v] - (Xg - Yg)[v] / 2)) <= 1e-12
    assert np.max(np.abs(G.t[v] - (Xg + Yg)[v] / (2 * c))) <= 1e-12
    assert np.all(np.isnan(G.u[~v]))


def test_rejects_bad_input(sin_model):
    tr = build_boundary_trace(InitialData(), sin_model, np.linspace(-1, 1, 11))
    with pytest.raises(InvalidInput):
        integrate_goursat(tr, sin_model, "other")
    with pytest.raises(InvalidInput):
        integrate_goursat(tr, sin_model, h=0.5)
    tr2 = build_boundary_trace(InitialData(), sin_model, np.array([0.0, 0.1, 0.3]))
    with pytest.raises(InvalidInput):
        integrate_goursat(tr2, sin_model)


def test_blowup_run_finite_and_frozen(blowup_pair):
    GC, GD = blowup_pair
    v = GC.valid
    for f in ("u", "w", "z", "p", "q", "x", "t"):
        assert np.all(np.isfinite(getattr(GC, f)[v]))
    assert np.all(GC.p[v] > 0) and np.all(GC.q[v] > 0)
    # w really passes pi in the conservative run
    assert np.max(np.abs(normalize_angle(GC.w[v]))) > 3.1
    assert np.any(GD.theta_mask[GD.valid] == 0)
    assert np.max(normalize_angle(GD.w[GD.valid])) <= math.pi


def test_monotone_in_Y(blowup_pair):
    for G in blowup_pair:
        t = np.where(G.valid, G.t, np.nan)
        x = np.where(G.valid, G.x, np.nan)
        dt = np.diff(t, axis=1)
        dx = np.diff(x, axis=1)
        assert np.nanmin(dt) >= -1e-14
        assert np.nanmax(dx) <= 1e-14


def test_shift_invariance(sin_model, packet):
    tr = build_boundary_trace(packet, sin_model, np.linspace(-4, 4, 401))
    G0 = integrate_goursat(tr, sin_model)
    G1 = integrate_goursat(tr.shifted(1, -2), sin_model)
    v = G0.valid
    for f in ("u", "x", "t", "p", "q"):
        assert np.allclose(getattr(G0, f)[v], getattr(G1, f)[v], rtol=1e-10, atol=1e-10)
    assert np.allclose(G1.w[v] - G0.w[v], 2 * math.pi, atol=1e-9)


@pytest.mark.parametrize("mode", ["conservative", "dissipative"])
def test_parallel_matches_serial(sin_model, packet, mode):
    tr = build_boundary_trace(packet, sin_model, np.linspace(-4, 4, 201))
    Gs = integrate_goursat(tr, sin_model, mode, serial=True)
    Gp = integrate_goursat(tr, sin_model, mode, threads=4)
    for f in ("u", "w", "z", "p", "q", "x", "t", "theta_mask"):
        assert np.array_equal(getattr(Gs, f), getattr(Gp, f), equal_nan=True)


def test_path_independence_second_order(sin_model):
    init = InitialData("packets", packets=(Packet(0.4, 0.5, 0.3, -1), Packet(0.3, 0.6, -0.5, 1)))
    r = [path_independence_residual(solve(init, sin_model, -3, 3, n))[0] for n in (150, 300, 600)]
    assert r[0] > r[1] > r[2]
    order = np.log2(r[1] / r[2])
    assert 1.8 < order < 2.2


def test_path_independence_constant_state():
    G = solve(InitialData(offset=0.2), WaveSpeedModel(), -1, 1, 100)
    assert path_independence_residual(G)[0] < 1e-13


def test_path_independence_dissipative_below_plateau(sin_model, packet):
    # small box near the data line, away from the frozen set
    res = []
    for n in (200, 400, 800):
        G = solve(packet, sin_model, -4, 4, n, "dissipative")
        k = n // 8
        base = (n // 2, n // 2)
        res.append(path_independence_residual(G, (base, (base[0] + k, base[1] + k)))[0])
    assert 1.7 < np.log2(res[1] / res[2]) < 2.3


def test_plateau_rows_constant(blowup_pair):
    from vwave.asymptotics import plateau_constancy
    pc = plateau_constancy(blowup_pair[1])
    assert pc["pairs"] > 0
    assert max(pc[f] for f in ("x", "t", "u", "z", "q")) <= 1e-10


def test_ymax_truncation(sin_model, packet):
    tr = build_boundary_trace(packet, sin_model, np.linspace(-4, 4, 201))
    G = integrate_goursat(tr, sin_model)
    Gt = integrate_goursat(tr, sin_model, Ymax=0.0)
    assert Gt.nY < G.nY
    assert np.array_equal(Gt.u, G.u[:, :Gt.nY], equal_nan=True)


def test_grid_csv_and_summary(tmp_path, sin_model):
    from vwave.io import read_csv
    G = solve(InitialData(A0=0.3), sin_model, -1, 1, 20, "dissipative")
    G.to_csv(tmp_path / "g.csv")
    d = read_csv(tmp_path / "g.csv")
    assert list(d) == ["X", "Y", "u", "w", "z", "p", "q", "x", "t", "theta"]
    assert len(d["X"]) == int(G.valid.sum())
    s = G.summary()
    assert s["mode"] == "dissipative" and s["u"]["max"] == pytest.approx(np.nanmax(G.u))


def test_mirror_symmetry(sin_model):
    # u, x, t are marched along X, so the discrete scheme is mirror
    # symmetric only up to its truncation error
    a = InitialData("packets", packets=(Packet(0.5, 0.4, 1.0, -1),))
    b = InitialData("packets", packets=(Packet(0.5, 0.4, -1.0, 1),))
    gaps = []
    for n in (150, 300):
        Ga = solve(a, sin_model, -3, 3, n)
        Gb = solve(b, sin_model, -3, 3, n).mirrored()
        v = Ga.valid
        gaps.append(max(np.max(np.abs(getattr(Ga, f)[v] - getattr(Gb, f)[v]))
                        for f in ("u", "w", "z", "p", "q", "x", "t")))
    assert gaps[1] < 1e-3
    assert 3.0 < gaps[0] / gaps[1] < 5.0
