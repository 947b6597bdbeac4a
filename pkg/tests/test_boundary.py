import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vwave.boundary import (InitialData, Packet, build_boundary_trace, check_compatibility,
                            riemann_from_trace)
from vwave.wavespeed import InvalidInput, WaveSpeedModel

S = np.linspace(-3, 3, 61)


def test_zero_data():
    tr = build_boundary_trace(InitialData(), WaveSpeedModel(), S)
    for f, v in (("u", 0), ("w", 0), ("z", 0), ("p", 1), ("q", 1), ("t", 0)):
        assert np.all(getattr(tr, f) == v)
    assert np.array_equal(tr.x, S)


def test_unit_velocity_bump():
    # u0 = 0, u1(0) = 1
    init = InitialData(A1=1.0, sigma1=1.0)
    tr = build_boundary_trace(init, WaveSpeedModel(), np.array([-1.0, 0.0, 1.0]))
    assert tr.w[1] == pytest.approx(math.pi / 2) and tr.z[1] == pytest.approx(math.pi / 2)
    assert tr.p[1] == pytest.approx(2) and tr.q[1] == pytest.approx(2)


def test_linear_profile():
    init = InitialData(slope=1.0)
    tr = build_boundary_trace(init, WaveSpeedModel("constant", (1,)), S)
    assert np.allclose(tr.w, math.pi / 2) and np.allclose(tr.z, -math.pi / 2)
    assert np.allclose(tr.p, 2) and np.allclose(tr.q, 2)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_rejects_bad_s_and_nonfinite():
    with pytest.raises(InvalidInput):
        build_boundary_trace(InitialData(), WaveSpeedModel(), [0.0, 0.0, 1.0])
    with pytest.raises(InvalidInput):
        build_boundary_trace(InitialData(A0=math.inf), WaveSpeedModel(), S)


data = st.builds(InitialData, A0=st.floats(-2, 2), sigma0=st.floats(0.3, 2),
                 A1=st.floats(-2, 2), sigma1=st.floats(0.3, 2), center=st.floats(-1, 1))


@given(data)
def test_reconstruction_and_ranges(init):
    m = WaveSpeedModel()
    tr = build_boundary_trace(init, m, S)
    R, Sv = riemann_from_trace(tr)
    c = m.c(tr.u)
    u1, u0x = init.u1(S), init.u0x(S)
    assert np.allclose((R + Sv) / 2, u1, rtol=1e-12, atol=1e-12)
    assert np.allclose((R - Sv) / (2 * c), u0x, rtol=1e-12, atol=1e-12)
    assert np.all(np.abs(tr.w) < math.pi) and np.all(np.abs(tr.z) < math.pi)
    assert np.all(tr.p >= 1) and np.all(tr.q >= 1)


def test_packets_are_one_directional():
    m = WaveSpeedModel()
    back = build_boundary_trace(InitialData("packets", packets=(Packet(0.5, 0.4, 0, -1),)), m, S)
    fwd = build_boundary_trace(InitialData("packets", packets=(Packet(0.5, 0.4, 0, 1),)), m, S)
    assert np.allclose(back.z, 0, atol=1e-15) and np.max(np.abs(back.w)) > 0.1
    assert np.allclose(fwd.w, 0, atol=1e-15) and np.max(np.abs(fwd.z)) > 0.1


def test_compatibility_constant_state_exact():
    rep = check_compatibility(build_boundary_trace(InitialData(), WaveSpeedModel(),
                                                   np.linspace(-4, 4, 65)),
                              WaveSpeedModel())
    assert rep.max_norms == (0.0, 0.0, 0.0)


def test_compatibility_second_order():
    m = WaveSpeedModel()
    init = InitialData(A0=0.8, sigma0=0.7, A1=0.5, sigma1=0.9)
    r = [check_compatibility(build_boundary_trace(init, m, np.linspace(-4, 4, n + 1)), m).max_residual
         for n in (100, 200, 400)]
    assert 3.5 < r[0] / r[1] < 4.5 and 3.5 < r[1] / r[2] < 4.5


def test_compatibility_perturbation_flagged():
    m = WaveSpeedModel()
    tr = build_boundary_trace(InitialData(A0=0.8, sigma0=0.7), m, S)
    k = 5
    tr.p[k] += 0.1
    rep = check_compatibility(tr, m)
    assert abs(rep.res_x[k]) >= 0.02
    assert not rep.ok


def test_compatibility_needs_three_points():
    tr = build_boundary_trace(InitialData(), WaveSpeedModel(), [0.0, 1.0])
    with pytest.raises(InvalidInput):
        check_compatibility(tr, WaveSpeedModel())


def test_trace_csv(tmp_path):
    from vwave.io import read_csv
    tr = build_boundary_trace(InitialData(A0=1.0), WaveSpeedModel(), S)
    tr.to_csv(tmp_path / "t.csv")
    d = read_csv(tmp_path / "t.csv")
    assert list(d) == ["s", "u", "w", "z", "p", "q"]
    assert np.array_equal(d["u"], tr.u)


def test_generated_traces_pass_default_tolerance():
    m = WaveSpeedModel()
    init = InitialData("packets", packets=(Packet(0.9, 0.4, 0.5, -1), Packet(0.3, 0.6, -1, 1)))
    assert check_compatibility(build_boundary_trace(init, m, np.linspace(-4, 4, 801)), m).ok
