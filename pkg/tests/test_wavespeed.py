import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vwave.wavespeed import InvalidInput, WaveSpeedModel, check_assumption_A, eval_c, in_range


@pytest.mark.parametrize("model,u,expected", [
    (WaveSpeedModel("sinusoidal", (2, 1)), 0.0, (2, 1, 0)),
    (WaveSpeedModel("sinusoidal", (2, 1)), math.pi / 2, (3, 0, -1)),
    (WaveSpeedModel("constant", (1,)), 5.0, (1, 0, 0)),
])
def test_eval_c_examples(model, u, expected):
    assert np.allclose(eval_c(model, u), expected, atol=1e-15)


def test_eval_c_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        eval_c(WaveSpeedModel(), math.nan)


@pytest.mark.parametrize("kind,params", [
    ("sinusoidal", (1.0, 1.0)), ("sinusoidal", (2.0, math.inf)),
    ("sqrt-quadratic", (0.0, 1.0)), ("constant", (-1.0,)), ("nope", (1.0,)),
])
def test_bad_parameters(kind, params):
    with pytest.raises(InvalidInput):
        WaveSpeedModel(kind, params)


def test_assumption_sinusoidal():
    rep = check_assumption_A(WaveSpeedModel("sinusoidal", (2, 1)), 1000)
    assert rep.morse_ok and rep.ok
    assert rep.c_min == pytest.approx(1.0, abs=1e-4)
    # brute force: max |cos u/(2+sin u)| = 1/sqrt(3)
    u = np.linspace(-math.pi, math.pi, 10**6)
    assert rep.M == pytest.approx(np.max(np.abs(np.cos(u) / (2 + np.sin(u)))), rel=1e-4)
    assert rep.M == pytest.approx(1 / math.sqrt(3), rel=1e-4)
    assert sorted(round(r, 8) for r, _ in rep.roots) == [round(-math.pi / 2, 8), round(math.pi / 2, 8)]


def test_assumption_constant_flags_morse():
    rep = check_assumption_A(WaveSpeedModel("constant", (1.0,)))
    assert not rep.morse_ok
    assert any("≡0" in v for v in rep.violations)


def test_assumption_sqrt_quadratic():
    rep = check_assumption_A(WaveSpeedModel("sqrt-quadratic", (1, 1), (-2, 2)))
    assert rep.morse_ok
    assert len(rep.roots) == 1
    r, cpp = rep.roots[0]
    assert abs(r) < 1e-9 and cpp == pytest.approx(1.0)


def test_assumption_needs_samples():
    with pytest.raises(InvalidInput):
        check_assumption_A(WaveSpeedModel(), 2)


def test_morse_violation_detected():
    # c = 2 + u^3: c'(0) = c''(0) = 0
    rep = check_assumption_A(WaveSpeedModel("tabulated", (2, 0, 0, 1), (-0.5, 0.5)), 1001)
    assert not rep.morse_ok


MODELS = [WaveSpeedModel("sinusoidal", (2, 1)), WaveSpeedModel("sinusoidal", (3, -2)),
          WaveSpeedModel("sqrt-quadratic", (1, 1), (-2, 2)), WaveSpeedModel("constant", (2,)),
          WaveSpeedModel("tabulated", (2, 0.1, 0.05), (-1, 1))]


@given(st.integers(0, len(MODELS) - 1), st.floats(0, 1))
def test_derivatives_match_finite_differences(k, frac):
    m = MODELS[k]
    lo, hi = m.u_range
    u = lo + frac * (hi - lo)
    e = 1e-6
    c, cp, cpp = m.derivs(u)
    cpl, cpr = m.derivs(u - e)[1], m.derivs(u + e)[1]
    fd1 = (m.c(u + e) - m.c(u - e)) / (2 * e)
    fd2 = (cpr - cpl) / (2 * e)
    assert abs(fd1 - cp) <= 1e-6 * max(1.0, abs(cp))
    assert abs(fd2 - cpp) <= 1e-6 * max(1.0, abs(cpp))
    assert c > 0


def test_in_range_and_roundtrip():
    m = WaveSpeedModel("sqrt-quadratic", (1, 1), (-2, 2))
    assert in_range(m, 1.5) and not in_range(m, 3)
    assert WaveSpeedModel.from_dict(m.to_dict()) == m
