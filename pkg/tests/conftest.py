import numpy as np
import pytest
from hypothesis import settings

from vwave.boundary import InitialData, Packet, build_boundary_trace
from vwave.charsolver import integrate_goursat
from vwave.wavespeed import WaveSpeedModel

settings.register_profile("vwave", deadline=None, max_examples=40)
settings.load_profile("vwave")


@pytest.fixture(scope="session")
def sin_model():
    return WaveSpeedModel("sinusoidal", (2.0, 1.0))


@pytest.fixture(scope="session")
def packet():
    return InitialData("packets", packets=(Packet(0.9, 0.4, 2.0, -1),))


def solve(init, model, lo, hi, N, mode="conservative", **kw):
    tr = build_boundary_trace(init, model, np.linspace(lo, hi, N + 1))
    return integrate_goursat(tr, model, mode, **kw)


@pytest.fixture(scope="session")
def blowup_pair(sin_model, packet):
    """Conservative and dissipative runs of a single backward packet (h = 0.01)."""
    return (solve(packet, sin_model, -4, 4, 800),
            solve(packet, sin_model, -4, 4, 800, "dissipative"))


@pytest.fixture
def record(request):
    """Record one acceptance line; printed in the terminal summary."""
    lines = request.config.stash.setdefault(_ACCEPT, [])

    def rec(crit, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {crit:>2}: {detail}"
        lines.append(line)
        print(line)
        return ok
    return rec


_ACCEPT = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
