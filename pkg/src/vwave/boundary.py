"""Initial data on t=0 and the boundary trace on the line X+Y=0."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .wavespeed import InvalidInput, WaveSpeedModel


@dataclass(frozen=True)
class Packet:
    """One Gaussian bump A exp(-((x-x0)/sigma)^2) in u0.

    direction -1 makes it a pure backward wave (S=0 at t=0), +1 a pure
    forward wave (R=0), 0 leaves u1 untouched.
    """

    amplitude: float
    sigma: float
    center: float = 0.0
    direction: int = 0


@dataclass(frozen=True)
class InitialData:
    """u0, u1 built from Gaussian bumps.

    family "gaussian": u0 = A0 exp(-x^2/s0^2), u1 = A1 exp(-x^2/s1^2)
    family "packets":  u0 = sum of Packet bumps, u1 = c(u0) * sum(-d_k b_k')
    plus an optional constant offset u0 += k (for the constant-state check)
    and an optional linear term u0 += slope*x.
    """

    family: str = "gaussian"
    A0: float = 0.0
    sigma0: float = 1.0
    A1: float = 0.0
    sigma1: float = 1.0
    center: float = 0.0
    offset: float = 0.0
    slope: float = 0.0
    packets: tuple = field(default_factory=tuple)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        pk = tuple(Packet(**p) for p in d.pop("packets", ()))
        return cls(packets=pk, **d)

    def to_dict(self):
        out = {"family": self.family, "A0": self.A0, "sigma0": self.sigma0,
               "A1": self.A1, "sigma1": self.sigma1, "center": self.center,
               "offset": self.offset, "slope": self.slope}
        if self.packets:
            out["packets"] = [vars(p) for p in self.packets]
        return out

    def with_amplitude(self, A1):
        """Copy with the u1 amplitude replaced (packets: scale every bump)."""
        if self.family == "packets":
            base = self.packets
            pk = tuple(Packet(A1 * p.amplitude / _ref_amp(base), p.sigma, p.center,
                              p.direction) for p in base)
            return _replace(self, packets=pk)
        return _replace(self, A1=float(A1))

    def _bumps(self, x):
        g = np.zeros_like(x)
        gx = np.zeros_like(x)
        v = np.zeros_like(x)
        for p in self.packets:
            e = p.amplitude * np.exp(-(((x - p.center) / p.sigma) ** 2))
            ex = -2.0 * (x - p.center) / p.sigma**2 * e
            g += e
            gx += ex
            v += -p.direction * ex
        return g, gx, v

    def u0(self, x):
        x = np.asarray(x, dtype=float)
        base = self.offset + self.slope * x
        if self.family == "packets":
            return base + self._bumps(x)[0]
        return base + self.A0 * np.exp(-(((x - self.center) / self.sigma0) ** 2))

    def u0x(self, x):
        x = np.asarray(x, dtype=float)
        if self.family == "packets":
            return self.slope + self._bumps(x)[1]
        d = x - self.center
        return self.slope - 2.0 * d / self.sigma0**2 * self.A0 * np.exp(-((d / self.sigma0) ** 2))

    def u1(self, x, model: WaveSpeedModel | None = None):
        x = np.asarray(x, dtype=float)
        if self.family == "packets":
            if model is None:
                raise InvalidInput("packet data needs the wave speed to build u1")
            return model.c(self.u0(x)) * self._bumps(x)[2]
        return self.A1 * np.exp(-(((x - self.center) / self.sigma1) ** 2))


def _ref_amp(packets):
    return max(abs(p.amplitude) for p in packets) or 1.0


def _replace(obj, **kw):
    from dataclasses import replace
    return replace(obj, **kw)


@dataclass
class BoundaryTrace:
    s: np.ndarray
    u: np.ndarray
    x: np.ndarray
    t: np.ndarray
    w: np.ndarray
    z: np.ndarray
    p: np.ndarray
    q: np.ndarray

    @property
    def h(self):
        return float(self.s[1] - self.s[0])

    def __len__(self):
        return len(self.s)

    def shifted(self, kw=0, kz=0):
        """Trace with w += 2*pi*kw, z += 2*pi*kz (same point of the quotient)."""
        return BoundaryTrace(self.s, self.u, self.x, self.t,
                             self.w + 2 * np.pi * kw, self.z + 2 * np.pi * kz,
                             self.p, self.q)

    def to_csv(self, path):
        from .io import write_csv
        cols = ["s", "u", "w", "z", "p", "q"]
        write_csv(path, cols, [getattr(self, c) for c in cols])


def build_boundary_trace(init: InitialData, model: WaveSpeedModel, s_values) -> BoundaryTrace:
    s = np.asarray(s_values, dtype=float)
    if s.ndim != 1 or len(s) < 1 or np.any(np.diff(s) <= 0):
        raise InvalidInput("s_values must be strictly increasing")
    u0 = init.u0(s)
    ux = init.u0x(s)
    u1 = init.u1(s, model)
    if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(ux)) and np.all(np.isfinite(u1))):
        raise InvalidInput("non-finite initial profile value")
    c = model.c(u0)
    R = u1 + c * ux
    S = u1 - c * ux
    return BoundaryTrace(
        s=s.copy(), u=u0, x=s.copy(), t=np.zeros_like(s),
        w=2.0 * np.arctan(R), z=2.0 * np.arctan(S),
        p=1.0 + R * R, q=1.0 + S * S,
    )


def riemann_from_trace(trace: BoundaryTrace):
    return np.tan(trace.w / 2), np.tan(trace.z / 2)


@dataclass
class CompatibilityReport:
    res_u: np.ndarray
    res_x: np.ndarray
    res_t: np.ndarray
    tol: tuple

    @property
    def max_norms(self):
        return (float(np.max(np.abs(self.res_u))), float(np.max(np.abs(self.res_x))),
                float(np.max(np.abs(self.res_t))))

    @property
    def max_residual(self):
        return max(self.max_norms)

    @property
    def ok(self):
        return all(r <= t for r, t in zip(self.max_norms, self.tol))


def check_compatibility(trace: BoundaryTrace, model: WaveSpeedModel, tol=None) -> CompatibilityReport:
    """Residuals of d/ds(u, x, t) against the Goursat right-hand sides.

    Derivatives by centered differences (one-sided second order at the ends).
    The x condition uses (1+cos w)p + (1+cos z)q over 4.

    Default tolerance per field: h^2 times the max third derivative (about six
    times the leading truncation error) plus a round-off floor. The third
    derivative comes from the positions u, x, t, so inconsistent w, z, p, q
    cannot loosen it.
    """
    n = len(trace)
    if n < 3:
        raise InvalidInput("compatibility check needs at least 3 trace points")
    s = trace.s

    def dds(f):
        return np.gradient(f, s, edge_order=2)

    c = model.c(trace.u)
    w, z, p, q = trace.w, trace.z, trace.p, trace.q
    rhs_u = (np.sin(w) * p - np.sin(z) * q) / (4 * c)
    rhs_x = ((1 + np.cos(w)) * p + (1 + np.cos(z)) * q) / 4
    rhs_t = ((1 + np.cos(w)) * p - (1 + np.cos(z)) * q) / (4 * c)
    if tol is None:
        h2 = float(np.max(np.diff(s))) ** 2
        tols = []
        for f in (trace.u, trace.x, trace.t):
            d1 = dds(f)
            d3 = dds(dds(d1)) if n >= 5 else np.zeros_like(f)
            tols.append(h2 * float(np.max(np.abs(d3))) + 1e-10 * (1 + float(np.max(np.abs(d1)))))
        tol = tuple(tols)
    elif np.ndim(tol) == 0:
        tol = (float(tol),) * 3
    return CompatibilityReport(dds(trace.u) - rhs_u, dds(trace.x) - rhs_x,
                               dds(trace.t) - rhs_t, tuple(tol))
