"""Wave-speed families c(u) and a checker for the standing assumptions on c.

The solver only ever needs c, c' and c'' at a point, so every family is a
closed form with hand-written derivatives.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

KINDS = ("sinusoidal", "sqrt-quadratic", "constant", "tabulated")

ROOT_TOL = 1e-10
MORSE_TOL = 1e-8


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True)
class WaveSpeedModel:
    """c(u) from a named family.

    sinusoidal:      c = a0 + a1 sin(u), a0 > |a1| > 0
    sqrt-quadratic:  c = sqrt(a0 + a1 u^2), a0 > 0, a1 >= 0
    constant:        c = a0 (violates the Morse condition; test-only)
    tabulated:       cubic polynomial c = sum params[k] u^k, kept for
                     completeness of the family list
    """

    kind: str = "sinusoidal"
    params: tuple = (2.0, 1.0)
    u_range: tuple = (-math.pi, math.pi)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown wave-speed family {self.kind!r}")
        params = tuple(float(p) for p in self.params)
        if not all(math.isfinite(p) for p in params):
            raise InvalidInput("non-finite wave-speed parameter")
        object.__setattr__(self, "params", params)
        lo, hi = (float(v) for v in self.u_range)
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise InvalidInput(f"bad u_range {self.u_range!r}")
        object.__setattr__(self, "u_range", (lo, hi))
        if self.kind == "sinusoidal":
            a0, a1 = params
            if not a0 > abs(a1):
                raise InvalidInput("sinusoidal family needs a0 > |a1|")
        elif self.kind == "sqrt-quadratic":
            a0, a1 = params
            if a0 <= 0 or a1 < 0:
                raise InvalidInput("sqrt-quadratic family needs a0 > 0, a1 >= 0")
        elif self.kind == "constant":
            if len(params) != 1 or params[0] <= 0:
                raise InvalidInput("constant family needs one positive parameter")
        elif self.kind == "tabulated":
            if not 1 <= len(params) <= 4:
                raise InvalidInput("tabulated family takes 1 to 4 polynomial coefficients")

    @classmethod
    def from_dict(cls, d):
        return cls(kind=d.get("family", d.get("kind", "sinusoidal")),
                   params=tuple(d.get("params", (2.0, 1.0))),
                   u_range=tuple(d.get("u_range", (-math.pi, math.pi))))

    def to_dict(self):
        return {"family": self.kind, "params": list(self.params),
                "u_range": list(self.u_range)}

    def c(self, u):
        return self.derivs(u)[0]

    def derivs(self, u):
        """(c, c', c'') at u; works elementwise on arrays."""
        k, prm = self.kind, self.params
        if k == "sinusoidal":
            a0, a1 = prm
            s, co = np.sin(u), np.cos(u)
            return a0 + a1 * s, a1 * co, -a1 * s
        if k == "sqrt-quadratic":
            a0, a1 = prm
            c = np.sqrt(a0 + a1 * u * u)
            cp = a1 * u / c
            cpp = a1 * a0 / c**3
            return c, cp, cpp
        if k == "constant":
            z = np.zeros_like(np.asarray(u, dtype=float))
            return prm[0] + z, z, z
        coef = np.zeros(4)
        coef[: len(prm)] = prm
        c = coef[0] + u * (coef[1] + u * (coef[2] + u * coef[3]))
        cp = coef[1] + u * (2 * coef[2] + 3 * coef[3] * u)
        cpp = 2 * coef[2] + 6 * coef[3] * u
        return c, cp, cpp


def eval_c(model: WaveSpeedModel, u: float):
    """Return (c, c', c'') at a scalar u plus an out-of-range flag."""
    u = float(u)
    if not math.isfinite(u):
        raise InvalidInput("non-finite u")
    c, cp, cpp = (float(v) for v in model.derivs(u))
    if not c > 0:
        raise InvalidInput(f"wave speed not positive at u={u}")
    return c, cp, cpp


def in_range(model: WaveSpeedModel, u: float) -> bool:
    lo, hi = model.u_range
    return lo <= u <= hi


@dataclass
class AssumptionReport:
    c_min: float
    M: float
    morse_ok: bool
    positive: bool
    roots: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return self.positive and self.morse_ok

    def to_dict(self):
        return {"c_min": self.c_min, "M": self.M, "morse_ok": self.morse_ok,
                "positive": self.positive,
                "roots": [list(r) for r in self.roots],
                "violations": list(self.violations)}


def _bisect(f, a, b, tol=ROOT_TOL):
    fa = f(a)
    while b - a > tol:
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def check_assumption_A(model: WaveSpeedModel, samples: int = 1000) -> AssumptionReport:
    """Scan u_range for positivity, the bound on c'/c and the Morse condition.

    Roots of c' are bracketed by sign changes on the sample set and refined
    by bisection. A root where |c''| <= MORSE_TOL is a violation.
    """
    if samples < 3:
        raise InvalidInput("need at least 3 samples")
    lo, hi = model.u_range
    u = np.linspace(lo, hi, samples)
    c, cp, cpp = model.derivs(u)
    c_min = float(np.min(c))
    M = float(np.max(np.abs(cp / c))) if c_min > 0 else math.inf
    violations = []
    positive = c_min > 0
    if not positive:
        violations.append(f"c not positive: min c = {c_min}")

    if model.kind == "constant" or (np.all(cp == 0) and np.all(cpp == 0)):
        violations.append("c'≡0, c''≡0")
        return AssumptionReport(c_min, M, False, positive, [], violations)

    def fcp(v):
        return float(model.derivs(v)[1])

    roots = []
    for k in range(samples - 1):
        a, b = u[k], u[k + 1]
        if cp[k] == 0:
            roots.append(float(a))
        elif cp[k] * cp[k + 1] < 0:
            roots.append(_bisect(fcp, a, b))
    if cp[-1] == 0:
        roots.append(float(u[-1]))

    morse_ok = True
    root_info = []
    for r in roots:
        cppr = float(model.derivs(r)[2])
        root_info.append((r, cppr))
        if abs(cppr) <= MORSE_TOL:
            morse_ok = False
            violations.append(f"c'(u)=0 and c''(u)={cppr:.3g} at u={r:.12g}")
    return AssumptionReport(c_min, M, morse_ok, positive, root_info, violations)
