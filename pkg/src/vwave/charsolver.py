"""Goursat integration of the semilinear system in characteristic coordinates.

Lattice layout: X_i = s_0 + i h, Y_j = -s_N + j h, so the data line X+Y=0
is the anti-diagonal i + j = N and the determined region is i + j >= N.
Cell (i, j) is computed from its X-neighbour (i-1, j) and Y-neighbour
(i, j-1), so every anti-diagonal is a wavefront of independent cells.

Routing: w, p are marched in Y (their Y-derivatives are known); z, q and
u, x, t are marched in X. Each step is a Heun predictor-corrector.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryTrace
from .wavespeed import InvalidInput, WaveSpeedModel

FIELDS = ("u", "w", "z", "p", "q", "x", "t")
OVERFLOW = 1e12
MAX_BISECT = 40
TWO_PI = 2.0 * math.pi


class NumericError(RuntimeError):
    """Non-finite value or overflow during integration; carries the cell."""

    def __init__(self, msg, cell=None):
        super().__init__(msg if cell is None else f"{msg} at cell {cell}")
        self.cell = cell


@dataclass(frozen=True)
class CharState:
    u: float
    w: float
    z: float
    p: float
    q: float
    x: float
    t: float

    @property
    def R(self):
        return math.tan(self.w / 2)

    @property
    def S(self):
        return math.tan(self.z / 2)


@dataclass(frozen=True)
class RhsValue:
    u_X: float
    u_Y: float
    w_Y: float
    z_X: float
    p_Y: float
    q_X: float
    x_X: float
    x_Y: float
    t_X: float
    t_Y: float


def normalize_angle(a):
    """Representative of a in (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(a, dtype=float), TWO_PI)


def theta(w, z):
    """Dissipative switch: 1 where both normalized angles are below pi."""
    wn = normalize_angle(w)
    zn = normalize_angle(z)
    out = ((wn < math.pi) & (zn < math.pi)).astype(np.int8)
    return int(out) if out.ndim == 0 else out


def rhs_arrays(u, w, z, p, q, model, th=None):
    """All ten partial derivatives, elementwise. th multiplies the couplings."""
    c, cp, _ = model.derivs(u)
    cw, cz = np.cos(w), np.cos(z)
    sw, sz = np.sin(w), np.sin(z)
    k = cp / (8.0 * c * c)
    if th is not None:
        k = k * th
    w_Y = k * (cz - cw) * q
    z_X = k * (cw - cz) * p
    p_Y = k * (sz - sw) * p * q
    q_X = k * (sw - sz) * p * q
    x_X = (1.0 + cw) * p / 4.0
    x_Y = -(1.0 + cz) * q / 4.0
    return {
        "u_X": sw * p / (4.0 * c), "u_Y": sz * q / (4.0 * c),
        "w_Y": w_Y, "z_X": z_X, "p_Y": p_Y, "q_X": q_X,
        "x_X": x_X, "x_Y": x_Y, "t_X": x_X / c, "t_Y": -x_Y / c,
    }


def eval_rhs(state: CharState, model: WaveSpeedModel, mode="conservative") -> RhsValue:
    vals = (state.u, state.w, state.z, state.p, state.q, state.x, state.t)
    if not all(math.isfinite(v) for v in vals):
        raise NumericError("non-finite state")
    th = theta(state.w, state.z) if mode == "dissipative" else None
    r = rhs_arrays(state.u, state.w, state.z, state.p, state.q, model, th)
    return RhsValue(**{k: float(v) for k, v in r.items()})


@dataclass
class CharGrid:
    X0g: float
    Y0g: float
    h: float
    N: int
    nX: int
    nY: int
    mode: str
    model: WaveSpeedModel
    u: np.ndarray
    w: np.ndarray
    z: np.ndarray
    p: np.ndarray
    q: np.ndarray
    x: np.ndarray
    t: np.ndarray
    theta_mask: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def X(self):
        return self.X0g + self.h * np.arange(self.nX)

    @property
    def Y(self):
        return self.Y0g + self.h * np.arange(self.nY)

    @property
    def valid(self):
        i = np.arange(self.nX)[:, None]
        j = np.arange(self.nY)[None, :]
        return (i + j) >= self.N

    def field(self, name):
        return getattr(self, name)

    def state(self, i, j) -> CharState:
        return CharState(*(float(getattr(self, f)[i, j]) for f in FIELDS))

    def index_of(self, X, Y):
        return (X - self.X0g) / self.h, (Y - self.Y0g) / self.h

    def summary(self):
        v = self.valid
        out = {"mode": self.mode, "h": self.h, "nX": self.nX, "nY": self.nY,
               "X0": self.X0g, "Y0": self.Y0g}
        for f in FIELDS:
            a = getattr(self, f)[v]
            out[f] = {"min": float(np.min(a)), "max": float(np.max(a))}
        out["frozen_cells"] = int(np.sum(self.theta_mask[v] == 0))
        return out

    def mirrored(self):
        """Grid of the X<->Y, w<->z, p<->q, x->-x image of this solution."""
        return CharGrid(
            X0g=self.Y0g, Y0g=self.X0g, h=self.h, N=self.N, nX=self.nY, nY=self.nX,
            mode=self.mode, model=self.model,
            u=self.u.T, w=self.z.T, z=self.w.T, p=self.q.T, q=self.p.T,
            x=-self.x.T, t=self.t.T, theta_mask=self.theta_mask.T,
            meta=dict(self.meta, mirrored=not self.meta.get("mirrored", False)),
        )

    def to_csv(self, path):
        from .io import write_csv
        v = self.valid
        I, J = np.nonzero(v)
        cols = ["X", "Y"] + list(FIELDS) + ["theta"]
        data = [self.X[I], self.Y[J]] + [getattr(self, f)[I, J] for f in FIELDS]
        data.append(self.theta_mask[I, J].astype(int))
        write_csv(path, cols, data)


def _crossed(a_old, a_new):
    """True where the lifted angle moved across an odd multiple of pi."""
    return np.floor((a_old + math.pi) / TWO_PI) != np.floor((a_new + math.pi) / TWO_PI)


def _crossing_target(a_old, a_new):
    k_old = np.floor((a_old + math.pi) / TWO_PI)
    k = np.where(a_new > a_old, k_old + 1, k_old)
    return (2 * k - 1) * math.pi


class _Sweeper:
    def __init__(self, G: CharGrid, dissipative: bool):
        self.G = G
        self.model = G.model
        self.diss = dissipative
        self.h = G.h

    def _gather(self, I, J, di, dj):
        G = self.G
        return {f: getattr(G, f)[I + di, J + dj] for f in FIELDS}, G.theta_mask[I + di, J + dj]

    def _th(self, w, z):
        return theta(w, z).astype(float) if self.diss else None

    def update(self, I, J):
        G, h, m = self.G, self.h, self.model
        A, thA = self._gather(I, J, -1, 0)
        B, thB = self._gather(I, J, 0, -1)
        tA = thA.astype(float) if self.diss else None
        tB = thB.astype(float) if self.diss else None
        rA = rhs_arrays(A["u"], A["w"], A["z"], A["p"], A["q"], m, tA)
        rB = rhs_arrays(B["u"], B["w"], B["z"], B["p"], B["q"], m, tB)

        P = {
            "w": B["w"] + h * rB["w_Y"], "p": B["p"] + h * rB["p_Y"],
            "z": A["z"] + h * rA["z_X"], "q": A["q"] + h * rA["q_X"],
            "u": A["u"] + h * rA["u_X"], "x": A["x"] + h * rA["x_X"],
            "t": A["t"] + h * rA["t_X"],
        }
        tP = self._th(P["w"], P["z"])
        rP = rhs_arrays(P["u"], P["w"], P["z"], P["p"], P["q"], m, tP)

        out = {
            "w": B["w"] + 0.5 * h * (rB["w_Y"] + rP["w_Y"]),
            "p": B["p"] + 0.5 * h * (rB["p_Y"] + rP["p_Y"]),
            "z": A["z"] + 0.5 * h * (rA["z_X"] + rP["z_X"]),
            "q": A["q"] + 0.5 * h * (rA["q_X"] + rP["q_X"]),
            "u": A["u"] + 0.5 * h * (rA["u_X"] + rP["u_X"]),
            "x": A["x"] + 0.5 * h * (rA["x_X"] + rP["x_X"]),
            "t": A["t"] + 0.5 * h * (rA["t_X"] + rP["t_X"]),
        }
        if self.diss:
            self._clamp(out, A, B, rA, rB, tA, tB)
            th_out = theta(out["w"], out["z"])
        else:
            th_out = np.ones(len(I), dtype=np.int8)
        self._check(out, I, J)
        for f in FIELDS:
            getattr(G, f)[I, J] = out[f]
        G.theta_mask[I, J] = th_out

    def _check(self, out, I, J):
        bad = np.zeros(len(I), dtype=bool)
        for f in FIELDS:
            bad |= ~np.isfinite(out[f])
        if np.any(bad):
            k = int(np.argmax(bad))
            raise NumericError("non-finite value", (int(I[k]), int(J[k])))
        big = (out["p"] > OVERFLOW) | (out["q"] > OVERFLOW) | (out["p"] <= 0) | (out["q"] <= 0)
        if np.any(big):
            k = int(np.argmax(big))
            raise NumericError("p or q left (0, 1e12]", (int(I[k]), int(J[k])))

    def _clamp(self, out, A, B, rA, rB, tA, tB):
        """Land frozen-angle crossings exactly on the odd multiple of pi."""
        m, h = self.model, self.h
        cw = _crossed(B["w"], out["w"]) & (tB > 0)
        cz = _crossed(A["z"], out["z"]) & (tA > 0)
        idx_w = np.nonzero(cw)[0]
        idx_z = np.nonzero(cz)[0]
        for k in idx_w:
            target = float(_crossing_target(B["w"][k], out["w"][k]))
            lam_w, lam_p = self._bisect(
                target, B["w"][k], B["p"][k], rB["w_Y"][k], rB["p_Y"][k],
                other=(B["u"][k], B["z"][k], B["q"][k]),
                other_new=(out["u"][k], out["z"][k], out["q"][k]), along="Y")
            out["w"][k] = target
            out["p"][k] = lam_p
        for k in idx_z:
            target = float(_crossing_target(A["z"][k], out["z"][k]))
            _, lam_q = self._bisect(
                target, A["z"][k], A["q"][k], rA["z_X"][k], rA["q_X"][k],
                other=(A["u"][k], A["w"][k], A["p"][k]),
                other_new=(out["u"][k], out["w"][k], out["p"][k]), along="X")
            out["z"][k] = target
            out["q"][k] = lam_q
        # frozen cells: redo the transverse march with the final angle and theta = 0
        for k in np.union1d(idx_w, idx_z):
            one = lambda f: np.array([out[f][k]])
            r = rhs_arrays(one("u"), one("w"), one("z"), one("p"), one("q"), m, np.zeros(1))
            if k in idx_w:
                for f, d in (("z", "z_X"), ("q", "q_X"), ("u", "u_X"), ("x", "x_X"), ("t", "t_X")):
                    out[f][k] = A[f][k] + 0.5 * h * (rA[d][k] + r[d][0])
            else:
                for f, d in (("w", "w_Y"), ("p", "p_Y")):
                    out[f][k] = B[f][k] + 0.5 * h * (rB[d][k] + r[d][0])

    def _bisect(self, target, a0, b0, da0, db0, other, other_new, along):
        """Fraction of the step at which the angle reaches target.

        Returns (angle, companion density) at the landing point; the sub-step
        is Heun over lambda*h with the transverse fields interpolated linearly.
        """
        m, h = self.model, self.h
        u0, o1, o2 = other
        u1, n1, n2 = other_new

        def sub(lam):
            uu = u0 + lam * (u1 - u0)
            v1 = o1 + lam * (n1 - o1)
            v2 = o2 + lam * (n2 - o2)
            ap = a0 + lam * h * da0
            bp = b0 + lam * h * db0
            if along == "Y":
                r = rhs_arrays(uu, ap, v1, bp, v2, m, 1.0)
                da, db = r["w_Y"], r["p_Y"]
            else:
                r = rhs_arrays(uu, v1, ap, v2, bp, m, 1.0)
                da, db = r["z_X"], r["q_X"]
            return a0 + 0.5 * lam * h * (da0 + da), b0 + 0.5 * lam * h * (db0 + db)

        lo, hi = 0.0, 1.0
        up = target > a0
        for _ in range(MAX_BISECT):
            mid = 0.5 * (lo + hi)
            a, _ = sub(mid)
            if (a < target) == up:
                lo = mid
            else:
                hi = mid
        return sub(hi)[0], float(sub(hi)[1])


def _threads():
    try:
        return max(1, int(os.environ.get("VWAVE_THREADS", "1")))
    except ValueError:
        return 1


def integrate_goursat(trace: BoundaryTrace, model: WaveSpeedModel, mode="conservative",
                      h=None, Ymax=None, threads=None, serial=False) -> CharGrid:
    """Fill the lattice above the data line by anti-diagonal wavefronts.

    serial=True updates one cell at a time (reference order); otherwise each
    wavefront is one vectorized update, split across `threads` workers.
    """
    if mode not in ("conservative", "dissipative"):
        raise InvalidInput(f"unknown mode {mode!r}")
    s = trace.s
    N = len(s) - 1
    if N < 1:
        raise InvalidInput("trace needs at least two points")
    hs = float(s[1] - s[0])
    if not np.allclose(np.diff(s), hs, rtol=1e-9, atol=1e-12):
        raise InvalidInput("trace must be uniformly spaced")
    if h is not None and abs(h - hs) > 1e-9 * hs:
        raise InvalidInput(f"step h={h} does not match trace spacing {hs}")
    h = hs
    Y0g = -float(s[-1])
    nY = N + 1
    if Ymax is not None:
        nY = int(min(N, max(0, math.floor((Ymax - Y0g) / h + 1e-9)))) + 1
    nX = N + 1

    arrs = {f: np.full((nX, nY), np.nan) for f in FIELDS}
    G = CharGrid(X0g=float(s[0]), Y0g=Y0g, h=h, N=N, nX=nX, nY=nY, mode=mode, model=model,
                 theta_mask=np.ones((nX, nY), dtype=np.int8), **arrs)
    # boundary: node (i, N-i) carries trace point i
    ib = np.arange(nX)
    jb = N - ib
    keep = (jb >= 0) & (jb < nY)
    for f in FIELDS:
        getattr(G, f)[ib[keep], jb[keep]] = getattr(trace, f)[ib[keep]]
    if mode == "dissipative":
        G.theta_mask[ib[keep], jb[keep]] = theta(trace.w[ib[keep]], trace.z[ib[keep]])

    sw = _Sweeper(G, mode == "dissipative")
    nthreads = threads if threads is not None else _threads()
    pool = ThreadPoolExecutor(nthreads) if (nthreads > 1 and not serial) else None
    try:
        for k in range(N + 1, N + nY):
            lo = max(1, k - (nY - 1))
            hi = min(N, k - 1)
            if lo > hi:
                continue
            I = np.arange(lo, hi + 1)
            J = k - I
            if serial:
                for n in range(len(I)):
                    sw.update(I[n:n + 1], J[n:n + 1])
            elif pool is not None and len(I) >= 64:
                chunks = np.array_split(np.arange(len(I)), nthreads)
                list(pool.map(lambda c: sw.update(I[c], J[c]), chunks))
            else:
                sw.update(I, J)
    finally:
        if pool is not None:
            pool.shutdown()
    G.meta.update({"threads": nthreads, "serial": serial})
    return G


def path_independence_residual(G: CharGrid, corner=None):
    """Mismatch of u, x, t at a corner reached by the two edge paths.

    From a base node on the data line, integrate the X-derivative then the
    Y-derivative (trapezoid on stored fields) and in the opposite order.
    Returns the max over (u, x, t) of |difference| and the per-field values.
    """
    if corner is None:
        m = min((G.nY - 1) // 2, G.N // 2)
        i0 = max(m, G.N - (G.nY - 1) + m)
        base = (i0, G.N - i0)
        corner = (i0 + m, G.N - i0 + m)
    else:
        base, corner = corner
    (ib, jb), (ic, jc) = base, corner
    if ic < ib or jc < jb:
        raise InvalidInput("corner must lie up-right of the base")
    r = rhs_arrays(G.u, G.w, G.z, G.p, G.q, G.model,
                   G.theta_mask.astype(float) if G.mode == "dissipative" else None)
    h = G.h
    out = {}
    for f in ("u", "x", "t"):
        dX, dY = r[f + "_X"], r[f + "_Y"]
        # path 1: along X at row jb, then along Y at column ic
        p1 = np.trapezoid(dX[ib:ic + 1, jb], dx=h) + np.trapezoid(dY[ic, jb:jc + 1], dx=h)
        # path 2: along Y at column ib, then along X at row jc
        p2 = np.trapezoid(dY[ib, jb:jc + 1], dx=h) + np.trapezoid(dX[ib:ic + 1, jc], dx=h)
        out[f] = abs(float(p1 - p2))
    return max(out.values()), out
