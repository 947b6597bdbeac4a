"""From the (X, Y) lattice back to physical space: isochrones, profiles,
energy, characteristics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import find_contours

from .charsolver import CharGrid, CharState, normalize_angle
from .lattice import interp_bilinear, interp_bilinear_many
from .wavespeed import InvalidInput, WaveSpeedModel

MARK_THRESHOLD = 1e3


@dataclass
class Profile:
    """Slice at time t. points columns: x, u, R, S, E with E = (R^2+S^2)/4.

    energy_segments holds the energy of each isochrone segment computed in
    grid coordinates; total_energy prefers it when present.
    """

    t: float
    points: np.ndarray
    singular_marks: list = field(default_factory=list)
    energy_segments: np.ndarray | None = None
    XY: np.ndarray | None = None

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def u(self):
        return self.points[:, 1]

    def to_csv(self, path, run_id="", mode=""):
        from .io import write_csv
        P = self.points
        write_csv(path, ["x", "u", "R", "S", "E"], [P[:, k] for k in range(5)],
                  header=f"run={run_id} tau={self.t!r} mode={mode}")


@dataclass
class PhysCurve:
    samples: np.ndarray   # columns t, x
    kind: str
    truncated: bool = False
    XY: np.ndarray | None = None

    def to_csv(self, path, run_id="", mode=""):
        from .io import write_csv
        write_csv(path, ["t", "x"], [self.samples[:, 0], self.samples[:, 1]],
                  header=f"run={run_id} kind={self.kind} mode={mode}")


def jacobian(state: CharState, model: WaveSpeedModel):
    """[[x_X, x_Y], [t_X, t_Y]] and its determinant."""
    c = float(model.c(state.u))
    xX = (1 + math.cos(state.w)) * state.p / 4
    xY = -(1 + math.cos(state.z)) * state.q / 4
    J = np.array([[xX, xY], [xX / c, -xY / c]])
    det = (1 + math.cos(state.w)) * (1 + math.cos(state.z)) * state.p * state.q / (8 * c)
    return J, det


def _boundary_line(G: CharGrid):
    i = np.arange(0, min(G.N, G.nX - 1) + 1)
    j = G.N - i
    keep = (j >= 0) & (j < G.nY)
    i, j = i[keep], j[keep]
    return np.column_stack([G.X[i], G.Y[j]])


def extract_isochrone(G: CharGrid, tau):
    """Polyline (X, Y) of {t = tau} ordered by increasing X.

    Returns an empty (0, 2) array when tau lies outside the computed t-range.
    """
    t = G.t
    finite = t[np.isfinite(t)]
    if tau < 0 or finite.size == 0 or tau > np.max(finite):
        return np.empty((0, 2))
    if tau == 0:
        return _boundary_line(G)
    pieces = [c for c in find_contours(t, tau) if len(c) >= 2]
    if not pieces:
        return np.empty((0, 2))
    P = np.vstack([c if c[0, 0] <= c[-1, 0] else c[::-1] for c in
                   sorted(pieces, key=lambda c: min(c[0, 0], c[-1, 0]))])
    XY = np.column_stack([G.X0g + G.h * P[:, 0], G.Y0g + G.h * P[:, 1]])
    # drop repeated vertices where pieces join
    keep = np.ones(len(XY), dtype=bool)
    keep[1:] = np.any(np.diff(XY, axis=0) != 0, axis=1)
    return XY[keep]


def _fields_at(G, XY, names):
    return {n: interp_bilinear_many(G, n, XY[:, 0], XY[:, 1]) for n in names}


def sample_profile(G: CharGrid, tau, n=None, threshold=MARK_THRESHOLD):
    """u, R, S, E along the isochrone t = tau, sorted by x.

    n resamples the profile to n points evenly spaced in x (linear
    interpolation); by default the contour vertices are returned.
    """
    XY = extract_isochrone(G, tau)
    if len(XY) < 2:
        raise InvalidInput(f"tau={tau} outside the grid's time range")
    F = _fields_at(G, XY, ("u", "w", "z", "p", "q", "x"))
    with np.errstate(over="ignore", invalid="ignore"):
        R = np.tan(F["w"] / 2)
        S = np.tan(F["z"] / 2)
    # energy per segment in grid coordinates (bounded integrand)
    wm = 0.5 * (F["w"][1:] + F["w"][:-1])
    zm = 0.5 * (F["z"][1:] + F["z"][:-1])
    pm = 0.5 * (F["p"][1:] + F["p"][:-1])
    qm = 0.5 * (F["q"][1:] + F["q"][:-1])
    dX = np.abs(np.diff(XY[:, 0]))
    dY = np.abs(np.diff(XY[:, 1]))
    ew = (1 - np.cos(wm)) * pm * dX
    ez = (1 - np.cos(zm)) * qm * dY
    if G.mode == "dissipative":
        ew = np.where(np.abs(normalize_angle(wm)) >= math.pi - 1e-12, 0.0, ew)
        ez = np.where(np.abs(normalize_angle(zm)) >= math.pi - 1e-12, 0.0, ez)
    seg = (ew + ez) / 8
    x = F["x"]
    order = np.argsort(x, kind="stable")
    big = (np.abs(R) > threshold) | (np.abs(S) > threshold) | ~np.isfinite(R) | ~np.isfinite(S)
    marks = _mark_clusters(x, big)
    R = np.where(np.isnan(R), np.inf, R)
    S = np.where(np.isnan(S), np.inf, S)
    E = (R * R + S * S) / 4
    pts = np.column_stack([x, F["u"], R, S, E])[order]
    # x is monotone along the isochrone; merge exact repeats (frozen plateaus)
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.diff(pts[:, 0]) > 0
    pts = pts[keep]
    prof = Profile(float(tau), pts, marks, seg, XY)
    if n is not None:
        xs = np.linspace(pts[0, 0], pts[-1, 0], int(n))
        cols = [xs] + [np.interp(xs, pts[:, 0], pts[:, k]) for k in range(1, 5)]
        prof = Profile(float(tau), np.column_stack(cols), marks, seg, XY)
    return prof


def _mark_clusters(x, big):
    """One mark per run of consecutive flagged vertices (its peak x)."""
    marks = []
    k = 0
    n = len(big)
    while k < n:
        if big[k]:
            m = k
            while m + 1 < n and big[m + 1]:
                m += 1
            marks.append(float(np.median(x[k:m + 1])))
            k = m + 1
        else:
            k += 1
    return sorted(marks)


def total_energy(profile: Profile):
    """Integral of E dx over the profile.

    Uses the grid-coordinate segment energies when the profile carries them;
    otherwise a trapezoid rule in x with singular points skipped.
    """
    if profile.energy_segments is not None:
        return float(np.sum(profile.energy_segments))
    x, E = profile.points[:, 0], profile.points[:, 4]
    ok = np.isfinite(E)
    return float(np.trapezoid(E[ok], x[ok])) if ok.sum() > 1 else 0.0


def energy_series(G: CharGrid, taus):
    return [total_energy(sample_profile(G, tau)) for tau in taus]


def locate(G: CharGrid, x, t, guess=None, iters=30):
    """(X, Y) with x(X,Y)=x, t(X,Y)=t by Newton on bilinear interpolants."""
    if guess is None:
        d = (G.x - x) ** 2 + (G.t - t) ** 2
        d = np.where(np.isfinite(d), d, np.inf)
        i, j = np.unravel_index(np.argmin(d), d.shape)
        X, Y = float(G.X[i]), float(G.Y[j])
    else:
        X, Y = guess
    h = G.h
    for _ in range(iters):
        fx = interp_bilinear(G, "x", X, Y) - x
        ft = interp_bilinear(G, "t", X, Y) - t
        e = 1e-3 * h
        J = np.array([
            [(interp_bilinear(G, "x", X + e, Y) - interp_bilinear(G, "x", X - e, Y)) / (2 * e),
             (interp_bilinear(G, "x", X, Y + e) - interp_bilinear(G, "x", X, Y - e)) / (2 * e)],
            [(interp_bilinear(G, "t", X + e, Y) - interp_bilinear(G, "t", X - e, Y)) / (2 * e),
             (interp_bilinear(G, "t", X, Y + e) - interp_bilinear(G, "t", X, Y - e)) / (2 * e)],
        ])
        try:
            dX, dY = np.linalg.solve(J, [fx, ft])
        except np.linalg.LinAlgError:
            break
        X, Y = X - dX, Y - dY
        if abs(dX) + abs(dY) < 1e-13:
            break
    return X, Y


def _inside(G, X, Y):
    fi, fj = (X - G.X0g) / G.h, (Y - G.Y0g) / G.h
    return 0 <= fi <= G.nX - 1 and 0 <= fj <= G.nY - 1 and fi + fj >= G.N


def trace_characteristic(G: CharGrid, start, direction=-1, t_end=None, method="grid", dt=None):
    """Physical image of a characteristic through start = (x, t).

    method "grid": the backward (direction -1) characteristic is the lattice
    column X = const, the forward one the row Y = const; samples are its
    image, so it passes through singular curves with no special handling.
    method "ode": RK2 on dx/dt = direction * c(u(x, t)), u found by local
    inversion of the map (X, Y) -> (x, t).
    """
    if direction not in (-1, 1):
        raise InvalidInput("direction must be +1 or -1")
    x0, t0 = start
    X0, Y0 = locate(G, x0, t0)
    if not _inside(G, X0, Y0):
        raise InvalidInput("start point outside the grid's physical image")
    kind = "backward-characteristic" if direction < 0 else "forward-characteristic"
    if method == "grid":
        if direction < 0:
            j = np.arange(G.nY)
            pts = [(X0, G.Y[k]) for k in j if _inside(G, X0, G.Y[k])]
        else:
            i = np.arange(G.nX)
            pts = [(G.X[k], Y0) for k in i if _inside(G, G.X[k], Y0)]
        XY = np.array(pts)
        xs = np.array([interp_bilinear(G, "x", a, b) for a, b in XY])
        ts = np.array([interp_bilinear(G, "t", a, b) for a, b in XY])
        keep = np.ones(len(ts), dtype=bool)
        keep[1:] = np.diff(ts) > 0
        sel = keep & ((ts <= t_end) if t_end is not None else True)
        return PhysCurve(np.column_stack([ts[sel], xs[sel]]), kind, False, XY[sel])
    if method != "ode":
        raise InvalidInput(f"unknown method {method!r}")
    dt = dt or G.h / 4
    t_end = t_end if t_end is not None else float(np.nanmax(G.t))
    out = [(t0, x0)]
    X, Y = X0, Y0
    model = G.model
    xc, tc = x0, t0
    truncated = False
    while tc < t_end - 1e-14:
        step = min(dt, t_end - tc)
        u1 = interp_bilinear(G, "u", X, Y)
        k1 = direction * float(model.c(u1))
        Xm, Ym = locate(G, xc + step * k1, tc + step, (X, Y))
        if not _inside(G, Xm, Ym):
            truncated = True
            break
        k2 = direction * float(model.c(interp_bilinear(G, "u", Xm, Ym)))
        xc = xc + 0.5 * step * (k1 + k2)
        tc = tc + step
        X, Y = locate(G, xc, tc, (Xm, Ym))
        if not _inside(G, X, Y):
            truncated = True
            break
        out.append((tc, xc))
    return PhysCurve(np.array(out), kind, truncated)


def dalembert(init, c, x, t):
    """Exact solution for constant wave speed c.

    u = (u0(x-ct) + u0(x+ct))/2 + (1/2c) * integral of u1 over [x-ct, x+ct].
    The u1 integral is closed form for both builtin data families.
    """
    x = np.asarray(x, dtype=float)
    a, b = x - c * t, x + c * t
    u = 0.5 * (init.u0(a) + init.u0(b))
    if init.family == "packets":
        # u1 = c * sum(-d_k bump_k')
        for p in init.packets:
            def bump(y, p=p):
                return p.amplitude * np.exp(-(((y - p.center) / p.sigma) ** 2))
            u = u + 0.5 * (-p.direction) * (bump(b) - bump(a))
    elif init.A1:
        erf = np.vectorize(math.erf, otypes=[float])
        s1 = init.sigma1
        u = u + init.A1 * s1 * math.sqrt(math.pi) / (4 * c) * (
            erf((b - init.center) / s1) - erf((a - init.center) / s1))
    return u


def oracle_error(G: CharGrid, init, taus, n=400):
    """L-infinity gap between sampled profiles and the d'Alembert solution."""
    c = float(G.model.c(0.0))
    errs = []
    for tau in taus:
        P = sample_profile(G, tau)
        x = P.points[:, 0]
        # stay off the ends of the determined interval
        sel = slice(2, len(x) - 2) if len(x) > 4 else slice(None)
        errs.append(float(np.max(np.abs(P.points[sel, 1] - dalembert(init, c, x[sel], tau)))))
    return errs
