"""Level sets {w=pi}, {z=pi}, their classification and their images in (x, t)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import find_contours

from .charsolver import CharGrid, CharState, FIELDS, normalize_angle
from .lattice import StencilError, interp, interp_bilinear, point_derivs
from .wavespeed import InvalidInput, WaveSpeedModel

TYPE2_WX_FACTOR = 10.0   # |w_X| < 10 h^2 counts as zero
TYPE2_WXX_MIN = 0.1
CPRIME_ZERO = 1e-4


class FitError(ValueError):
    pass


@dataclass
class SingularPoint:
    XY: tuple
    xt: tuple
    family: str
    type: int
    derivs: dict
    state0: CharState
    flags: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def generic(self):
        return not self.flags

    def to_dict(self):
        return {"XY": list(self.XY), "xt": list(self.xt), "family": self.family,
                "type": self.type, "derivs": dict(self.derivs),
                "state0": vars(self.state0), "genericity_flags": list(self.flags),
                "meta": dict(self.meta)}


@dataclass
class SingularCurve:
    family: str
    XY: np.ndarray
    xt: np.ndarray
    level: float
    endpoints: tuple = ("grid-boundary", "grid-boundary")

    def __len__(self):
        return len(self.XY)

    def to_csv(self, path):
        from .io import write_csv
        write_csv(path, ["X", "Y", "x", "t"],
                  [self.XY[:, 0], self.XY[:, 1], self.xt[:, 0], self.xt[:, 1]])


def synthetic_grid(X, Y, model=None, mode="conservative", **fields):
    """CharGrid over the full rectangle X x Y from given field arrays.

    Missing fields default to a rest state (u=0, w=z=0, p=q=1, x=(X-Y)/2,
    t=(X+Y)/(2c)); t is shifted so it stays a plausible time.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    h = float(X[1] - X[0])
    model = model or WaveSpeedModel("constant", (1.0,))
    XX, YY = np.meshgrid(X, Y, indexing="ij")
    shape = XX.shape
    c0 = float(model.c(0.0))
    base = {"u": np.zeros(shape), "w": np.zeros(shape), "z": np.zeros(shape),
            "p": np.ones(shape), "q": np.ones(shape), "x": (XX - YY) / 2,
            "t": (XX + YY) / (2 * c0)}
    for k, v in fields.items():
        base[k] = np.broadcast_to(np.asarray(v, dtype=float), shape).copy()
    return CharGrid(X0g=float(X[0]), Y0g=float(Y[0]), h=h, N=0, nX=len(X), nY=len(Y),
                    mode=mode, model=model, theta_mask=np.ones(shape, dtype=np.int8), **base)


def _angle(G, family):
    if family not in ("w", "z"):
        raise InvalidInput("family must be 'w' or 'z'")
    return getattr(G, family)


def _value_at(G, name, X, Y):
    try:
        return interp(G, name, X, Y)
    except StencilError:
        return interp_bilinear(G, name, X, Y)


def extract_level_sets(G: CharGrid, family="w"):
    """Polylines where the lifted angle equals an odd multiple of pi."""
    F = _angle(G, family)
    finite = F[np.isfinite(F)]
    if finite.size == 0:
        return []
    kmin = math.ceil((np.min(finite) / math.pi - 1) / 2)
    kmax = math.floor((np.max(finite) / math.pi - 1) / 2)
    curves = []
    for k in range(kmin, kmax + 1):
        level = (2 * k + 1) * math.pi
        for c in find_contours(F, level):
            if len(c) < 2:
                continue
            XY = np.column_stack([G.X0g + G.h * c[:, 0], G.Y0g + G.h * c[:, 1]])
            xt = np.array([[_value_at(G, "x", a, b), _value_at(G, "t", a, b)] for a, b in XY])
            tags = tuple(_edge_tag(G, c[e]) for e in (0, -1))
            curves.append(SingularCurve(family, XY, xt, level, tags))
    return curves


def _edge_tag(G, ij):
    i, j = ij
    near = (i <= 1.0 or j <= 1.0 or i >= G.nX - 2 or j >= G.nY - 2 or i + j <= G.N + 1.5)
    return "grid-boundary" if near else "open"


def _tol(G, d):
    return 2.0 * G.h * math.hypot(d["X"], d["Y"])


def _state(G, X, Y):
    return CharState(*(_value_at(G, f, X, Y) for f in FIELDS))


def classify_point(G: CharGrid, XY, model: WaveSpeedModel | None = None, family="w") -> SingularPoint:
    """Type 1/2/3 of a point on a level set, with genericity flags.

    z-family points are classified on the mirrored grid, where they become
    w-family points.
    """
    model = model or G.model
    X, Y = float(XY[0]), float(XY[1])
    if family == "z":
        sp = classify_point(G.mirrored(), (Y, X), model, "w")
        d = sp.derivs
        swap = {"w": "z", "z": "w", "p": "q", "q": "p", "X": "Y", "Y": "X"}
        mirrored = {}
        for k, v in d.items():
            f, ds = k.split("_")
            mirrored[swap[f] + "_" + "".join(sorted(swap[ch] for ch in ds))] = v
        s0 = sp.state0
        return SingularPoint((X, Y), (-sp.xt[0], sp.xt[1]), "z" if sp.family == "w" else sp.family,
                             sp.type, mirrored,
                             CharState(s0.u, s0.z, s0.w, s0.q, s0.p, -s0.x, s0.t), sp.flags,
                             sp.meta)
    dw = point_derivs(G, "w", X, Y)   # raises StencilError near edges
    dz = point_derivs(G, "z", X, Y)
    st = _state(G, X, Y)
    dp = point_derivs(G, "p", X, Y)
    dq = point_derivs(G, "q", X, Y)
    derivs = {"w_X": dw["X"], "w_XX": dw["XX"], "w_Y": dw["Y"], "w_XY": dw["XY"],
              "w_XXX": dw["XXX"], "z_Y": dz["Y"], "z_YY": dz["YY"], "z_X": dz["X"],
              "z_XY": dz["XY"], "p_X": dp["X"], "q_Y": dq["Y"]}
    h = G.h
    wn = float(normalize_angle(st.w))
    zn = float(normalize_angle(st.z))
    w_pi = abs(abs(wn) - math.pi) <= max(_tol(G, dw), 1e-12)
    z_pi = abs(abs(zn) - math.pi) <= max(_tol(G, dz), 1e-12)
    cp = float(model.derivs(st.u)[1])
    thr = TYPE2_WX_FACTOR * h * h
    flags = []
    if not w_pi:
        flags.append("point not on w=pi within tolerance")
    fam = "both" if (w_pi and z_pi) else "w"
    if w_pi and z_pi:
        kind = 3
        if abs(dw["X"]) < thr or abs(dz["Y"]) < thr:
            flags.append("never2: w=z=pi with vanishing transversal derivative")
    elif abs(dw["X"]) < thr:
        kind = 2
        if abs(dw["XX"]) <= TYPE2_WXX_MIN:
            flags.append("never1: w=pi, w_X=0, w_XX=0")
    else:
        kind = 1
    if abs(dw["X"]) < thr and abs(cp) < CPRIME_ZERO:
        flags.append("never3: w=pi, w_X=0, c'(u)=0")
    xt = (st.x, st.t)
    meta = {}
    if kind == 2:
        meta["orientation"] = "w_XX<0" if dw["XX"] < 0 else "w_XX>0"
    return SingularPoint((X, Y), xt, fam, kind, derivs, st, flags, meta)


def refine_type2(G: CharGrid, X, Y, iters=30):
    """Newton on (w - pi, w_X) = 0 from an initial guess; target level kept."""
    d = point_derivs(G, "w", X, Y)
    level = math.pi * (2 * round((d["v"] / math.pi - 1) / 2) + 1)
    for _ in range(iters):
        d = point_derivs(G, "w", X, Y)
        F = np.array([d["v"] - level, d["X"]])
        J = np.array([[d["X"], d["Y"]], [d["XX"], d["XY"]]])
        step = np.linalg.solve(J, F)
        X -= step[0]
        Y -= step[1]
        if np.max(np.abs(step)) < 1e-14 * max(1.0, abs(X) + abs(Y)):
            break
    return X, Y


def find_first_singularity(G: CharGrid, family="w"):
    """Earliest point of the family's level set, refined to sub-grid accuracy.

    Initial guess: the vertex of minimal t. Refinement: Newton on
    (w - pi, w_X) = 0. The location of the t-minimum along the curve from a
    local quadratic fit is kept as an independent cross-check in meta.
    """
    if family == "z":
        sp = find_first_singularity(G.mirrored(), "w")
        if sp is None:
            return None
        return classify_point(G, (sp.XY[1], sp.XY[0]), G.model, "z")
    curves = extract_level_sets(G, "w")
    best = None
    for cv in curves:
        k = int(np.argmin(cv.xt[:, 1]))
        if best is None or cv.xt[k, 1] < best[0].xt[best[1], 1]:
            best = (cv, k)
    if best is None:
        return None
    cv, k = best
    X, Y = cv.XY[k]
    try:
        X, Y = refine_type2(G, X, Y)
        sp = classify_point(G, (X, Y), G.model, "w")
    except (StencilError, np.linalg.LinAlgError):
        return None
    # cross-check: quadratic fit of t along the curve vertices near the min
    lo, hi = max(0, k - 6), min(len(cv), k + 7)
    if hi - lo >= 5:
        Xs, ts = cv.XY[lo:hi, 0], cv.xt[lo:hi, 1]
        a2, a1, _ = np.polyfit(Xs - X, ts, 2)
        if a2 > 0:
            sp.meta["tmin_fit_X"] = float(X - a1 / (2 * a2))
    return sp


def image_slope_curvature(ts, xs, t0, deg=3):
    """First and second derivative of x(t) at t0 from a local polynomial fit."""
    if len(ts) < 5:
        raise FitError("fewer than 5 vertices for curve geometry fit")
    c = np.polyfit(ts - t0, xs, deg)
    d1 = np.polyder(c)
    d2 = np.polyder(d1)
    return float(np.polyval(d1, 0.0)), float(np.polyval(d2, 0.0))


def map_curve_geometry(G: CharGrid, curve: SingularCurve, model: WaveSpeedModel | None = None,
                       half_window=None, stride=1):
    """Per-vertex (x, t, slope, curvature) of the image curve vs predictions.

    Predictions for the w family: slope -c(u), curvature -c'(u) sin z/(1+cos z).
    The z family is the mirror image: slope +c(u), curvature c'(u) sin w/(1+cos w).
    """
    model = model or G.model
    xt = curve.xt
    if len(xt) < 5:
        raise FitError("fewer than 5 vertices for curve geometry fit")
    sgn = -1.0 if curve.family == "w" else 1.0
    other = "z" if curve.family == "w" else "w"
    if half_window is None:
        half_window = 10
    rows = []
    for k in range(half_window, len(xt) - half_window, stride):
        seg = xt[k - half_window:k + half_window + 1]
        if np.any(np.diff(seg[:, 1]) <= 0) and np.any(np.diff(seg[:, 1]) >= 0):
            continue  # not a monotone stretch (contains a Type-2 turning point)
        slope, curv = image_slope_curvature(seg[:, 1], seg[:, 0], xt[k, 1])
        X, Y = curve.XY[k]
        u = _value_at(G, "u", X, Y)
        a = _value_at(G, other, X, Y)
        c, cp, _ = model.derivs(u)
        rows.append({"x": float(xt[k, 0]), "t": float(xt[k, 1]), "slope": slope,
                     "curvature": curv, "pred_slope": float(sgn * c),
                     "pred_curvature": float(sgn * cp * math.sin(a) / (1 + math.cos(a))),
                     "X": float(X), "Y": float(Y)})
    return rows


@dataclass
class Plateau:
    apex: tuple
    sigma_minus: np.ndarray   # (X, Y) rows, X < X0
    sigma_sharp: np.ndarray   # (X, Y) rows, X > X0
    mask: np.ndarray

    def gap(self, Yp):
        """Horizontal width X_sharp(Y') - X_minus(Y') of the frozen region."""
        sm, ss = self.sigma_minus, self.sigma_sharp
        # sigma_minus is decreasing in X, sigma_sharp increasing
        xm = np.interp(Yp, sm[::-1, 1], sm[::-1, 0])
        xs = np.interp(Yp, ss[:, 1], ss[:, 0])
        return xs - xm


def extract_plateau(GD: CharGrid, family="w"):
    """Onset curve of the frozen region {theta = 0} and its two branches.

    In each column the onset ordinate is where w first reaches pi, located
    from the last unfrozen node and its Y-derivative. Returns None when no
    cell is frozen.
    """
    if GD.mode != "dissipative":
        raise InvalidInput("extract_plateau needs a dissipative grid")
    if family == "z":
        P = extract_plateau(GD.mirrored(), "w")
        if P is None:
            return None
        return Plateau((P.apex[1], P.apex[0]), P.sigma_minus[:, ::-1], P.sigma_sharp[:, ::-1],
                       P.mask.T)
    wn = normalize_angle(GD.w)
    frozen = GD.valid & (np.abs(wn) >= math.pi)
    if not frozen.any():
        return None
    from .charsolver import rhs_arrays
    pts = []
    for i in np.nonzero(frozen.any(axis=1))[0]:
        j = int(np.argmax(frozen[i]))
        if j == 0 or not GD.valid[i, j - 1]:
            continue
        w1 = GD.w[i, j - 1]
        r = rhs_arrays(GD.u[i, j - 1], w1, GD.z[i, j - 1], GD.p[i, j - 1], GD.q[i, j - 1], GD.model)
        target = math.pi if w1 > 0 else -math.pi
        wy = float(r["w_Y"])
        dY = (target - w1) / wy if wy != 0 else 0.0
        dY = min(max(dY, 0.0), GD.h)
        pts.append((float(GD.X[i]), float(GD.Y[j - 1] + dY)))
    pts = np.array(pts)
    k = int(np.argmin(pts[:, 1]))
    # apex from a parabola through the lowest onsets
    lo, hi = max(0, k - 3), min(len(pts), k + 4)
    if hi - lo >= 3:
        a2, a1, a0 = np.polyfit(pts[lo:hi, 0], pts[lo:hi, 1], 2)
        X0 = -a1 / (2 * a2) if a2 > 0 else pts[k, 0]
        Y0 = float(np.polyval([a2, a1, a0], X0))
    else:
        X0, Y0 = pts[k]
    left = pts[pts[:, 0] <= X0]
    right = pts[pts[:, 0] > X0]
    return Plateau((float(X0), float(Y0)), left, right, frozen)


def count_isochrone_intersections(G: CharGrid, curve: SingularCurve, tau):
    """Number of sign changes of t - tau along the curve vertices."""
    d = curve.xt[:, 1] - tau
    return int(np.sum(np.signbit(d[1:]) != np.signbit(d[:-1])))


def _grad(G, name, X, Y):
    e = 1e-3 * G.h
    return ((_value_at(G, name, X + e, Y) - _value_at(G, name, X - e, Y)) / (2 * e),
            (_value_at(G, name, X, Y + e) - _value_at(G, name, X, Y - e)) / (2 * e))


def solve_two(G, fa, la, fb, lb, X, Y, iters=25):
    """Newton for fa(X,Y) = la, fb(X,Y) = lb on bicubic interpolants."""
    for _ in range(iters):
        ra = _value_at(G, fa, X, Y) - la
        rb = _value_at(G, fb, X, Y) - lb
        J = np.array([_grad(G, fa, X, Y), _grad(G, fb, X, Y)])
        dX, dY = np.linalg.solve(J, [ra, rb])
        X, Y = X - dX, Y - dY
        if abs(dX) + abs(dY) < 1e-14:
            break
    return X, Y


def level_point(G, family, level, X=None, Y=None, iters=25):
    """Point of {angle = level} on the column X (w family) or row Y (z family)."""
    for _ in range(iters):
        r = _value_at(G, family, X, Y) - level
        gX, gY = _grad(G, family, X, Y)
        if family == "w":
            d = r / gY
            Y = Y - d
        else:
            d = r / gX
            X = X - d
        if abs(d) < 1e-14:
            break
    return X, Y


def _segment_hits(A, B):
    """Intersections of two polylines (arrays of vertices), vertex-level."""
    hits = []
    for k in range(len(A) - 1):
        p, r = A[k], A[k + 1] - A[k]
        # bounding-box filter
        bx0 = np.minimum(B[:-1, 0], B[1:, 0]); bx1 = np.maximum(B[:-1, 0], B[1:, 0])
        by0 = np.minimum(B[:-1, 1], B[1:, 1]); by1 = np.maximum(B[:-1, 1], B[1:, 1])
        ax0, ax1 = min(p[0], p[0] + r[0]), max(p[0], p[0] + r[0])
        ay0, ay1 = min(p[1], p[1] + r[1]), max(p[1], p[1] + r[1])
        cand = np.nonzero((bx1 >= ax0) & (bx0 <= ax1) & (by1 >= ay0) & (by0 <= ay1))[0]
        for m in cand:
            q, s = B[m], B[m + 1] - B[m]
            den = r[0] * s[1] - r[1] * s[0]
            if den == 0:
                continue
            d = q - p
            ta = (d[0] * s[1] - d[1] * s[0]) / den
            tb = (d[0] * r[1] - d[1] * r[0]) / den
            if 0 <= ta <= 1 and 0 <= tb <= 1:
                hits.append(p + ta * r)
    return hits


def find_type3_points(G: CharGrid):
    """Crossings of w- and z-level sets, refined by Newton and classified."""
    cw = extract_level_sets(G, "w")
    cz = extract_level_sets(G, "z")
    out = []
    for a in cw:
        for b in cz:
            for XY in _segment_hits(a.XY, b.XY):
                try:
                    X, Y = solve_two(G, "w", a.level, "z", b.level, XY[0], XY[1])
                    out.append(classify_point(G, (X, Y), G.model, "w"))
                except (StencilError, np.linalg.LinAlgError):
                    continue
    return sorted(out, key=lambda sp: sp.xt[1])
