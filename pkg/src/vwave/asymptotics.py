"""Local asymptotic laws at singular points and fits of computed solutions
against them.

Where the closed forms in the literature and a direct expansion of the
characteristic system disagree, both are reported: fields named *_lit hold
the literature value, the unsuffixed field is the expansion used for checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .charsolver import CharGrid
from .lattice import StencilError, interp, lagrange4
from .singular import FitError, SingularPoint, level_point, solve_two
from .wavespeed import InvalidInput, WaveSpeedModel

MIN_SAMPLES = 8


def cbrt(v):
    return math.copysign(abs(v) ** (1 / 3), v)


def root5(v):
    return math.copysign(abs(v) ** 0.2, v)


@dataclass
class PowerLawFit:
    exponent: float
    coefficient: float
    r2: float
    window: tuple
    n: int
    sign: float = 1.0
    stderr: float = 0.0

    def to_dict(self):
        return {"exponent": self.exponent, "coefficient": self.coefficient,
                "r2": self.r2, "window": list(self.window), "n": self.n,
                "sign": self.sign, "stderr": self.stderr}


def fit_power_law(s, d, min_samples=MIN_SAMPLES):
    """Least squares of log|d| on log s. coefficient carries no sign; see .sign."""
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(s) != len(d):
        raise FitError("offset and value arrays differ in length")
    if len(s) < min_samples:
        raise FitError(f"need at least {min_samples} samples, got {len(s)}")
    if np.any(s <= 0) or not np.all(np.isfinite(s)) or not np.all(np.isfinite(d)):
        raise FitError("offsets must be positive and values finite")
    if np.any(d == 0) or (np.any(d > 0) and np.any(d < 0)):
        raise FitError("values change sign (or vanish) inside the window")
    ls, ld = np.log(s), np.log(np.abs(d))
    A = np.column_stack([ls, np.ones_like(ls)])
    coef, res, *_ = np.linalg.lstsq(A, ld, rcond=None)
    pred = A @ coef
    ss_res = float(np.sum((ld - pred) ** 2))
    ss_tot = float(np.sum((ld - ld.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    n = len(s)
    stderr = 0.0
    if n > 2 and ss_tot > 0:
        sxx = float(np.sum((ls - ls.mean()) ** 2))
        stderr = math.sqrt(ss_res / (n - 2) / sxx)
    return PowerLawFit(float(coef[0]), float(math.exp(coef[1])), r2,
                       (float(s.min()), float(s.max())), n, float(np.sign(d[0])), stderr)


def fit_fixed_exponent(s, d, exponent):
    """|C| of d ~ C s^exponent from log-space least squares with the exponent pinned."""
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    return float(np.exp(np.mean(np.log(np.abs(d)) - exponent * np.log(s))))


@dataclass
class AsymptoticPrediction:
    type: int
    family: str
    c0: float
    cp0: float
    coef: dict = field(default_factory=dict)

    def __getitem__(self, k):
        return self.coef[k]

    def to_dict(self):
        return {"type": self.type, "family": self.family, "c0": self.c0, "cp0": self.cp0,
                **self.coef}


_SWAP = {"w": "z", "z": "w", "p": "q", "q": "p", "X": "Y", "Y": "X"}


def _wframe(sp: SingularPoint):
    """Derivatives renamed into the w-family frame (z points are mirrored)."""
    if sp.family != "z":
        return sp.derivs
    out = {}
    for k, v in sp.derivs.items():
        f, ds = k.split("_")
        out[_SWAP[f] + "_" + "".join(sorted(_SWAP[ch] for ch in ds))] = v
    return out


def _local(sp: SingularPoint, model):
    c, cp, _ = (float(v) for v in model.derivs(sp.state0.u))
    return c, cp


def predict_type1(sp: SingularPoint, model: WaveSpeedModel) -> AsymptoticPrediction:
    """Taylor data and cusp law at a regular point of a w-family curve.

    z-family points are read in the mirrored frame (X<->Y, w<->z, p<->q).
    """
    d = _wframe(sp)
    s0 = sp.state0
    wX = d["w_X"]
    if sp.type != 1 or wX == 0:
        raise InvalidInput("predict_type1 needs a Type-1 point with w_X != 0")
    c, cp = _local(sp, model)
    z0, p0, q0 = (s0.w, s0.q, s0.p) if sp.family == "z" else (s0.z, s0.p, s0.q)
    wXX = d["w_XX"]
    pX = d.get("p_X", 0.0)
    co = {
        "alpha1": math.sin(z0) * q0 / (4 * c),
        "alpha2": wX * p0 / (4 * c),
        "alpha3": -(wXX * p0 + 2 * wX * pX) / (4 * c),
        "alpha4": -p0 / (4 * c) * cp / (8 * c * c) * (math.cos(z0) + 1) * q0,
        "beta1": (1 + math.cos(z0)) * q0 / (4 * c),
        "beta3": wX * wX * p0 / (4 * c),
        "gamma1": (1 + math.cos(z0)) * q0 / 4,
        "gamma3": wX * wX * p0 / 4,
        # cusp coefficient: u - u0 = -a xi^(2/3), xi = c(t-t0) + (x-x0)
        "a": cbrt(9 * p0 / (32 * c**3 * wX)),
        "a_lit": cbrt(9 * p0 / (32 * wX)),
        "b1": math.sin(z0) / (2 * c * (1 + math.cos(z0))),
        "b2": (wXX * p0 - wX * pX) / (4 * c * wX * wX * p0),
        "b2_lit": -wXX / (2 * c * wX * wX),
        "phi1": -c,
        "phi2": -cp * math.sin(z0) / (1 + math.cos(z0)),
    }
    co["envelope"] = (cp * co["a"] / 3) ** 3
    return AsymptoticPrediction(1, sp.family, c, cp, co)


def predict_type2(sp: SingularPoint, model: WaveSpeedModel) -> AsymptoticPrediction:
    d = _wframe(sp)
    s0 = sp.state0
    wXX, wY = d["w_XX"], d["w_Y"]
    if wXX == 0:
        raise InvalidInput("w_XX = 0: degenerate Type-2 point")
    c, cp = _local(sp, model)
    z0, p0, q0 = (s0.w, s0.q, s0.p) if sp.family == "z" else (s0.z, s0.p, s0.q)
    kappa = -wXX / (2 * wY)
    alpha = 4 * c / ((1 + math.cos(z0)) * q0)
    beta = 3 * wXX**2 * p0 / (120 * (1 + math.cos(z0)) * q0)
    zY, qY = d.get("z_Y", 0.0), d.get("q_Y", 0.0)
    sz, cz = math.sin(z0), math.cos(z0)
    a_t = -zY * sz * q0 / (8 * c) + (1 + cz) / (8 * c) * (qY - cp * sz * q0**2 / (4 * c * c))
    b_x = zY * q0 * sz / 8 - (1 + cz) * qY / 8
    co = {
        "cusp": root5(80**3 * p0**2 / wXX) / (24 * c),
        "kappa": kappa,
        "alpha": alpha,
        "beta": beta,
        "w_Y_pred": cp / (8 * c * c) * (1 + cz) * q0,
        "a_t": a_t,
        "b_x": b_x,
        "alpha_tilde_lit": alpha**2 * (a_t + b_x),
        "alpha_tilde": alpha**2 * (b_x + c * a_t),
        "opening": 2 * math.sqrt(alpha / kappa) if kappa > 0 else math.nan,
    }
    if kappa > 0:
        co["beta_tilde_lit"] = (3 * wXX**2 / (120 * 2 * kappa**2.5)
                                + wY**2 / (4 * kappa**0.5)) * alpha**2.5 * p0
        # the expansion of x + c t on {w = pi} also has a (X-X0)^3 (Y-Y0) term
        co["beta_tilde"] = wXX**2 * p0 * alpha**2.5 / (30 * kappa**2.5)
        co["z_jump"] = -cp * (1 + cz) * p0 / (4 * c * c * math.sqrt(kappa))
        co["q_jump"] = -cp * sz * p0 * q0 / (4 * c * c * math.sqrt(kappa))
        co["eta0"] = (2 / 3) * (co["z_jump"] * cz * q0 / (4 * c) + co["q_jump"] * sz / (4 * c))
    else:
        for k in ("beta_tilde_lit", "beta_tilde", "z_jump", "q_jump", "eta0"):
            co[k] = math.nan
    return AsymptoticPrediction(2, sp.family, c, cp, co)


def predict_type3(sp: SingularPoint, model: WaveSpeedModel) -> AsymptoticPrediction:
    d = sp.derivs
    s0 = sp.state0
    wX, zY = d["w_X"], d["z_Y"]
    if wX == 0 or zY == 0:
        raise InvalidInput("Type-3 law needs w_X != 0 and z_Y != 0")
    c, cp = _local(sp, model)
    co = {"a1": cbrt(144 * s0.p / wX) / (8 * c), "a2": cbrt(144 * s0.q / zY) / (8 * c)}
    return AsymptoticPrediction(3, "both", c, cp, co)


# -- sampling helpers ----------------------------------------------------------

def _row_samples(G: CharGrid, Y, i_lo, i_hi, names):
    """Fields on lattice columns i_lo..i_hi at ordinate Y (cubic in Y)."""
    fj = (Y - G.Y0g) / G.h
    j0 = int(math.floor(fj))
    wb = lagrange4(fj - j0)
    out = {}
    for n in names:
        A = getattr(G, n)[i_lo:i_hi + 1, j0 - 1:j0 + 3]
        if not np.all(np.isfinite(A)):
            raise StencilError("row samples touch undetermined cells")
        out[n] = A @ wb
    return out


def _window(n_lo, n_hi, s_min, s_max, h):
    lo = max(n_lo, int(math.ceil(s_min / h)))
    hi = min(n_hi, int(math.floor(s_max / h)))
    return lo, hi


def cusp_along_row(G: CharGrid, sp: SingularPoint, side=+1, s_min=None, s_max=0.05,
                   lin=0.0):
    """Samples of xi = c0(t-t0) + (x-x0) and u - u0 - lin*xi along Y = Y0.

    Offsets run over lattice columns with side*(X - X0) in [s_min, s_max].
    """
    X0, Y0 = sp.XY
    h = G.h
    s_min = 5 * h if s_min is None else s_min
    c0 = float(G.model.c(sp.state0.u))
    i0 = (X0 - G.X0g) / h
    if side > 0:
        i_lo, i_hi = int(math.ceil(i0 + s_min / h)), int(math.floor(i0 + s_max / h))
    else:
        i_lo, i_hi = int(math.ceil(i0 - s_max / h)), int(math.floor(i0 - s_min / h))
    i_lo, i_hi = max(i_lo, 0), min(i_hi, G.nX - 1)
    if i_hi - i_lo + 1 < MIN_SAMPLES:
        raise FitError("fit window holds too few lattice columns")
    F = _row_samples(G, Y0, i_lo, i_hi, ("u", "x", "t"))
    Xs = G.X[i_lo:i_hi + 1]
    xi = c0 * (F["t"] - sp.state0.t) + (F["x"] - sp.state0.x)
    du = F["u"] - sp.state0.u - lin * xi
    return np.abs(Xs - X0), xi, du


def _report(law, target, fit, pred_coef, s=None, d=None, **extra):
    """Fit report. With the samples given, the fitted coefficient is the one
    with the exponent pinned to its target; the free-fit value (an
    extrapolation to s = 1) is kept as free_coefficient."""
    coef = fit.coefficient if s is None else fit_fixed_exponent(s, d, target)
    rel = abs(coef - abs(pred_coef)) / abs(pred_coef) if pred_coef else math.nan
    out = {"law": law, "paper_exponent": target, "fitted_exponent": fit.exponent,
           "predicted_coefficient": abs(pred_coef), "fitted_coefficient": coef,
           "free_coefficient": fit.coefficient, "coefficient_rel_error": rel,
           "r2": fit.r2, "exponent_stderr": fit.stderr, "window": list(fit.window), "n": fit.n}
    out.update(extra)
    return out


def verify_type1(G: CharGrid, sp: SingularPoint, pred: AsymptoticPrediction, side=+1,
                 s_min=None, s_max=0.05, linear="expansion"):
    """Cusp exponent and coefficient along the forward characteristic Y = Y0."""
    if sp.family == "z":
        from .singular import classify_point
        Gm = G.mirrored()
        spm = classify_point(Gm, (sp.XY[1], sp.XY[0]), G.model, "w")
        return verify_type1(Gm, spm, predict_type1(spm, G.model), side, s_min, s_max, linear)
    lin = {"expansion": pred["b2"], "literature": pred["b2_lit"], "none": 0.0}[linear]
    _, xi, du = cusp_along_row(G, sp, side, s_min, s_max, lin)
    fit = fit_power_law(np.abs(xi), du)
    return _report("T1", 2 / 3, fit, pred["a"], np.abs(xi), du, a_literature=abs(pred["a_lit"]),
                   side=side, linear=linear, sign=fit.sign)


def type2_cusp(G: CharGrid, sp: SingularPoint, pred: AsymptoticPrediction, side=+1,
               s_min=None, s_max=0.12):
    """Cusp law of a Type-2 point along Y = Y0."""
    _, xi, du = cusp_along_row(G, sp, side, s_min, s_max)
    fit = fit_power_law(np.abs(xi), du)
    return _report("T2", 3 / 5, fit, pred["cusp"], np.abs(xi), du, side=side)


def verify_type2(G: CharGrid, sp: SingularPoint, pred: AsymptoticPrediction, side=+1,
                 s_min=None, s_max=0.12, dtaus=None):
    """Cusp law along Y = Y0, isochrone intersections and curve separation."""
    out = {"cusp": type2_cusp(G, sp, pred, side, s_min, s_max)}
    out.update(type2_geometry(G, sp, pred, dtaus))
    return out


def type2_intersections(G: CharGrid, sp: SingularPoint, pred, tau):
    """The two points of {w = level} ∩ {t = tau} near the Type-2 point."""
    X0, Y0 = sp.XY
    level = math.pi * (2 * round((sp.state0.w / math.pi - 1) / 2) + 1)
    dt = tau - sp.state0.t
    kappa, alpha = pred["kappa"], pred["alpha"]
    r = math.sqrt(alpha * dt / kappa)
    pts = []
    for sgn in (-1, 1):
        X, Y = solve_two(G, "w", level, "t", tau, X0 + sgn * r, Y0 + alpha * dt)
        pts.append((X, Y))
    return pts


def type2_geometry(G: CharGrid, sp: SingularPoint, pred, dtaus=None):
    from .singular import count_isochrone_intersections, extract_level_sets
    if dtaus is None:
        dtaus = np.geomspace(0.004, 0.06, 16)
    t0 = sp.state0.t
    Xop, sep = [], []
    for dt in dtaus:
        (X1, Y1), (X2, Y2) = type2_intersections(G, sp, pred, t0 + dt)
        Xop.append(X2 - X1)
        sep.append(interp(G, "x", X2, Y2) - interp(G, "x", X1, Y1))
    Xop = np.array(Xop)
    sep = np.array(sep)
    fo = fit_power_law(dtaus, Xop)
    fs = fit_power_law(dtaus, sep)
    # intersection counts on the curve that carries the Type-2 point
    curves = extract_level_sets(G, "w")
    cv = min(curves, key=lambda c: np.min(np.hypot(c.XY[:, 0] - sp.XY[0], c.XY[:, 1] - sp.XY[1])))
    near = np.hypot(cv.XY[:, 0] - sp.XY[0], cv.XY[:, 1] - sp.XY[1]) < 0.5
    sub = type(cv)(cv.family, cv.XY[near], cv.xt[near], cv.level)
    counts = {f"{d:+.3f}": count_isochrone_intersections(G, sub, t0 + d)
              for d in (-0.05, -0.02, -0.005, 0.005, 0.02, 0.05)}
    return {
        "opening": _report("es5", 0.5, fo, pred["opening"], dtaus, Xop,
                           kappa_fitted=4 * pred["alpha"] / fo.coefficient**2
                           if abs(fo.exponent - 0.5) < 0.1 else math.nan,
                           kappa_predicted=pred["kappa"]),
        "separation": _report("dx12", 2.5, fs, 2 * pred["beta_tilde"], dtaus, sep,
                              literature_coefficient=2 * pred["beta_tilde_lit"]),
        "intersection_counts": counts,
    }


def _even_part(G, sp, s_min, s_max):
    """Average of the two one-sided cusp samples at matched |xi|.

    The odd linear term b*xi cancels; the cusp |xi|^(2/3) is even and stays.
    """
    _, xp, dp = cusp_along_row(G, sp, +1, s_min, s_max)
    _, xm, dm = cusp_along_row(G, sp, -1, s_min, 1.3 * s_max)
    ap, am = np.abs(xp), np.abs(xm)
    o = np.argsort(am)
    ok = (ap >= am.min()) & (ap <= am.max())
    de = 0.5 * (dp[ok] + np.interp(np.log(ap[ok]), np.log(am[o]), dm[o]))
    return ap[ok], de


def verify_type3(G: CharGrid, sp: SingularPoint, pred: AsymptoticPrediction, side=0,
                 s_min=None, s_max=0.08):
    """w-cusp along Y = Y0 and z-cusp along X = X0 (through the mirror).

    side 0 fits the even part of the two one-sided samples; +1/-1 fit one side.
    """
    from .charsolver import CharState
    from .singular import SingularPoint as SP
    s0 = sp.state0
    spm = SP((sp.XY[1], sp.XY[0]), (-sp.xt[0], sp.xt[1]), "w", 3, {},
             CharState(s0.u, s0.z, s0.w, s0.q, s0.p, -s0.x, s0.t))
    out = {}
    for key, grid, pt, coef in (("w_cusp", G, sp, pred["a1"]),
                                ("z_cusp", G.mirrored(), spm, pred["a2"])):
        if side == 0:
            s, d = _even_part(grid, pt, s_min, s_max)
        else:
            _, xi, d = cusp_along_row(grid, pt, side, s_min, s_max)
            s = np.abs(xi)
        out[key] = _report("T3", 2 / 3, fit_power_law(s, d), coef, s, d)
    return out


def envelope_offset(G: CharGrid, sp: SingularPoint, dts=None, side=+1):
    """Offset delta(t) = x_char(t) - phi(t) of the backward characteristic
    through a Type-1 point (the lattice column X = X0) from the singular curve.
    """
    X0, Y0 = sp.XY
    t0 = sp.state0.t
    if dts is None:
        dts = np.geomspace(0.01, 0.1, 12)
    level = math.pi * (2 * round((sp.state0.w / math.pi - 1) / 2) + 1)
    tY = (1 + math.cos(sp.state0.z)) * sp.state0.q / (4 * float(G.model.c(sp.state0.u)))
    out = []
    Xc, Yc = X0, Y0
    for dt in dts:
        tau = t0 + side * dt
        # characteristic: column X0, solve t(X0, Y) = tau
        Y = Y0 + side * dt / tY
        for _ in range(30):
            r = interp(G, "t", X0, Y) - tau
            e = 1e-3 * G.h
            g = (interp(G, "t", X0, Y + e) - interp(G, "t", X0, Y - e)) / (2 * e)
            Y -= r / g
            if abs(r) < 1e-15:
                break
        xc = interp(G, "x", X0, Y)
        Xc, Yc = solve_two(G, "w", level, "t", tau, Xc, Yc + side * dt / tY)
        out.append(xc - interp(G, "x", Xc, Yc))
    return np.asarray(dts), np.asarray(out)


def verify_envelope(G, sp, pred, dts=None, side=+1):
    dts, delta = envelope_offset(G, sp, dts, side)
    fit = fit_power_law(dts, delta)
    return _report("char", 3.0, fit, pred["envelope"], dts, delta, side=side)


def curve_points(G: CharGrid, sp: SingularPoint, Xs):
    """Points of the w-level set through sp on the given columns, and their images."""
    level = math.pi * (2 * round((sp.state0.w / math.pi - 1) / 2) + 1)
    Y = sp.XY[1]
    pts = []
    for X in Xs:
        X, Y = level_point(G, "w", level, X, Y)
        pts.append((X, Y, interp(G, "x", X, Y), interp(G, "t", X, Y),
                    interp(G, "u", X, Y), interp(G, "z", X, Y)))
    return np.array(pts)


def fit_curve_geometry(G: CharGrid, sp: SingularPoint, pred, half_width=0.03, n=41, deg=4):
    """phi'(t0), phi''(t0) of the w-level image through a Type-1 point."""
    X0 = sp.XY[0]
    P = curve_points(G, sp, np.linspace(X0 - half_width, X0 + half_width, n))
    t, x = P[:, 3], P[:, 2]
    if np.any(np.diff(t) <= 0) and np.any(np.diff(t) >= 0):
        raise FitError("image curve not monotone in t on the window")
    coef = np.polyfit(t - sp.state0.t, x - sp.state0.x, deg)
    d1 = float(np.polyval(np.polyder(coef), 0.0))
    d2 = float(np.polyval(np.polyder(coef, 2), 0.0))
    return {"slope": d1, "slope_pred": pred["phi1"], "curvature": d2,
            "curvature_pred": pred["phi2"],
            "slope_rel_error": abs(d1 - pred["phi1"]) / abs(pred["phi1"]),
            "curvature_rel_error": abs(d2 - pred["phi2"]) / abs(pred["phi2"])
            if pred["phi2"] else math.nan,
            "window_t": [float(t.min()), float(t.max())]}


def richardson(coarse, fine, order=2):
    """Combine values from steps h and h/2 to cancel the O(h^order) error."""
    k = 2.0**order
    return (k * np.asarray(fine) - np.asarray(coarse)) / (k - 1)


# -- conservative vs dissipative --------------------------------------------

def frozen_shadow(GD: CharGrid):
    """Cells whose lower-left dependency quadrant contains a frozen cell."""
    frozen = GD.valid & (GD.theta_mask == 0)
    return np.maximum.accumulate(np.maximum.accumulate(frozen, axis=0), axis=1)


def sup_difference(GC: CharGrid, GD: CharGrid, tau):
    """sup over x of |u_cons - u_diss| on the isochrone t = tau."""
    from .physmap import sample_profile
    pc = sample_profile(GC, tau)
    pd = sample_profile(GD, tau)
    lo = max(pc.x[0], pd.x[0])
    hi = min(pc.x[-1], pd.x[-1])
    xs = np.union1d(pc.x, pd.x)
    xs = xs[(xs >= lo) & (xs <= hi)]
    return float(np.max(np.abs(np.interp(xs, pc.x, pc.u) - np.interp(xs, pd.x, pd.u))))


def _column(G, name, i, j_lo, j_hi):
    return getattr(G, name)[i, j_lo:j_hi + 1]


def compare_cons_diss(GC: CharGrid, GD: CharGrid, sp2: SingularPoint, dX=0.05,
                      y_window=None, dtaus=None):
    """Difference scalings between the two solutions past a Type-2 point.

    Column quantities are sampled on the lattice column nearest X0 + dX at rows
    with Y - Y0 in y_window (default [5h, 0.5 kappa dX^2], i.e. up to half way
    to the dissipative onset curve on that column).
    """
    if GC.mode != "conservative" or GD.mode != "dissipative":
        raise InvalidInput("need one conservative and one dissipative grid")
    if (GC.nX, GC.nY, GC.N) != (GD.nX, GD.nY, GD.N) or GC.h != GD.h \
            or GC.X0g != GD.X0g or GC.Y0g != GD.Y0g:
        raise InvalidInput("grids differ in shape or spacing")
    if not np.array_equal(GC.u[:, 0], GD.u[:, 0], equal_nan=True):
        raise InvalidInput("grids come from different boundary traces")
    pred = predict_type2(sp2, GC.model)
    X0, Y0 = sp2.XY
    t0 = sp2.state0.t
    h = GC.h
    out = {"prediction": pred.to_dict()}

    # (i) sup difference on isochrones
    if dtaus is None:
        dtaus = np.geomspace(0.01, 0.1, 10)
    sups = np.array([sup_difference(GC, GD, t0 + d) for d in dtaus])
    out["ucd"] = _report("ucd", 1.0, fit_power_law(dtaus, sups), math.nan, **{})
    before = [sup_difference(GC, GD, t0 - d) for d in (0.2, 0.1, 0.05)]
    out["ucd"]["before_t0_max"] = float(max(before))

    # (ii)-(iv) column samples
    i = int(round((X0 + dX - GC.X0g) / h))
    Xc = float(GC.X[i])
    kappa = pred["kappa"]
    if y_window is None:
        y_window = (5 * h, 0.5 * kappa * (Xc - X0) ** 2)
    j_lo = int(math.ceil((Y0 + y_window[0] - GC.Y0g) / h))
    j_hi = int(math.floor((Y0 + y_window[1] - GC.Y0g) / h))
    if j_hi - j_lo + 1 < MIN_SAMPLES:
        raise FitError("column window holds too few rows")
    dY = GC.Y[j_lo:j_hi + 1] - Y0
    diff = {f: _column(GC, f, i, j_lo, j_hi) - _column(GD, f, i, j_lo, j_hi)
            for f in ("z", "q", "u", "x", "t")}
    out["column"] = {"X": Xc, "dX": Xc - X0, "y_window": list(y_window)}
    out["z5"] = _report("z5", 0.5, fit_power_law(dY, diff["z"]), pred["z_jump"], dY, diff["z"],
                        sign=float(np.sign(diff["z"][0])), predicted_sign=float(np.sign(pred["z_jump"])))
    out["q5"] = _report("q5", 0.5, fit_power_law(dY, diff["q"]), pred["q_jump"], dY, diff["q"])
    out["u8"] = _report("u8", 1.5, fit_power_law(dY, diff["u"]), pred["eta0"], dY, diff["u"],
                        sign=float(np.sign(diff["u"][0])), predicted_sign=float(np.sign(pred["eta0"])))
    for f in ("x", "t"):
        try:
            out[f + "8"] = _report(f + "8", 2.0, fit_power_law(dY, diff[f]), math.nan)
        except FitError as e:
            out[f + "8"] = {"law": f + "8", "error": str(e),
                            "max_abs": float(np.max(np.abs(diff[f])))}

    # (v) weak singularity of the dissipative solution across the forward
    # characteristic Y = Y0: along the column, g = sin z/(1+cos z) = du/dt
    zc = _column(GD, "z", i, j_lo, j_hi)
    g = np.sin(zc) / (1 + np.cos(zc))
    z1 = interp(GC, "z", Xc, Y0)
    g1 = math.sin(z1) / (1 + math.cos(z1))
    t1 = interp(GC, "t", Xc, Y0)
    u1 = interp(GC, "u", Xc, Y0)
    dt = _column(GD, "t", i, j_lo, j_hi) - t1
    # remove the smooth part with the conservative solution's slope at t1
    gc = np.sin(_column(GC, "z", i, j_lo, j_hi)) / (1 + np.cos(_column(GC, "z", i, j_lo, j_hi)))
    fg = fit_power_law(dt, g - g1)
    out["weak"] = _report("dt", 0.5, fg, math.nan, dt, g - g1,
                          raw_minus_smooth_exponent=fit_power_law(dt, g - gc).exponent)
    du = _column(GD, "u", i, j_lo, j_hi) - u1
    fu = fit_power_law(dt, du)
    out["weak"]["u_modulus_exponent"] = fu.exponent
    out["weak"]["u_modulus_C"] = float(np.max(np.abs(du) / dt))

    # (vi) identity outside the dependency shadow of the frozen set
    shadow = frozen_shadow(GD)
    ok = GC.valid & ~shadow
    same = True
    for f in ("u", "w", "z", "p", "q", "x", "t"):
        same &= bool(np.array_equal(getattr(GC, f)[ok], getattr(GD, f)[ok]))
    out["outside"] = {"bit_identical": same, "cells": int(ok.sum()),
                      "before_t0_cells": int((ok & (GC.t < t0)).sum()),
                      "before_t0_all_unshadowed": bool(not np.any(shadow & GC.valid & (GC.t < t0)))}
    out["plateau"] = plateau_constancy(GD)
    return out


def plateau_constancy(GD: CharGrid, family="w"):
    """Max change of x, t, u and the other family's (angle, density) between
    neighbouring frozen cells along the frozen family's transverse direction."""
    from .charsolver import normalize_angle
    if family == "w":
        F = GD.valid & (np.abs(normalize_angle(GD.w)) >= math.pi)
        pair = F[1:, :] & F[:-1, :]
        names = ("x", "t", "u", "z", "q")
        dif = {n: np.abs(np.diff(getattr(GD, n), axis=0))[pair] for n in names}
    else:
        F = GD.valid & (np.abs(normalize_angle(GD.z)) >= math.pi)
        pair = F[:, 1:] & F[:, :-1]
        names = ("x", "t", "u", "w", "p")
        dif = {n: np.abs(np.diff(getattr(GD, n), axis=1))[pair] for n in names}
    return {"pairs": int(pair.sum()),
            **{n: float(v.max()) if v.size else 0.0 for n, v in dif.items()}}
