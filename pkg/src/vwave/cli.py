"""Batch front end: config -> solve -> analyze -> verify -> files.

Exit codes: 0 success, 1 invalid config, 2 numeric failure, 3 genericity
violation detected (analysis still written).
"""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .asymptotics import (compare_cons_diss, fit_curve_geometry, predict_type1, predict_type2,
                          predict_type3, type2_cusp, type2_geometry, verify_envelope,
                          verify_type1, verify_type3)
from .boundary import check_compatibility
from .charsolver import NumericError, integrate_goursat
from .config import PRESETS, ConfigError, RunConfig, preset
from .io import write_json
from .lattice import StencilError
from .physmap import energy_series, oracle_error, sample_profile
from .singular import (FitError, classify_point, extract_level_sets, find_first_singularity,
                       find_type3_points, level_point)
from .wavespeed import InvalidInput, check_assumption_A

log = logging.getLogger("vwave")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GENERICITY = 0, 1, 2, 3
_SOFT = (FitError, StencilError, InvalidInput, np.linalg.LinAlgError, ValueError)


class BracketError(ValueError):
    pass


@dataclass
class RunSummary:
    run_id: str = ""
    exit_status: int = EXIT_OK
    message: str = ""
    config: dict = field(default_factory=dict)
    assumption: dict = field(default_factory=dict)
    compatibility_max_residual: float = math.nan
    grids: dict = field(default_factory=dict)
    singularities: list = field(default_factory=list)
    fit_reports: list = field(default_factory=list)
    energy: dict = field(default_factory=dict)
    comparison: dict | None = None
    oracle: dict | None = None
    errors: list = field(default_factory=list)
    files: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _fits(point_id, block):
    """Flatten verify_* output into fit-report rows."""
    rows = []
    for name, rep in block.items():
        if isinstance(rep, dict) and "law" in rep:
            rows.append({"point_id": point_id, "quantity": name, "law": rep["law"],
                         "paper_exponent": rep["paper_exponent"],
                         "fitted_exponent": rep["fitted_exponent"],
                         "predicted_coefficient": rep["predicted_coefficient"],
                         "fitted_coefficient": rep["fitted_coefficient"],
                         "coefficient_rel_error": rep["coefficient_rel_error"],
                         "r2": rep["r2"], "window": rep["window"]})
    return rows


def _try(summary, what, fn, *a, **kw):
    try:
        return fn(*a, **kw)
    except _SOFT as e:
        summary.errors.append({"step": what, "error": f"{type(e).__name__}: {e}"})
        return None


def _analyze_singularities(cfg, G, summary, out):
    T = cfg.T
    points = []
    curves = [c for fam in ("w", "z") for c in extract_level_sets(G, fam)]
    for k, cv in enumerate(curves):
        keep = cv.xt[:, 1] <= T
        if keep.sum() < 2:
            continue
        if out is None:
            continue
        name = f"curve_{cv.family}{k}.csv"
        type(cv)(cv.family, cv.XY[keep], cv.xt[keep], cv.level, cv.endpoints).to_csv(out / name)
        summary.files.append(name)
    for fam in ("w", "z"):
        sp = _try(summary, f"first_singularity_{fam}", find_first_singularity, G, fam)
        if sp is not None and sp.xt[1] <= T:
            points.append((f"{fam}-first", sp))
    for k, sp in enumerate(_try(summary, "type3", find_type3_points, G) or []):
        if sp.xt[1] <= T:
            points.append((f"crossing{k}", sp))
    summary.singularities = [{"id": pid, **sp.to_dict()} for pid, sp in points]
    return dict(points)


def _analyze_asymptotics(cfg, G, pts, summary):
    model = G.model
    sp2 = pts.get("w-first")
    if sp2 is not None and sp2.type == 2:
        pr = predict_type2(sp2, model)
        # fit windows hold at least ~10 lattice columns at coarse h
        r = _try(summary, "type2_cusp", type2_cusp, G, sp2, pr, s_max=max(0.12, 16 * G.h))
        if r:
            summary.fit_reports += _fits("w-first", {"cusp": r})
        r = _try(summary, "type2_geometry", type2_geometry, G, sp2, pr)
        if r:
            summary.fit_reports += _fits("w-first", r)
            summary.fit_reports.append({"point_id": "w-first", "quantity": "intersection_counts",
                                        "law": "count", "counts": r["intersection_counts"]})
        # a Type-1 point on the same curve
        dX = cfg.analysis.type1_offset
        XY = _try(summary, "type1_locate", level_point, G, "w", math.pi * (2 * round((sp2.state0.w / math.pi - 1) / 2) + 1),
                  sp2.XY[0] + dX, sp2.XY[1] + pr["kappa"] * dX * dX)
        if XY is not None:
            sp1 = classify_point(G, XY, model, "w")
            summary.singularities.append({"id": "w-type1", **sp1.to_dict()})
            if sp1.type == 1:
                p1 = predict_type1(sp1, model)
                for side in (1, -1):
                    r1 = _try(summary, f"type1_side{side}", verify_type1, G, sp1, p1, side,
                              None, max(0.08, 16 * G.h))
                    if r1:
                        summary.fit_reports += _fits("w-type1", {f"cusp_side{side}": r1})
                env = _try(summary, "envelope", verify_envelope, G, sp1, p1)
                if env:
                    summary.fit_reports += _fits("w-type1", {"envelope": env})
                geo = _try(summary, "curve_geometry", fit_curve_geometry, G, sp1, p1, 0.05)
                if geo:
                    summary.fit_reports.append({"point_id": "w-type1", "quantity": "curve_geometry",
                                                "law": "phi", **geo})
    for pid, sp in pts.items():
        if sp.type == 3 and pid.startswith("crossing"):
            r = _try(summary, f"type3_{pid}", verify_type3, G, sp, predict_type3(sp, model))
            if r:
                summary.fit_reports += _fits(pid, r)
            break


def _taus(cfg, G):
    tmax = min(cfg.T, float(np.nanmax(G.t)))
    return np.linspace(0.0, tmax, cfg.analysis.energy_samples)


def run(cfg: RunConfig, write=True) -> RunSummary:
    summary = RunSummary(run_id=getattr(cfg, "run_id", ""))
    try:
        cfg.validate()
        if cfg.analysis.oracle and cfg.model().kind != "constant":
            raise ConfigError("analysis.oracle requires wave_speed.family='constant'")
    except ConfigError as e:
        summary.exit_status, summary.message = EXIT_CONFIG, str(e)
        return summary
    summary.config = cfg.to_dict()
    out = Path(cfg.out)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    model, init = cfg.model(), cfg.init()
    summary.assumption = check_assumption_A(model).to_dict()
    trace = cfg.trace()
    summary.compatibility_max_residual = check_compatibility(trace, model).max_residual

    grids = {}
    for mode in cfg.modes():
        try:
            G = integrate_goursat(trace, model, mode)
        except NumericError as e:
            summary.exit_status, summary.message = EXIT_NUMERIC, str(e)
            _finish(summary, out, write)
            return summary
        grids[mode] = G
        summary.grids[mode] = G.summary()
        if write and cfg.analysis.write_grid:
            G.to_csv(out / f"grid_{mode}.csv")
            summary.files.append(f"grid_{mode}.csv")
    G = grids.get("conservative", next(iter(grids.values())))

    pts = {}
    if cfg.analysis.singularities or cfg.analysis.asymptotics or cfg.analysis.comparison:
        pts = _analyze_singularities(cfg, G, summary, out if write else None)
    if cfg.analysis.asymptotics:
        _analyze_asymptotics(cfg, G, pts, summary)

    if cfg.analysis.energy:
        for mode, Gm in grids.items():
            taus = _taus(cfg, Gm)
            E = _try(summary, f"energy_{mode}", energy_series, Gm, taus)
            if E is not None:
                E = np.asarray(E)
                drift = float(np.max(np.abs(E - E[0])) / E[0]) if E[0] > 0 else 0.0
                summary.energy[mode] = {"tau": taus, "E": E, "max_rel_drift": drift}

    suffix = len(grids) > 1
    for tau in cfg.profile_times:
        for mode, Gm in grids.items():
            P = _try(summary, f"profile_{tau}", sample_profile, Gm, tau)
            if P is not None and write:
                name = f"profile_t{tau!r}" + (f"_{mode}" if suffix else "") + ".csv"
                P.to_csv(out / name, cfg.run_id, mode)
                summary.files.append(name)

    if cfg.analysis.comparison:
        sp2 = pts.get("w-first")
        if sp2 is None or sp2.type != 2:
            summary.errors.append({"step": "comparison", "error": "no Type-2 point in the window"})
        else:
            GC = grids["conservative"]
            dX = max(0.05, math.sqrt(32 * GC.h / predict_type2(sp2, model)["kappa"]) + GC.h)
            summary.comparison = _try(summary, "comparison", compare_cons_diss,
                                      GC, grids["dissipative"], sp2, dX)

    if cfg.analysis.oracle:
        taus = list(cfg.profile_times) or [0.5 * cfg.T, cfg.T]
        errs = _try(summary, "oracle", oracle_error, G, init, taus)
        if errs is not None:
            summary.oracle = {"kind": "dalembert", "tau": taus, "linf_error": errs,
                              "max_error": max(errs)}

    if any(s.get("genericity_flags") for s in summary.singularities):
        summary.exit_status = EXIT_GENERICITY
        summary.message = "genericity violation at a singular point"
    _finish(summary, out, write)
    return summary


def _finish(summary, out, write):
    if not write:
        return
    write_json(out / "fits.json", summary.fit_reports)
    summary.files += ["fits.json", "summary.json"]
    write_json(out / "summary.json", summary.to_dict())


# -- blowup hunt --------------------------------------------------------------

@dataclass
class HuntResult:
    amplitude: float
    config: RunConfig
    t0: float | None
    steps: int
    converged: bool
    history: list


def _blowup_time(cfg: RunConfig):
    """t0 of the first Type-2 point inside [0, T], or None."""
    G = integrate_goursat(cfg.trace(), cfg.model(), "conservative")
    best = None
    for fam in ("w", "z"):
        sp = find_first_singularity(G, fam)
        if sp is not None and sp.type == 2 and sp.xt[1] <= cfg.T:
            best = sp.xt[1] if best is None else min(best, sp.xt[1])
    return best


def hunt_blowup(template: RunConfig, lo, hi, h=None, max_steps=20, target=(0.2, 0.8)):
    """Bisect the u1 amplitude until a Type-2 point appears with
    t0 in [target[0] T, target[1] T]. Larger amplitudes blow up earlier."""
    template.validate()
    init = template.init()
    lo, hi = sorted((float(lo), float(hi)))
    T = template.T

    def cfg_at(A):
        return template.with_(initial_data=init.with_amplitude(A).to_dict(),
                              h=h if h is not None else template.h)

    history = []

    def probe(A):
        t0 = _blowup_time(cfg_at(A))
        history.append({"amplitude": A, "t0": t0})
        return t0

    t_hi = probe(hi)
    if lo == hi:
        if t_hi is None:
            raise BracketError(f"no singularity at amplitude {hi}")
        return HuntResult(hi, cfg_at(hi).with_(h=template.h), t_hi, 0, True, history)
    t_lo = probe(lo)
    if t_hi is None or t_lo is not None:
        raise BracketError(f"interval [{lo}, {hi}] does not bracket the blowup "
                           f"(t0 at ends: {t_lo}, {t_hi})")
    a, b, tb = lo, hi, t_hi
    for step in range(1, max_steps + 1):
        if target[0] * T <= tb <= target[1] * T:
            return HuntResult(b, cfg_at(b).with_(h=template.h), tb, step - 1, True, history)
        mid = 0.5 * (a + b)
        tm = probe(mid)
        if tm is None or tm > target[1] * T:
            a = mid
        else:
            b, tb = mid, tm
    ok = target[0] * T <= tb <= target[1] * T
    return HuntResult(b, cfg_at(b).with_(h=template.h), tb, max_steps, ok, history)


# -- command line -------------------------------------------------------------

def _load(arg):
    if not os.path.exists(arg) and arg in PRESETS:
        return preset(arg)
    return RunConfig.load(arg)


def main(argv=None):
    ap = argparse.ArgumentParser(prog="vwave", description=__doc__.splitlines()[0])
    ap.add_argument("config", help=f"JSON config path or preset name ({', '.join(PRESETS)})")
    ap.add_argument("--mode", choices=("conservative", "dissipative", "both"))
    ap.add_argument("--h", type=float)
    ap.add_argument("--hunt", nargs=2, type=float, metavar=("LO", "HI"),
                    help="bisect the u1 amplitude over [LO, HI] before the run")
    ap.add_argument("--out")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    try:
        cfg = _load(args.config)
    except (OSError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.mode:
        cfg.mode = args.mode
    if args.h:
        cfg.h = args.h
    if args.out:
        cfg.out = args.out
    if args.hunt:
        try:
            res = hunt_blowup(cfg, *args.hunt)
        except BracketError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        except ConfigError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_CONFIG
        log.info("hunt: amplitude %r, t0 %r after %d steps", res.amplitude, res.t0, res.steps)
        cfg = res.config
        Path(cfg.out).mkdir(parents=True, exist_ok=True)
        write_json(Path(cfg.out) / "hunt.json",
                   {"amplitude": res.amplitude, "t0": res.t0, "steps": res.steps,
                    "converged": res.converged, "history": res.history,
                    "config": cfg.to_dict()})
    summary = run(cfg)
    if summary.message:
        print(("error: " if summary.exit_status in (1, 2) else "warning: ") + summary.message,
              file=sys.stderr)
    return summary.exit_status


if __name__ == "__main__":
    sys.exit(main())
