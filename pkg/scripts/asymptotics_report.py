"""Fit the Type-1 and Type-2 laws on the single-packet scenario and print a table.

    python3 scripts/asymptotics_report.py --h 0.005
"""
import argparse
import math

from vwave.asymptotics import (fit_curve_geometry, predict_type1, predict_type2, verify_envelope,
                               verify_type1, verify_type2)
from vwave.charsolver import integrate_goursat
from vwave.config import preset
from vwave.singular import classify_point, find_first_singularity, level_point


def row(name, r):
    print(f"{name:<14} {r['fitted_exponent']:8.4f} {r['paper_exponent']:8.4f} "
          f"{r['fitted_coefficient']:11.5g} {r['predicted_coefficient']:11.5g} "
          f"{r['coefficient_rel_error']:8.3f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.005)
    ap.add_argument("--dx", type=float, default=-0.12, help="Type-1 offset from the Type-2 point")
    a = ap.parse_args()
    cfg = preset("blowup", h=a.h)
    G = integrate_goursat(cfg.trace(), cfg.model())
    sp2 = find_first_singularity(G, "w")
    p2 = predict_type2(sp2, G.model)
    print(f"Type-2 point (x, t) = ({sp2.xt[0]:.5f}, {sp2.xt[1]:.5f}), kappa = {p2['kappa']:.5f}")
    print(f"{'quantity':<14} {'exp':>8} {'target':>8} {'coef':>11} {'pred':>11} {'relerr':>8}")
    r2 = verify_type2(G, sp2, p2, s_max=max(0.12, 16 * G.h))
    for k in ("cusp", "opening", "separation"):
        row("T2 " + k, r2[k])
    print("intersection counts:", r2["intersection_counts"])
    level = math.pi * (2 * round((sp2.state0.w / math.pi - 1) / 2) + 1)
    XY = level_point(G, "w", level, sp2.XY[0] + a.dx, sp2.XY[1] + p2["kappa"] * a.dx**2)
    sp1 = classify_point(G, XY, G.model, "w")
    p1 = predict_type1(sp1, G.model)
    print(f"Type-1 point (x, t) = ({sp1.xt[0]:.5f}, {sp1.xt[1]:.5f})")
    for side in (1, -1):
        row(f"T1 side {side:+d}", verify_type1(G, sp1, p1, side, s_max=max(0.08, 16 * G.h)))
    # single-grid envelope exponents carry an O(h^2) bias; the acceptance suite
    # Richardson-combines the offsets of two resolutions
    row("envelope", verify_envelope(G, sp1, p1))
    geo = fit_curve_geometry(G, sp1, p1, 0.05)
    print(f"phi' = {geo['slope']:.6f} (pred {geo['slope_pred']:.6f}), "
          f"phi'' = {geo['curvature']:.6f} (pred {geo['curvature_pred']:.6f})")


if __name__ == "__main__":
    main()
