"""Collide two mirrored packets and fit both cusps at the first crossing.

    python3 scripts/type3_collision.py --h 0.0055
"""
import argparse

from vwave.asymptotics import predict_type3, verify_type3
from vwave.charsolver import integrate_goursat
from vwave.config import preset
from vwave.singular import find_type3_points


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.0055)
    ap.add_argument("--s-max", type=float, default=0.08)
    a = ap.parse_args()
    cfg = preset("collision", h=a.h)
    print("initial data:", cfg.initial_data)
    G = integrate_goursat(cfg.trace(), cfg.model())
    pts = find_type3_points(G)
    if not pts:
        raise SystemExit("no crossing of a w- and a z-curve in the window")
    for sp in pts:
        print(f"crossing at (x, t) = ({sp.xt[0]:.5f}, {sp.xt[1]:.5f}) type {sp.type}")
    sp = pts[0]
    r = verify_type3(G, sp, predict_type3(sp, G.model), s_max=a.s_max)
    for k, v in r.items():
        print(f"{k}: exponent {v['fitted_exponent']:.4f} (target 2/3), coefficient "
              f"{v['fitted_coefficient']:.5g} vs {v['predicted_coefficient']:.5g} "
              f"(rel. error {v['coefficient_rel_error']:.3f})")


if __name__ == "__main__":
    main()
