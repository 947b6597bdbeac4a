"""Bisect a packet amplitude until the first blowup lands inside the window.

    python3 scripts/hunt_blowup.py --preset blowup --lo 0.3 --hi 1.2
"""
import argparse
import json

from vwave.cli import hunt_blowup
from vwave.config import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="blowup")
    ap.add_argument("--lo", type=float, default=0.3)
    ap.add_argument("--hi", type=float, default=1.2)
    ap.add_argument("--h", type=float, default=0.02, help="step used while hunting")
    ap.add_argument("--steps", type=int, default=20)
    a = ap.parse_args()
    r = hunt_blowup(preset(a.preset), a.lo, a.hi, h=a.h, max_steps=a.steps)
    for e in r.history:
        print(f"A = {e['amplitude']:.6f}  t0 = {e['t0'] if e['t0'] is not None else '-'}")
    print(json.dumps({"amplitude": r.amplitude, "t0": r.t0, "steps": r.steps,
                      "converged": r.converged}, indent=2))


if __name__ == "__main__":
    main()
