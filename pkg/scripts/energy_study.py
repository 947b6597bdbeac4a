"""Energy of conservative and dissipative runs at two resolutions.

    python3 scripts/energy_study.py --h 0.016 --out energy.csv
"""
import argparse

import numpy as np

from vwave.charsolver import integrate_goursat
from vwave.config import preset
from vwave.io import write_csv
from vwave.physmap import energy_series
from vwave.singular import find_first_singularity


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--h", type=float, default=0.016)
    ap.add_argument("--samples", type=int, default=41)
    ap.add_argument("--out", default=None, help="optional CSV of E(tau)")
    a = ap.parse_args()
    cols, data = ["tau"], []
    taus = None
    for h in (a.h, a.h / 2):
        cfg = preset("energy", h=h)
        tr, model = cfg.trace(), cfg.model()
        for mode in ("conservative", "dissipative"):
            G = integrate_goursat(tr, model, mode)
            if taus is None:
                taus = np.linspace(0, cfg.T, a.samples)
                data.append(taus)
                t0 = find_first_singularity(G, "w").state0.t
                print(f"first blowup at t0 = {t0:.5f}")
            E = np.asarray(energy_series(G, taus))
            cols.append(f"E_{mode}_h{h:g}")
            data.append(E)
            print(f"{mode:<13} h = {h:<7g} E0 = {E[0]:.6f}  max |E - E0|/E0 = "
                  f"{np.max(np.abs(E - E[0])) / E[0]:.3e}  E(T)/E0 = {E[-1] / E[0]:.4f}")
    if a.out:
        write_csv(a.out, cols, data)


if __name__ == "__main__":
    main()
