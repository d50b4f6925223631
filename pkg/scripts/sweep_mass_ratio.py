#!/usr/bin/env python3
"""Sweep the mass ratio: critical binding energy, mass left on the heavy
body at annihilation, and where the numerical trajectory stops.

    python3 scripts/sweep_mass_ratio.py --s-max 1e4 --points 25
"""

import argparse
import math

import numpy as np

from infall.binding import TwoBodyConfig, critical_binding_energy, solve_state
from infall.dynamics import solve_general


def one(s):
    cfg = TwoBodyConfig(s=s)
    ec = critical_binding_energy(cfg)
    res = solve_general(cfg, [0.5 * ec])
    st = res.solver_stats
    return ec, solve_state(ec, cfg).m2, st.terminal_r, st.steps, st.stop_reason


def main():
    ap = argparse.ArgumentParser(description="mass-ratio sweep")
    ap.add_argument("--s-max", type=float, default=1e4)
    ap.add_argument("--points", type=int, default=25)
    args = ap.parse_args()
    print(f"{'s':>12} {'E_c':>12} {'m2(E_c)':>12} {'sqrt(s^2-1)':>12} {'r_stop':>12} {'steps':>6}  stop")
    for s in np.geomspace(1.0, args.s_max, args.points):
        ec, m2c, r_stop, steps, why = one(float(s))
        print(f"{s:12.5g} {ec:12.8f} {m2c:12.6g} {math.sqrt(s * s - 1):12.6g} {r_stop:12.4e} {steps:6d}  {why}")


if __name__ == "__main__":
    main()
