"""Locate the largest b at which the noise figure still dips below shot noise.

The search grid is 2*kappa*l in (0, l_max] at `steps` points.  As the grid
reaches smaller lengths the threshold approaches 1/sqrt(2), where the
small-length limit 4b^2/(1 + 2b^2) - 1 of NF - 1 changes sign.
"""

import argparse
import math

import numpy as np

from qpt_sim.observables import min_excess_noise_figure, squeezing_threshold

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--kappa", type=float, default=0.5)
ap.add_argument("--l-max", type=float, default=12.0, help="largest 2*kappa*l")
ap.add_argument("--steps", type=int, nargs="*", default=[60, 600, 6000])
args = ap.parse_args()

for steps in args.steps:
    x = np.linspace(0.0, args.l_max, steps + 1)[1:]
    lengths = x / (2 * args.kappa)
    b = squeezing_threshold(args.kappa, lengths)
    print(f"steps={steps:6d}  first 2kl={x[0]:.4g}  threshold b={b:.5f}")
print(f"small-length limit 1/sqrt(2) = {1 / math.sqrt(2):.5f}")
for b in (0.55, 0.6, 0.61, 0.66, 0.7):
    x = np.linspace(0.0, args.l_max, 601)[1:]
    print(f"b={b:.2f}  min(NF - 1) on the 600-point grid = {min_excess_noise_figure(b, args.kappa, x / (2 * args.kappa)):+.4f}")
