"""Inspect the stated optimal-accuracy condition for the d1 measurement.

The condition 4 n pi exp(-n g pi / beta) = beta / kappa picks, for each n, a
gain ratio b at which Delta kappa^-2 of d1 should reach its bound
Delta kappa^-2(q_i(0)) + Delta kappa^-2(q_s(l)) at 2 kappa l = n T.  This
script solves the condition and prints both sides there and at neighbouring
b; it reports numbers and asserts nothing.
"""

import argparse
import math

from scipy.optimize import brentq

from qpt_sim.errors import QptError
from qpt_sim.params import params_from_b, period_T
from qpt_sim.sensing import CoherentSeed, SensingObservable, inverse_variance


def condition(b: float, n: int) -> float:
    root = math.sqrt(1 - b * b)  # beta / kappa
    return 4 * n * math.pi * math.exp(-2 * n * math.pi * b / root) - root


def gap(b: float, n: int, kappa: float, seed: CoherentSeed) -> tuple[float, float]:
    p = params_from_b(b, kappa)
    l = n * period_T(p) / (2 * kappa)
    d1 = inverse_variance(p, l, seed, SensingObservable.D1)
    bound = inverse_variance(p, l, seed, SensingObservable.QI0) + inverse_variance(p, l, seed, SensingObservable.QSL)
    return d1, bound


ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--kappa", type=float, default=0.5)
ap.add_argument("--alpha", type=float, default=10.0)
ap.add_argument("--n", type=int, nargs="*", default=[1, 2, 3])
args = ap.parse_args()
seed = CoherentSeed(args.alpha)

for n in args.n:
    b_star = brentq(condition, 1e-9, 0.999, args=(n,))
    print(f"n={n}: condition solved at b={b_star:.6f}")
    for b in (0.5 * b_star, b_star, 1.5 * b_star):
        try:
            d1, bound = gap(b, n, args.kappa, seed)
        except QptError as exc:
            print(f"    b={b:.6f}  {type(exc).__name__}")
            continue
        print(f"    b={b:.6f}  d1={d1:.6e}  qi0+qsl={bound:.6e}  d1/bound={d1 / bound:.6f}")
