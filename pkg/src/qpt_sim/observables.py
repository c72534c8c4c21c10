"""Vacuum-input noise observables: quadrature variances, correlations and RISM statistics.

Variances are in vacuum units of 1/4 ([q, p] = i/2).  Every closed form is
evaluated through :func:`qpt_sim.params.continued`, so it covers both PT
phases and the exceptional point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DegenerateFlux, QptError
from .params import PtParams, Trig, continued, params_from_b

VACUUM = 0.25
FLUX_TOL = 1e-12


@dataclass(frozen=True)
class SingleModeVariances:
    qi0: float
    psl: float
    qsl: float
    pi0: float


def _variance_kernel(t: Trig):
    v1 = t.em * t.em * t.se * t.se + t.sbl * t.sbl  # e^{-gl} sin^2 eps + sin^2(beta l)
    v2 = t.ep * t.ep * t.se * t.se + t.sbl * t.sbl
    u2 = 4 * t.sp * t.sp
    u1 = 4 * t.sm * t.sm
    return (v1 / u2, v2 / u2, v1 / u1, v2 / u1)


def single_mode_variances(params: PtParams, l: float) -> SingleModeVariances:
    return SingleModeVariances(*continued(_variance_kernel, params, l))


def two_mode_variances(params: PtParams, l: float) -> tuple[float, float]:
    """(Var d1, Var d2) for d1 = (q_i(0) + q_s(l))/sqrt2 and d2 = (p_i(0) + p_s(l))/sqrt2."""
    v = single_mode_variances(params, l)
    return (v.qi0 + v.qsl) / 2.0, (v.pi0 + v.psl) / 2.0


def _cross_kernel(t: Trig):
    xi = 2 * t.se * t.sbl * math.cosh(0.5 * t.g * t.l)
    return (-xi / (4 * t.sp * t.sp), -xi / (4 * t.sm * t.sm))


def cross_covariances(params: PtParams, l: float) -> tuple[float, float]:
    """(Cov[q_i(0), p_s(l)], Cov[p_i(0), q_s(l)]) at pump phase 0."""
    return continued(_cross_kernel, params, l)


def _correlation_kernel(t: Trig):
    se2, sb2 = t.se * t.se, t.sbl * t.sbl
    root = (se2 * se2 + sb2 * sb2 + 2 * math.cosh(t.g * t.l) * se2 * sb2) ** 0.5
    return (2 * math.cosh(0.5 * t.g * t.l) * t.se * t.sbl / root,)


def correlation_coefficient(params: PtParams, l: float, j: int, m: int, pump_phase: float = 0.0) -> float:
    """|C_jm| between X_j in {q_i(0), p_i(0)} and Y_m in {q_s(l), p_s(l)}.

    At pump phase 0 only the cross pairs (q_i, p_s) and (p_i, q_s) correlate;
    at pi/2 the roles swap.
    """
    if j not in (1, 2) or m not in (1, 2):
        raise ValueError(f"j and m must be 1 or 2, got {j}, {m}")
    if pump_phase == 0:
        correlated = j != m
    elif math.isclose(pump_phase, math.pi / 2):
        correlated = j == m
    else:
        raise ValueError(f"pump_phase must be 0 or pi/2, got {pump_phase!r}")
    (c,) = continued(_correlation_kernel, params, l)
    return abs(c) if correlated else 0.0


@dataclass(frozen=True)
class RismCoefficients:
    A: float
    B: float
    C: float
    D: float
    E: float
    F: float


def _rism_kernel(t: Trig):
    sp, sn = t.sp, -t.sm  # sin(beta l + eps), sin(eps - beta l)
    return (
        t.em * t.se / sp,
        t.ep * t.se / sn,
        -t.sbl / sn,
        -t.sbl / sp,
        t.em * t.se / sn,
        t.ep * t.se / sp,
    )


def rism_coefficients(params: PtParams, l: float) -> RismCoefficients:
    return RismCoefficients(*continued(_rism_kernel, params, l))


@dataclass(frozen=True)
class PhotonNumberStats:
    var_ni: float
    var_ns: float
    covar: float
    mean_ni: float
    mean_ns: float


def photon_number_stats(params: PtParams, l: float) -> PhotonNumberStats:
    r = rism_coefficients(params, l)
    A, B, C, D, E, F = r.A, r.B, r.C, r.D, r.E, r.F
    return PhotonNumberStats(
        var_ni=((A * A + D * D) ** 2 + (B * B + C * C) ** 2 - 2.0) / 8.0,
        var_ns=((F * F + D * D) ** 2 + (E * E + C * C) ** 2 - 2.0) / 8.0,
        covar=((A * D + D * F) ** 2 + (C * E + B * C) ** 2) / 8.0,
        mean_ni=((A - B) ** 2 + (C + D) ** 2) / 4.0,
        mean_ns=((C + D) ** 2 + (E - F) ** 2) / 4.0,
    )


def noise_figure(params: PtParams, l: float) -> float:
    """Var[N_i - N_s] / (<N_i> + <N_s>) from the closed RISM expression.

    Shot-noise-limited light gives 1; intensity-difference squeezing is NF < 1.
    """
    r = rism_coefficients(params, l)
    A, B, C, D, E, F = r.A, r.B, r.C, r.D, r.E, r.F
    den = 2.0 * ((A - B) ** 2 + (E - F) ** 2 + 2.0 * (C + D) ** 2)
    if den / 8.0 < FLUX_TOL:
        raise DegenerateFlux(f"total photon flux {den / 8.0!r} too small at l={l}")
    num = (
        (A * A + D * D) ** 2
        + (B * B + C * C) ** 2
        + (F * F + D * D) ** 2
        + (E * E + C * C) ** 2
        - 4.0
        - 2.0 * D * D * (A + F) ** 2
        - 2.0 * C * C * (E + B) ** 2
    )
    return num / den


def excess_noise_figure(params: PtParams, l: float) -> float:
    """NF - 1: negative exactly when the intensity difference is squeezed below shot noise."""
    return noise_figure(params, l) - 1.0


def noise_figure_from_stats(stats: PhotonNumberStats) -> float:
    flux = stats.mean_ni + stats.mean_ns
    if flux < FLUX_TOL:
        raise DegenerateFlux(f"total photon flux {flux!r} too small")
    return (stats.var_ni + stats.var_ns - 2.0 * stats.covar) / flux


def min_excess_noise_figure(b: float, kappa: float, lengths: Sequence[float]) -> float:
    """Smallest NF - 1 over the given lengths, skipping singular and zero-flux points."""
    p = params_from_b(b, kappa)
    best = math.inf
    for l in lengths:
        try:
            best = min(best, excess_noise_figure(p, l))
        except QptError:
            continue
    return best


def squeezing_threshold(kappa: float, lengths: Sequence[float], lo: float = 0.0, hi: float = 0.99, xtol: float = 1e-6) -> float:
    """Largest b in [lo, hi] for which NF dips below 1 somewhere on ``lengths``.

    Bisects on the sign of :func:`min_excess_noise_figure`; assumes squeezing
    at ``lo`` and none at ``hi``.
    """
    f = lambda b: min_excess_noise_figure(b, kappa, lengths)
    if not (f(lo) < 0.0 <= f(hi)):
        raise ValueError(f"no squeezing threshold bracketed by b in [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0.0 else (lo, mid)
    return 0.5 * (lo + hi)
