"""Coherent-seed sensing of the coupling kappa: susceptibilities, inverse variances and QFI.

Seed convention: every input quadrature carries mean ``alpha``,
<q_i(l)> = <p_i(l)> = <q_s(0)> = <p_s(0)> = alpha (see the README for the
derivation from the complex seed amplitudes).  Coherent seeding displaces the
state without changing any variance.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from .epr import covariance_matrix
from .errors import IllConditioned, NonFinite
from .observables import single_mode_variances
from .params import PtParams, Trig, continued, make_params

FD_STEP = 1e-6
COND_MAX = 1e12
# (q_i, p_i, q_s, p_s) -> (q_i, q_s, p_i, p_s)
QFI_ORDER = [0, 2, 1, 3]


@dataclass(frozen=True)
class CoherentSeed:
    alpha: float

    def __post_init__(self):
        if not math.isfinite(self.alpha):
            raise NonFinite(f"alpha={self.alpha!r}")
        if self.alpha < 0.0:
            raise ValueError(f"alpha must be >= 0, got {self.alpha!r}")


class SensingObservable(enum.Enum):
    QI0 = "qi0"
    PI0 = "pi0"
    QSL = "qsl"
    PSL = "psl"
    D1 = "d1"
    D2 = "d2"


@dataclass(frozen=True)
class SensingReport:
    chi: float
    variance: float
    inv_var: float
    qfi: float
    ratio: float


def _mean_kernel(t: Trig, alpha: float):
    sn = -t.sm  # sin(eps - beta l)
    a = t.em * t.se - t.sbl
    c = t.ep * t.se - t.sbl
    return (alpha * a / t.sp, alpha * c / sn, alpha * a / sn, alpha * c / t.sp)


def mean_quadratures(params: PtParams, l: float, seed: CoherentSeed) -> tuple[float, float, float, float]:
    """(<q_i(0)>, <p_i(0)>, <q_s(l)>, <p_s(l)>)."""
    return continued(_mean_kernel, params, l, seed.alpha)


def _chi_kernel(t: Trig, alpha: float):
    beta, eps = t.beta, t.eps
    g, k, l = t.g, t.kappa, t.l
    bl = beta * l
    ce, se = t.ce, t.se
    cbl, sbl = t.cbl, t.sbl
    s2p = cmath.sin(2 * bl + eps)
    s2m = cmath.sin(2 * bl - eps)

    def active(e):
        return e * sbl * (2 * k * l + (2 - g * l) * ce) - 2 * bl * e * ce * cbl - se * (2 * k * l + ce) + ce * s2p

    def passive(e):
        return 2 * bl * e * ce * cbl - e * sbl * ((2 + g * l) * ce - 2 * k * l) + se * (ce - 2 * k * l) + ce * s2m

    da = 2 * beta * t.sp * t.sp
    dp = 2 * beta * t.sm * t.sm
    return (
        alpha * active(t.em) / da,
        alpha * passive(t.ep) / dp,
        alpha * passive(t.em) / dp,
        alpha * active(t.ep) / da,
    )


def susceptibilities(params: PtParams, l: float, seed: CoherentSeed) -> dict[SensingObservable, float]:
    """d<obs>/d kappa at fixed g, l and alpha for all six observables."""
    if l == 0:
        # identity transfer for every kappa; near the EP the kernel would
        # otherwise return roundoff amplified by 1/beta^3
        qi = pi = qs = ps = 0.0
    else:
        qi, pi, qs, ps = continued(_chi_kernel, params, l, seed.alpha)
    r2 = math.sqrt(2.0)
    return {
        SensingObservable.QI0: qi,
        SensingObservable.PI0: pi,
        SensingObservable.QSL: qs,
        SensingObservable.PSL: ps,
        SensingObservable.D1: (qi + qs) / r2,
        SensingObservable.D2: (pi + ps) / r2,
    }


def susceptibility(params: PtParams, l: float, seed: CoherentSeed, obs: SensingObservable) -> float:
    return susceptibilities(params, l, seed)[obs]


def observable_variance(params: PtParams, l: float, obs: SensingObservable) -> float:
    v = single_mode_variances(params, l)
    return {
        SensingObservable.QI0: v.qi0,
        SensingObservable.PI0: v.pi0,
        SensingObservable.QSL: v.qsl,
        SensingObservable.PSL: v.psl,
        SensingObservable.D1: (v.qi0 + v.qsl) / 2.0,
        SensingObservable.D2: (v.pi0 + v.psl) / 2.0,
    }[obs]


def inverse_variance(params: PtParams, l: float, seed: CoherentSeed, obs: SensingObservable) -> float:
    """Delta kappa^-2 = chi^2 / Var for a single homodyne observable."""
    chi = susceptibility(params, l, seed, obs)
    return chi * chi / observable_variance(params, l, obs)


def _qfi_kernel(t: Trig, alpha: float):
    g, k, l, beta = t.g, t.kappa, t.l, t.beta
    bl = beta * l
    s, c = t.sbl, t.cbl
    a = g * g * s - 4 * k * k * bl * c
    w = cmath.sin(2 * bl) - 2 * bl
    den = beta * beta * (g * g - 4 * k * k * c * c) ** 2
    ch = math.cosh(g * l)
    vac = 4 * ((ch + 1) * a * a + 2 * g * g * k * k * w * w) / den
    coh = 16 * alpha * alpha * (ch * a * a + g * g * k * k * w * w) / den
    return (vac + coh,)


def qfi_closed(params: PtParams, l: float, seed: CoherentSeed) -> float:
    """F_kappa from its closed form, including the alpha-independent part.

    g^2 - 4 kappa^2 cos^2(beta l) = 4 kappa^2 sin(beta l + eps) sin(beta l - eps),
    so the divergences coincide with the transfer-matrix singular lengths.
    """
    return continued(_qfi_kernel, params, l, seed.alpha)[0]


def qfi_near_ep(kappa: float, l: float, seed: CoherentSeed) -> float:
    """Reduced F_kappa for g -> 2 kappa."""
    kl2 = (kappa * l) ** 2
    ch = math.cosh(2.0 * kappa * l)
    vac = 4.0 * l * l * (9.0 * kl2 * kl2 - 6.0 * kl2 + 9.0 + (kl2 - 3.0) ** 2 * ch)
    coh = 16.0 * seed.alpha**2 * l * l * (4.0 * kl2 * kl2 + (kl2 - 3.0) ** 2 * ch)
    return (vac + coh) / (9.0 * (kl2 - 1.0) ** 2)


def _state(g: float, kappa: float, l: float, seed: CoherentSeed) -> tuple[np.ndarray, np.ndarray]:
    p = make_params(g, kappa)
    cov = covariance_matrix(p, l).cov[np.ix_(QFI_ORDER, QFI_ORDER)]
    mean = np.asarray(mean_quadratures(p, l, seed))[QFI_ORDER]
    return mean, cov


def qfi_covariance(params: PtParams, l: float, seed: CoherentSeed, step: float = FD_STEP) -> float:
    """F = (1/2) Tr(V^-1 V' V^-1 V') + mu'^T V^-1 mu' over (q_i(0), q_s(l), p_i(0), p_s(l)).

    Derivatives in kappa (g fixed) are Richardson-refined central differences.
    """
    g, k = params.g, params.kappa
    h = step * k
    mean, cov = _state(g, k, l, seed)
    cond = np.linalg.cond(cov)
    if not np.isfinite(cond) or cond > COND_MAX:
        raise IllConditioned(f"covariance condition number {cond:.3g} at l={l}")
    states = {d: _state(g, k + d, l, seed) for d in (-h, -h / 2, h / 2, h)}

    def deriv(idx):
        d_full = (states[h][idx] - states[-h][idx]) / (2.0 * h)
        d_half = (states[h / 2][idx] - states[-h / 2][idx]) / h
        return (4.0 * d_half - d_full) / 3.0

    dmu, dv = deriv(0), deriv(1)
    vinv = np.linalg.inv(cov)
    m = vinv @ dv
    return 0.5 * float(np.trace(m @ m)) + float(dmu @ vinv @ dmu)


def crlb_report(params: PtParams, l: float, seed: CoherentSeed, obs: SensingObservable) -> SensingReport:
    chi = susceptibility(params, l, seed, obs)
    var = observable_variance(params, l, obs)
    inv = chi * chi / var
    qfi = qfi_closed(params, l, seed)
    ratio = inv / qfi if qfi > 0.0 else 0.0
    return SensingReport(chi=chi, variance=var, inv_var=inv, qfi=qfi, ratio=ratio)
