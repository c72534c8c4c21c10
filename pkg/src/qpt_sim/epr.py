"""EPR criteria on generalized quadratures, the output covariance matrix and log negativity.

Generalized quadratures use an idler local-oscillator angle ``theta`` and a
signal angle ``lo_phase_s``:

    X1 = q_i cos(theta) + p_i sin(theta),   X2 = -q_i sin(theta) + p_i cos(theta)
    Y1 = q_s cos(phi)   + p_s sin(phi),     Y2 = -q_s sin(phi)   + p_s cos(phi)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import NegativeDiscriminant
from .observables import cross_covariances, single_mode_variances
from .params import PtParams, Trig, continued

STRONG = 0.5
WEAK = 1.0
DISCRIMINANT_TOL = 1e-12
ETA_DIGITS = 40
# covariance entries that vanish at pump phase 0: the same-type cross terms
# and the in-mode q-p correlations
_OFF_PATTERN = (np.array([0, 0, 1, 1, 2, 3, 2, 3]), np.array([1, 2, 0, 3, 3, 2, 0, 1]))


@dataclass(frozen=True)
class EprAngles:
    theta: float = 0.0
    lo_phase_s: float = 0.0

    @property
    def total(self) -> float:
        return self.theta + self.lo_phase_s

    def reduced(self) -> "EprAngles":
        tau = 2.0 * math.pi
        return EprAngles(self.theta % tau, self.lo_phase_s % tau)


@dataclass(frozen=True)
class EprResult:
    et1: float
    et2: float

    @property
    def strong1(self) -> bool:
        return self.et1 < STRONG

    @property
    def strong2(self) -> bool:
        return self.et2 < STRONG

    @property
    def weak1(self) -> bool:
        return self.et1 < WEAK

    @property
    def weak2(self) -> bool:
        return self.et2 < WEAK

    @staticmethod
    def classify(value: float) -> str:
        if value < STRONG:
            return "strong"
        return "weak" if value < WEAK else "none"


def _coefficients(t: Trig):
    xi = 2 * t.se * t.sbl * math.cosh(0.5 * t.g * t.l)
    u1, u2 = t.sm * t.sm, t.sp * t.sp
    v1 = t.em * t.em * t.se * t.se + t.sbl * t.sbl
    v2 = t.ep * t.ep * t.se * t.se + t.sbl * t.sbl
    return xi, u1, u2, v1, v2


def _sum_variance_kernel(t: Trig, theta: float, phi: float):
    xi, u1, u2, v1, v2 = _coefficients(t)
    ct, st, cp, sp = math.cos(theta), math.sin(theta), math.cos(phi), math.sin(phi)
    norm = 4 * u1 * u2
    base1 = v1 * (u1 * ct * ct + u2 * cp * cp) + v2 * (u2 * st * st + u1 * sp * sp)
    base2 = v1 * (u1 * st * st + u2 * sp * sp) + v2 * (u2 * ct * ct + u1 * cp * cp)
    cross1 = 2 * xi * (u1 * sp * ct + u2 * cp * st)
    cross2 = 2 * xi * (u1 * cp * st + u2 * sp * ct)
    return ((base1 + cross1) / norm, (base2 + cross2) / norm, (base1 - cross1) / norm, (base2 - cross2) / norm)


def epr_sum_variances(params: PtParams, l: float, angles: EprAngles) -> tuple[float, float, float, float]:
    """(Var[X1 - Y1], Var[X2 + Y2], Var[X1 + Y1], Var[X2 - Y2])."""
    return continued(_sum_variance_kernel, params, l, angles.theta, angles.lo_phase_s)


def _et_kernel(t: Trig, s: float):
    xi, u1, u2, _, _ = _coefficients(t)
    base = math.cosh(t.g * t.l) * t.se * t.se + t.sbl * t.sbl
    den = 2 * u1 * u2
    # numerator and denominator round identically at l = 0, so ET = 1 exactly there
    return ((u1 + u2) * (base + xi * s) / den, (u1 + u2) * (base - xi * s) / den)


def epr_criteria(params: PtParams, l: float, angles: EprAngles) -> EprResult:
    """ET1 = Var[X1 - Y1] + Var[X2 + Y2] and ET2 = Var[X1 + Y1] + Var[X2 - Y2]."""
    et1, et2 = continued(_et_kernel, params, l, math.sin(angles.total))
    return EprResult(et1, et2)


def et_exceptional_point(kappa: float, l: float, angles: EprAngles) -> EprResult:
    """ET1, ET2 from their reduced expressions at b = 1."""
    kl = kappa * l
    s = math.sin(angles.total)
    pre = math.exp(-2.0 * kl) * (kl * kl + 1.0) / (2.0 * (kl * kl - 1.0) ** 2)
    base = 1.0 + math.exp(4.0 * kl) + 2.0 * kl * kl * math.exp(2.0 * kl)
    cross = 2.0 * kl * math.exp(kl) * (math.exp(2.0 * kl) + 1.0) * s
    return EprResult(pre * (base + cross), pre * (base - cross))


def _optimal_kernel(t: Trig):
    a = t.em * t.se - t.sbl
    c = t.ep * t.se - t.sbl
    sm2, sp2 = t.sm * t.sm, t.sp * t.sp
    value = (sm2 + sp2) * (a * a + c * c) / (4 * sm2 * sp2)
    root = a / (2 * t.sm) + c / (2 * t.sp)
    return (value, root * root)


def epr_optimal(params: PtParams, l: float) -> tuple[float, float]:
    """(ET1 at theta + phi = 3pi/2, its Cauchy-Schwarz lower bound)."""
    return continued(_optimal_kernel, params, l)


def _equality_kernel(t: Trig):
    return ((t.ep * t.se - t.sbl) * t.sp - (t.em * t.se - t.sbl) * t.sm,)


def optimal_equality_residual(params: PtParams, l: float) -> float:
    """Zero exactly where the Cauchy-Schwarz bound on the optimal ET is attained."""
    return continued(_equality_kernel, params, l)[0]


@dataclass(frozen=True)
class QuadCovariance:
    """Output state over (q_i(0), p_i(0), q_s(l), p_s(l))."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.cov[:2, :2], self.cov[2:, 2:], self.cov[:2, 2:]


def covariance_matrix(params: PtParams, l: float) -> QuadCovariance:
    v = single_mode_variances(params, l)
    c_qp, c_pq = cross_covariances(params, l)
    cov = np.array(
        [
            [v.qi0, 0.0, 0.0, c_qp],
            [0.0, v.pi0, c_pq, 0.0],
            [0.0, c_pq, v.qsl, 0.0],
            [c_qp, 0.0, 0.0, v.psl],
        ]
    )
    return QuadCovariance(mean=np.zeros(4), cov=cov)


def eta_from_covariance(q: QuadCovariance) -> float:
    """Smallest partially transposed symplectic eigenvalue from Sigma and det V."""
    v = q.cov
    if not np.any(v[_OFF_PATTERN]):
        # (q_i, p_s) and (p_i, q_s) decouple.  Expanding Sigma^2 - 4 det V by hand
        # leaves no O(1) cancellation, so disc stays exact where the cross terms
        # vanish (the E_N valleys) instead of carrying sqrt(eps) noise.
        qi, pi, qs, ps, c, d = v[0, 0], v[1, 1], v[2, 2], v[3, 3], v[0, 3], v[1, 2]
        x, y = qi * pi, qs * ps
        sigma = float(x + y + 2.0 * c * d)
        det = float((qi * ps - c * c) * (pi * qs - d * d))
        disc = float((x - y) ** 2 + 4.0 * (x + y) * c * d + 4.0 * (qi * ps * d * d + pi * qs * c * c))
    else:
        a, b, c = q.blocks
        sigma = np.linalg.det(a) + np.linalg.det(b) - 2.0 * np.linalg.det(c)
        det = float(np.linalg.det(v))
        disc = sigma * sigma - 4.0 * det
    if disc < -DISCRIMINANT_TOL * max(1.0, sigma * sigma):
        raise NegativeDiscriminant(f"Sigma^2 - 4 det V = {disc!r}")
    # (Sigma - sqrt(disc))/2 rewritten without the subtraction
    return math.sqrt(2.0 * det / (sigma + math.sqrt(max(disc, 0.0))))


def eta_covariance(params: PtParams, l: float) -> float:
    return eta_from_covariance(covariance_matrix(params, l))


def _eta_kernel(t: Trig):
    # The numerator cancels to fourth order near beta*l = pi/2 + n*pi, which
    # double precision cannot resolve; evaluate in 40 digits from (g, kappa, l).
    with mpmath.workdps(ETA_DIGITS):
        g, k, l = mpmath.mpf(t.g), mpmath.mpf(t.kappa), mpmath.mpf(t.l)
        b = g / (2 * k)
        b2 = k * k * (1 - b) * (1 + b)  # beta^2; the expression is even in beta
        beta = mpmath.sqrt(mpmath.mpc(b2))
        s2 = mpmath.sin(beta * l) ** 2
        c2 = mpmath.cos(beta * l) ** 2
        ch, chh = mpmath.cosh(g * l), mpmath.cosh(g * l / 2)
        inner = mpmath.sqrt(b2 * s2 * (2 * b2 * k * k * s2 * ch + k**4 * s2 * s2 + b2 * b2))
        num = (b2 + k * k * s2) ** 2 + 4 * (b2 * k * k * s2 * ch - k * chh * inner)
        den = g * g - 4 * k * k * c2
        return (complex(mpmath.sqrt(num) / abs(den)),)


def eta_closed(params: PtParams, l: float) -> float:
    return continued(_eta_kernel, params, l)[0]


def eta_exceptional_point(kappa: float, l: float) -> float:
    kl = kappa * l
    root = math.sqrt(1.0 + kl**4 + 2.0 * kl * kl * math.cosh(2.0 * kl))
    num = (kl * kl + 1.0) ** 2 + 4.0 * (kl * kl * math.cosh(2.0 * kl) - kl * math.cosh(kl) * root)
    return math.sqrt(num / (16.0 * (kl * kl - 1.0) ** 2))


def log_negativity(params: PtParams, l: float) -> float:
    """E_N = max(0, -ln 4 eta)."""
    return max(0.0, -math.log(4.0 * eta_covariance(params, l)))
