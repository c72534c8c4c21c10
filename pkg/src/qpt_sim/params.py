"""System constants, derived PT quantities and the analytic-continuation rule.

All closed forms downstream are written in terms of beta and epsilon and are
evaluated in complex arithmetic, so one expression covers both the unbroken
(b < 1, beta real) and broken (b > 1, beta imaginary) phases.  Inside a thin
band around the exceptional point the generic expressions are 0/0; there the
value is the cubic interpolant through evaluations at b = 1 -/+ EP_STEP and
1 -/+ EP_STEP/2, read off at the actual b.  At b = 1 exactly this is the
Richardson combination (4 mean(h/2) - mean(h))/3 of the symmetric means.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    InternalConsistency,
    NegativeGain,
    NegativeLength,
    NonFinite,
    NonPositiveKappa,
    PhaseError,
    SingularLength,
)

EP_TOL = 1e-6
EP_STEP = 1e-5
SING_TOL = 1e-9
REAL_TOL = 1e-9


class PtPhase(enum.Enum):
    UNBROKEN = "unbroken"
    EXCEPTIONAL_POINT = "exceptional_point"
    BROKEN = "broken"


def classify(b: float) -> PtPhase:
    if abs(b - 1.0) <= EP_TOL:
        return PtPhase.EXCEPTIONAL_POINT
    return PtPhase.UNBROKEN if b < 1.0 else PtPhase.BROKEN


@dataclass(frozen=True)
class PtParams:
    """PSA gain ``g`` and FWM coupling ``kappa`` (both per unit length).

    ``beta`` is the eigen-propagation constant kappa*sqrt(1 - b^2) with the
    +i branch above the exceptional point, ``epsilon`` = arctan(2 beta / g).
    """

    g: float
    kappa: float
    b: float
    beta: complex
    epsilon: complex
    phase: PtPhase

    @property
    def is_ep(self) -> bool:
        return self.phase is PtPhase.EXCEPTIONAL_POINT


def make_params(g: float, kappa: float) -> PtParams:
    g = float(g)
    kappa = float(kappa)
    if not (math.isfinite(g) and math.isfinite(kappa)):
        raise NonFinite(f"g={g!r}, kappa={kappa!r}")
    if kappa <= 0.0:
        raise NonPositiveKappa(f"kappa must be > 0, got {kappa!r}")
    if g < 0.0:
        raise NegativeGain(f"g must be >= 0, got {g!r}")
    b = g / (2.0 * kappa)
    if b < 1.0:
        root = math.sqrt((1.0 - b) * (1.0 + b))
        beta = complex(kappa * root, 0.0)
        # atan2 keeps epsilon = pi/2 exactly at g = 0
        epsilon = complex(math.atan2(2.0 * beta.real, g), 0.0)
    elif b > 1.0:
        root = math.sqrt((b - 1.0) * (b + 1.0))
        beta = complex(0.0, kappa * root)
        epsilon = complex(0.0, math.log(b + root))
    else:
        beta = 0j
        epsilon = 0j
    return PtParams(g=g, kappa=kappa, b=b, beta=beta, epsilon=epsilon, phase=classify(b))


def params_from_b(b: float, kappa: float) -> PtParams:
    return make_params(2.0 * float(b) * float(kappa), kappa)


def period_T(params: PtParams) -> float:
    """Oscillation period 2*pi*kappa/beta, in units of 2*kappa*l."""
    if params.phase is not PtPhase.UNBROKEN:
        raise PhaseError(f"period undefined for b={params.b} (needs b < 1)")
    return 2.0 * math.pi * params.kappa / params.beta.real


def ep_neighbours(params: PtParams, step: float = EP_STEP) -> tuple[PtParams, PtParams]:
    k = params.kappa
    return params_from_b(1.0 - step, k), params_from_b(1.0 + step, k)


_I = np.clongdouble(1j)


@dataclass(frozen=True)
class Trig:
    """Trigonometric building blocks shared by every closed form at one (params, l)."""

    g: float
    kappa: float
    l: float
    beta: complex
    eps: complex
    sbl: np.clongdouble  # sin(beta l)
    cbl: np.clongdouble  # cos(beta l)
    se: np.clongdouble  # sin(eps)
    ce: np.clongdouble  # cos(eps)
    sp: np.clongdouble  # sin(beta l + eps)
    sm: np.clongdouble  # sin(beta l - eps)
    em: np.longdouble  # exp(-g l / 2)
    ep: np.longdouble  # exp(+g l / 2)


def trig(params: PtParams, l: float) -> Trig:
    """Build the sines in long double and keep them there.

    Near a singular length the sine of beta*l -/+ epsilon is a small
    difference of O(1) numbers and the closed forms grow like its inverse
    square; carrying the extra bits through the kernels lets the final
    rounding in ``realize`` be the only float64 rounding.
    """
    g = np.longdouble(params.g)
    k = np.longdouble(params.kappa)
    ll = np.longdouble(l)
    b = g / (2 * k)
    if b < 1:
        beta = k * np.sqrt((1 - b) * (1 + b))
        eps = np.arctan2(2 * beta, g)
        bl = beta * ll
        parts = (np.sin(bl), np.cos(bl), np.sin(eps), np.cos(eps), np.sin(bl + eps), np.sin(bl - eps))
        sbl, cbl, se, ce, sp, sm = (np.clongdouble(v) for v in parts)
    elif b > 1:
        root = np.sqrt((b - 1) * (b + 1))
        x = k * root * ll
        e = np.log(b + root)
        # sin(i y) = i sinh(y), cos(i y) = cosh(y)
        sbl, se, sp, sm = (_I * np.sinh(v) for v in (x, e, x + e, x - e))
        cbl, ce = np.clongdouble(np.cosh(x)), np.clongdouble(np.cosh(e))
    else:
        zero, one = np.clongdouble(0), np.clongdouble(1)
        sbl, cbl, se, ce, sp, sm = zero, one, zero, one, zero, zero
    half = g * ll / 2
    return Trig(
        g=params.g,
        kappa=params.kappa,
        l=l,
        beta=params.beta,
        eps=params.epsilon,
        sbl=sbl,
        cbl=cbl,
        se=se,
        ce=ce,
        sp=sp,
        sm=sm,
        em=np.exp(-half),
        ep=np.exp(half),
    )


def check_length(l: float) -> float:
    l = float(l)
    if not math.isfinite(l):
        raise NonFinite(f"l={l!r}")
    if l < 0.0:
        raise NegativeLength(f"l must be >= 0, got {l!r}")
    return l


def _check_singular(params: PtParams, t: Trig | None, l: float, active: bool, passive: bool) -> None:
    if params.is_ep:
        # limits of sin(beta l +/- eps)/sin(eps) at b = 1 are kappa*l +/- 1
        kl = params.kappa * l
        if active and abs(kl + 1.0) <= SING_TOL:
            raise SingularLength(f"active pair diverges at kappa*l={kl}")
        if passive and abs(kl - 1.0) <= SING_TOL:
            raise SingularLength(f"passive pair diverges at kappa*l={kl} (b=1)")
        return
    if active and abs(t.sp / t.se) <= SING_TOL:
        raise SingularLength(f"|sin(beta l + eps)| vanishes at l={l}, b={params.b}")
    if passive and abs(t.sm / t.se) <= SING_TOL:
        raise SingularLength(f"|sin(beta l - eps)| vanishes at l={l}, b={params.b}")


def realize(z: complex) -> float:
    if abs(z.imag) > REAL_TOL * (1.0 + abs(z.real)):
        raise InternalConsistency(f"closed form left imaginary part {z.imag!r} (real {z.real!r})")
    return z.real


def _lagrange_weights(nodes: Sequence[float], x: float) -> list[float]:
    weights = []
    for j, xj in enumerate(nodes):
        w = 1.0
        for m, xm in enumerate(nodes):
            if m != j:
                w *= (x - xm) / (xj - xm)
        weights.append(w)
    return weights


def continued(
    kernel: Callable[..., Sequence[complex]],
    params: PtParams,
    l: float,
    *args,
    active: bool = True,
    passive: bool = True,
) -> tuple[float, ...]:
    """Evaluate a complex-valued closed-form ``kernel(Trig, *args)`` and realize it.

    ``active``/``passive`` select which denominators the kernel divides by, so
    that only the relevant singular lengths raise.
    """
    l = check_length(l)
    t = None if params.is_ep else trig(params, l)
    _check_singular(params, t, l, active, passive)
    if params.is_ep:
        nodes = (-EP_STEP, -0.5 * EP_STEP, 0.5 * EP_STEP, EP_STEP)
        samples = [kernel(trig(params_from_b(1.0 + d, params.kappa), l), *args) for d in nodes]
        weights = _lagrange_weights(nodes, params.b - 1.0)
        values = []
        for i in range(len(samples[0])):
            column = [f[i] for f in samples]
            # b-independent entries (every l = 0 value) must come through exactly
            same = all(v == column[0] for v in column)
            values.append(column[0] if same else sum(w * v for w, v in zip(weights, column)))
    else:
        values = kernel(t, *args)
    return tuple(realize(complex(v)) for v in values)
