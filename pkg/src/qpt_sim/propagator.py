"""Boundary-value transfer matrices for the coupled quadrature pairs.

The idler travels backward (its input port sits at z = l), the signal forward
(input at z = 0).  For a pair ``(x1, x2)`` obeying ``d/dz x = G x`` with x1 the
idler quadrature, a transfer matrix maps the input ports ``(x1(l), x2(0))`` to
the output ports ``(x1(0), x2(l))``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .params import PtParams, Trig, continued

PUMP_PHASES = (0.0, math.pi / 2)


class QuadPair(enum.Enum):
    QI_PS = "qi_ps"
    PI_QS = "pi_qs"
    QI_QS_PHI90 = "qi_qs_phi90"
    PI_PS_PHI90 = "pi_ps_phi90"

    @property
    def is_active(self) -> bool:
        return self in (QuadPair.QI_PS, QuadPair.QI_QS_PHI90)

    @property
    def pump_phase(self) -> float:
        return 0.0 if self in (QuadPair.QI_PS, QuadPair.PI_QS) else math.pi / 2

    @property
    def quadratures(self) -> tuple[str, str]:
        return {
            QuadPair.QI_PS: ("qi", "ps"),
            QuadPair.PI_QS: ("pi", "qs"),
            QuadPair.QI_QS_PHI90: ("qi", "qs"),
            QuadPair.PI_PS_PHI90: ("pi", "ps"),
        }[self]


def pairs_for(pump_phase: float) -> tuple[QuadPair, QuadPair]:
    """(active, passive) pairs for a pump phase of 0 or pi/2."""
    if pump_phase == 0:
        return QuadPair.QI_PS, QuadPair.PI_QS
    if math.isclose(pump_phase, math.pi / 2):
        return QuadPair.QI_QS_PHI90, QuadPair.PI_PS_PHI90
    raise ValueError(f"pump_phase must be 0 or pi/2, got {pump_phase!r}")


@dataclass(frozen=True)
class TransferMatrix2:
    m11: float
    m12: float
    m21: float
    m22: float
    pair: QuadPair
    l: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21


def forward_generator(params: PtParams, pair: QuadPair) -> np.ndarray:
    g, k = params.g, params.kappa
    if pair is QuadPair.QI_PS or pair is QuadPair.QI_QS_PHI90:
        return np.array([[g, k], [-k, 0.0]])
    if pair is QuadPair.PI_QS:
        return np.array([[-g, k], [-k, 0.0]])
    return np.array([[-g, -k], [k, 0.0]])


def effective_hamiltonian(params: PtParams, pair: QuadPair) -> np.ndarray:
    """Traceless non-Hermitian generator H with ``d/dz x = -i (H + shift) x``.

    The full matrix is i*G; the +/- i g/2 identity gauge is removed.
    """
    full = 1j * forward_generator(params, pair)
    return full - 0.5 * np.trace(full) * np.eye(2)


def _active_parts(t: Trig):
    # q_i(0) = [e^{-gl/2} sin eps x1(l) - sin(beta l) x2(0)] / sin(beta l + eps)
    return (t.em * t.se, -t.sbl, -t.sbl, t.ep * t.se), t.sp


def _passive_parts(t: Trig, sign: float):
    off = sign * -t.sbl
    return (t.ep * t.se, off, off, t.em * t.se), -t.sm  # over sin(eps - beta l)


def _active_kernel(t: Trig):
    num, den = _active_parts(t)
    return tuple(n / den for n in num)


def _passive_kernel(t: Trig, sign: float):
    num, den = _passive_parts(t, sign)
    return tuple(n / den for n in num)


def transfer(params: PtParams, l: float, pair: QuadPair) -> TransferMatrix2:
    if pair.is_active:
        m = continued(_active_kernel, params, l, passive=False)
    else:
        # the pi/2 passive pair couples through -kappa: off-diagonals flip sign
        sign = 1.0 if pair is QuadPair.PI_QS else -1.0
        m = continued(_passive_kernel, params, l, sign, active=False)
    return TransferMatrix2(*m, pair=pair, l=float(l))


_INDEX = {"qi": 0, "pi": 1, "qs": 2, "ps": 3}


def output_map(params: PtParams, l: float, pump_phase: float = 0.0) -> np.ndarray:
    """4x4 map from inputs (q_i(l), p_i(l), q_s(0), p_s(0)) to outputs (q_i(0), p_i(0), q_s(l), p_s(l))."""
    s = np.zeros((4, 4))
    for pair in pairs_for(pump_phase):
        m = transfer(params, l, pair).matrix
        rows = [_INDEX[name] for name in pair.quadratures]
        s[np.ix_(rows, rows)] = m
    return s


SYMPLECTIC_FORM = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)


def _commutator_kernel(t: Trig, pump_phase: float):
    # Every output commutator is a weighted sum of squared sines over the
    # product of two denominators.  Comparing it with the target times that
    # product, before dividing, avoids forming the O(1/sin^2) matrix entries.
    num = np.zeros((4, 4), dtype=object)
    den = [None] * 4
    for pair in pairs_for(pump_phase):
        if pair.is_active:
            n, d = _active_parts(t)
        else:
            n, d = _passive_parts(t, 1.0 if pair is QuadPair.PI_QS else -1.0)
        rows = [_INDEX[name] for name in pair.quadratures]
        for (r, c), v in zip([(i, j) for i in rows for j in rows], n):
            num[r, c] = v
        for r in rows:
            den[r] = d
    out = []
    for i in range(4):
        for j in range(i + 1, 4):
            weighted = sum(
                num[i, a] * SYMPLECTIC_FORM[a, b] * num[j, b] for a in range(4) for b in range(4) if SYMPLECTIC_FORM[a, b]
            )
            scale = den[i] * den[j]
            out.append((weighted - SYMPLECTIC_FORM[i, j] * scale) / scale)
    return out


def check_commutators(params: PtParams, l: float) -> float:
    """Largest deviation of the output commutators from [q, p] = i/2, in units of i/2.

    Covers both pump phases and includes the vanishing cross-mode commutators.
    """
    worst = 0.0
    for phase in PUMP_PHASES:
        worst = max(worst, max(abs(r) for r in continued(_commutator_kernel, params, l, phase)))
    return worst
