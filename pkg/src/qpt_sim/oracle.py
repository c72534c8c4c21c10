"""Brute-force validators that share no closed forms with the analytic modules.

Everything here starts from the Heisenberg equations of the two field modes,

    d a_i/dz = g a_i^+ + i kappa e^{-i phi} a_s^+,     d a_s/dz = -i kappa e^{-i phi} a_i^+,

integrates them with a matrix exponential (or RK4), and solves the two-point
boundary problem numerically.  Photon statistics come from Wick pairings of
the resulting Gaussian state.
"""

from __future__ import annotations

import cmath
import enum
import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .errors import NotGaussianValid, SingularRearrangement
from .params import PtParams, check_length

PIVOT_TOL = 1e-12
SERIES_TOL = 1e-8
RK4_STEPS = 10_000

# symplectic form over (q_i, p_i, q_s, p_s): [q, p] = i/2  <->  <qp> - <pq> = (i/4) * 2
OMEGA = np.array(
    [[0.0, 1.0, 0.0, 0.0], [-1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0], [0.0, 0.0, -1.0, 0.0]]
)


class Derivation(enum.Enum):
    MATRIX_EXPONENTIAL = "MatrixExponential"
    ODE_INTEGRATION = "OdeIntegration"


@dataclass(frozen=True)
class BoundaryMap:
    m: np.ndarray
    derivation: Derivation


def expm2(generator: np.ndarray, l: float) -> np.ndarray:
    """exp(G l) for a real 2x2 G via the Cayley-Hamilton closed form, in extended precision.

    Writing G = t I + N with N traceless gives N^2 = delta I, so
    exp(G l) = e^{t l} [cosh(sqrt(delta) l) I + sinh(sqrt(delta) l)/sqrt(delta) N].
    A short series replaces the ratio when delta l^2 is tiny (defective generator).
    Near a vanishing pivot the entries cancel strongly, hence the long double.
    """
    g = np.asarray(generator, dtype=np.longdouble)
    l = np.longdouble(l)
    t = (g[0, 0] + g[1, 1]) / 2
    n = g - t * np.eye(2, dtype=np.longdouble)
    delta = n[0, 0] ** 2 + n[0, 1] * n[1, 0]
    x = delta * l * l
    if abs(x) < SERIES_TOL:
        c = 1 + x / 2 + x * x / 24
        s = l * (1 + x / 6 + x * x / 120)
    elif delta > 0:
        root = np.sqrt(delta)
        c, s = np.cosh(root * l), np.sinh(root * l) / root
    else:
        root = np.sqrt(-delta)
        c, s = np.cos(root * l), np.sin(root * l) / root
    return np.exp(t * l) * (c * np.eye(2, dtype=np.longdouble) + s * n)


def rk4_propagator(generator: np.ndarray, l: float, steps: int = RK4_STEPS) -> np.ndarray:
    g = np.asarray(generator, dtype=float)
    dim = g.shape[0]
    m = np.eye(dim)
    if l == 0.0:
        return m
    h = l / steps
    for _ in range(steps):
        k1 = g @ m
        k2 = g @ (m + 0.5 * h * k1)
        k3 = g @ (m + 0.5 * h * k2)
        k4 = g @ (m + h * k3)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return m


def rearrange2(m: np.ndarray, det: float | None = None) -> np.ndarray:
    """Turn a forward map (x1(0), x2(0)) -> (x1(l), x2(l)) into (x1(l), x2(0)) -> (x1(0), x2(l)).

    ``det`` may be supplied exactly (Jacobi: det exp(G l) = exp(tr G l)); the
    entrywise product difference cancels catastrophically at strong gain.
    """
    m11, m12, m21, m22 = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    if abs(m11) <= PIVOT_TOL:
        raise SingularRearrangement(f"pivot {m11!r} of the forward map vanishes")
    if det is None:
        det = m11 * m22 - m12 * m21
    out = np.array([[1 / m11, -m12 / m11], [m21 / m11, det / m11]])
    return out.astype(float)


def oracle_boundary_map(generator: np.ndarray, l: float, method: str = "expm") -> BoundaryMap:
    l = check_length(l)
    det = np.exp(np.trace(np.asarray(generator, dtype=np.longdouble)) * np.longdouble(l))
    if method == "expm":
        return BoundaryMap(rearrange2(expm2(generator, l), det), Derivation.MATRIX_EXPONENTIAL)
    if method == "ode":
        return BoundaryMap(rearrange2(rk4_propagator(generator, l), det), Derivation.ODE_INTEGRATION)
    raise ValueError(f"unknown method {method!r}")


def expm_self_test(generator: np.ndarray, l: float) -> float:
    """Max deviation between the closed 2x2 exponential and scipy's Pade(13)."""
    a = expm2(generator, l).astype(float)
    b = scipy.linalg.expm(np.asarray(generator, dtype=float) * l)
    return float(np.max(np.abs(a - b)))


def mode_generator(params: PtParams, pump_phase: float = 0.0) -> np.ndarray:
    """Real 4x4 generator over (q_i, p_i, q_s, p_s) built from the mode equations."""
    g, k = params.g, params.kappa
    c = 1j * k * cmath.exp(-1j * pump_phase)
    out = np.zeros((4, 4))

    def couple(rows, cols, coeff):
        # d(q + i p) = coeff (q' - i p')
        (rq, rp), (cq, cp) = rows, cols
        out[rq, cq] += coeff.real
        out[rq, cp] += coeff.imag
        out[rp, cq] += coeff.imag
        out[rp, cp] += -coeff.real

    couple((0, 1), (0, 1), complex(g))
    couple((0, 1), (2, 3), c)
    couple((2, 3), (0, 1), -c)
    # cos(pi/2) is not exactly zero in floating point
    out[np.abs(out) < 1e-15 * (abs(g) + k)] = 0.0
    return out


def oracle_output_map(params: PtParams, l: float, pump_phase: float = 0.0) -> np.ndarray:
    """4x4 map inputs (q_i(l), p_i(l), q_s(0), p_s(0)) -> outputs (q_i(0), p_i(0), q_s(l), p_s(l)).

    The mode generator splits into two decoupled idler/signal quadrature
    pairs; each is solved as a 2x2 boundary problem.
    """
    l = check_length(l)
    gen = mode_generator(params, pump_phase)
    pairs = []
    for idler in (0, 1):
        partners = [k for k in (2, 3) if gen[idler, k] != 0.0 or gen[k, idler] != 0.0]
        if len(partners) != 1:
            raise ValueError(f"pump_phase {pump_phase!r} does not decouple into quadrature pairs")
        pairs.append((idler, partners[0]))
    r = np.zeros((4, 4))
    for pair in pairs:
        block = np.ix_(pair, pair)
        r[block] = oracle_boundary_map(gen[block], l).m
    return r


def oracle_output_map_dense(params: PtParams, l: float, pump_phase: float = 0.0) -> np.ndarray:
    """Same map from a 4x4 Pade exponential and a block solve; no pair structure assumed."""
    l = check_length(l)
    m = scipy.linalg.expm(mode_generator(params, pump_phase) * l)
    ii, is_, si, ss = m[:2, :2], m[:2, 2:], m[2:, :2], m[2:, 2:]
    if np.min(np.linalg.svd(ii, compute_uv=False)) <= PIVOT_TOL:
        raise SingularRearrangement(f"idler block of the forward map is singular at l={l}")
    inv = np.linalg.inv(ii)
    r = np.zeros((4, 4))
    r[:2, :2] = inv
    r[:2, 2:] = -inv @ is_
    r[2:, :2] = si @ inv
    r[2:, 2:] = ss - si @ inv @ is_
    return r


def oracle_output_covariance(
    params: PtParams, l: float, pump_phase: float = 0.0, alpha: float = 0.0
) -> tuple[np.ndarray, np.ndarray]:
    """Output (cov, mean) over (q_i(0), p_i(0), q_s(l), p_s(l)) for vacuum or coherent inputs.

    Coherent seeding puts mean ``alpha`` on all four input quadratures.
    """
    r = oracle_output_map(params, l, pump_phase)
    cov = 0.25 * (r @ r.T)
    cov = 0.5 * (cov + cov.T)
    mean = r @ np.full(4, float(alpha))
    return cov, mean


def _check_gaussian(cov: np.ndarray) -> None:
    if not np.allclose(cov, cov.T, atol=1e-12, rtol=0.0):
        raise NotGaussianValid("covariance is not symmetric")
    if np.min(np.linalg.eigvalsh(cov)) < -1e-12:
        raise NotGaussianValid("covariance is not positive semidefinite")
    physical = cov + 0.25j * OMEGA
    if np.min(np.linalg.eigvalsh(physical)) < -1e-12 * max(1.0, float(np.max(np.abs(cov)))):
        raise NotGaussianValid("covariance violates the uncertainty relation")


def gaussian_moment(ops: Sequence[np.ndarray], cov: np.ndarray, mean: np.ndarray) -> complex:
    """Ordered expectation <X_1 ... X_n> of linear operators X_k = u_k . x on a Gaussian state.

    Each operator splits into its mean plus a fluctuation; odd fluctuation
    moments vanish and even ones factor into ordered pairings (Isserlis/Wick).
    """
    two_point = cov + 0.25j * OMEGA
    n = len(ops)
    means = [complex(u @ mean) for u in ops]

    def pairings(idx):
        if not idx:
            yield []
            return
        first, rest = idx[0], idx[1:]
        for j, partner in enumerate(rest):
            for tail in pairings(rest[:j] + rest[j + 1 :]):
                yield [(first, partner)] + tail

    total = 0j
    for size in range(0, n + 1, 2):
        for fluct in itertools.combinations(range(n), size):
            rest = [means[k] for k in range(n) if k not in fluct]
            mean_part = complex(np.prod(rest)) if rest else 1.0
            if mean_part == 0:
                continue
            pair_sum = 0j
            for pairing in pairings(list(fluct)):
                term = 1.0 + 0j
                for a, b in pairing:
                    term *= ops[a] @ two_point @ ops[b]
                pair_sum += term
            total += mean_part * pair_sum
    return total


def _ladder(mode: int) -> tuple[np.ndarray, np.ndarray]:
    e = np.eye(4)
    q, p = e[2 * mode], e[2 * mode + 1]
    return q + 1j * p, q - 1j * p  # a, a^+


def oracle_photon_moments(cov4: np.ndarray, mean4: np.ndarray | None = None) -> tuple[float, float, float]:
    """(Var N_i, Var N_s, Cov(N_i, N_s)) of the output state by Wick expansion."""
    cov = np.asarray(cov4, dtype=float)
    mean = np.zeros(4) if mean4 is None else np.asarray(mean4, dtype=float)
    _check_gaussian(cov)
    ai, ai_d = _ladder(0)
    as_, as_d = _ladder(1)
    ni = gaussian_moment([ai_d, ai], cov, mean)
    ns = gaussian_moment([as_d, as_], cov, mean)
    ni2 = gaussian_moment([ai_d, ai, ai_d, ai], cov, mean)
    ns2 = gaussian_moment([as_d, as_, as_d, as_], cov, mean)
    nins = gaussian_moment([ai_d, ai, as_d, as_], cov, mean)
    return (ni2 - ni * ni).real, (ns2 - ns * ns).real, (nins - ni * ns).real


def oracle_photon_means(cov4: np.ndarray, mean4: np.ndarray | None = None) -> tuple[float, float]:
    cov = np.asarray(cov4, dtype=float)
    mean = np.zeros(4) if mean4 is None else np.asarray(mean4, dtype=float)
    ai, ai_d = _ladder(0)
    as_, as_d = _ladder(1)
    return gaussian_moment([ai_d, ai], cov, mean).real, gaussian_moment([as_d, as_], cov, mean).real


def finite_difference(f: Callable[[float], float], x: float, h: float) -> float:
    """Central difference with one Richardson step: (4 D(h/2) - D(h)) / 3."""

    def d(step):
        return (f(x + step) - f(x - step)) / (2.0 * step)

    return (4.0 * d(0.5 * h) - d(h)) / 3.0
