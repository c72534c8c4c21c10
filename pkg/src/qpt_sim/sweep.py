"""Deterministic parameter sweeps over (b or g, 2*kappa*l, theta + phi).

Every requested observable group is evaluated point by point; a point whose
kernel raises a :class:`~qpt_sim.errors.QptError` (or yields a non-finite
number) is masked with the error code rather than aborting the sweep.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import __version__
from .epr import EprAngles, epr_criteria, epr_optimal, eta_covariance, log_negativity
from .errors import QptError, SpecError
from .observables import (
    correlation_coefficient,
    noise_figure,
    photon_number_stats,
    rism_coefficients,
    single_mode_variances,
    two_mode_variances,
)
from .params import PtParams, make_params
from .sensing import (
    CoherentSeed,
    SensingObservable,
    observable_variance,
    qfi_closed,
    qfi_covariance,
    susceptibilities,
)

_SENSING = [o.value for o in SensingObservable]

GROUPS: dict[str, list[str]] = {
    "variances": ["var_qi0", "var_psl", "var_qsl", "var_pi0"],
    "homodyne2": ["var_d1", "var_d2"],
    "nf": ["nf", "nf_excess"],
    "rism": ["rism_A", "rism_B", "rism_C", "rism_D", "rism_E", "rism_F", "var_ni", "var_ns", "covar_ni_ns"],
    "corr": ["c11", "c12", "c21", "c22"],
    "epr": ["et1", "et2"],
    "epr_optimal": ["et_opt", "et_bound"],
    "negativity": ["eta", "log_negativity"],
    "sensing": [f"chi_{o}" for o in _SENSING]
    + [f"inv_var_{o}" for o in _SENSING]
    + [f"ratio_{o}" for o in _SENSING]
    + ["qfi"],
    "qfi": ["qfi_closed", "qfi_covariance"],
}
ANGLE_GROUPS = {"epr"}
DEFAULT_ANGLE = 1.5 * math.pi


@dataclass
class SweepSpec:
    """Grid definition.  Lengths are given as 2*kappa*l."""

    values: list[float]
    kappa: float = 0.5
    axis: str = "b"
    l_start: float = 0.0
    l_stop: float = 12.0
    steps: int = 600
    alpha: float = 0.0
    angle_steps: Optional[int] = None
    theta_plus_phi: float = DEFAULT_ANGLE
    observables: list[str] = field(default_factory=lambda: ["variances"])
    pump_phase: float = 0.0

    def validate(self) -> None:
        if self.axis not in ("b", "g"):
            raise SpecError(f"axis must be 'b' or 'g', got {self.axis!r}")
        if not self.values:
            raise SpecError("at least one b/g value is required")
        nums = [*self.values, self.kappa, self.l_start, self.l_stop, self.alpha, self.theta_plus_phi, self.pump_phase]
        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in nums):
            raise SpecError("all numeric spec values must be finite")
        if self.kappa <= 0:
            raise SpecError(f"kappa must be > 0, got {self.kappa}")
        if any(v < 0 for v in self.values):
            raise SpecError("b/g values must be >= 0")
        if not isinstance(self.steps, int) or self.steps < 2:
            raise SpecError(f"steps must be an integer >= 2, got {self.steps!r}")
        if self.l_start < 0 or self.l_stop <= self.l_start:
            raise SpecError(f"need 0 <= l_start < l_stop, got [{self.l_start}, {self.l_stop}]")
        if self.alpha < 0:
            raise SpecError("alpha must be >= 0")
        if self.angle_steps is not None and (not isinstance(self.angle_steps, int) or self.angle_steps < 2):
            raise SpecError(f"angle_steps must be an integer >= 2, got {self.angle_steps!r}")
        unknown = [o for o in self.observables if o not in GROUPS]
        if unknown or not self.observables:
            raise SpecError(f"unknown observables {unknown}; choose from {sorted(GROUPS)}")
        if self.pump_phase != 0 and not math.isclose(self.pump_phase, math.pi / 2):
            raise SpecError("pump_phase must be 0 or pi/2")

    def two_kappa_l(self) -> np.ndarray:
        return linear_grid(self.l_start, self.l_stop, self.steps)

    def angles(self) -> np.ndarray:
        if self.angle_steps is None:
            return np.array([self.theta_plus_phi])
        return linear_grid(0.0, 2.0 * math.pi, self.angle_steps)

    def params_for(self, value: float) -> PtParams:
        g = 2.0 * value * self.kappa if self.axis == "b" else value
        return make_params(g, self.kappa)


def linear_grid(start: float, stop: float, steps: int) -> np.ndarray:
    """start + k (stop - start)/(steps - 1), formed in extended precision so the endpoints are exact."""
    k = np.arange(steps, dtype=np.longdouble)
    lo, hi = np.longdouble(start), np.longdouble(stop)
    pts = lo + k * (hi - lo) / np.longdouble(steps - 1)
    return pts.astype(float)


@dataclass
class SweepResult:
    axes: dict[str, np.ndarray]
    columns: dict[str, np.ndarray]
    masks: dict[str, np.ndarray]
    meta: dict

    @property
    def rows(self) -> int:
        return len(next(iter(self.axes.values())))

    def row_mask(self, i: int) -> str:
        codes = sorted({str(m[i]) for m in self.masks.values() if m[i]})
        return "|".join(codes)

    @property
    def masked_points(self) -> int:
        return sum(1 for i in range(self.rows) if self.row_mask(i))


def _evaluate(group: str, p: PtParams, l: float, spec: SweepSpec, angle: float) -> list[float]:
    if group == "variances":
        v = single_mode_variances(p, l)
        return [v.qi0, v.psl, v.qsl, v.pi0]
    if group == "homodyne2":
        return list(two_mode_variances(p, l))
    if group == "nf":
        nf = noise_figure(p, l)
        return [nf, nf - 1.0]
    if group == "rism":
        r = rism_coefficients(p, l)
        s = photon_number_stats(p, l)
        return [r.A, r.B, r.C, r.D, r.E, r.F, s.var_ni, s.var_ns, s.covar]
    if group == "corr":
        return [correlation_coefficient(p, l, j, m, spec.pump_phase) for j, m in ((1, 1), (1, 2), (2, 1), (2, 2))]
    if group == "epr":
        r = epr_criteria(p, l, EprAngles(theta=angle, lo_phase_s=0.0))
        return [r.et1, r.et2]
    if group == "epr_optimal":
        return list(epr_optimal(p, l))
    if group == "negativity":
        return [eta_covariance(p, l), log_negativity(p, l)]
    seed = CoherentSeed(spec.alpha)
    if group == "sensing":
        chi = susceptibilities(p, l, seed)
        f = qfi_closed(p, l, seed)
        inv = [chi[o] ** 2 / observable_variance(p, l, o) for o in SensingObservable]
        ratios = [x / f if f > 0 else 0.0 for x in inv]
        return [chi[o] for o in SensingObservable] + inv + ratios + [f]
    if group == "qfi":
        return [qfi_closed(p, l, seed), qfi_covariance(p, l, seed)]
    raise SpecError(f"unknown observable group {group!r}")


def _run_block(task: tuple[SweepSpec, float, str]) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate one (b, group) block over all lengths and angles."""
    spec, value, group = task
    ls = spec.two_kappa_l() / (2.0 * spec.kappa)
    angles = spec.angles() if group in ANGLE_GROUPS else np.array([spec.theta_plus_phi])
    ncol = len(GROUPS[group])
    vals = np.full((len(ls), len(angles), ncol), np.nan)
    codes = np.full((len(ls), len(angles)), "", dtype=object)
    try:
        p = spec.params_for(value)
    except QptError as exc:
        codes[:] = exc.code
        return vals, codes
    for i, l in enumerate(ls):
        for j, a in enumerate(angles):
            try:
                out = _evaluate(group, p, float(l), spec, float(a))
            except QptError as exc:
                codes[i, j] = exc.code
                continue
            except OverflowError:
                codes[i, j] = "NON_FINITE"
                continue
            if not all(math.isfinite(x) for x in out):
                codes[i, j] = "NON_FINITE"
                continue
            vals[i, j] = out
    return vals, codes


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("QPT_SIM_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise SpecError(f"QPT_SIM_THREADS must be an integer, got {cap!r}") from None
    return max(1, n)


def run_sweep(spec: SweepSpec, workers: Optional[int] = None, map_fn: Optional[Callable] = None) -> SweepResult:
    spec.validate()
    tasks = [(spec, v, g) for v in spec.values for g in spec.observables]
    n = worker_count(workers)
    if map_fn is not None:
        blocks = list(map_fn(_run_block, tasks))
    elif n == 1 or len(tasks) == 1:
        blocks = [_run_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(n, len(tasks))) as pool:
            blocks = list(pool.map(_run_block, tasks))

    x = spec.two_kappa_l()
    angles = spec.angles()
    use_angles = spec.angle_steps is not None and any(g in ANGLE_GROUPS for g in spec.observables)
    na = len(angles) if use_angles else 1
    nv, nl = len(spec.values), len(x)
    rows = nv * nl * na

    axes = {
        spec.axis: np.repeat(np.asarray(spec.values, dtype=float), nl * na),
        "two_kappa_l": np.tile(np.repeat(x, na), nv),
    }
    if use_angles:
        axes["theta_plus_phi"] = np.tile(angles, nv * nl)

    columns: dict[str, np.ndarray] = {}
    masks: dict[str, np.ndarray] = {}
    for bi in range(nv):
        for gi, group in enumerate(spec.observables):
            vals, codes = blocks[bi * len(spec.observables) + gi]
            if vals.shape[1] != na:  # angle-independent block, replicate across the angle axis
                vals = np.repeat(vals, na, axis=1)
                codes = np.repeat(codes, na, axis=1)
            sl = slice(bi * nl * na, (bi + 1) * nl * na)
            for ci, name in enumerate(GROUPS[group]):
                columns.setdefault(name, np.full(rows, np.nan))[sl] = vals[:, :, ci].reshape(-1)
                masks.setdefault(name, np.full(rows, "", dtype=object))[sl] = codes.reshape(-1)

    meta = {
        "spec": asdict(spec),
        "version": __version__,
        "rows": rows,
    }
    result = SweepResult(axes=axes, columns=columns, masks=masks, meta=meta)
    result.meta["masked_points"] = result.masked_points
    return result
