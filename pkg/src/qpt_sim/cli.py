"""``qpt-sim`` command-line front end.

Exit codes: 0 success, 1 verification failure, 2 bad configuration, 3 I/O failure.
Masked grid points never change the exit code.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

import numpy as np

from .errors import SpecError, UnknownFigure
from .sweep import SweepResult, SweepSpec, run_sweep

FORMATS = ("csv", "json")
LOG_SCALES = ("none", "log4", "lg_nf_split", "log10_plus1")
FIGURES = (
    "fig2",
    "fig3a",
    "fig3b",
    "fig4",
    "s_homodyne",
    "s_nf",
    "s_epr_grid",
    "s_susceptibility",
    "s_inverse_variance",
    "s_two_mode_sensing",
    "s_near_ep",
)
COMMANDS = {
    "variances": ["variances"],
    "homodyne2": ["homodyne2"],
    "nf": ["nf", "rism"],
    "corr": ["corr"],
    "epr": ["epr", "epr_optimal"],
    "negativity": ["negativity"],
    "sensing": ["sensing"],
    "qfi": ["qfi"],
}
CONFIG_KEYS = {
    "b",
    "g",
    "kappa",
    "l_min",
    "l_max",
    "steps",
    "alpha",
    "pump_phase",
    "theta_plus_phi",
    "theta_plus_phi_grid",
    "output",
    "format",
    "log_scale",
    "workers",
}
FIGURE_KEYS = CONFIG_KEYS | {"id", "version", "description", "assumptions", "observables"}
LOG_DOMAIN = "LOG_DOMAIN"


def _log4(x: float) -> Optional[float]:
    return math.log(x, 4.0) if x > 0 else None


def _lg_split(x: float) -> Optional[float]:
    return math.copysign(math.log10(abs(x) + 1.0), x)


def _log10_plus1(x: float) -> Optional[float]:
    return math.log10(x + 1.0) if x > -1.0 else None


# transform and the column prefixes it applies to; other columns stay raw
_TRANSFORMS = {
    "log4": (_log4, ("var_",)),
    "lg_nf_split": (_lg_split, ("nf_excess",)),
    "log10_plus1": (_log10_plus1, ("inv_var_", "qfi")),
}


@dataclass
class CliConfig:
    values: list[float]
    axis: str = "b"
    kappa: float = 0.5
    l_min: float = 0.0
    l_max: float = 12.0
    steps: int = 600
    alpha: float = 0.0
    pump_phase: float = 0.0
    theta_plus_phi: float = 1.5 * math.pi
    theta_plus_phi_grid: Optional[int] = None
    output: Optional[str] = None
    format: str = "csv"
    log_scale: str = "none"
    workers: Optional[int] = None
    observables: list[str] = field(default_factory=list)
    extra_meta: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.format not in FORMATS:
            raise SpecError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.log_scale not in LOG_SCALES:
            raise SpecError(f"log_scale must be one of {LOG_SCALES}, got {self.log_scale!r}")
        if self.workers is not None and (not isinstance(self.workers, int) or self.workers < 1):
            raise SpecError(f"workers must be a positive integer, got {self.workers!r}")

    def sweep_spec(self) -> SweepSpec:
        return SweepSpec(
            values=list(self.values),
            kappa=self.kappa,
            axis=self.axis,
            l_start=self.l_min,
            l_stop=self.l_max,
            steps=self.steps,
            alpha=self.alpha,
            angle_steps=self.theta_plus_phi_grid,
            theta_plus_phi=self.theta_plus_phi,
            observables=list(self.observables),
            pump_phase=self.pump_phase,
        )

    def effective(self) -> dict:
        out = {
            self.axis: list(self.values),
            "kappa": self.kappa,
            "l_min": self.l_min,
            "l_max": self.l_max,
            "steps": self.steps,
            "alpha": self.alpha,
            "pump_phase": self.pump_phase,
            "theta_plus_phi": self.theta_plus_phi,
            "theta_plus_phi_grid": self.theta_plus_phi_grid,
            "format": self.format,
            "log_scale": self.log_scale,
            "observables": list(self.observables),
        }
        out.update(self.extra_meta)
        return out


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _number(value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SpecError(f"{key} must be a number, got {value!r}")
    return float(value)


def _integer(value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SpecError(f"{key} must be an integer, got {value!r}")
    return value


def config_from_mapping(data: dict, allowed: set[str] = CONFIG_KEYS) -> CliConfig:
    """Build a config from a flat JSON object; unknown keys are rejected."""
    if not isinstance(data, dict):
        raise SpecError("config must be a flat JSON object")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise SpecError(f"unknown config keys: {unknown}")
    if "b" in data and "g" in data:
        raise SpecError("give either b or g, not both")
    axis = "g" if "g" in data else "b"
    raw = data.get(axis, [])
    if not isinstance(raw, list):
        raw = [raw]
    cfg = CliConfig(values=[_number(v, axis) for v in raw], axis=axis)
    for key in ("kappa", "l_min", "l_max", "alpha", "pump_phase", "theta_plus_phi"):
        if key in data:
            setattr(cfg, key, _number(data[key], key))
    for key in ("steps", "workers", "theta_plus_phi_grid"):
        if key in data and data[key] is not None:
            setattr(cfg, key, _integer(data[key], key))
    for key in ("output", "format", "log_scale"):
        if key in data:
            if data[key] is not None and not isinstance(data[key], str):
                raise SpecError(f"{key} must be a string")
            setattr(cfg, key, data[key])
    if "observables" in data:
        cfg.observables = list(data["observables"])
    cfg.extra_meta = {k: data[k] for k in ("id", "version", "description", "assumptions") if k in data}
    return cfg


def _read_json(path) -> dict:
    if hasattr(path, "read_text"):
        text = path.read_text(encoding="utf-8")
    else:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"config is not valid JSON: {exc}") from None


def load_figure(fig_id: str) -> CliConfig:
    if fig_id not in FIGURES:
        raise UnknownFigure(f"unknown figure {fig_id!r}; choose from {', '.join(FIGURES)}")
    path = resources.files("qpt_sim") / "figures" / f"{fig_id}.json"
    return config_from_mapping(_read_json(path), FIGURE_KEYS)


def apply_flags(cfg: CliConfig, args: argparse.Namespace) -> CliConfig:
    """Flags override whatever the config file set."""
    if args.b is not None and args.g is not None:
        raise SpecError("give either --b or --g, not both")
    if args.b is not None:
        cfg.axis, cfg.values = "b", args.b
    elif args.g is not None:
        cfg.axis, cfg.values = "g", args.g
    for flag in (
        "kappa",
        "l_min",
        "l_max",
        "steps",
        "alpha",
        "pump_phase",
        "theta_plus_phi",
        "theta_plus_phi_grid",
        "output",
        "format",
        "log_scale",
        "workers",
    ):
        val = getattr(args, flag, None)
        if val is not None:
            setattr(cfg, flag, val)
    return cfg


# ---------------------------------------------------------------- emission


def _cell(x: float) -> str:
    return format(x, ".17g")


def transformed(result: SweepResult, log_scale: str) -> tuple[dict[str, np.ndarray], dict[str, np.ndarray]]:
    """Apply the log transform at emission; out-of-domain cells are masked."""
    if log_scale == "none":
        return dict(result.columns), dict(result.masks)
    fn, prefixes = _TRANSFORMS[log_scale]
    cols, masks = {}, {}
    for name, col in result.columns.items():
        mask = result.masks[name]
        if not name.startswith(prefixes):
            cols[name], masks[name] = col, mask
            continue
        out = np.full_like(col, np.nan)
        new_mask = mask.copy()
        for i, x in enumerate(col):
            if mask[i]:
                continue
            y = fn(float(x))
            if y is None:
                new_mask[i] = LOG_DOMAIN
            else:
                out[i] = y
        key = f"{log_scale}_{name}"
        cols[key], masks[key] = out, new_mask
    return cols, masks


def _row_masks(masks: dict[str, np.ndarray], rows: int) -> list[str]:
    return ["|".join(sorted({str(m[i]) for m in masks.values() if m[i]})) for i in range(rows)]


def to_csv(result: SweepResult, log_scale: str = "none") -> str:
    cols, masks = transformed(result, log_scale)
    names = list(result.axes) + list(cols) + ["mask"]
    buf = io.StringIO(newline="")
    buf.write(",".join(names) + "\n")
    row_masks = _row_masks(masks, result.rows)
    for i in range(result.rows):
        cells = [_cell(float(a[i])) for a in result.axes.values()]
        for name, col in cols.items():
            code = masks[name][i]
            cells.append(f"MASKED:{code}" if code else _cell(float(col[i])))
        cells.append(row_masks[i])
        buf.write(",".join(cells) + "\n")
    return buf.getvalue()


def to_json(result: SweepResult, log_scale: str = "none", meta: Optional[dict] = None) -> str:
    cols, masks = transformed(result, log_scale)
    out_cols = {
        name: [f"MASKED:{masks[name][i]}" if masks[name][i] else float(col[i]) for i in range(result.rows)]
        for name, col in cols.items()
    }
    payload = {
        "axes": {k: [float(x) for x in v] for k, v in result.axes.items()},
        "columns": out_cols,
        "meta": {**result.meta, **(meta or {}), "masked_points": sum(1 for m in _row_masks(masks, result.rows) if m)},
    }
    return json.dumps(payload, allow_nan=False) + "\n"


def emit(result: SweepResult, cfg: CliConfig) -> str:
    if cfg.format == "json":
        return to_json(result, cfg.log_scale, {"config": cfg.effective()})
    return to_csv(result, cfg.log_scale)


def _write(text: str, path: Optional[str]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------- commands


def run_table(cfg: CliConfig, label: str) -> int:
    cfg.validate()
    start = time.perf_counter()
    result = run_sweep(cfg.sweep_spec(), workers=cfg.workers)
    text = emit(result, cfg)
    _write(text, cfg.output)
    elapsed = time.perf_counter() - start
    print(
        f"qpt-sim {label}: {result.rows} rows, {result.masked_points} masked points, {elapsed:.2f} s",
        file=sys.stderr,
    )
    return 0


def _add_grid_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat JSON config file; flags override its values")
    axis = p.add_mutually_exclusive_group()
    axis.add_argument("--b", type=_float_list, help="comma-separated b = g/(2 kappa) values")
    axis.add_argument("--g", type=_float_list, help="comma-separated gain values")
    p.add_argument("--kappa", type=float)
    p.add_argument("--l-min", dest="l_min", type=float, help="start of the 2*kappa*l axis")
    p.add_argument("--l-max", dest="l_max", type=float, help="end of the 2*kappa*l axis")
    p.add_argument("--steps", type=int)
    p.add_argument("--alpha", type=float, help="coherent seed amplitude")
    p.add_argument("--pump-phase", dest="pump_phase", type=float, help="0 or pi/2 (1.5707963267948966)")
    p.add_argument("--theta-plus-phi", dest="theta_plus_phi", type=float)
    p.add_argument("--theta-plus-phi-grid", dest="theta_plus_phi_grid", type=int, help="angles in [0, 2pi]")
    _add_output_flags(p)


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("-o", "--output", help="output path (default stdout)")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--log-scale", dest="log_scale", choices=LOG_SCALES)
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpt-sim", description="Type-II quadrature PT-symmetric twin-beam simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, groups in COMMANDS.items():
        p = sub.add_parser(name, help=f"tabulate {', '.join(groups)}")
        _add_grid_flags(p)
    fig = sub.add_parser("figure", help="reproduce the data behind a figure")
    fig.add_argument("id", help=", ".join(FIGURES))
    for flag in ("--b", "--g"):
        fig.add_argument(flag, type=_float_list, default=None)
    for flag, dest, typ in (
        ("--kappa", "kappa", float),
        ("--l-min", "l_min", float),
        ("--l-max", "l_max", float),
        ("--steps", "steps", int),
        ("--alpha", "alpha", float),
        ("--pump-phase", "pump_phase", float),
        ("--theta-plus-phi", "theta_plus_phi", float),
        ("--theta-plus-phi-grid", "theta_plus_phi_grid", int),
    ):
        fig.add_argument(flag, dest=dest, type=typ)
    _add_output_flags(fig)
    ver = sub.add_parser("verify", help="closed forms against the brute-force oracle")
    ver.add_argument("--grid", choices=("small", "full"), default="small")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    if args.command == "verify":
        from .verify import run_verify

        return 0 if run_verify(args.grid, out=sys.stdout) else 1
    if args.command == "figure":
        cfg = apply_flags(load_figure(args.id), args)
        return run_table(cfg, f"figure {args.id}")
    cfg = config_from_mapping(_read_json(args.config)) if args.config else CliConfig(values=[])
    cfg = apply_flags(cfg, args)
    cfg.observables = list(COMMANDS[args.command])
    return run_table(cfg, args.command)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return _dispatch(args)
    except SpecError as exc:
        print(f"qpt-sim: error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"qpt-sim: I/O error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
