"""Command-line front end: config files, parameter sweeps, figure datasets,
and the cross-validation harness.

Config files are UTF-8 key=value lines with ``#`` comments.  Scalar keys:
``g``, ``ell``, ``alpha_sq``, ``theta``, ``phi``, ``transmissivity`` (angles
in radians, ``alpha_sq`` is the squared coherent amplitude).  A sweep adds
``quantity = <name>`` and one or two ``sweep = <param> <start> <stop>
<count>`` lines.  Output is CSV with a ``#``-prefixed metadata header; every
non-finite or sentinel value carries a flag column entry.

Exit codes: 0 success, 1 usage/parse error, 2 validation failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Callable, Sequence

import numpy as np

from . import metrology
from .interferometer import ExperimentConfig
from .validation import run_validation

__version__ = "0.1.0"

QUANTITIES = (
    "signal",
    "sensitivity",
    "sensitivity_lossy",
    "qcrb",
    "snl",
    "hl",
    "visibility",
    "max_loss",
)

_SCALAR_KEYS = ("g", "ell", "alpha_sq", "theta", "phi", "transmissivity")
_AXIS_NAMES = _SCALAR_KEYS
# max_loss optimises phi/theta internally and searches T itself
_MAX_LOSS_AXES = ("g", "ell", "alpha_sq")

_DEFAULTS = {
    "g": 0.0,
    "ell": 1,
    "alpha_sq": 0.0,
    "theta": 0.0,
    "phi": 0.0,
    "transmissivity": 1.0,
}


class ConfigError(ValueError):
    """Malformed or out-of-range configuration input."""


class SweepError(RuntimeError):
    """Evaluation failure inside a sweep, annotated with grid coordinates."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        vals = np.linspace(self.start, self.stop, self.count)
        return np.sort(vals)


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentConfig
    axes: tuple[SweepAxis, ...]
    quantity: str


@dataclass(frozen=True)
class SweepResult:
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    metadata: dict


def _parse_float(key: str, text: str, line_no: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"line {line_no}: {key} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"line {line_no}: {key} must be finite")
    return value


def _parse_int(key: str, text: str, line_no: int) -> int:
    value = _parse_float(key, text, line_no)
    if int(value) != value:
        raise ConfigError(f"line {line_no}: {key} must be an integer, got {text!r}")
    return int(value)


def _config_from_scalars(scalars: dict, line_of: dict) -> ExperimentConfig:
    values = dict(_DEFAULTS)
    values.update(scalars)
    if values["ell"] < 1:
        raise ConfigError(f"line {line_of.get('ell', '?')}: ell must be >= 1")
    if values["g"] < 0:
        raise ConfigError(f"line {line_of.get('g', '?')}: g must be >= 0")
    if values["alpha_sq"] < 0:
        raise ConfigError(f"line {line_of.get('alpha_sq', '?')}: alpha_sq must be >= 0")
    if not 0.0 <= values["transmissivity"] <= 1.0:
        raise ConfigError(
            f"line {line_of.get('transmissivity', '?')}: transmissivity must lie in [0, 1]"
        )
    return ExperimentConfig(
        g=values["g"],
        ell=int(values["ell"]),
        alpha_mag=math.sqrt(values["alpha_sq"]),
        theta=values["theta"],
        phi=values["phi"],
        transmissivity=values["transmissivity"],
    )


def parse_config(text: str) -> ExperimentConfig | SweepSpec:
    """Parse a key=value config; returns a sweep when sweep axes are present.

    Unknown keys are rejected; parse errors carry line numbers and range
    violations name the offending field.
    """
    scalars: dict = {}
    line_of: dict = {}
    axes: list[SweepAxis] = []
    quantity: str | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in _SCALAR_KEYS:
            if key in scalars:
                raise ConfigError(f"line {line_no}: duplicate key {key}")
            if key == "ell":
                scalars[key] = _parse_int(key, value, line_no)
            else:
                scalars[key] = _parse_float(key, value, line_no)
            line_of[key] = line_no
        elif key == "quantity":
            if quantity is not None:
                raise ConfigError(f"line {line_no}: duplicate key quantity")
            if value not in QUANTITIES:
                raise ConfigError(
                    f"line {line_no}: unknown quantity {value!r} "
                    f"(expected one of {', '.join(QUANTITIES)})"
                )
            quantity = value
        elif key == "sweep":
            parts = value.split()
            if len(parts) != 4:
                raise ConfigError(
                    f"line {line_no}: sweep needs '<param> <start> <stop> <count>'"
                )
            name = parts[0]
            if name not in _AXIS_NAMES:
                raise ConfigError(f"line {line_no}: unknown sweep parameter {name!r}")
            if any(axis.name == name for axis in axes):
                raise ConfigError(f"line {line_no}: duplicate sweep axis {name!r}")
            if len(axes) >= 2:
                raise ConfigError(f"line {line_no}: at most 2 sweep axes are supported")
            start = _parse_float("sweep start", parts[1], line_no)
            stop = _parse_float("sweep stop", parts[2], line_no)
            count = _parse_int("sweep count", parts[3], line_no)
            if count < 1:
                raise ConfigError(f"line {line_no}: sweep count must be >= 1")
            axis = SweepAxis(name, start, stop, count)
            if name == "ell":
                for v in axis.values():
                    if abs(v - round(v)) > 1e-9 or round(v) < 1:
                        raise ConfigError(
                            f"line {line_no}: ell axis must produce positive integers"
                        )
            axes.append(axis)
        else:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")

    base = _config_from_scalars(scalars, line_of)
    if not axes and quantity is None:
        return base
    if not axes:
        raise ConfigError("quantity given but no sweep axes")
    if quantity is None:
        raise ConfigError("sweep axes given but no quantity")
    if quantity == "max_loss":
        for axis in axes:
            if axis.name not in _MAX_LOSS_AXES:
                raise ConfigError(
                    f"sweep axis {axis.name!r} not supported for max_loss "
                    f"(use one of {', '.join(_MAX_LOSS_AXES)})"
                )
    return SweepSpec(base=base, axes=tuple(axes), quantity=quantity)


def _alpha_sq_text(alpha_mag: float) -> str:
    # pick a representation whose sqrt round-trips to alpha_mag exactly
    v = alpha_mag * alpha_mag
    for cand in (v, math.nextafter(v, math.inf), math.nextafter(v, -math.inf)):
        if math.sqrt(cand) == alpha_mag:
            return repr(cand)
    return repr(v)


def render_config(config: ExperimentConfig) -> str:
    """Canonical config text; parse_config(render_config(c)) == c."""
    return "\n".join(
        [
            f"g = {config.g!r}",
            f"ell = {config.ell}",
            f"alpha_sq = {_alpha_sq_text(config.alpha_mag)}",
            f"theta = {config.theta!r}",
            f"phi = {config.phi!r}",
            f"transmissivity = {config.transmissivity!r}",
        ]
    )


def _with_axis_value(config: ExperimentConfig, name: str, value: float) -> ExperimentConfig:
    if name == "alpha_sq":
        return dataclasses.replace(config, alpha_mag=math.sqrt(value))
    if name == "ell":
        return dataclasses.replace(config, ell=int(round(value)))
    return dataclasses.replace(config, **{name: float(value)})


def _flag_for(value: float, flag: str = "") -> str:
    if flag:
        return flag
    if math.isinf(value):
        return "divergent"
    if math.isnan(value):
        return "non-finite"
    return ""


def _evaluate_quantity(quantity: str, config: ExperimentConfig, grid: int) -> tuple[float, str]:
    if quantity == "signal":
        return metrology.homodyne_mean_lossy(config), ""
    if quantity == "sensitivity":
        return metrology.sensitivity(config), ""
    if quantity == "sensitivity_lossy":
        return metrology.sensitivity_lossy(config), ""
    if quantity == "qcrb":
        return metrology.quantum_cramer_rao_bound(config), ""
    if quantity == "snl":
        return metrology.shot_noise_limit(config), ""
    if quantity == "hl":
        return metrology.heisenberg_limit(config), ""
    if quantity == "visibility":
        return metrology.visibility(config), ""
    if quantity == "max_loss":
        result = metrology.max_allowable_loss(config.g, config.ell, config.alpha_mag, grid=grid)
        return result.loss, "" if result.sub_snl_exists else "no-sub-snl-region"
    raise ConfigError(f"unknown quantity {quantity!r}")


def run_sweep(spec: SweepSpec, grid: int = 2048, max_workers: int | None = None) -> SweepResult:
    """Evaluate the grid; rows come back in lexicographic axis order.

    Points are evaluated concurrently but assembled in grid order, so output
    is deterministic.  Divergent values are flagged, not dropped; genuine
    evaluation errors are re-raised annotated with their grid coordinates.
    """
    axes = spec.axes
    value_grids = [axis.values() for axis in axes]
    points = [tuple(vals) for vals in _product(value_grids)]

    def evaluate(point: tuple) -> tuple:
        config = spec.base
        for axis, v in zip(axes, point):
            config = _with_axis_value(config, axis.name, v)
        coords = ", ".join(f"{axis.name}={v:g}" for axis, v in zip(axes, point))
        try:
            value, flag = _evaluate_quantity(spec.quantity, config, grid)
        except (ValueError, ArithmeticError) as exc:
            raise SweepError(f"{spec.quantity} failed at ({coords}): {exc}") from exc
        return point + (value, _flag_for(value, flag))

    if len(points) >= 64:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            rows = tuple(pool.map(evaluate, points))
    else:
        rows = tuple(evaluate(p) for p in points)

    metadata = {
        "quantity": spec.quantity,
        "config_sha256": hashlib.sha256(render_config(spec.base).encode()).hexdigest(),
        "axes": ";".join(f"{a.name}[{a.start:g}:{a.stop:g}:{a.count}]" for a in axes),
        "grid": str(grid),
    }
    columns = tuple(a.name for a in axes) + ("value", "flag")
    return SweepResult(columns=columns, rows=rows, metadata=metadata)


def _product(grids: Sequence[np.ndarray]):
    if len(grids) == 1:
        for v in grids[0]:
            yield (float(v),)
    else:
        for v in grids[0]:
            for w in grids[1]:
                yield (float(v), float(w))


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    return repr(float(value))


def to_csv(result: SweepResult, timestamp: bool = True) -> str:
    """Render a result as CSV with a '#'-prefixed metadata header.

    The generated-at line is the only non-deterministic one; everything else
    is byte-stable for identical inputs.
    """
    lines = [f"# oam-interferometry {__version__}"]
    for key, value in result.metadata.items():
        lines.append(f"# {key}={value}")
    lines.append("# angles=radians")
    if timestamp:
        lines.append(f"# generated={datetime.now(timezone.utc).isoformat()}")
    lines.append(",".join(result.columns))
    for row in result.rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


# --- figure datasets -------------------------------------------------------

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig6", "fig7", "fig8")

FIGURE_HELP = {
    "fig2": "homodyne signal vs rotation angle and input phase (g=1, ell=3, alpha_sq=10)",
    "fig3": "sensitivity vs rotation angle with the shot-noise line (g=2, ell=1, alpha_sq=100)",
    "fig4": "optimal sensitivity and quantum bound vs squeezing (ell=1; alpha_sq 10/100/1000)",
    "fig6": "lossy sensitivity vs rotation angle at T=0.62 (g=2, ell=1, alpha_sq=100)",
    "fig7": "maximum allowable loss at g=2, ell=1, alpha_sq=100 (single row)",
    "fig8": "maximum allowable loss vs squeezing (ell=1; alpha_sq 10/100/1000)",
}


def _figure_metadata(figure_id: str, quantity: str, params: str) -> dict:
    return {
        "figure": figure_id,
        "quantity": quantity,
        "config_sha256": hashlib.sha256(params.encode()).hexdigest(),
    }


def reproduce(figure_id: str, grid: int = 2048) -> SweepResult:
    """Emit the dataset behind a named figure with its parameters baked in."""
    if figure_id == "fig2":
        base = ExperimentConfig(g=1.0, ell=3, alpha_mag=math.sqrt(10.0), theta=0.0, phi=0.0)
        phis = np.linspace(-math.pi / 2.0, math.pi / 2.0, 101)
        thetas = np.linspace(-math.pi, math.pi, 81)
        rows = []
        for ph in phis:
            for th in thetas:
                cfg = dataclasses.replace(base, phi=float(ph), theta=float(th))
                value = metrology.homodyne_mean(cfg)
                rows.append((float(ph), float(th), value, _flag_for(value)))
        return SweepResult(
            ("phi", "theta", "value", "flag"),
            tuple(rows),
            _figure_metadata("fig2", "signal", "g=1,ell=3,alpha_sq=10"),
        )

    if figure_id in ("fig3", "fig6"):
        t = 1.0 if figure_id == "fig3" else 0.62
        base = ExperimentConfig(
            g=2.0, ell=1, alpha_mag=10.0, theta=math.pi / 2.0, phi=0.0, transmissivity=t
        )
        snl = metrology.shot_noise_limit(base)
        quantity = "sensitivity" if figure_id == "fig3" else "sensitivity_lossy"
        rows = []
        for ph in np.linspace(0.0, math.pi, 201):
            cfg = dataclasses.replace(base, phi=float(ph))
            value = (
                metrology.sensitivity(cfg) if figure_id == "fig3" else metrology.sensitivity_lossy(cfg)
            )
            rows.append((float(ph), quantity, value, _flag_for(value)))
            rows.append((float(ph), "snl", snl, ""))
        return SweepResult(
            ("phi", "quantity", "value", "flag"),
            tuple(rows),
            _figure_metadata(figure_id, quantity, f"g=2,ell=1,alpha_sq=100,theta=pi/2,T={t}"),
        )

    if figure_id == "fig4":
        rows = []
        for asq in (10.0, 100.0, 1000.0):
            amag = math.sqrt(asq)
            for g in np.linspace(0.25, 3.0, 56):
                cfg = ExperimentConfig(g=float(g), ell=1, alpha_mag=amag, theta=0.0, phi=0.0)
                sens = metrology.optimal_sensitivity(float(g), 1, amag)
                bound = metrology.quantum_cramer_rao_bound(cfg)
                rows.append((float(g), asq, "sensitivity_opt", sens, _flag_for(sens)))
                rows.append((float(g), asq, "qcrb", bound, _flag_for(bound)))
        return SweepResult(
            ("g", "alpha_sq", "quantity", "value", "flag"),
            tuple(rows),
            _figure_metadata("fig4", "sensitivity_opt+qcrb", "ell=1,alpha_sq=10|100|1000"),
        )

    if figure_id == "fig7":
        result = metrology.max_allowable_loss(2.0, 1, 10.0, grid=grid)
        flag = "" if result.sub_snl_exists else "no-sub-snl-region"
        rows = ((2.0, 1.0, 100.0, result.loss, flag),)
        return SweepResult(
            ("g", "ell", "alpha_sq", "value", "flag"),
            rows,
            _figure_metadata("fig7", "max_loss", "g=2,ell=1,alpha_sq=100"),
        )

    if figure_id == "fig8":
        rows = []
        for asq in (10.0, 100.0, 1000.0):
            amag = math.sqrt(asq)
            for g in np.linspace(0.5, 4.0, 36):
                result = metrology.max_allowable_loss(float(g), 1, amag, grid=grid)
                flag = "" if result.sub_snl_exists else "no-sub-snl-region"
                rows.append((float(g), asq, result.loss, flag))
        return SweepResult(
            ("g", "alpha_sq", "value", "flag"),
            tuple(rows),
            _figure_metadata("fig8", "max_loss", "ell=1,alpha_sq=10|100|1000"),
        )

    raise ConfigError(f"unknown figure {figure_id!r} (expected one of {', '.join(FIGURE_IDS)})")


# --- entry points ----------------------------------------------------------


def _read_config(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cmd_eval(args) -> int:
    config = _read_config(args.config)
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("eval expects a plain configuration, not sweep axes")
    report = metrology.evaluate(config)
    columns = (
        "g", "ell", "alpha_sq", "theta", "phi", "transmissivity",
        "signal", "fluctuation", "sensitivity", "snl", "hl", "qcrb", "visibility", "flag",
    )
    row = (
        config.g, float(config.ell), config.alpha_mag**2, config.theta, config.phi,
        config.transmissivity,
        report.signal_mean, report.fluctuation, report.sensitivity,
        report.snl, report.hl, report.qcrb, report.visibility,
        _flag_for(report.sensitivity),
    )
    result = SweepResult(
        columns,
        (row,),
        {
            "quantity": "report",
            "config_sha256": hashlib.sha256(render_config(config).encode()).hexdigest(),
        },
    )
    _emit(to_csv(result), args.out)
    return 0


def _cmd_sweep(args) -> int:
    spec = _read_config(args.config)
    if not isinstance(spec, SweepSpec):
        raise ConfigError("sweep expects a config with sweep axes and a quantity")
    result = run_sweep(spec, grid=args.grid)
    _emit(to_csv(result), args.out)
    return 0


def _cmd_reproduce(args) -> int:
    result = reproduce(args.figure, grid=args.grid)
    _emit(to_csv(result), args.out)
    return 0


def _cmd_max_loss(args) -> int:
    config = _read_config(args.config)
    if not isinstance(config, ExperimentConfig):
        raise ConfigError("max-loss expects a plain configuration, not sweep axes")
    result = metrology.max_allowable_loss(config.g, config.ell, config.alpha_mag, grid=args.grid)
    flag = "" if result.sub_snl_exists else "no-sub-snl-region"
    out = SweepResult(
        ("g", "ell", "alpha_sq", "value", "flag"),
        ((config.g, float(config.ell), config.alpha_mag**2, result.loss, flag),),
        {
            "quantity": "max_loss",
            "config_sha256": hashlib.sha256(render_config(config).encode()).hexdigest(),
        },
    )
    _emit(to_csv(out), args.out)
    return 0


def _cmd_validate(args) -> int:
    report = run_validation(args.preset)
    _emit(report.render() + "\n", args.out)
    return 0 if report.passed else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oam-interferometry",
        description=(
            "Angular-displacement estimation in an OAM-fed hybrid interferometer: "
            "homodyne signal, sensitivity, metrology benchmarks, loss robustness."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="path to a key=value config file")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument(
            "--grid", type=int, default=2048, help="optimum-search grid density per period"
        )

    p_eval = sub.add_parser("eval", help="full report for one working point")
    add_common(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_sweep = sub.add_parser("sweep", help="evaluate a quantity over 1 or 2 axes")
    add_common(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_rep = sub.add_parser("reproduce", help="emit a named figure dataset")
    p_rep.add_argument(
        "figure",
        choices=FIGURE_IDS,
        help="; ".join(f"{k}: {v}" for k, v in FIGURE_HELP.items()),
    )
    add_common(p_rep, config_required=False)
    p_rep.set_defaults(func=_cmd_reproduce)

    p_val = sub.add_parser("validate", help="cross-check closed forms, engine, and Fock force")
    p_val.add_argument("--preset", choices=("quick", "full"), default="quick")
    p_val.add_argument("--out", default=None, help="output path (default: stdout)")
    p_val.set_defaults(func=_cmd_validate)

    p_ml = sub.add_parser("max-loss", help="maximum allowable loss for a working point")
    add_common(p_ml)
    p_ml.set_defaults(func=_cmd_max_loss)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; the contract reserves 2 for
        # validation failures, so usage problems map to 1
        return 0 if exc.code in (0, None) else 1
    print("note: theta and phi are interpreted as radians", file=sys.stderr)
    try:
        return args.func(args)
    except (ConfigError, SweepError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
