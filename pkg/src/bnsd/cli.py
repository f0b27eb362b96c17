"""Command-line front end.

Examples::

    bnsd eval --state ghz --gamma 1 --t 0 --op svetlichny --theta-bc -0.7853981634
    bnsd critical --state ghz --gamma 1 --op p5
    bnsd sweep --state state.json --gamma 1 --t 0:1:11 --op all --format csv
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis
from .errors import BnsdError, NumericalFailure
from .operators import OPERATOR_NAMES, InPlaneSettings, build_operator, classical_bound
from .states import as_generic, load_state, relative_phase, state_to_spec
from .wwzb import classified_family, family_dump, locality_verdict

COMMANDS = ("eval", "sweep", "critical", "wwzb", "optimize", "dump-family")
CSV_HEADER = ("t", "operator", "value", "bound", "violated", "theta_bc_alpha")

EXIT_OK = 0
EXIT_BAD_CONFIG = 2
EXIT_NUMERICAL = 3


class BadConfig(BnsdError, ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    state_source: str = "ghz"
    gamma_rate: float = 1.0
    times: tuple[float, ...] = (0.0,)
    time_is_grid: bool = False
    operators: tuple[str, ...] = OPERATOR_NAMES
    theta_b: float | None = None
    theta_c: float | None = None
    theta_bc: float | None = None
    mode: str = "in-plane"
    seed: int = 0
    output_format: str = "json"
    out: str | None = None

    def settings(self) -> InPlaneSettings:
        if self.theta_bc is not None:
            return InPlaneSettings(self.theta_bc, 0.0)
        return InPlaneSettings(self.theta_b or 0.0, self.theta_c or 0.0)

    @property
    def explicit_settings(self) -> bool:
        return any(v is not None for v in (self.theta_b, self.theta_c, self.theta_bc))


def parse_time(text: str) -> tuple[tuple[float, ...], bool]:
    """``t`` or ``min:max:steps``."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            t = float(parts[0])
            if not (math.isfinite(t) and t >= 0):
                raise BadConfig(f"time must be a nonnegative number, got {text!r}")
            return (t,), False
        if len(parts) == 3:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        else:
            raise ValueError
    except ValueError:
        raise BadConfig(f"cannot parse time {text!r}; use t or min:max:steps") from None
    if steps < 2 or lo < 0 or not hi > lo:
        raise BadConfig("time grid needs steps >= 2, min >= 0 and max > min")
    return tuple(float(t) for t in np.linspace(lo, hi, steps)), True


def parse_operators(text: str) -> tuple[str, ...]:
    if text == "all":
        return OPERATOR_NAMES
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    unknown = [n for n in names if n not in OPERATOR_NAMES]
    if unknown or not names:
        raise BadConfig(f"unknown operator(s) {unknown}; choose from {', '.join(OPERATOR_NAMES)} or all")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bnsd", description="Bell nonlocality of three qubits under local phase noise.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--state", default="ghz", help="preset (ghz, w, zero) or JSON file")
    parser.add_argument("--gamma", type=float, default=1.0, help="local dephasing rate")
    parser.add_argument("--t", default="0", help="time t, or grid min:max:steps")
    parser.add_argument("--op", default="all", help="operator name, comma list, or all")
    parser.add_argument("--theta-b", type=float, help="rotation of B's observables (radians)")
    parser.add_argument("--theta-c", type=float, help="rotation of C's observables (radians)")
    parser.add_argument("--theta-bc", type=float, help="theta_B + theta_C; sets theta_C = 0")
    parser.add_argument("--mode", choices=("in-plane", "bloch"), default="in-plane")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=("csv", "json"), default="json")
    parser.add_argument("--out", help="output file (default: standard output)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    times, is_grid = parse_time(args.t)
    if not (math.isfinite(args.gamma) and args.gamma > 0):
        raise BadConfig("--gamma must be positive")
    if args.theta_bc is not None and (args.theta_b is not None or args.theta_c is not None):
        raise BadConfig("--theta-bc cannot be combined with --theta-b/--theta-c")
    if is_grid and args.command != "sweep":
        raise BadConfig(f"{args.command} takes a single time, not a grid")
    if args.command == "dump-family" and args.format == "csv":
        raise BadConfig("dump-family only writes JSON")
    return RunConfig(
        command=args.command, state_source=args.state, gamma_rate=args.gamma,
        times=times, time_is_grid=is_grid, operators=parse_operators(args.op),
        theta_b=args.theta_b, theta_c=args.theta_c, theta_bc=args.theta_bc,
        mode=args.mode, seed=args.seed, output_format=args.format, out=args.out,
    )


# -- serialization -----------------------------------------------------------------

def num(x):
    """Round to 12 significant digits; None passes through."""
    if x is None or isinstance(x, (bool, str)):
        return x
    return float(format(float(x), ".12g"))


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _json(payload) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _row_dict(row) -> dict:
    return {k: num(v) if k != "operator" else v for k, v in zip(CSV_HEADER, row)}


def _emit_rows(config, rows, extra) -> str:
    if config.output_format == "csv":
        return _csv(CSV_HEADER, rows)
    return _json({**extra, "rows": [_row_dict(r) for r in rows]})


# -- commands ----------------------------------------------------------------------

def _alpha(state):
    generic = as_generic(state)
    if generic is None or generic.corner_product == 0:
        return None
    return relative_phase(generic)


def _header(config, state) -> dict:
    return {"command": config.command, "state": state_to_spec(state),
            "gamma": num(config.gamma_rate)}


def cmd_eval(config, state) -> str:
    t = config.times[0]
    rho = analysis.evolve_checked(state, config.gamma_rate, t)
    settings = config.settings()
    alpha = _alpha(state)
    theta = None if alpha is None else settings.theta_bc_alpha(alpha)
    rows = []
    for name in config.operators:
        op = build_operator(name, settings)
        value = op.expectation(rho)
        rows.append((t, name, value, op.classical_bound, op.violated_by(value), theta))
    extra = _header(config, state) | {"t": num(t), "theta_b": num(settings.theta_b),
                                      "theta_c": num(settings.theta_c)}
    return _emit_rows(config, rows, extra)


def cmd_sweep(config, state) -> str:
    rows = [(r.t, r.operator, r.value, r.bound, r.violated, r.theta_bc_alpha)
            for r in analysis.sweep(state, config.gamma_rate, config.times,
                                    config.operators, config.mode, config.seed)]
    extra = _header(config, state) | {"mode": config.mode, "seed": config.seed}
    return _emit_rows(config, rows, extra)


def cmd_critical(config, state) -> str:
    reports = [analysis.critical_time(name, state, config.gamma_rate)
               for name in config.operators]
    rows = [(r.operator_name, num(r.analytic_t), num(r.numeric_t), r.settings_policy)
            for r in reports]
    if config.output_format == "csv":
        return _csv(("operator", "analytic_t", "numeric_t", "settings_policy"), rows)
    keys = ("operator", "analytic_t", "numeric_t", "settings_policy")
    return _json(_header(config, state) | {"reports": [dict(zip(keys, r)) for r in rows]})


def cmd_optimize(config, state) -> str:
    rho = analysis.evolve_checked(state, config.gamma_rate, config.times[0])
    results = []
    for name in config.operators:
        mode = "in-plane" if name == "chsh-bipartition" else config.mode
        results.append(analysis.optimize_settings(name, rho, mode, state, seed=config.seed))
    if config.output_format == "csv":
        rows = [(config.times[0], r.operator_name, r.max_abs, classical_bound(r.operator_name),
                 r.max_abs > classical_bound(r.operator_name) + analysis.VIOLATION_TOL,
                 r.theta_bc_alpha) for r in results]
        return _csv(CSV_HEADER, rows)
    out = []
    for r in results:
        entry = {"operator": r.operator_name, "maximum": num(r.max_abs), "value": num(r.value),
                 "bound": num(classical_bound(r.operator_name)), "method": r.method}
        if isinstance(r.settings, InPlaneSettings):
            entry |= {"theta_b": num(r.settings.theta_b), "theta_c": num(r.settings.theta_c),
                      "theta_bc_alpha": num(r.theta_bc_alpha)}
        else:
            entry |= {"directions": [[[num(v) for v in vec] for vec in party]
                                     for party in r.settings.directions],
                      "gradient_norm": num(r.gradient_norm), "seed": r.seed}
        out.append(entry)
    return _json(_header(config, state) | {"t": num(config.times[0]), "mode": config.mode,
                                           "results": out})


def cmd_wwzb(config, state) -> str:
    rho = analysis.evolve_checked(state, config.gamma_rate, config.times[0])
    family = classified_family()
    if config.explicit_settings:
        settings = config.settings()
    else:
        settings = analysis.optimize_family(rho).settings
    report = locality_verdict(rho, settings, family)
    if config.output_format == "csv":
        rows = [(i, ineq.class_id, float(v), bool(abs(v) > 2 + analysis.VIOLATION_TOL))
                for i, (ineq, v) in enumerate(zip(family, report.values))]
        return _csv(("index", "class", "value", "violated"), rows)
    return _json(_header(config, state) | {
        "t": num(config.times[0]),
        "settings": {"theta_b": num(settings.theta_b), "theta_c": num(settings.theta_c),
                     "optimized": not config.explicit_settings},
        "max_value": num(report.max_value),
        "max_violation": num(report.max_violation),
        "violating_count": report.violating_count,
        "is_fully_local_at_settings": report.is_fully_local_at_settings,
        "values": [num(v) for v in report.values],
    })


def cmd_dump_family(config, state) -> str:
    return _json(family_dump(classified_family()))


HANDLERS = {
    "eval": cmd_eval, "sweep": cmd_sweep, "critical": cmd_critical,
    "wwzb": cmd_wwzb, "optimize": cmd_optimize, "dump-family": cmd_dump_family,
}


def run(config: RunConfig) -> tuple[int, str]:
    """Execute a validated config; returns (exit status, report or error text)."""
    try:
        state = load_state(config.state_source)
        return EXIT_OK, HANDLERS[config.command](config, state)
    except NumericalFailure as exc:
        return EXIT_NUMERICAL, f"numerical failure: {exc}\n"
    except BnsdError as exc:
        return EXIT_BAD_CONFIG, f"error: {exc}\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = config_from_args(args)
    except BnsdError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BAD_CONFIG
    status, text = run(config)
    if status != EXIT_OK:
        sys.stderr.write(text)
        return status
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
