"""Command-line front end: ``qbattery <subcommand> [options]``.

Exit codes: 0 success, 1 invalid input, 2 integration failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bath import DEFAULT_BETA, DEFAULT_ETA_G2, DEFAULT_OMEGA_C, BathSpec, rate_arrays, spectral_rate
from .dynamics import evolve
from .errors import DomainError, IntegrationError, OutputError, QBatteryError
from .hamiltonian import DriveSchedule, eigenvectors, m_coupling
from .lindblad import Variant
from .observables import BatterySpec, record
from .sweep import (SweepConfig, Table, distance_trace, emit, render, sweep_coupling,
                    sweep_temperature, sweep_tf)

EXIT_OK, EXIT_INVALID, EXIT_INTEGRATION, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("qbattery")


class UsageError(DomainError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with status 2, which is reserved for integration failures
    def error(self, message):
        raise UsageError(message)


def parse_number(text: str) -> float:
    """Float literal, or a quotient such as ``1/2.6``."""
    text = str(text).strip()
    try:
        if "/" in text:
            num, den = text.split("/", 1)
            return float(num) / float(den)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a number: {text!r}") from None


def read_config(path) -> dict[str, list[str]]:
    """Flat ``key = value`` file; repeated keys accumulate into lists, ``#`` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    values: dict[str, list[str]] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        values.setdefault(key.replace("-", "_"), []).append(value)
    return values


# keys that may hold several values (grids); everything else takes the last value
_LIST_KEYS = ("tf", "eta_g2", "beta", "omega_a", "omega_b")


def _merged(args) -> dict[str, list[str]]:
    """Config-file values overridden by anything given on the command line."""
    merged = read_config(args.config) if args.config else {}
    for key, value in vars(args).items():
        if key in ("command", "config", "func") or value is None:
            continue
        merged[key] = [str(v) for v in value] if isinstance(value, list) else [str(value)]
    return merged


def _num(opts, key, default):
    vals = opts.get(key)
    return parse_number(vals[-1]) if vals else default


def _nums(opts, key, default):
    vals = opts.get(key)
    return tuple(parse_number(v) for v in vals) if vals else default


def _int(opts, key, default):
    vals = opts.get(key)
    if not vals:
        return default
    try:
        return int(vals[-1])
    except ValueError:
        raise DomainError(f"{key} must be an integer, got {vals[-1]!r}") from None


def _text(opts, key, default):
    vals = opts.get(key)
    return vals[-1] if vals else default


def _flag(opts, key, default):
    vals = opts.get(key)
    if not vals:
        return default
    word = vals[-1].strip().lower()
    if word in ("1", "true", "yes", "on"):
        return True
    if word in ("0", "false", "no", "off"):
        return False
    raise DomainError(f"{key} must be a boolean, got {vals[-1]!r}")


def _levels(opts) -> BatterySpec:
    text = _text(opts, "lambda", None)
    if text is None:
        return BatterySpec()
    return BatterySpec(tuple(parse_number(v) for v in text.split(",")))


def _pairs(opts) -> tuple[tuple[float, float], ...]:
    a = _nums(opts, "omega_a", (1.0,))
    b = _nums(opts, "omega_b", (1.0,))
    if len(a) == 1:
        a = a * len(b)
    if len(b) == 1:
        b = b * len(a)
    if len(a) != len(b):
        raise DomainError(f"--omega-a and --omega-b give {len(a)} and {len(b)} values")
    return tuple(zip(a, b))


def build_config(opts) -> SweepConfig:
    return SweepConfig(
        tf=_nums(opts, "tf", ()),
        tf_min=_num(opts, "tf_min", 0.1),
        tf_max=_num(opts, "tf_max", 5000.0),
        tf_points=_int(opts, "tf_points", 60),
        eta_g2=_nums(opts, "eta_g2", (DEFAULT_ETA_G2,)),
        beta=_nums(opts, "beta", (DEFAULT_BETA,)),
        omega_pairs=_pairs(opts),
        omega_c=_num(opts, "omega_c", DEFAULT_OMEGA_C),
        cross_correlated=not _flag(opts, "no_cross", False),
        battery=_levels(opts),
        variant=Variant.parse(_text(opts, "variant", "full")),
        ordering=_text(opts, "ordering", "charge"),
        steps=_int(opts, "steps", None),
        refine=not _flag(opts, "no_refine", False),
        format=_text(opts, "format", "csv"),
        out=_text(opts, "out", None),
        workers=_int(opts, "workers", 1),
    )


def _single(config: SweepConfig) -> tuple[DriveSchedule, BathSpec]:
    (wa, wb), = config.omega_pairs[:1]
    sched = DriveSchedule(wa, wb, config.ordering)
    bath = BathSpec(config.eta_g2[0], config.beta[0], config.omega_c, config.cross_correlated)
    return sched, bath


def _s_grid(opts) -> np.ndarray:
    points = _int(opts, "points", 101)
    if points < 2:
        raise DomainError(f"points must be >= 2, got {points}")
    return np.linspace(0.0, 1.0, points)


def cmd_eigen(config, opts) -> Table:
    sched, _ = _single(config)
    s = _s_grid(opts)
    a, b = sched.amplitudes(s)
    gap = np.hypot(a, b)
    v = eigenvectors(sched, s)
    m = m_coupling(sched, s)
    cols = ["s", "a", "b", "gap", "m"] + [f"v{i + 1}{j + 1}" for i in range(3) for j in range(3)]
    rows = []
    for k in range(len(s)):
        row = dict(s=s[k], a=a[k], b=b[k], gap=gap[k], m=m[k])
        row.update({f"v{i + 1}{j + 1}": v[k, i, j] for i in range(3) for j in range(3)})
        rows.append(row)
    return Table(tuple(cols), rows)


def cmd_spectral(config, opts) -> Table:
    _, bath = _single(config)
    lo = _num(opts, "omega_min", -bath.omega_c)
    hi = _num(opts, "omega_max", 3.0 * bath.omega_c)
    points = _int(opts, "points", 401)
    if not (hi > lo and points >= 2):
        raise DomainError("need omega_max > omega_min and points >= 2")
    w = np.linspace(lo, hi, points)
    g = spectral_rate(bath, w)
    rows = [dict(omega=w[k], omega_over_omega_c=w[k] / bath.omega_c, gamma=g[k])
            for k in range(points)]
    return Table(("omega", "omega_over_omega_c", "gamma"), rows)


def cmd_rates(config, opts) -> Table:
    sched, bath = _single(config)
    s = _s_grid(opts)
    # the gap closes only for zero amplitudes, which the schedule rejects
    x, y = rate_arrays(bath, sched, s)
    a, b = sched.amplitudes(s)
    names = [f"x{i}" for i in range(1, 11)] + [f"y{i}" for i in range(1, 5)]
    rows = []
    for k in range(len(s)):
        row = dict(s=s[k], gap=math.hypot(a[k], b[k]))
        row.update(zip(names, np.concatenate([x[k], y[k]])))
        rows.append(row)
    return Table(("s", "gap", *names), rows)


def cmd_evolve(config, opts) -> Table:
    sched, bath = _single(config)
    tf = config.tf[0] if config.tf else 9.93
    traj = evolve(sched, bath, tf, config.variant, steps=config.steps)
    recs = record(traj, sched, bath, config.battery)
    rho_cols = [f"rho{i + 1}{j + 1}_{part}" for i in range(3) for j in range(3)
                for part in ("re", "im")]
    cols = ("s", "tf", *rho_cols, "dark_population", "stored_energy", "ergotropy",
            "efficiency", "trace_distance")
    rows = []
    for rho, rec in zip(traj.rho, recs):
        row = dict(s=rec.s, tf=tf)
        for i in range(3):
            for j in range(3):
                row[f"rho{i + 1}{j + 1}_re"] = rho[i, j].real
                row[f"rho{i + 1}{j + 1}_im"] = rho[i, j].imag
        row.update(dark_population=rec.dark_population, stored_energy=rec.stored_energy,
                   ergotropy=rec.ergotropy, efficiency=rec.efficiency,
                   trace_distance=rec.trace_distance_to_gibbs)
        rows.append(row)
    return Table(cols, rows)


def cmd_sweep_tf(config, opts):
    return sweep_tf(config).table()


def cmd_sweep_coupling(config, opts):
    return sweep_coupling(config).optima_table()


def cmd_sweep_temp(config, opts):
    if not config.tf:
        config = replace(config, tf=(9.93,))
    return sweep_temperature(config).table()


def cmd_distance(config, opts):
    return distance_trace(config)


COMMANDS = {
    "eigen": (cmd_eigen, "eigenvalues, eigenvectors and M(s) on an s grid"),
    "spectral-density": (cmd_spectral, "Ohmic rate gamma(omega) table"),
    "rates": (cmd_rates, "master-equation rates x1..x10, y1..y4 on an s grid"),
    "evolve": (cmd_evolve, "one trajectory with observables at every sample"),
    "sweep-tf": (cmd_sweep_tf, "final observables over a t_f grid, with the optimum"),
    "sweep-coupling": (cmd_sweep_coupling, "optimal t_f for each coupling"),
    "sweep-temp": (cmd_sweep_temp, "final observables at fixed t_f for each beta"),
    "distance": (cmd_distance, "trace distance to the Gibbs state along a trajectory"),
}


def _add_common(p: argparse.ArgumentParser):
    grid = dict(action="append", default=None)
    p.add_argument("--omega-a", **grid, help="peak amplitude of A (repeatable)")
    p.add_argument("--omega-b", **grid, help="peak amplitude of B (repeatable)")
    p.add_argument("--eta-g2", **grid, help="bath coupling eta*g^2 (repeatable)")
    p.add_argument("--beta", **grid, help="inverse temperature, e.g. 1/2.6 (repeatable)")
    p.add_argument("--omega-c", help="bath cutoff frequency")
    p.add_argument("--tf", **grid, help="total evolution time (repeatable)")
    p.add_argument("--tf-min", help="lower end of the log t_f range")
    p.add_argument("--tf-max", help="upper end of the log t_f range")
    p.add_argument("--tf-points", help="points in the log t_f range")
    p.add_argument("--steps", help="RK4 steps per trajectory")
    p.add_argument("--variant", choices=["full", "adiabatic"])
    p.add_argument("--ordering", help="charge (default) or discharge")
    p.add_argument("--lambda", dest="lambda", help="bare levels, e.g. 0,1,1.95")
    p.add_argument("--no-cross", action="store_const", const="1",
                   help="drop the x-z cross-correlated rates")
    p.add_argument("--no-refine", action="store_const", const="1",
                   help="skip the golden-section refinement")
    p.add_argument("--points", help="grid size for eigen, rates, spectral-density")
    p.add_argument("--omega-min", help="spectral-density lower frequency")
    p.add_argument("--omega-max", help="spectral-density upper frequency")
    p.add_argument("--format", choices=["csv", "json"])
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--workers", help="worker processes for sweeps")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qbattery", description="Adiabatic charging of an open three-level battery.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        _add_common(sub.add_parser(name, help=help_text, description=help_text))
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        opts = _merged(args)
        config = build_config(opts)
        table = COMMANDS[args.command][0](config, opts)
        if config.out:
            emit(table, config.format, config.out)
        else:
            sys.stdout.write(render(table, config.format))
    except OutputError as exc:
        print(f"qbattery: {exc}", file=sys.stderr)
        return EXIT_IO
    except IntegrationError as exc:
        print(f"qbattery: integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except (DomainError, ValueError) as exc:
        print(f"qbattery: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except QBatteryError as exc:
        print(f"qbattery: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
