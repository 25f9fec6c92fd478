"""Parameter sweeps over the charging time, bath coupling and temperature.

Every sweep cell (one parameter tuple, one t_f) is an independent evolution.
Cells run in a process pool; results are sorted by their parameter tuple
before anything is emitted, so output does not depend on the worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bath import DEFAULT_BETA, DEFAULT_ETA_G2, DEFAULT_OMEGA_C, BathSpec
from .dynamics import DensityMatrix, evolve
from .errors import DomainError, IntegrationError, OutputError, QBatteryError
from .hamiltonian import DriveSchedule, Ordering, adiabatic_bounds, dimensionless_time
from .lindblad import Variant
from .observables import BatterySpec, final_record, record

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SweepConfig:
    tf: tuple[float, ...] = ()        # explicit t_f values; empty -> log range below
    tf_min: float = 0.1
    tf_max: float = 5000.0
    tf_points: int = 60
    eta_g2: tuple[float, ...] = (DEFAULT_ETA_G2,)
    beta: tuple[float, ...] = (DEFAULT_BETA,)
    omega_pairs: tuple[tuple[float, float], ...] = ((1.0, 1.0),)
    omega_c: float = DEFAULT_OMEGA_C
    cross_correlated: bool = True
    battery: BatterySpec = field(default_factory=BatterySpec)
    variant: Variant = Variant.FULL
    ordering: Ordering = Ordering.CHARGE
    steps: int | None = None
    refine: bool = True
    refine_candidates: int = 3
    refine_rtol: float = 1e-2
    format: str = "csv"
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "ordering", Ordering.parse(self.ordering))
        object.__setattr__(self, "tf", tuple(float(t) for t in self.tf))
        object.__setattr__(self, "eta_g2", tuple(float(v) for v in self.eta_g2))
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "omega_pairs",
                           tuple((float(a), float(b)) for a, b in self.omega_pairs))
        if not self.eta_g2 or not self.beta or not self.omega_pairs:
            raise DomainError("parameter grids must be nonempty")
        if any(t <= 0 or not math.isfinite(t) for t in self.tf):
            raise DomainError(f"tf values must be positive, got {self.tf}")
        if not self.tf and not (0 < self.tf_min < self.tf_max and self.tf_points >= 2):
            raise DomainError("tf range needs 0 < tf_min < tf_max and tf_points >= 2")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        # fail early on invalid physical parameters
        for wa, wb in self.omega_pairs:
            DriveSchedule(wa, wb, self.ordering)
        for eta in self.eta_g2:
            for beta in self.beta:
                BathSpec(eta, beta, self.omega_c)

    def tf_grid(self) -> tuple[float, ...]:
        if self.tf:
            return tuple(sorted(set(self.tf)))
        return tuple(float(t) for t in np.geomspace(self.tf_min, self.tf_max, self.tf_points))

    def groups(self) -> list["Group"]:
        return [Group(wa, wb, eta, beta)
                for wa, wb in self.omega_pairs for eta in self.eta_g2 for beta in self.beta]


@dataclass(frozen=True, order=True)
class Group:
    omega_a: float
    omega_b: float
    eta_g2: float
    beta: float


@dataclass(frozen=True)
class SweepRow:
    omega_a: float
    omega_b: float
    eta_g2: float
    beta: float
    omega_c: float
    ordering: str
    variant: str
    tf: float
    tf_dimensionless: float
    stage: str
    dark_population: float
    stored_energy: float
    ergotropy: float
    efficiency: float | None
    trace_distance: float
    tf_gap_bound: float
    tf_bath_bound: float
    steps: int
    argmax_dark: bool = False
    argmax_energy: bool = False
    error: str = ""

    @property
    def group(self) -> Group:
        return Group(self.omega_a, self.omega_b, self.eta_g2, self.beta)

    @property
    def ok(self) -> bool:
        return not self.error

    def sort_key(self):
        return (self.omega_a, self.omega_b, self.eta_g2, self.beta, self.tf, self.stage)


COLUMNS = tuple(f.name for f in fields(SweepRow))


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: list[dict]


@dataclass(frozen=True)
class SweepResult:
    rows: list[SweepRow]
    optima: list[SweepRow]  # best dark population per parameter group

    @property
    def optimal(self) -> SweepRow:
        if not self.optima:
            raise DomainError("sweep has no optimum")
        return self.optima[0]

    def optimum_for(self, **params) -> SweepRow:
        for row in self.optima:
            if all(getattr(row, k) == v for k, v in params.items()):
                return row
        raise KeyError(params)

    def table(self) -> Table:
        return Table(COLUMNS, [_row_dict(r) for r in self.rows])

    def optima_table(self) -> Table:
        return Table(COLUMNS, [_row_dict(r) for r in self.optima])


def _row_dict(row: SweepRow) -> dict:
    return {name: getattr(row, name) for name in COLUMNS}


# -- cell evaluation -------------------------------------------------------

@dataclass(frozen=True)
class _Cell:
    group: Group
    omega_c: float
    cross: bool
    levels: tuple[float, float, float]
    variant: Variant
    ordering: Ordering
    steps: int | None
    tf: float
    stage: str


def _cell(config: SweepConfig, group: Group, tf: float, stage: str) -> _Cell:
    return _Cell(group, config.omega_c, config.cross_correlated, config.battery.levels,
                 config.variant, config.ordering, config.steps, float(tf), stage)


def _run_cell(cell: _Cell) -> SweepRow:
    g = cell.group
    sched = DriveSchedule(g.omega_a, g.omega_b, cell.ordering)
    bath = BathSpec(g.eta_g2, g.beta, cell.omega_c, cell.cross)
    spec = BatterySpec(cell.levels)
    tf_gap, tf_bath = adiabatic_bounds(sched, bath)
    base = dict(omega_a=g.omega_a, omega_b=g.omega_b, eta_g2=g.eta_g2, beta=g.beta,
                omega_c=cell.omega_c, ordering=cell.ordering.value, variant=cell.variant.value,
                tf=cell.tf, tf_dimensionless=float(dimensionless_time(sched, cell.tf)),
                stage=cell.stage, tf_gap_bound=tf_gap, tf_bath_bound=tf_bath)
    try:
        traj = evolve(sched, bath, cell.tf, cell.variant, steps=cell.steps)
        rec = final_record(traj, sched, bath, spec)
    except QBatteryError as exc:
        nan = math.nan
        return SweepRow(**base, dark_population=nan, stored_energy=nan, ergotropy=nan,
                        efficiency=None, trace_distance=nan, steps=0,
                        error=f"{type(exc).__name__}: {exc}")
    return SweepRow(**base, dark_population=rec.dark_population,
                    stored_energy=rec.stored_energy, ergotropy=rec.ergotropy,
                    efficiency=rec.efficiency, trace_distance=rec.trace_distance_to_gibbs,
                    steps=traj.steps)


@dataclass(frozen=True)
class _Refinement:
    config: SweepConfig
    group: Group
    lo: float
    hi: float


def _score(row: SweepRow) -> float:
    return row.dark_population if row.ok else -math.inf


def _run_refinement(task: _Refinement) -> list[SweepRow]:
    """Golden-section search for the dark-population maximum on [lo, hi] in log t_f."""
    rows = []

    def f(log_tf):
        row = _run_cell(_cell(task.config, task.group, math.exp(log_tf), "refine"))
        rows.append(row)
        return _score(row)

    a, b = math.log(task.lo), math.log(task.hi)
    tol = math.log1p(task.config.refine_rtol)
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return rows


def _map(fn, tasks, workers: int) -> list:
    tasks = list(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _candidates(rows: list[SweepRow], k: int) -> list[tuple[float, float]]:
    """Brackets around the k best local maxima of the coarse t_f curve."""
    rows = sorted(rows, key=lambda r: r.tf)
    vals = [_score(r) for r in rows]
    n = len(rows)
    peaks = []
    for i in range(n):
        if vals[i] == -math.inf:
            continue
        left = vals[i - 1] if i > 0 else -math.inf
        right = vals[i + 1] if i < n - 1 else -math.inf
        if vals[i] >= left and vals[i] >= right:
            peaks.append(i)
    peaks.sort(key=lambda i: (-vals[i], rows[i].tf))
    brackets = []
    for i in peaks[:k]:
        lo = rows[max(i - 1, 0)].tf
        hi = rows[min(i + 1, n - 1)].tf
        if hi > lo:
            brackets.append((lo, hi))
    return brackets


def _mark_optima(rows: list[SweepRow]) -> tuple[list[SweepRow], list[SweepRow]]:
    by_group: dict[Group, list[int]] = {}
    for i, r in enumerate(rows):
        by_group.setdefault(r.group, []).append(i)
    rows = list(rows)
    optima = []
    for group in sorted(by_group):
        idx = [i for i in by_group[group] if rows[i].ok]
        if not idx:
            continue
        best = max(idx, key=lambda i: (rows[i].dark_population, -rows[i].tf))
        best_e = max(idx, key=lambda i: (rows[i].stored_energy, -rows[i].tf))
        rows[best_e] = replace(rows[best_e], argmax_energy=True)
        rows[best] = replace(rows[best], argmax_dark=True)
        optima.append(rows[best])
    return rows, optima


def _finish(rows: list[SweepRow]) -> SweepResult:
    if rows and not any(r.ok for r in rows):
        raise IntegrationError(f"all {len(rows)} sweep cells failed; first: {rows[0].error}")
    rows = sorted(rows, key=SweepRow.sort_key)
    rows, optima = _mark_optima(rows)
    return SweepResult(rows=rows, optima=optima)


def sweep_tf(config: SweepConfig) -> SweepResult:
    """Final observables over the t_f grid for every parameter group, plus the optimum.

    The coarse grid is followed by a golden-section refinement around the
    best few local maxima of the final dark population.
    """
    grid = config.tf_grid()
    cells = [_cell(config, g, tf, "grid") for g in config.groups() for tf in grid]
    rows = _map(_run_cell, cells, config.workers)
    if config.refine and len(grid) > 1:
        tasks = []
        for group in config.groups():
            mine = [r for r in rows if r.group == group]
            for lo, hi in _candidates(mine, config.refine_candidates):
                tasks.append(_Refinement(config, group, lo, hi))
        for extra in _map(_run_refinement, tasks, config.workers):
            rows.extend(extra)
    return _finish(rows)


def sweep_coupling(config: SweepConfig) -> SweepResult:
    """t_f sweep for each coupling in ``config.eta_g2``; optima give t_f^opt(eta g^2)."""
    return sweep_tf(config)


def sweep_temperature(config: SweepConfig) -> SweepResult:
    """Final observables at fixed t_f (``config.tf``) for each inverse temperature."""
    if not config.tf:
        raise DomainError("temperature sweep needs explicit tf values")
    cells = [_cell(config, g, tf, "fixed") for g in config.groups() for tf in config.tf_grid()]
    rows = _map(_run_cell, cells, config.workers)
    return _finish(rows)


def is_nonincreasing(values, rtol: float = 0.0) -> bool:
    """True when each value is at most the previous one times (1 + rtol)."""
    vals = list(values)
    return all(b <= a * (1.0 + rtol) for a, b in zip(vals, vals[1:]))


DISTANCE_COLUMNS = ("omega_a", "omega_b", "eta_g2", "beta", "tf", "s", "trace_distance",
                    "dark_population", "stored_energy", "ergotropy", "efficiency")


def distance_trace(config: SweepConfig, tf: float | None = None,
                   rho0: DensityMatrix | None = None, freeze_at: float | None = None) -> Table:
    """Trace distance between rho(s) and the instantaneous Gibbs state along one run.

    Uses the first parameter group. Without ``tf`` (and without a single
    configured t_f) the optimal t_f is located with :func:`sweep_tf` first.
    """
    group = config.groups()[0]
    if tf is None:
        if len(config.tf) == 1:
            tf = config.tf[0]
        else:
            single = replace(config, eta_g2=(group.eta_g2,), beta=(group.beta,),
                             omega_pairs=((group.omega_a, group.omega_b),))
            tf = sweep_tf(single).optimal.tf
    sched = DriveSchedule(group.omega_a, group.omega_b, config.ordering, freeze_at)
    bath = BathSpec(group.eta_g2, group.beta, config.omega_c, config.cross_correlated)
    traj = evolve(sched, bath, tf, config.variant, rho0, steps=config.steps)
    rows = []
    for rec in record(traj, sched, bath, config.battery):
        rows.append(dict(omega_a=group.omega_a, omega_b=group.omega_b, eta_g2=group.eta_g2,
                         beta=group.beta, tf=float(tf), s=rec.s,
                         trace_distance=rec.trace_distance_to_gibbs,
                         dark_population=rec.dark_population, stored_energy=rec.stored_energy,
                         ergotropy=rec.ergotropy, efficiency=rec.efficiency))
    return Table(DISTANCE_COLUMNS, rows)


# -- output ----------------------------------------------------------------

def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (float, np.floating)):
        return format(float(value) + 0.0, ".12g")  # + 0.0 folds -0 into 0
    return str(value)


def _json_cell(value):
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def render(table: Table | SweepResult, fmt: str = "csv") -> str:
    if isinstance(table, SweepResult):
        table = table.table()
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_csv_cell(row.get(c)) for c in table.columns])
        return buf.getvalue()
    if fmt == "json":
        payload = {"columns": list(table.columns),
                   "rows": [{c: _json_cell(row.get(c)) for c in table.columns}
                            for row in table.rows]}
        return json.dumps(payload, indent=2, allow_nan=False) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def emit(table: Table | SweepResult, fmt: str, path) -> Path:
    """Write ``table`` as CSV or JSON; identical input gives identical bytes."""
    text = render(table, fmt)
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path
