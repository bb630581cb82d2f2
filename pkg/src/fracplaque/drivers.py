"""Direct and multiscale solvers for the coupled slow/fast problem and their comparison."""

from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError, DomainError, GeometryError, NonConvergenceError, StepFailureError
from .fem import FluidParams
from .frac_core import FracHistory, l1_macro_step, ode_exact_solution
from .geometry import ChannelShape
from .micro import NSMicroModel, OdeMicroModel, steps_per_period
from .periodic import find_periodic_orbit

log = logging.getLogger(__name__)

MODELS = ("ode", "ns")
METHODS = ("multiscale", "direct", "compare")
DEFAULT_MAX_CYCLES = {"ode": 200, "ns": 50}


def _multiple(x, unit, tol=1e-9):
    n = round(x / unit)
    return n >= 1 and abs(n * unit - x) <= tol * max(1.0, abs(x))


@dataclass
class SimConfig:
    """Everything needed to run either driver on either micro model."""

    alpha: float = 0.8
    epsilon: float = 5e-4
    u0: float = 1.0
    T: float = 14000.0
    dt: float = 0.01
    dT: float = 1000.0
    tau: float = 1e-6
    model: str = "ode"
    method: str = "multiscale"
    # geometry
    a: float = 5.0
    b: float = 2.0
    # fluid
    rho: float = 1.0
    nu: float = 0.04
    sigma0: float = 30.0
    inflow_amplitude: float = 30.0
    # mesh
    target_elements: int = 210
    level: int = 2
    # periodic finder
    trial: float = 0.5
    max_cycles: int | None = None
    warm_start: bool = True
    # flags
    skew: bool = False
    remesh_threshold: float = 0.0
    record_every: int = 1
    name: str = "run"
    output_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(name, why):
            raise ConfigError(f"{name}: {why}", field=name)

        if not 0.0 < self.alpha < 1.0:
            bad("alpha", "must lie in (0, 1)")
        # epsilon = 0 is admitted as the decoupled limit
        if not self.epsilon >= 0.0:
            bad("epsilon", "must be nonnegative")
        if not self.u0 >= 0.0:
            bad("u0", "must be nonnegative")
        if self.model not in MODELS:
            bad("model", f"must be one of {MODELS}")
        if self.method not in METHODS:
            bad("method", f"must be one of {METHODS}")
        if not self.dt > 0 or not _multiple(1.0, self.dt):
            bad("dt", "dt must divide the unit period")
        if not self.dT > 0 or not _multiple(self.dT, 1.0):
            bad("dT", "must be a positive whole number of periods")
        if not self.T > 0:
            bad("T", "must be positive")
        if self.method in ("multiscale", "compare") and not _multiple(self.T, self.dT):
            bad("T", "must be a multiple of dT")
        if not _multiple(self.T, self.dt):
            bad("T", "must be a multiple of dt")
        if not self.tau > 0:
            bad("tau", "must be positive")
        if self.max_cycles is not None and self.max_cycles < 1:
            bad("max_cycles", "must be at least 1")
        for name in ("a", "b", "rho", "nu", "sigma0"):
            if not getattr(self, name) > 0:
                bad(name, "must be positive")
        if self.model == "ns" and not self.u0 < self.b:
            bad("u0", "plaque must not close the channel (u0 < b)")
        if self.target_elements < 8:
            bad("target_elements", "must be at least 8")
        if self.level < 0:
            bad("level", "must be nonnegative")
        if self.remesh_threshold < 0:
            bad("remesh_threshold", "must be nonnegative")
        if self.record_every < 1:
            bad("record_every", "must be at least 1")

    @property
    def cycles_limit(self) -> int:
        return self.max_cycles if self.max_cycles is not None else DEFAULT_MAX_CYCLES[self.model]

    def replace(self, **changes) -> "SimConfig":
        d = asdict(self)
        d.update(changes)
        return SimConfig(**d)

    def fluid(self) -> FluidParams:
        return FluidParams(rho=self.rho, nu=self.nu, sigma0=self.sigma0, inflow_amplitude=self.inflow_amplitude)

    def shape(self) -> ChannelShape:
        return ChannelShape(a=self.a, b=self.b)

    def bound(self) -> float:
        """A-priori ceiling ``u0 + epsilon T^alpha / Gamma(alpha+1)`` for reactions bounded by 1."""
        return self.u0 + self.epsilon * self.T**self.alpha / math.gamma(self.alpha + 1.0)


def build_model(config: SimConfig):
    if config.model == "ode":
        return OdeMicroModel(trial=config.trial)
    return NSMicroModel(
        params=config.fluid(),
        shape=config.shape(),
        target_elements=config.target_elements,
        level=config.level,
        skew=config.skew,
    )


CSV_HEADER = ("t", "slow", "reaction_avg", "cycles", "wall_ms")


@dataclass
class RunReport:
    """Time series of one run; ``reaction_avg`` at row ``k`` is the rate that produced ``slow[k]``."""

    method: str
    t: np.ndarray
    slow: np.ndarray
    reaction_avg: np.ndarray
    cycles: np.ndarray
    wall_ms: np.ndarray
    total_wall: float = float("nan")
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.slow = np.asarray(self.slow, dtype=float)
        self.reaction_avg = np.asarray(self.reaction_avg, dtype=float)
        self.cycles = np.asarray(self.cycles, dtype=int)
        self.wall_ms = np.asarray(self.wall_ms, dtype=float)
        n = len(self.t)
        if any(len(c) != n for c in (self.slow, self.reaction_avg, self.cycles, self.wall_ms)):
            raise DomainError("report columns differ in length")

    def __len__(self):
        return len(self.t)

    @property
    def terminal(self) -> float:
        return float(self.slow[-1])

    @property
    def final_time(self) -> float:
        return float(self.t[-1])

    def at(self, times) -> np.ndarray:
        """Piecewise-linear evaluation of the slow series."""
        times = np.asarray(times, dtype=float)
        tol = 1e-9 * max(1.0, abs(self.t[-1]))
        if np.any(times < self.t[0] - tol) or np.any(times > self.t[-1] + tol):
            raise DomainError("evaluation time outside the report's range")
        return np.interp(times, self.t, self.slow)

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_HEADER)
            for row in zip(self.t, self.slow, self.reaction_avg, self.cycles, self.wall_ms):
                w.writerow([repr(float(row[0])), repr(float(row[1])), repr(float(row[2])), int(row[3]), repr(float(row[4]))])
        return path

    @classmethod
    def read_csv(cls, path, method="csv") -> "RunReport":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            header = tuple(next(r))
            if header != CSV_HEADER:
                raise DomainError(f"unexpected CSV header {header}")
            rows = [row for row in r if row]
        cols = list(zip(*rows)) if rows else [()] * 5
        wall = [float(x) for x in cols[4]]
        return cls(
            method,
            [float(x) for x in cols[0]],
            [float(x) for x in cols[1]],
            [float(x) for x in cols[2]],
            [int(x) for x in cols[3]],
            wall,
            total_wall=sum(wall) / 1000.0,
        )


class _Rows:
    def __init__(self):
        self.t, self.slow, self.reaction, self.cycles, self.wall = [], [], [], [], []

    def add(self, t, slow, reaction, cycles, wall_ms):
        self.t.append(t)
        self.slow.append(slow)
        self.reaction.append(reaction)
        self.cycles.append(cycles)
        self.wall.append(wall_ms)

    def report(self, method, total, meta):
        return RunReport(method, self.t, self.slow, self.reaction, self.cycles, self.wall, total, meta)


def _count(x, unit):
    return int(round(x / unit))


def run_multiscale(config: SimConfig, model=None, residual_dir=None) -> RunReport:
    """Periodic orbit at ``U_{j-1}``, its averaged reaction, then one explicit L1 macro step."""
    model = model if model is not None else build_model(config)
    n_macro = _count(config.T, config.dT)
    t_start = time.perf_counter()
    hist = FracHistory.start(config.alpha, config.dT, config.u0)
    rows = _Rows()
    rows.add(0.0, config.u0, float("nan"), 0, 0.0)
    U = config.u0
    trial = model.initial_trial(U)
    for j in range(1, n_macro + 1):
        t0 = time.perf_counter()
        csv_path = None if residual_dir is None else Path(residual_dir) / f"residuals_{j:04d}.csv"
        try:
            rep = find_periodic_orbit(model, trial, U, config.dt, config.tau, config.cycles_limit, csv_path)
        except NonConvergenceError as exc:
            exc.macro_index = j
            raise
        except StepFailureError as exc:
            raise StepFailureError(f"macro step {j}: {exc}", step=exc.step, time=exc.time) from exc
        R = model.averaged_reaction(rep.trajectory, U)
        try:
            U = l1_macro_step(hist, R, config.epsilon)
        except DomainError as exc:
            raise GeometryError(f"macro step {j}: {exc}") from exc
        trial = rep.trajectory.end if config.warm_start else model.initial_trial(U)
        ms = 1000.0 * (time.perf_counter() - t0)
        rows.add(j * config.dT, U, R, rep.cycles, ms)
        log.info("macro %d/%d  U=%.10g  R=%.6g  cycles=%d  %.0f ms", j, n_macro, U, R, rep.cycles, ms)
    total = time.perf_counter() - t_start
    return rows.report("multiscale", total, {"config": config})


def run_direct(config: SimConfig, model=None) -> RunReport:
    """Explicit L1 on the micro grid, remeshing and one flow step per micro step.

    The flow starts on the periodic orbit of the initial domain.  With a
    positive ``remesh_threshold`` the mesh is only rebuilt once the slow
    variable has moved by more than the threshold.
    """
    model = model if model is not None else build_model(config)
    dt = config.dt
    steps_per_period(dt)
    n = _count(config.T, dt)
    t_start = time.perf_counter()
    try:
        orbit = find_periodic_orbit(model, model.initial_trial(config.u0), config.u0, dt, config.tau, config.cycles_limit)
    except NonConvergenceError as exc:
        exc.macro_index = 0
        raise
    v = orbit.trajectory.end
    hist = FracHistory.start(config.alpha, dt, config.u0)
    rows = _Rows()
    rows.add(0.0, config.u0, float("nan"), orbit.cycles, 1000.0 * (time.perf_counter() - t_start))
    u_prev = config.u0
    u_geom = config.u0
    every = config.record_every
    t_block = time.perf_counter()
    for i in range(1, n + 1):
        R = model.reaction(v, u_prev)
        u = l1_macro_step(hist, R, config.epsilon)
        if abs(u - u_geom) > config.remesh_threshold or config.remesh_threshold == 0.0:
            u_geom = u
        try:
            v = model.step(v, i * dt, dt, u_geom)
        except StepFailureError as exc:
            exc.step = i
            raise
        except GeometryError as exc:
            raise GeometryError(f"micro step {i}: {exc}") from exc
        u_prev = u
        if i % every == 0 or i == n:
            now = time.perf_counter()
            rows.add(i * dt, u, R, 0, 1000.0 * (now - t_block))
            t_block = now
    total = time.perf_counter() - t_start
    return rows.report("direct", total, {"config": config})


def exact_ode_report(alpha: float, epsilon: float, times) -> RunReport:
    """Closed-form slow variable of the ODE test sampled at ``times``."""
    times = np.asarray(times, dtype=float)
    u = [ode_exact_solution(t, alpha, epsilon)[1] for t in times]
    z = np.zeros(len(times))
    return RunReport("exact", times, u, np.full(len(times), np.nan), z.astype(int), z, float("nan"))


@dataclass
class Comparison:
    times: np.ndarray
    reference: np.ndarray
    candidate: np.ndarray
    errors: np.ndarray
    terminal_error: float
    speedup: float

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "reference", "candidate", "abs_error"])
            for row in zip(self.times, self.reference, self.candidate, self.errors):
                w.writerow([repr(float(x)) for x in row])
        return path


def compare_runs(a: RunReport, b: RunReport, grid=None) -> Comparison:
    """Errors of ``b`` against ``a`` on shared times; speedup is ``a``'s wall time over ``b``'s."""
    lo = max(a.t[0], b.t[0])
    hi = min(a.t[-1], b.t[-1])
    if lo > hi:
        raise DomainError("reports cover disjoint time ranges")
    if grid is None:
        grid = b.t[(b.t >= lo) & (b.t <= hi)]
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 0:
        raise DomainError("empty comparison grid")
    ra, rb = a.at(grid), b.at(grid)
    err = np.abs(ra - rb)
    if a.total_wall == b.total_wall:
        speed = 1.0
    elif b.total_wall > 0:
        speed = a.total_wall / b.total_wall
    else:
        speed = float("inf")
    return Comparison(grid, ra, rb, err, float(err[-1]), float(speed))


def config_fields() -> list[str]:
    return [f.name for f in fields(SimConfig)]
