"""Convergence studies, the fractional-order sweep and the preset runner."""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ExperimentPreset, get_preset
from .drivers import RunReport, SimConfig, compare_runs, run_direct, run_multiscale
from .errors import ConfigError, FracPlaqueError
from .fem import FlowField, FluidParams, ns_time_step, space_for, stokes_solve, wall_shear_stress
from .frac_core import mittag_leffler, ode_exact_solution
from .geometry import build_channel_mesh, shape_height

log = logging.getLogger(__name__)


def run_config(config: SimConfig) -> RunReport:
    return run_direct(config) if config.method == "direct" else run_multiscale(config)


def _map(fn, items, jobs):
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


@dataclass
class ConvergenceTable:
    """Rows ``(step, error, order, cpu_s)``; ``order[r] = log2(error[r-1] / error[r])``."""

    axis: str
    steps: np.ndarray
    errors: np.ndarray
    cpu: np.ndarray
    reference: float = float("nan")
    reports: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=float)
        self.errors = np.asarray(self.errors, dtype=float)
        self.cpu = np.asarray(self.cpu, dtype=float)

    @property
    def orders(self) -> np.ndarray:
        o = np.full(len(self.errors), np.nan)
        with np.errstate(divide="ignore", invalid="ignore"):
            o[1:] = np.log2(self.errors[:-1] / self.errors[1:])
        return o

    def slope(self) -> float:
        """Least-squares slope of log(error) against log(step)."""
        return float(np.polyfit(np.log(self.steps), np.log(self.errors), 1)[0])

    def rows(self):
        return list(zip(self.steps, self.errors, self.orders, self.cpu))

    def format(self) -> str:
        lines = [f"{self.axis:>10}  {'error':>11}  {'order':>6}  {'cpu_s':>8}"]
        for s, e, o, c in self.rows():
            lines.append(f"{s:>10.6g}  {e:>11.4e}  {'' if math.isnan(o) else f'{o:6.3f}':>6}  {c:8.3f}")
        return "\n".join(lines)

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "error", "order", "cpu_s"])
            for row in self.rows():
                w.writerow([repr(float(x)) for x in row])
        return path

    @classmethod
    def read_csv(cls, path, axis="step") -> "ConvergenceTable":
        with open(path, newline="") as fh:
            r = csv.reader(fh)
            if next(r) != ["step", "error", "order", "cpu_s"]:
                raise ConfigError(f"{path}: not a convergence table")
            rows = [[float(x) for x in row] for row in r if row]
        s, e, _, c = zip(*rows)
        return cls(axis, s, e, c)


def convergence_study(
    base: SimConfig,
    axis: str = "dT",
    levels: int = 4,
    oracle: str = "exact",
    start: float | None = None,
    jobs: int = 1,
) -> ConvergenceTable:
    """Run the driver at successively halved ``dT`` or ``dt`` and tabulate final-time errors."""
    if axis not in ("dT", "dt"):
        raise ConfigError(f"axis must be dT or dt, got {axis!r}", field="axis")
    if levels < 2:
        raise ConfigError("a convergence study needs at least 2 levels", field="levels")
    if oracle not in ("exact", "direct-run"):
        raise ConfigError(f"unknown oracle {oracle!r}", field="oracle")
    if oracle == "exact" and base.model != "ode":
        raise ConfigError("no exact solution for this model; use the direct-run oracle", field="oracle")
    if oracle == "direct-run" and axis != "dT":
        raise ConfigError("the direct-run oracle fixes dt, so the axis must be dT", field="oracle")
    first = float(start if start is not None else getattr(base, axis))
    steps = [first / 2**k for k in range(levels)]
    if len(set(steps)) < levels:
        raise ConfigError("refinement levels are not distinct", field="levels")
    # each level must itself be a valid configuration
    configs = [base.replace(**{axis: s}) for s in steps]
    if oracle == "exact":
        reference = ode_exact_solution(base.T, base.alpha, base.epsilon)[1]
    else:
        direct = run_direct(base.replace(method="direct", record_every=max(1, round(1 / base.dt))))
        reference = direct.terminal
    reports = _map(run_config, configs, jobs)
    errors = [abs(r.terminal - reference) for r in reports]
    cpu = [r.total_wall for r in reports]
    return ConvergenceTable(axis, steps, errors, cpu, reference, reports)


@dataclass
class SweepResult:
    reports: dict
    failures: dict

    def summary(self):
        """Rows ``(alpha, terminal U, apex height, wall s)`` sorted by alpha."""
        rows = []
        for a in sorted(self.reports):
            r = self.reports[a]
            rows.append((a, r.terminal, float(shape_height(r.terminal, 0.0)), r.total_wall))
        return rows

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "terminal_u", "apex_height", "wall_s"])
            for row in self.summary():
                w.writerow([repr(float(x)) for x in row])
        return path


def _sweep_one(config):
    try:
        return run_multiscale(config)
    except FracPlaqueError as exc:
        return exc


def alpha_sweep(base: SimConfig, alphas, jobs: int = 1) -> SweepResult:
    """One multiscale run per fractional order; failures are recorded and the sweep continues."""
    alphas = [float(a) for a in alphas]
    if not alphas:
        raise ConfigError("no alphas given", field="alphas")
    for a in alphas:
        if not 0.0 < a < 1.0:
            raise ConfigError(f"alpha {a} outside (0, 1)", field="alphas")
    configs = [base.replace(alpha=a, name=f"{base.name}-alpha{a:g}") for a in alphas]
    out = _map(_sweep_one, configs, jobs)
    reports, failures = {}, {}
    for a, r in zip(alphas, out):
        if isinstance(r, Exception):
            log.warning("alpha=%g failed: %s", a, r)
            failures[a] = r
        else:
            reports[a] = r
    return SweepResult(reports, failures)


# ---------------------------------------------------------------------------
# standalone checks


def poiseuille_check(config: SimConfig) -> dict:
    """Steady parabolic flow in the straight channel and its wall shear stress."""
    params = FluidParams(
        rho=config.rho, nu=config.nu, sigma0=config.sigma0, inflow_amplitude=config.inflow_amplitude, pulsatile=False
    )
    mesh = build_channel_mesh(config.shape(), 0.0, config.target_elements, config.level)
    space = space_for(mesh)
    steady = stokes_solve(space, 0.0, params)
    # one Navier-Stokes step from the exact profile must leave it unchanged
    exact = FlowField.interpolate(space, lambda x, y: (params.inflow(y, 0.0, config.b), 0.0 * y))
    stepped = ns_time_step(exact, 0.05, 0.05, params)
    ref = exact.velocity
    wss = wall_shear_stress(steady, params)
    a = config.a
    return {
        "stokes_velocity_error": float(np.abs(steady.velocity - ref).max()),
        "ns_velocity_error": float(np.abs(stepped.velocity - ref).max()),
        "divergence": max(steady.divergence_residual(), stepped.divergence_residual()),
        "wss_x": float(wss.vector[0]),
        "wss_x_exact": -2.0 * params.rho * params.nu * config.inflow_amplitude / config.b * 2 * a / params.sigma0,
    }


def mlf_identities(samples: int = 100, zmax: float = 50.0, seed: int = 12345) -> dict:
    """Worst relative errors of three closed-form Mittag-Leffler identities at random points."""
    z = np.random.default_rng(seed).uniform(0.0, zmax, samples)
    e11 = max(abs(mittag_leffler(1.0, 1.0, x) / math.exp(x) - 1.0) for x in z)
    e21 = max(abs(mittag_leffler(2.0, 1.0, -x * x) / math.cos(x) - 1.0) for x in z)
    e22 = max(abs(mittag_leffler(2.0, 2.0, -x * x) / (math.sin(x) / x) - 1.0) for x in z)
    return {"E11_exp": e11, "E21_cos": e21, "E22_sinc": e22}


# ---------------------------------------------------------------------------
# preset runner


@dataclass
class PresetOutcome:
    preset: ExperimentPreset
    result: object
    files: list
    seconds: float
    lines: list


def execute_preset(
    preset: ExperimentPreset | str,
    out_dir,
    overrides: SimConfig | None = None,
    full_horizon: bool = False,
    jobs: int = 1,
) -> PresetOutcome:
    """Run a preset end to end and write its CSV output under ``out_dir/<preset name>``."""
    if isinstance(preset, str):
        preset = get_preset(preset)
    cfg = overrides if overrides is not None else preset.config
    dest = Path(out_dir) / preset.name
    dest.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files, lines = [], []
    if preset.kind == "run":
        result = run_config(cfg)
        files.append(result.write_csv(dest / f"{cfg.method}.csv"))
        lines.append(f"terminal u = {result.terminal:.10g} at t = {result.final_time:g} ({result.total_wall:.2f} s)")
    elif preset.kind == "convergence":
        o = preset.options
        result = convergence_study(cfg, o["axis"], o["levels"], o["oracle"], o.get("start"), jobs)
        files.append(result.write_csv(dest / "convergence.csv"))
        for k, r in enumerate(result.reports):
            files.append(r.write_csv(dest / f"level{k}.csv"))
        lines += result.format().splitlines()
        lines.append(f"least-squares slope {result.slope():.3f}")
    elif preset.kind == "sweep":
        if full_horizon:
            cfg = cfg.replace(T=preset.options["full_T"])
        result = alpha_sweep(cfg, preset.options["alphas"], jobs)
        files.append(result.write_csv(dest / "summary.csv"))
        for a, r in result.reports.items():
            files.append(r.write_csv(dest / f"alpha{a:g}.csv"))
        for a, u, h, w in result.summary():
            lines.append(f"alpha={a:g}  U(T)={u:.8g}  apex={h:.8g}  ({w:.1f} s)")
        for a, exc in result.failures.items():
            lines.append(f"alpha={a:g}  FAILED: {exc}")
    elif preset.kind == "poiseuille":
        result = poiseuille_check(cfg)
        lines += [f"{k} = {v:.6e}" for k, v in result.items()]
    elif preset.kind == "mlf":
        result = mlf_identities(**preset.options)
        lines += [f"{k} max rel error = {v:.3e}" for k, v in result.items()]
    else:
        raise ConfigError(f"preset {preset.name} has unknown kind {preset.kind!r}")
    return PresetOutcome(preset, result, files, time.perf_counter() - t0, lines)


def comparison_lines(reference: RunReport, candidate: RunReport) -> list:
    c = compare_runs(reference, candidate)
    return [f"terminal |difference| = {c.terminal_error:.4e}", f"speedup = {c.speedup:.2f}"]
