"""Flat ``key=value`` configuration files and the experiment preset registry.

Keys use dotted namespaces, for example::

    # plaque growth, scaled down
    model = ns
    alpha = 0.6
    dt = 1/20
    fluid.nu = 0.04
    geometry.b = 2

Values may be written as fractions (``1/100``).  Unknown keys are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .drivers import SimConfig
from .errors import ConfigError

# config key -> SimConfig attribute
KEYS = {
    "name": "name",
    "model": "model",
    "method": "method",
    "alpha": "alpha",
    "epsilon": "epsilon",
    "u0": "u0",
    "T": "T",
    "dt": "dt",
    "dT": "dT",
    "geometry.a": "a",
    "geometry.b": "b",
    "fluid.rho": "rho",
    "fluid.nu": "nu",
    "fluid.sigma0": "sigma0",
    "fluid.inflow_amplitude": "inflow_amplitude",
    "mesh.target_elements": "target_elements",
    "mesh.level": "level",
    "periodic.tau": "tau",
    "periodic.trial": "trial",
    "periodic.max_cycles": "max_cycles",
    "periodic.warm_start": "warm_start",
    "flags.skew": "skew",
    "flags.remesh_threshold": "remesh_threshold",
    "output.record_every": "record_every",
    "output.dir": "output_dir",
}

_INTS = {"target_elements", "level", "max_cycles", "record_every"}
_BOOLS = {"warm_start", "skew"}
_STRS = {"name", "model", "method", "output_dir"}


def _convert(attr, raw: str):
    raw = raw.strip()
    if attr in _STRS:
        return raw
    if attr in _BOOLS:
        low = raw.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{attr}: expected a boolean, got {raw!r}", field=attr)
    if attr == "max_cycles" and raw.lower() in ("", "none", "default"):
        return None
    try:
        value = float(Fraction(raw)) if "/" in raw else float(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{attr}: expected a number, got {raw!r}", field=attr) from None
    if attr in _INTS:
        if value != int(value):
            raise ConfigError(f"{attr}: expected an integer, got {raw!r}", field=attr)
        return int(value)
    return value


def parse_pairs(lines) -> dict:
    """Parse ``key=value`` lines into SimConfig keyword arguments."""
    out = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", field=key)
        attr = KEYS[key]
        out[attr] = _convert(attr, raw)
    return out


def parse_config(source=None, overrides=(), base: SimConfig | None = None) -> SimConfig:
    """Build a validated SimConfig from a preset name, a file path, or neither, plus ``key=value`` overrides."""
    kwargs = {}
    if isinstance(source, SimConfig):
        base = source
    elif source is not None:
        if str(source) in PRESETS:
            base = PRESETS[str(source)].config
        else:
            path = Path(source)
            if not path.is_file():
                raise ConfigError(f"config file {source} not found")
            kwargs.update(parse_pairs(path.read_text().splitlines()))
    kwargs.update(parse_pairs(overrides))
    base = base if base is not None else SimConfig()
    return base.replace(**kwargs)


def dump_config(config: SimConfig) -> str:
    inverse = {v: k for k, v in KEYS.items()}
    lines = []
    for attr, key in inverse.items():
        value = getattr(config, attr)
        if value is None:
            continue
        lines.append(f"{key} = {value!r}" if isinstance(value, float) else f"{key} = {value}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    kind: str  # run | convergence | sweep | poiseuille | mlf
    config: SimConfig
    description: str
    expected: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)


_ODE = SimConfig(alpha=0.8, epsilon=5e-4, u0=1.0, dt=0.01, dT=1000.0, T=14000.0, trial=0.5, name="ode-table1")
_NS52 = SimConfig(
    model="ns",
    alpha=0.6,
    epsilon=8e-4,
    u0=0.2,
    a=5.0,
    b=2.0,
    rho=1.0,
    nu=0.04,
    sigma0=30.0,
    inflow_amplitude=30.0,
    tau=1e-6,
    T=800.0,
    dt=0.05,
    dT=80.0,
    target_elements=210,
)
_NS53 = _NS52.replace(
    b=1.5, inflow_amplitude=20.0, epsilon=2e-6, u0=0.0, dT=4e4, dt=0.05, T=2e5, alpha=0.85, name="ns-53-sweep"
)

PRESETS = {
    p.name: p
    for p in [
        ExperimentPreset(
            "ode-table1",
            "convergence",
            _ODE,
            "Two-scale ODE test: multiscale errors at t=14000 for dT = 2000, 1000, 500, 250.",
            expected={"errors": [7.320e-2, 3.941e-2, 2.041e-2, 1.004e-2], "orders": [0.90, 0.95, 1.02], "rtol": 0.15},
            options={"axis": "dT", "levels": 4, "oracle": "exact", "start": 2000.0},
        ),
        ExperimentPreset(
            "ode-direct-check",
            "convergence",
            _ODE.replace(method="direct", T=10.0, dT=10.0, tau=1e-14, name="ode-direct-check"),
            "Direct L1/backward-Euler solve of the ODE test on [0, 10]; first order in dt.",
            expected={"order": 1.0, "order_tol": 0.15},
            options={"axis": "dt", "levels": 3, "oracle": "exact"},
        ),
        ExperimentPreset(
            "ns-52-direct",
            "run",
            _NS52.replace(method="direct", record_every=20, name="ns-52-direct"),
            "Remesh-every-step reference run of the plaque model (horizon scaled to 800 s).",
        ),
        ExperimentPreset(
            "ns-52-multiscale",
            "run",
            _NS52.replace(name="ns-52-multiscale"),
            "Multiscale plaque run, dT = 80 s, dt = 1/20 s.",
        ),
        ExperimentPreset(
            "ns-52-convergence",
            "convergence",
            _NS52.replace(dt=0.025, name="ns-52-convergence"),
            "Halve dT from 80 with dt = 1/40 fixed; oracle is the direct run at the same dt.",
            expected={"slope": 1.0, "slope_range": (0.8, 1.2)},
            options={"axis": "dT", "levels": 3, "oracle": "direct-run"},
        ),
        ExperimentPreset(
            "ns-53-sweep",
            "sweep",
            _NS53,
            "Fractional-order sweep on the narrow channel.  Horizon reduced to 2e5 s; "
            "the 1.8e6 s horizon is available with --full-horizon.",
            options={"alphas": [0.85, 0.95], "full_T": 1.8e6},
        ),
        ExperimentPreset(
            "poiseuille-check",
            "poiseuille",
            _NS52.replace(u0=0.0, name="poiseuille-check"),
            "Steady parabolic flow in the straight channel; exact velocity and wall shear stress.",
            expected={"wss_x": -0.4, "velocity_tol": 1e-8, "div_tol": 1e-8},
        ),
        ExperimentPreset(
            "mlf-identities",
            "mlf",
            _ODE.replace(name="mlf-identities"),
            "Mittag-Leffler identities E11(z)=exp z, E21(-z^2)=cos z, E22(-z^2)=sin z / z.",
            expected={"rtol": 1e-10},
            options={"samples": 100, "zmax": 50.0, "seed": 12345},
        ),
    ]
}


def get_preset(name: str) -> ExperimentPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", field="preset") from None
