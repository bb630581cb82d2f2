"""Fast subsystems parameterised by the slow variable.

A micro model advances its state across one unit forcing period with the
slow value frozen, measures the squared distance between two states, and
samples the reaction functional that drives the slow equation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Protocol

from .errors import DomainError, StepFailureError
from .fem import (
    FlowField,
    FluidParams,
    ns_time_step,
    plaque_reaction,
    space_for,
    stokes_solve,
    transfer_field,
    wall_shear_stress,
)
from .geometry import ChannelShape, build_channel_mesh, grid_for_target


def steps_per_period(dt: float) -> int:
    """Number of micro steps in one unit period; ``1/dt`` must be an integer."""
    if not dt > 0:
        raise DomainError("micro step must be positive")
    m = round(1.0 / dt)
    if m < 1 or abs(m * dt - 1.0) > 1e-9:
        raise DomainError(f"dt={dt} must divide the unit period")
    return m


@dataclass
class PeriodTrajectory:
    """States at ``t_i = i dt``, ``i = 0..1/dt``, over one period at fixed ``slow``."""

    states: list
    dt: float
    slow: float

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    def __len__(self):
        return len(self.states)


class MicroModel(Protocol):
    def prepare(self, state: Any, slow: float) -> Any: ...

    def step(self, state: Any, t: float, dt: float, slow: float) -> Any: ...

    def period_distance(self, a: Any, b: Any) -> float: ...

    def reaction(self, state: Any, slow: float) -> float: ...

    def initial_trial(self, slow: float) -> Any: ...


def advance_one_period(model, start, slow: float, dt: float) -> PeriodTrajectory:
    """Take ``1/dt`` micro steps from ``start`` with the slow value frozen."""
    m = steps_per_period(dt)
    state = model.prepare(start, slow)
    states = [state]
    for i in range(1, m + 1):
        try:
            state = model.step(state, i * dt, dt, slow)
        except StepFailureError as exc:
            exc.step = i
            raise
        states.append(state)
    return PeriodTrajectory(states, dt, slow)


def averaged_reaction(traj: PeriodTrajectory, slow: float, reaction: Callable) -> float:
    """Rectangle rule ``dt * sum_{i=1}^{1/dt} R(state_i, slow)`` over the period."""
    return traj.dt * math.fsum(reaction(s, slow) for s in traj.states[1:])


def _default_forcing(t, u):
    return 2.0 * math.pi * math.cos(2.0 * math.pi * t) + u * (math.sin(2.0 * math.pi * t) + 2.0)


def _default_decay(u):
    return u


def _default_reaction(v, u):
    return v


@dataclass(frozen=True)
class OdeMicroModel:
    """Scalar model ``v' + decay(u) v = forcing(t, u)`` with reaction ``R(v, u)``.

    Defaults reproduce the two-scale ODE test: decay ``u``, forcing
    ``2 pi cos(2 pi t) + u (sin(2 pi t) + 2)`` and ``R = v``, whose periodic
    orbit is ``sin(2 pi t) + 2`` for every ``u``.
    """

    forcing: Callable = _default_forcing
    decay: Callable = _default_decay
    reaction_fn: Callable = _default_reaction
    trial: float = 0.5
    name: str = field(default="ode", compare=False)

    def prepare(self, v, slow):
        return float(v)

    def step(self, v, t, dt, slow):
        denom = 1.0 + dt * self.decay(slow)
        if denom == 0.0:
            raise StepFailureError("singular backward-Euler step", time=t)
        return (v + dt * self.forcing(t, slow)) / denom

    def period_distance(self, a, b):
        return (float(a) - float(b)) ** 2

    def reaction(self, v, slow):
        return self.reaction_fn(v, slow)

    def initial_trial(self, slow):
        return self.trial

    def advance_one_period(self, start, slow, dt):
        return advance_one_period(self, start, slow, dt)

    def averaged_reaction(self, traj, slow):
        return averaged_reaction(traj, slow, self.reaction)

    def contraction_factor(self, slow, dt):
        """Squared-distance contraction of the one-period backward-Euler map."""
        return (1.0 + dt * self.decay(slow)) ** (-2.0 / dt)

    def periodic_start(self, slow, dt):
        """Exact start of the discrete periodic orbit (the one-period map is affine)."""
        m = steps_per_period(dt)
        a = 1.0 / (1.0 + dt * self.decay(slow))
        b = 0.0
        for i in range(1, m + 1):
            b = a * (b + dt * self.forcing(i * dt, slow))
        return b / (1.0 - a**m)


@functools.lru_cache(maxsize=16)
def _mesh_at(shape, grid, level, slow):
    return build_channel_mesh(shape, slow, grid=grid, level=level)


@dataclass(frozen=True)
class NSMicroModel:
    """Pulsatile channel flow on the domain frozen at plaque concentration ``slow``.

    Every slow value gets a mesh with the same topology (fixed grid), so
    fields move between domains by same-index interpolation.  The reaction is
    the plaque growth rate driven by the wall shear stress on the bump.
    """

    params: FluidParams = field(default_factory=FluidParams)
    shape: ChannelShape = field(default_factory=ChannelShape)
    target_elements: int = 210
    level: int = 2
    skew: bool = False
    trial_time: float = 0.5
    name: str = field(default="ns", compare=False)

    @functools.cached_property
    def grid(self):
        return grid_for_target(self.shape, self.target_elements, self.level)

    def mesh_for(self, slow):
        return _mesh_at(self.shape, self.grid, self.level, float(slow))

    def space_for(self, slow):
        return space_for(self.mesh_for(slow))

    def prepare(self, state: FlowField, slow):
        mesh = self.mesh_for(slow)
        if state.mesh is mesh:
            return state
        return transfer_field(state, mesh)

    def step(self, state, t, dt, slow):
        return ns_time_step(self.prepare(state, slow), t, dt, self.params, skew=self.skew)

    def period_distance(self, a: FlowField, b: FlowField):
        if a.space is not b.space:
            raise DomainError("states live on different discrete spaces")
        return a.space.l2_sq(a.velocity - b.velocity)

    def wss(self, state):
        return wall_shear_stress(state, self.params)

    def reaction(self, state, slow):
        return plaque_reaction(slow, self.wss(state))

    def initial_trial(self, slow):
        """Steady Stokes lift of the inflow at its peak, relabelled to ``t = 0``."""
        f = stokes_solve(self.space_for(slow), self.trial_time, self.params)
        return FlowField(f.space, f.velocity, f.pressure, 0.0)

    def advance_one_period(self, start, slow, dt):
        return advance_one_period(self, start, slow, dt)

    def averaged_reaction(self, traj, slow):
        return averaged_reaction(traj, slow, self.reaction)
