"""Fixed-point iteration over whole periods for the periodic orbit of a micro model."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

from .errors import DomainError, NonConvergenceError
from .micro import PeriodTrajectory, advance_one_period

log = logging.getLogger(__name__)


@dataclass
class PeriodicSolveReport:
    trajectory: PeriodTrajectory
    residuals: list = field(default_factory=list)
    tau: float = 1e-6

    @property
    def cycles(self) -> int:
        return len(self.residuals)

    @property
    def converged(self) -> bool:
        return bool(self.residuals) and self.residuals[-1] < self.tau

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["cycle", "residual"])
            for i, r in enumerate(self.residuals, start=1):
                w.writerow([i, repr(r)])


def find_periodic_orbit(
    model,
    trial,
    slow: float,
    dt: float,
    tau: float = 1e-6,
    max_cycles: int = 50,
    residual_csv=None,
) -> PeriodicSolveReport:
    """Advance whole periods until two successive period endpoints agree.

    The residual after cycle ``n`` is ``distance(end_n, end_{n-1})`` with the
    trial playing ``end_0``.  The last full period is returned.
    """
    if not tau > 0:
        raise DomainError("tau must be positive")
    if max_cycles < 1:
        raise DomainError("max_cycles must be at least 1")
    residuals = []
    prev = trial
    traj = None
    for n in range(1, max_cycles + 1):
        traj = advance_one_period(model, prev, slow, dt)
        eps = model.period_distance(traj.end, traj.start)
        residuals.append(eps)
        log.debug("cycle %d residual %.3e", n, eps)
        prev = traj.end
        if eps < tau:
            break
    report = PeriodicSolveReport(traj, residuals, tau)
    if residual_csv is not None:
        report.write_csv(residual_csv)
    if not report.converged:
        raise NonConvergenceError(
            f"no periodic orbit within {max_cycles} cycles (last residual {residuals[-1]:.3e})",
            residuals=residuals,
        )
    return report
