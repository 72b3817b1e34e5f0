"""Time integration of the conformal Ricci flow d_t u = -R on the disk.

The curvature Neumann condition R_nu = 0 is imposed through the ghost ring
of u before every right-hand-side evaluation; classical RK4 advances the
interior values under an explicit parabolic CFL bound.  Positivity of R is
a standing hypothesis and is monitored (never clamped): a violating step is
rolled back and the trajectory terminates.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels, entropy
from .errors import BoundaryClosureError, PositivityError, UsageError
from .geometry import ConformalMetric, scalar_curvature


class Termination(Enum):
    COMPLETED = "completed"
    POSITIVITY_LOST = "positivity_lost"
    STEP_LIMIT = "step_limit"


@dataclass
class FlowState:
    t: float
    metric: ConformalMetric


@dataclass
class FlowSchedule:
    t_end: float
    cfl_safety: float = 0.8
    record_every: int = 1
    max_steps: int = 10_000_000

    def validate(self):
        if self.t_end <= 0.0:
            raise UsageError(f"t_end must be positive, got {self.t_end}")
        if not 0.0 < self.cfl_safety <= 1.0:
            raise UsageError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if self.record_every < 1:
            raise UsageError("record_every must be a positive integer")
        if self.max_steps < 1:
            raise UsageError("max_steps must be a positive integer")


@dataclass
class FlowTrajectory:
    snapshots: list = field(default_factory=list)   # list[FlowState]
    records: list = field(default_factory=list)     # list[EntropyRecord]
    termination: Termination = Termination.COMPLETED


def enforce_curvature_neumann(m: ConformalMetric) -> ConformalMetric:
    """Return the metric with its ghost ring set so that d_r R(1) = 0.

    Only the outermost ring of R depends on the ghost, and linearly, so the
    closure is a direct solve per boundary node; interior u is untouched.
    """
    ghost = _kernels.curvature_neumann_ghost(
        np.ascontiguousarray(m.u), m.grid.r, m.grid.dr, m.grid.dtheta
    )
    if not np.all(np.isfinite(ghost)):
        raise BoundaryClosureError("curvature ghost closure produced non-finite values")
    return ConformalMetric(m.u, m.grid, ghost)


def rhs(m: ConformalMetric):
    """Conformal Ricci flow right-hand side, d_t u = -R."""
    return -scalar_curvature(m)


def cfl_dt(m: ConformalMetric, safety: float) -> float:
    """Explicit stability bound dt = safety * min(e^u) * min(dr, r_min dth)^2 / 4."""
    g = m.grid
    h = g.dr if g.n_theta == 1 else min(g.dr, g.r[0] * g.dtheta)
    return safety * float(np.exp(m.u).min()) * h * h / 4.0


def _stage_metric(u, template: ConformalMetric) -> ConformalMetric:
    return enforce_curvature_neumann(ConformalMetric(u, template.grid, template.u_ghost))


def step(s: FlowState, dt: float) -> FlowState:
    """One RK4 step with the boundary closure re-enforced at every stage."""
    if dt == 0.0:
        return s
    m0 = enforce_curvature_neumann(s.metric)
    u0 = m0.u
    k1 = rhs(m0)
    k2 = rhs(_stage_metric(u0 + 0.5 * dt * k1, m0))
    k3 = rhs(_stage_metric(u0 + 0.5 * dt * k2, m0))
    k4 = rhs(_stage_metric(u0 + dt * k3, m0))
    u_new = u0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    m_new = _stage_metric(u_new, m0)
    r_min = float(scalar_curvature(m_new).min())
    if r_min <= 0.0:
        raise PositivityError(
            f"min R = {r_min:.3e} <= 0 after step to t = {s.t + dt:.6g}", min_r=r_min
        )
    return FlowState(s.t + dt, m_new)


def run(initial: ConformalMetric, sched: FlowSchedule, w_horizon: float) -> FlowTrajectory:
    """Integrate to t_end (or early termination), recording entropy data.

    Records are taken at t = 0, every ``record_every`` accepted steps, and
    at the final accepted state; snapshots are stored alongside each record.
    """
    sched.validate()
    if w_horizon <= sched.t_end:
        raise UsageError(
            f"w_horizon ({w_horizon}) must exceed t_end ({sched.t_end})"
        )

    state = FlowState(0.0, enforce_curvature_neumann(initial))
    r0_min = float(scalar_curvature(state.metric).min())
    if r0_min <= 0.0:
        raise PositivityError(
            f"initial metric has min R = {r0_min:.3e} <= 0", min_r=r0_min
        )

    traj = FlowTrajectory()

    def record(st):
        traj.snapshots.append(FlowState(st.t, st.metric.copy()))
        traj.records.append(entropy.make_record(st.metric, st.t, w_horizon))

    record(state)
    steps = 0
    last_recorded = 0
    while state.t < sched.t_end * (1.0 - 1e-14):
        if steps >= sched.max_steps:
            traj.termination = Termination.STEP_LIMIT
            return traj
        dt = min(cfl_dt(state.metric, sched.cfl_safety), sched.t_end - state.t)
        try:
            state = step(state, dt)
        except PositivityError:
            traj.termination = Termination.POSITIVITY_LOST
            return traj
        steps += 1
        if steps - last_recorded >= sched.record_every or state.t >= sched.t_end * (1.0 - 1e-14):
            record(state)
            last_recorded = steps

    traj.termination = Termination.COMPLETED
    return traj
