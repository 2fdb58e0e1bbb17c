"""Time integration of v_t = lap ln v (equivalently u_t = e^{-u} lap u).

Radial chart: backward Euler, solved by Newton iteration with tridiagonal
Jacobians, in either the log gauge u = ln v (positivity built in, the
default) or directly in v (with a positivity line search); both discretize
the same affine log-Laplacian, so they agree to O(dt).

Cartesian chart: forward Euler with the five-point Laplacian of ln v under
the stability bound dt <= safety * h^2 * min(v) / 4 (linearized diffusivity
is 1/v).

Step size follows the curvature clock dt <= kappa / sup|R| with retry
halving on Newton failures; sup|R| above a ceiling terminates the run as a
blowup (which admissible data should never produce).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BlowupDetected, CFLViolation, ConfigError, NewtonFailure
from .fields import FlowState, exact_cigar_flow
from .geometry import DiagnosticsRow, check_admissibility, scalar_curvature

BOUNDARY_KINDS = ("exact_cigar", "frozen_log_slope", "dirichlet_initial")
SCHEMES = ("auto", "radial_u", "radial_v", "planar_explicit")

_TIME_EPS = 1e-12


@dataclass(frozen=True)
class StepController:
    """Step-size and Newton policy.

    dt obeys dt_min <= dt <= dt_max, grows at most by `growth` per accepted
    step, and is capped by the curvature clock kappa / sup|R| (the flow's
    natural timescale is 1/R). Explicit planar steps are additionally capped
    by cfl_safety * h^2 * min(v) / 4. A run whose sup|R| reaches
    curvature_ceiling is declared a blowup.
    """

    dt_init: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 0.05
    kappa: float = 0.1
    newton_tol: float = 1e-9
    newton_max_iter: int = 12
    cfl_safety: float = 0.8
    growth: float = 2.0
    curvature_ceiling: float = 1e6

    def __post_init__(self):
        if not (0.0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ConfigError("need 0 < dt_min <= dt_init <= dt_max")
        if not (self.kappa > 0.0):
            raise ConfigError("curvature safety kappa must be positive")
        if not (self.newton_tol > 0.0):
            raise ConfigError("Newton tolerance must be positive")
        if int(self.newton_max_iter) < 1:
            raise ConfigError("need at least one Newton iteration")
        if not (self.cfl_safety > 0.0):
            raise ConfigError("CFL safety factor must be positive")
        if not (self.growth >= 1.0):
            raise ConfigError("step growth factor must be >= 1")
        if not (self.curvature_ceiling > 0.0):
            raise ConfigError("curvature ceiling must be positive")


@dataclass(frozen=True)
class BoundaryCondition:
    """Truncation treatment at the grid edge.

    exact_cigar       outer node follows the closed-form reference flow
                      (only valid when the run starts on that flow)
    frozen_log_slope  d ln v / d ln r at the edge is held at its bound-time
                      value q0 via one ghost node; preserves the tail class
                      that the asymptotic invariants depend on (the default
                      for classification runs)
    dirichlet_initial edge values pinned to their bound-time values

    The complete-plane problem has no boundary; any of these is a
    discretization surrogate and is flagged as such in reports.
    """

    kind: str
    q0: float = 0.0
    boundary_value: float = 0.0
    frame: tuple = ()

    def __post_init__(self):
        if self.kind not in BOUNDARY_KINDS:
            raise ConfigError(
                f"unknown boundary kind {self.kind!r}; choices: {BOUNDARY_KINDS}"
            )


def bind_boundary(state, kind):
    """Measure the boundary condition's parameters on `state` and attach it."""
    if kind not in BOUNDARY_KINDS:
        raise ConfigError(f"unknown boundary kind {kind!r}; choices: {BOUNDARY_KINDS}")
    if state.chart == "cartesian":
        if kind != "dirichlet_initial":
            raise ConfigError(
                "cartesian runs support only dirichlet_initial boundaries"
            )
        v = state.field.v
        frame = tuple(np.array(edge) for edge in (v[0, :], v[-1, :], v[:, 0], v[:, -1]))
        for edge in frame:
            edge.setflags(write=False)
        bc = BoundaryCondition("dirichlet_initial", frame=frame)
        return FlowState(state.chart, state.field, state.t, bc)

    prof = state.field
    if kind == "exact_cigar":
        reference = exact_cigar_flow(prof.r, state.t)
        dev = float(np.max(np.abs(prof.v - reference) / reference))
        if dev > 1e-9:
            raise ConfigError(
                "exact_cigar boundary requires data on the reference flow "
                f"1/(e^(4t)+r^2); relative deviation {dev:.3g}"
            )
        bc = BoundaryCondition("exact_cigar")
    elif kind == "frozen_log_slope":
        u = np.log(prof.v)
        q0 = float((u[-1] - u[-2]) / (np.log(prof.r[-1]) - np.log(prof.r[-2])))
        bc = BoundaryCondition("frozen_log_slope", q0=q0)
    else:
        bc = BoundaryCondition("dirichlet_initial", boundary_value=float(prof.v[-1]))
    return FlowState(state.chart, state.field, state.t, bc)


def apply_boundary(state, bc=None):
    """Re-impose the boundary condition on a state (idempotent)."""
    bc = bc if bc is not None else state.bc
    if bc is None:
        raise ConfigError("state has no boundary condition")
    if state.chart == "radial":
        if bc.kind == "exact_cigar":
            v = np.array(state.field.v)
            v[-1] = exact_cigar_flow(state.field.r[-1], state.t)
            return state.with_field(v, bc=bc)
        if bc.kind == "dirichlet_initial":
            v = np.array(state.field.v)
            v[-1] = bc.boundary_value
            return state.with_field(v, bc=bc)
        return state if state.bc is bc else state.with_field(state.field.v, bc=bc)
    if bc.kind != "dirichlet_initial":
        raise ConfigError("cartesian runs support only dirichlet_initial boundaries")
    v = np.array(state.field.v)
    top, bottom, left, right = bc.frame
    v[0, :] = top
    v[-1, :] = bottom
    v[:, 0] = left
    v[:, -1] = right
    return state.with_field(v, bc=bc)


# ---------------------------------------------------------------------------
# radial implicit machinery


class _RadialSystem:
    """Affine discrete log-Laplacian L(u) = A u + g on a uniform radial grid.

    Rows: origin 4(u1 - u0)/h^2; interior u_rr + u_r/r; boundary row either
    eliminated (known edge value folded into g; exact_cigar and
    dirichlet_initial) or kept with the frozen-slope ghost
    u_ghost = u_edge + q0 * ln(r_ghost / r_edge) folded in.
    """

    def __init__(self, profile, bc):
        r = profile.r
        h = profile.spacing
        n = profile.n
        self.kind = bc.kind
        self.h = h
        self.rmax = float(r[-1])
        h2 = h * h
        if bc.kind == "frozen_log_slope":
            m = n
            sub = np.zeros(m)
            diag = np.zeros(m)
            sup = np.zeros(m)
            diag[0] = -4.0 / h2
            sup[0] = 4.0 / h2
            rm = r[1:-1]
            sub[1:-1] = 1.0 / h2 - 1.0 / (2.0 * h * rm)
            diag[1:-1] = -2.0 / h2
            sup[1:-1] = 1.0 / h2 + 1.0 / (2.0 * h * rm)
            rb = float(r[-1])
            edge = 1.0 / h2 - 1.0 / (2.0 * h * rb)
            sub[-1] = edge
            diag[-1] = -edge
            offset = bc.q0 * math.log((rb + h) / rb)
            g0 = np.zeros(m)
            g0[-1] = offset * (1.0 / h2 + 1.0 / (2.0 * h * rb))
            self.w_bc = 0.0
            self._u_bc_fixed = None
            self._v_bc_fixed = None
        else:
            m = n - 1
            sub = np.zeros(m)
            diag = np.zeros(m)
            sup = np.zeros(m)
            diag[0] = -4.0 / h2
            sup[0] = 4.0 / h2
            rm = r[1 : m - 1]
            sub[1 : m - 1] = 1.0 / h2 - 1.0 / (2.0 * h * rm)
            diag[1 : m - 1] = -2.0 / h2
            sup[1 : m - 1] = 1.0 / h2 + 1.0 / (2.0 * h * rm)
            rlast = float(r[m - 1])
            sub[m - 1] = 1.0 / h2 - 1.0 / (2.0 * h * rlast)
            diag[m - 1] = -2.0 / h2
            self.w_bc = 1.0 / h2 + 1.0 / (2.0 * h * rlast)
            g0 = np.zeros(m)
            if bc.kind == "dirichlet_initial":
                self._v_bc_fixed = bc.boundary_value
                self._u_bc_fixed = math.log(bc.boundary_value)
            else:
                self._v_bc_fixed = None
                self._u_bc_fixed = None
        self.m = m
        self.sub = sub
        self.diag = diag
        self.sup = sup
        self.g0 = g0

    def boundary_value(self, t):
        """Edge value v(rmax, t); None for the frozen-slope row."""
        if self.kind == "frozen_log_slope":
            return None
        if self.kind == "exact_cigar":
            return float(exact_cigar_flow(self.rmax, t))
        return self._v_bc_fixed

    def boundary_log_value(self, t):
        if self.kind == "frozen_log_slope":
            return 0.0
        if self.kind == "exact_cigar":
            return -math.log(math.exp(4.0 * t) + self.rmax * self.rmax)
        return self._u_bc_fixed

    def lap(self, w, u_bc):
        out = self.diag * w
        out[1:] += self.sub[1:] * w[:-1]
        out[:-1] += self.sup[:-1] * w[1:]
        out += self.g0
        if self.kind != "frozen_log_slope":
            out[-1] += self.w_bc * u_bc
        return out


def _newton_u(system, u, dt, t_new, controller):
    """Backward-Euler solve in the log gauge; None means state unchanged."""
    if system.kind == "frozen_log_slope":
        w = u.copy()
        u0 = u
        u_bc = 0.0
        boundary_moves = False
    else:
        w = u[:-1].copy()
        u0 = u[:-1]
        u_bc = system.boundary_log_value(t_new)
        boundary_moves = u_bc != u[-1]
    tol = controller.newton_tol
    max_iter = int(controller.newton_max_iter)
    for iteration in range(max_iter + 1):
        lap = system.lap(w, u_bc)
        eneg = np.exp(-w)
        rate = eneg * lap
        resid = w - u0 - dt * rate
        if float(np.max(np.abs(resid))) < tol:
            if iteration == 0 and not boundary_moves:
                return None
            break
        if iteration == max_iter:
            raise NewtonFailure(
                f"Newton (log form) stalled after {max_iter} iterations at dt={dt:g}"
            )
        diag_j = 1.0 + dt * rate - dt * (eneg * system.diag)
        sub_j = -dt * (eneg * system.sub)
        sup_j = -dt * (eneg * system.sup)
        delta = kernels.tridiag_solve(sub_j[1:], diag_j, sup_j[:-1], -resid)
        w = w + delta
    if system.kind == "frozen_log_slope":
        return w
    return np.concatenate([w, [u_bc]])


def _newton_v(system, v, dt, t_new, controller):
    """Backward-Euler solve in v; non-positive iterates are damped away."""
    if system.kind == "frozen_log_slope":
        z = v.copy()
        v0 = v
        u_bc = 0.0
        v_bc = None
        boundary_moves = False
    else:
        z = v[:-1].copy()
        v0 = v[:-1]
        u_bc = system.boundary_log_value(t_new)
        v_bc = system.boundary_value(t_new)
        boundary_moves = v_bc != v[-1]
    tol = controller.newton_tol
    max_iter = int(controller.newton_max_iter)
    for iteration in range(max_iter + 1):
        lap = system.lap(np.log(z), u_bc)
        resid = z - v0 - dt * lap
        if float(np.max(np.abs(resid))) < tol:
            if iteration == 0 and not boundary_moves:
                return None
            break
        if iteration == max_iter:
            raise NewtonFailure(
                f"Newton (direct form) stalled after {max_iter} iterations at dt={dt:g}"
            )
        diag_j = 1.0 - dt * system.diag / z
        sub_j = np.zeros_like(z)
        sub_j[1:] = -dt * system.sub[1:] / z[:-1]
        sup_j = np.zeros_like(z)
        sup_j[:-1] = -dt * system.sup[:-1] / z[1:]
        delta = kernels.tridiag_solve(sub_j[1:], diag_j, sup_j[:-1], -resid)
        lam = 1.0
        z_new = z + delta
        while not np.all(z_new > 0.0):
            lam *= 0.5
            if lam < 1e-16:
                raise NewtonFailure("positivity line search exhausted")
            z_new = z + lam * delta
        z = z_new
    if system.kind == "frozen_log_slope":
        return z
    return np.concatenate([z, [v_bc]])


def _require(state, chart, dt):
    if not isinstance(state, FlowState):
        raise TypeError("expected a FlowState")
    if state.chart != chart:
        raise ConfigError(f"this stepper requires the {chart} chart")
    if state.bc is None:
        raise ConfigError("state has no boundary condition; call bind_boundary first")
    if not (dt > 0.0):
        raise ConfigError("dt must be positive")


def step_radial_implicit(state, dt, controller=None):
    """One backward-Euler step of u_t = e^{-u} lap u; result strictly positive."""
    controller = controller or StepController()
    _require(state, "radial", dt)
    system = _RadialSystem(state.field, state.bc)
    t_new = state.t + dt
    u_new = _newton_u(system, np.log(state.field.v), dt, t_new, controller)
    if u_new is None:
        return state.with_field(state.field.v, t=t_new)
    return state.with_field(np.exp(u_new), t=t_new)


def step_radial_implicit_vform(state, dt, controller=None):
    """One backward-Euler step of v_t = lap ln v, Newton directly in v."""
    controller = controller or StepController()
    _require(state, "radial", dt)
    system = _RadialSystem(state.field, state.bc)
    t_new = state.t + dt
    v_new = _newton_v(system, np.asarray(state.field.v), dt, t_new, controller)
    if v_new is None:
        return state.with_field(state.field.v, t=t_new)
    return state.with_field(v_new, t=t_new)


def cfl_bound(state, controller=None):
    """Largest stable explicit dt: safety * h^2 * min(v) / 4."""
    controller = controller or StepController()
    field = state.field
    return controller.cfl_safety * field.spacing**2 * float(field.v.min()) / 4.0


def step_planar_explicit(state, dt, controller=None):
    """One forward-Euler step with the five-point Laplacian of ln v.

    Steps violating the stability bound are rejected; a non-positive result
    is reported as blowup. Edge nodes are carried unchanged (the pinned
    dirichlet_initial frame).
    """
    controller = controller or StepController()
    _require(state, "cartesian", dt)
    if state.bc.kind != "dirichlet_initial":
        raise ConfigError("cartesian runs support only dirichlet_initial boundaries")
    field = state.field
    bound = cfl_bound(state, controller)
    if dt > bound * (1.0 + 1e-9):
        raise CFLViolation(
            f"dt={dt:.6g} rejected: stability bound is {bound:.6g} "
            f"(= {controller.cfl_safety:g} * h^2 * min(v) / 4)"
        )
    out = np.empty_like(field.v)
    kernels.planar_log_step(field.v, out, dt / field.spacing**2)
    if not np.all(np.isfinite(out)) or not np.all(out > 0.0):
        raise BlowupDetected("explicit step lost positivity")
    return state.with_field(out, t=state.t + dt)


# ---------------------------------------------------------------------------
# trajectories


@dataclass(frozen=True)
class Trajectory:
    """Sampled run: diagnostics and snapshot states at the schedule times.

    status is exactly one of "reached_t_end", "blowup", "newton_failure";
    final_state is the last accepted state (past the last sample when the
    run terminated abnormally between samples).
    """

    samples: tuple
    states: tuple
    status: str
    final_state: FlowState
    note: str = ""

    def __post_init__(self):
        if self.status not in ("reached_t_end", "blowup", "newton_failure"):
            raise ValueError(f"unknown termination status {self.status!r}")
        times = [row.t for row in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("sample times must be strictly increasing")

    @property
    def times(self):
        return tuple(row.t for row in self.samples)


def _resolve_scheme(scheme, chart):
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown scheme {scheme!r}; choices: {SCHEMES}")
    if scheme == "auto":
        return "radial_u" if chart == "radial" else "planar_explicit"
    if chart == "radial" and scheme == "planar_explicit":
        raise ConfigError("planar_explicit requires the cartesian chart")
    if chart == "cartesian" and scheme != "planar_explicit":
        raise ConfigError("implicit radial schemes require the radial chart")
    return scheme


def evolve(
    state,
    t_end,
    controller=None,
    schedule=None,
    scheme="auto",
    admissibility_bound=10.0,
    allow_inadmissible=False,
    precheck=True,
):
    """Integrate to t_end, recording diagnostics and snapshots on a schedule.

    The schedule defaults to (t_start, t_end); its times are hit exactly.
    Initial data failing the admissibility gate (completeness, bounded
    curvature, bounded gradient) is rejected unless allow_inadmissible, in
    which case the run proceeds and the trajectory carries a warning note.
    """
    controller = controller or StepController()
    if state.bc is None:
        raise ConfigError("bind a boundary condition before evolving")
    t0 = float(state.t)
    if not (t_end > t0):
        raise ConfigError("t_end must exceed the starting time")
    scheme = _resolve_scheme(scheme, state.chart)

    if schedule is None:
        schedule = (t0, t_end)
    sched = [float(s) for s in schedule]
    if any(b <= a for a, b in zip(sched, sched[1:])):
        raise ConfigError("schedule times must be strictly increasing")
    if sched and (sched[0] < t0 - _TIME_EPS or sched[-1] > t_end + _TIME_EPS):
        raise ConfigError("schedule must lie within [t_start, t_end]")
    if not sched or abs(sched[-1] - t_end) > _TIME_EPS:
        raise ConfigError("the last scheduled sample must be t_end")

    note = ""
    if precheck:
        report = check_admissibility(state, admissibility_bound)
        if not report.admissible:
            failed = ", ".join(
                name
                for name in ("complete", "curvature_bounded", "gradient_bounded")
                if not report.conditions[name]
            )
            if not allow_inadmissible:
                raise ConfigError(
                    f"initial data fails the admissibility gate ({failed}); "
                    "set allow_inadmissible to run anyway"
                )
            note = f"forced run with inadmissible initial data ({failed})"

    if scheme in ("radial_u", "radial_v"):
        system = _RadialSystem(state.field, state.bc)
        solve = _newton_u if scheme == "radial_u" else _newton_v
        transform = (lambda v: np.log(v)) if scheme == "radial_u" else (lambda v: np.asarray(v))
        back = (lambda w: np.exp(w)) if scheme == "radial_u" else (lambda w: w)

        def attempt(st, dt, t_new):
            res = solve(system, transform(st.field.v), dt, t_new, controller)
            if res is None:
                return st.with_field(st.field.v, t=t_new)
            return st.with_field(back(res), t=t_new)

        clock_every = 1
    else:

        def attempt(st, dt, t_new):
            new = step_planar_explicit(st, dt, controller)
            if new.t != t_new:
                new = new.with_field(new.field.v, t=t_new)
            return new

        clock_every = 25

    rows = []
    states = []
    dt_last = controller.dt_init

    def record(st):
        rows.append(DiagnosticsRow.compute(st, dt_last))
        states.append(st)

    pointer = 0
    if abs(sched[0] - t0) <= _TIME_EPS:
        record(state)
        pointer = 1

    status = "reached_t_end"
    sup_abs_r = None
    steps_since_clock = clock_every

    while state.t < t_end - _TIME_EPS:
        if sup_abs_r is None or steps_since_clock >= clock_every:
            sup_abs_r = float(np.max(np.abs(scalar_curvature(state))))
            steps_since_clock = 0
        if sup_abs_r >= controller.curvature_ceiling:
            status = "blowup"
            note = f"sup|R| = {sup_abs_r:.3g} reached the ceiling at t = {state.t:.6g}"
            break
        dt = min(controller.dt_max, controller.growth * dt_last)
        if sup_abs_r > 0.0:
            dt = min(dt, controller.kappa / sup_abs_r)
        if scheme == "planar_explicit":
            dt = min(dt, cfl_bound(state, controller))
        dt = max(dt, controller.dt_min)
        target = sched[pointer] if pointer < len(sched) else t_end
        landing = False
        if state.t + dt >= target - _TIME_EPS:
            dt = target - state.t
            landing = True
        new_state = None
        while True:
            try:
                new_state = attempt(state, dt, target if landing else state.t + dt)
                break
            except NewtonFailure as exc:
                landing = False
                dt *= 0.5
                if dt < controller.dt_min:
                    status = "newton_failure"
                    note = str(exc)
                    break
            except BlowupDetected as exc:
                status = "blowup"
                note = str(exc)
                break
        if new_state is None:
            break
        state = new_state
        dt_last = dt
        steps_since_clock += 1
        if landing:
            record(state)
            pointer += 1
            steps_since_clock = clock_every  # refresh the clock at samples

    return Trajectory(tuple(rows), tuple(states), status, state, note)


__all__ = [
    "BOUNDARY_KINDS",
    "SCHEMES",
    "StepController",
    "BoundaryCondition",
    "bind_boundary",
    "apply_boundary",
    "step_radial_implicit",
    "step_radial_implicit_vform",
    "step_planar_explicit",
    "cfl_bound",
    "Trajectory",
    "evolve",
]
