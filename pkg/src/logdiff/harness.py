"""Scenario configuration, execution, artifacts, and reproduction reports.

A scenario is one YAML file; every threshold and tolerance that affects a
reported number lives in it (defaults are filled in and echoed back, so the
echo is a complete record of the run). Artifacts are flat files in the
scenario's output directory:

    config_echo.yaml    the parsed configuration, canonicalized
    admissibility.json  initial-data report
    diagnostics.csv     one row per scheduled sample (fixed column order)
    snapshot_KKK.txt    field snapshots at the scheduled times
    classification.json long-time limit verdict (when enabled)
    report.txt          human-readable summary

All floats are printed with 17 significant digits; rerunning a scenario
reproduces the artifacts byte for byte.
"""

import json
import math
import os
from dataclasses import dataclass, replace

import numpy as np
import yaml
from scipy.interpolate import CubicSpline

from .errors import ConfigError
from .fields import (
    FlowState,
    InitialDataSpec,
    PlanarField,
    RadialProfile,
    build_initial,
    exact_cigar_flow,
    format_float,
    radial_grid,
    state_from_table_path,
    state_table_text,
)
from .geometry import CSV_COLUMNS, check_admissibility
from .soliton import ClassifierThresholds, classify_limit
from .solver import BOUNDARY_KINDS, SCHEMES, StepController, bind_boundary, evolve

_TRUNCATION_NOTE = (
    "note: the boundary condition is a truncation surrogate for the complete "
    "plane; asymptotic quantities are read from the recorded tail inside the grid"
)


# ---------------------------------------------------------------------------
# configuration


def _section(raw, name, allowed, required=()):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config section {name!r} must be a mapping")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {', '.join(unknown)}")
    missing = sorted(set(required) - set(raw))
    if missing:
        raise ConfigError(f"missing keys in {name!r}: {', '.join(missing)}")
    return dict(raw)


def _number(raw, name, lo=None, integer=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        raise ConfigError(f"{name} must be a number, got {raw!r}")
    if integer:
        if int(raw) != raw:
            raise ConfigError(f"{name} must be an integer, got {raw!r}")
        raw = int(raw)
    else:
        raw = float(raw)
    if lo is not None and raw < lo:
        raise ConfigError(f"{name} must be at least {lo}, got {raw}")
    return raw


def _boolean(raw, name):
    if not isinstance(raw, bool):
        raise ConfigError(f"{name} must be true or false, got {raw!r}")
    return raw


def _string(raw, name, choices=None):
    if not isinstance(raw, str) or not raw:
        raise ConfigError(f"{name} must be a nonempty string, got {raw!r}")
    if choices is not None and raw not in choices:
        raise ConfigError(f"{name} must be one of {choices}, got {raw!r}")
    return raw


_TOP_KEYS = (
    "name",
    "chart",
    "initial",
    "grid",
    "boundary",
    "scheme",
    "t_end",
    "samples",
    "schedule",
    "controller",
    "admissibility",
    "soliton",
    "verify",
    "output_dir",
)

_CONTROLLER_FLOATS = (
    "dt_init",
    "dt_min",
    "dt_max",
    "kappa",
    "newton_tol",
    "cfl_safety",
    "growth",
    "curvature_ceiling",
)


@dataclass(frozen=True)
class SolitonSettings:
    classify: bool = False
    window: float = 10.0
    nodes: int = 512
    thresholds: ClassifierThresholds = ClassifierThresholds()


@dataclass(frozen=True)
class VerifySettings:
    max_rel_error: float = 1e-2
    order_low: float = 1.6
    order_high: float = 2.4


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario; canonical_dict() round-trips through YAML exactly."""

    name: str
    chart: str
    initial: InitialDataSpec
    grid: dict
    boundary: str
    scheme: str
    t_end: float
    samples: int
    schedule: tuple
    controller: StepController
    admissibility_bound: float
    allow_inadmissible: bool
    soliton: SolitonSettings
    verify: VerifySettings
    output_dir: str

    def canonical_dict(self):
        initial = {"kind": self.initial.kind}
        if self.initial.kind in ("cigar", "perturbed_cigar"):
            initial["c"] = self.initial.c
        if self.initial.kind == "perturbed_cigar":
            initial["epsilon"] = self.initial.epsilon
            initial["bump_support"] = [self.initial.bump_inner, self.initial.bump_outer]
        if self.initial.kind == "power_law":
            initial["alpha"] = self.initial.alpha
        if self.initial.kind == "table":
            initial["path"] = self.initial.table_path
        ctrl = self.controller
        doc = {
            "name": self.name,
            "chart": self.chart,
            "initial": initial,
            "grid": dict(self.grid),
            "boundary": self.boundary,
            "scheme": self.scheme,
            "t_end": self.t_end,
            "controller": {
                "dt_init": ctrl.dt_init,
                "dt_min": ctrl.dt_min,
                "dt_max": ctrl.dt_max,
                "kappa": ctrl.kappa,
                "newton_tol": ctrl.newton_tol,
                "newton_max_iter": ctrl.newton_max_iter,
                "cfl_safety": ctrl.cfl_safety,
                "growth": ctrl.growth,
                "curvature_ceiling": ctrl.curvature_ceiling,
            },
            "admissibility": {
                "bound": self.admissibility_bound,
                "allow_fail": self.allow_inadmissible,
            },
            "soliton": {
                "classify": self.soliton.classify,
                "window": self.soliton.window,
                "nodes": self.soliton.nodes,
                "theta_stationary": self.soliton.thresholds.stationary,
                "theta_fit": self.soliton.thresholds.fit,
                "theta_aperture": self.soliton.thresholds.aperture,
                "circumference_tolerance": self.soliton.thresholds.circumference_tolerance,
            },
            "verify": {
                "max_rel_error": self.verify.max_rel_error,
                "order_low": self.verify.order_low,
                "order_high": self.verify.order_high,
            },
            "output_dir": self.output_dir,
        }
        if self.samples:
            doc["samples"] = self.samples
        else:
            doc["schedule"] = [float(s) for s in self.schedule]
        return doc

    def echo_text(self):
        return yaml.safe_dump(
            self.canonical_dict(), sort_keys=True, default_flow_style=False
        )


def parse_config(doc):
    """Validate a parsed YAML mapping into a ScenarioConfig (strict keys)."""
    top = _section(doc, "scenario", _TOP_KEYS, required=("name", "chart", "initial", "grid", "t_end", "output_dir"))
    name = _string(top["name"], "name")
    chart = _string(top["chart"], "chart", choices=("radial", "cartesian"))
    output_dir = _string(top["output_dir"], "output_dir")

    init = _section(
        top["initial"],
        "initial",
        ("kind", "c", "epsilon", "bump_support", "alpha", "path"),
        required=("kind",),
    )
    kind = _string(init["kind"], "initial.kind")
    kwargs = {}
    if "c" in init:
        kwargs["c"] = _number(init["c"], "initial.c")
    if "epsilon" in init:
        kwargs["epsilon"] = _number(init["epsilon"], "initial.epsilon")
    if "bump_support" in init:
        support = init["bump_support"]
        if not isinstance(support, (list, tuple)) or len(support) != 2:
            raise ConfigError("initial.bump_support must be a [inner, outer] pair")
        kwargs["bump_inner"] = _number(support[0], "initial.bump_support[0]")
        kwargs["bump_outer"] = _number(support[1], "initial.bump_support[1]")
    if "alpha" in init:
        kwargs["alpha"] = _number(init["alpha"], "initial.alpha")
    if "path" in init:
        kwargs["table_path"] = _string(init["path"], "initial.path")
    initial = InitialDataSpec(kind, **kwargs)

    if chart == "radial":
        grid_raw = _section(top["grid"], "grid", ("rmax", "n"), required=("rmax", "n"))
        grid = {
            "rmax": _number(grid_raw["rmax"], "grid.rmax", lo=1e-12),
            "n": _number(grid_raw["n"], "grid.n", lo=64, integer=True),
        }
    else:
        grid_raw = _section(
            top["grid"], "grid", ("extent", "nx", "ny"), required=("extent", "nx", "ny")
        )
        grid = {
            "extent": _number(grid_raw["extent"], "grid.extent", lo=1e-12),
            "nx": _number(grid_raw["nx"], "grid.nx", lo=65, integer=True),
            "ny": _number(grid_raw["ny"], "grid.ny", lo=65, integer=True),
        }
        if grid["nx"] % 2 == 0 or grid["ny"] % 2 == 0:
            raise ConfigError("grid.nx and grid.ny must be odd (origin on a node)")

    boundary = _string(top.get("boundary", "frozen_log_slope"), "boundary", choices=BOUNDARY_KINDS)
    scheme = _string(top.get("scheme", "auto"), "scheme", choices=SCHEMES)
    t_end = _number(top["t_end"], "t_end", lo=1e-12)

    if "samples" in top and "schedule" in top:
        raise ConfigError("give either samples or schedule, not both")
    if "schedule" in top:
        raw_sched = top["schedule"]
        if not isinstance(raw_sched, (list, tuple)) or len(raw_sched) < 2:
            raise ConfigError("schedule must be a list of at least two times")
        schedule = tuple(_number(s, "schedule entry") for s in raw_sched)
        if any(b <= a for a, b in zip(schedule, schedule[1:])):
            raise ConfigError("schedule times must be strictly increasing")
        if schedule[0] < 0.0 or abs(schedule[-1] - t_end) > 1e-12:
            raise ConfigError("schedule must start at >= 0 and end exactly at t_end")
        samples = 0
    else:
        samples = _number(top.get("samples", 11), "samples", lo=2, integer=True)
        schedule = ()

    ctrl_raw = _section(
        top.get("controller"), "controller", _CONTROLLER_FLOATS + ("newton_max_iter",)
    )
    ctrl_kwargs = {
        key: _number(ctrl_raw[key], f"controller.{key}", lo=0.0)
        for key in _CONTROLLER_FLOATS
        if key in ctrl_raw
    }
    if "newton_max_iter" in ctrl_raw:
        ctrl_kwargs["newton_max_iter"] = _number(
            ctrl_raw["newton_max_iter"], "controller.newton_max_iter", lo=1, integer=True
        )
    controller = StepController(**ctrl_kwargs)

    adm_raw = _section(top.get("admissibility"), "admissibility", ("bound", "allow_fail"))
    admissibility_bound = _number(adm_raw.get("bound", 10.0), "admissibility.bound", lo=0.0)
    allow_inadmissible = _boolean(adm_raw.get("allow_fail", False), "admissibility.allow_fail")

    sol_raw = _section(
        top.get("soliton"),
        "soliton",
        (
            "classify",
            "window",
            "nodes",
            "theta_stationary",
            "theta_fit",
            "theta_aperture",
            "circumference_tolerance",
        ),
    )
    thresholds = ClassifierThresholds(
        stationary=_number(sol_raw.get("theta_stationary", 1e-2), "soliton.theta_stationary"),
        fit=_number(sol_raw.get("theta_fit", 1e-2), "soliton.theta_fit"),
        aperture=_number(sol_raw.get("theta_aperture", 0.05), "soliton.theta_aperture"),
        circumference_tolerance=_number(
            sol_raw.get("circumference_tolerance", 0.02), "soliton.circumference_tolerance"
        ),
    )
    sol = SolitonSettings(
        classify=_boolean(sol_raw.get("classify", False), "soliton.classify"),
        window=_number(sol_raw.get("window", 10.0), "soliton.window", lo=1e-12),
        nodes=_number(sol_raw.get("nodes", 512), "soliton.nodes", lo=2, integer=True),
        thresholds=thresholds,
    )
    if sol.classify:
        count = samples if samples else len(schedule)
        if count < 4:
            raise ConfigError("classification needs at least 4 scheduled samples")

    ver_raw = _section(
        top.get("verify"), "verify", ("max_rel_error", "order_low", "order_high")
    )
    verify = VerifySettings(
        max_rel_error=_number(ver_raw.get("max_rel_error", 1e-2), "verify.max_rel_error", lo=0.0),
        order_low=_number(ver_raw.get("order_low", 1.6), "verify.order_low", lo=0.0),
        order_high=_number(ver_raw.get("order_high", 2.4), "verify.order_high", lo=0.0),
    )
    if verify.order_high <= verify.order_low:
        raise ConfigError("verify.order_high must exceed verify.order_low")

    return ScenarioConfig(
        name=name,
        chart=chart,
        initial=initial,
        grid=grid,
        boundary=boundary,
        scheme=scheme,
        t_end=t_end,
        samples=samples,
        schedule=schedule,
        controller=controller,
        admissibility_bound=admissibility_bound,
        allow_inadmissible=allow_inadmissible,
        soliton=sol,
        verify=verify,
        output_dir=output_dir,
    )


def load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a YAML mapping")
    return parse_config(doc)


# ---------------------------------------------------------------------------
# state construction and schedules


def build_state(config, bind=True):
    """Initial FlowState for a scenario (boundary bound unless bind=False)."""
    if config.chart == "radial":
        r = radial_grid(config.grid["rmax"], config.grid["n"])
        if config.initial.kind == "table":
            state = state_from_table_path(config.initial.table_path, "radial", (r,))
        else:
            state = FlowState("radial", RadialProfile(r, build_initial(config.initial, r)))
    else:
        nx, ny = config.grid["nx"], config.grid["ny"]
        spacing = 2.0 * config.grid["extent"] / (nx - 1)
        if config.initial.kind == "table":
            state = state_from_table_path(
                config.initial.table_path, "cartesian", (nx, ny, spacing)
            )
        else:
            x = (np.arange(nx) - nx // 2) * spacing
            y = (np.arange(ny) - ny // 2) * spacing
            radius = np.hypot(x[None, :], y[:, None])
            state = FlowState("cartesian", PlanarField(build_initial(config.initial, radius), spacing))
    if bind:
        state = bind_boundary(state, config.boundary)
    return state


def resolve_schedule(config, t_start=0.0):
    if config.schedule:
        sched = config.schedule
        if sched[0] < t_start - 1e-12:
            raise ConfigError("schedule starts before the initial time of the data")
        return tuple(float(s) for s in sched)
    if config.t_end <= t_start:
        raise ConfigError("t_end must exceed the starting time of the data")
    return tuple(float(s) for s in np.linspace(t_start, config.t_end, config.samples))


# ---------------------------------------------------------------------------
# scenario execution


@dataclass(frozen=True)
class RunArtifacts:
    """Paths written by run_scenario plus the in-memory results."""

    output_dir: str
    config_echo_path: str
    admissibility_path: str
    diagnostics_path: str
    snapshot_paths: tuple
    classification_path: str
    report_path: str
    status: str
    note: str
    admissibility: object
    classification: object
    trajectory: object


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _diagnostics_text(rows):
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(row.csv_line() for row in rows)
    return "\n".join(lines) + "\n"


def run_scenario(config, output_dir=None):
    """Execute one scenario end to end and write all artifacts.

    Solver failures (blowup, Newton stall) do not raise: diagnostics collected
    so far are flushed and the status lands in the report and the return
    value. Inadmissible initial data raises ConfigError unless the config sets
    admissibility.allow_fail.
    """
    if output_dir is not None:
        config = replace(config, output_dir=str(output_dir))
    out = config.output_dir
    os.makedirs(out, exist_ok=True)

    paths = {
        "echo": os.path.join(out, "config_echo.yaml"),
        "admissibility": os.path.join(out, "admissibility.json"),
        "diagnostics": os.path.join(out, "diagnostics.csv"),
        "classification": os.path.join(out, "classification.json"),
        "report": os.path.join(out, "report.txt"),
    }
    _write(paths["echo"], config.echo_text())

    state = build_state(config)
    report = check_admissibility(state, config.admissibility_bound)
    _write(paths["admissibility"], report.to_json())

    forced = ""
    if not report.admissible:
        failed = ", ".join(
            name
            for name in ("complete", "curvature_bounded", "gradient_bounded")
            if not report.conditions[name]
        )
        if not config.allow_inadmissible:
            _write(
                paths["report"],
                "\n".join(
                    [
                        f"scenario: {config.name}",
                        f"initial data rejected by the admissibility gate ({failed})",
                        *report.summary_lines(),
                        _TRUNCATION_NOTE,
                    ]
                )
                + "\n",
            )
            raise ConfigError(
                f"initial data fails the admissibility gate ({failed}); "
                "set admissibility.allow_fail to run anyway"
            )
        forced = f"warning: run forced with inadmissible initial data ({failed})"

    schedule = resolve_schedule(config, t_start=float(state.t))
    trajectory = evolve(
        state,
        config.t_end,
        controller=config.controller,
        schedule=schedule,
        scheme=config.scheme,
        precheck=False,
    )

    _write(paths["diagnostics"], _diagnostics_text(trajectory.samples))
    snapshot_paths = []
    for k, snap in enumerate(trajectory.states):
        sp = os.path.join(out, f"snapshot_{k:03d}.txt")
        _write(sp, state_table_text(snap))
        snapshot_paths.append(sp)

    classification = None
    classification_path = ""
    classify_note = ""
    if config.soliton.classify:
        if trajectory.status == "reached_t_end":
            classification = classify_limit(
                trajectory,
                window=config.soliton.window,
                nodes=config.soliton.nodes,
                thresholds=config.soliton.thresholds,
            )
            classification_path = paths["classification"]
            _write(classification_path, _json_text(classification.to_json_dict()))
        else:
            classify_note = "classification skipped: run did not reach t_end"

    lines = [
        f"scenario: {config.name}",
        f"chart: {config.chart}",
        f"grid: {config.grid}",
        f"boundary: {config.boundary}",
        _TRUNCATION_NOTE,
        f"scheme: {config.scheme}",
        f"t_end: {format_float(config.t_end)}",
        "",
        "initial data admissibility:",
        *(" " + line for line in report.summary_lines()),
    ]
    if forced:
        lines += ["", forced]
    lines += [
        "",
        f"status: {trajectory.status}",
    ]
    if trajectory.note:
        lines.append(f"note: {trajectory.note}")
    lines.append(
        f"samples recorded: {len(trajectory.samples)} of {len(schedule)} scheduled"
    )
    if trajectory.samples:
        last = trajectory.samples[-1]
        lines += [
            "",
            "final sample:",
            f" t = {format_float(last.t)}",
            f" v0 = {format_float(last.v0)}",
            f" R0 = {format_float(last.R0)}",
            f" supR = {format_float(last.supR)}",
            f" Cinf = {format_float(last.Cinf)}",
            f" aperture = {format_float(last.aperture)}",
        ]
    if classification is not None:
        lines += [
            "",
            f"classification: {classification.tag}",
            f" stationarity residual = {format_float(classification.stationarity)}",
        ]
        if classification.c is not None:
            lines.append(f" fitted c = {format_float(classification.c)}")
        if classification.circumference is not None:
            lines.append(
                f" circumference 2*pi*sqrt(c) = {format_float(classification.circumference)}"
            )
        if classification.fit_residual is not None:
            lines.append(f" fit residual = {format_float(classification.fit_residual)}")
        lines.append(f" caveat: {classification.caveat}")
    if classify_note:
        lines += ["", classify_note]
    _write(paths["report"], "\n".join(lines) + "\n")

    return RunArtifacts(
        output_dir=out,
        config_echo_path=paths["echo"],
        admissibility_path=paths["admissibility"],
        diagnostics_path=paths["diagnostics"],
        snapshot_paths=tuple(snapshot_paths),
        classification_path=classification_path,
        report_path=paths["report"],
        status=trajectory.status,
        note=trajectory.note or forced,
        admissibility=report,
        classification=classification,
        trajectory=trajectory,
    )


# ---------------------------------------------------------------------------
# exact-solution verification


@dataclass(frozen=True)
class VerificationReport:
    """Error table against the closed-form reference flow plus an order check."""

    rows: tuple  # (t, max relative error, rms relative error)
    dt: float
    coarse_dt: float
    final_error: float
    coarse_final_error: float
    ratio: float
    observed_order: float
    error_ceiling: float
    order_band: tuple
    passed: bool

    def to_text(self):
        lines = ["t,max_rel_error,l2_rel_error"]
        for t, emax, el2 in self.rows:
            lines.append(f"{format_float(t)},{format_float(emax)},{format_float(el2)}")
        lines += [
            "",
            f"dt = {format_float(self.dt)}  final max relative error = {format_float(self.final_error)}",
            f"dt = {format_float(self.coarse_dt)}  final max relative error = {format_float(self.coarse_final_error)}",
            f"error ratio (coarse/fine) = {format_float(self.ratio)}"
            f"  observed order = {format_float(self.observed_order)}",
            f"ceiling {format_float(self.error_ceiling)} on max relative error; "
            f"ratio band [{format_float(self.order_band[0])}, {format_float(self.order_band[1])}]",
            f"verdict: {'PASS' if self.passed else 'FAIL'}",
        ]
        return "\n".join(lines) + "\n"


def _relative_errors(trajectory):
    rows = []
    for st in trajectory.states:
        prof = st.field
        reference = exact_cigar_flow(prof.r, st.t)
        rel = np.abs(prof.v - reference) / reference
        rows.append((float(st.t), float(np.max(rel)), float(np.sqrt(np.mean(rel * rel)))))
    return rows


def verify_exact(config):
    """Check the radial implicit solver against the closed-form flow.

    Runs the configured scenario at fixed dt = dt_init and again at 2*dt; the
    final-time error ratio establishes the observed convergence order. Fails
    (passed=False) when any sampled max relative error exceeds the ceiling or
    the ratio leaves the configured band.
    """
    if config.chart != "radial":
        raise ConfigError("verification against the reference flow is radial-only")
    if config.initial.kind != "cigar":
        raise ConfigError("verification requires cigar initial data")
    if config.boundary != "exact_cigar":
        raise ConfigError("verification requires the exact_cigar boundary condition")
    scheme = config.scheme if config.scheme != "auto" else "radial_u"
    if scheme == "planar_explicit":
        raise ConfigError("verification requires a radial scheme")

    state = build_state(config)
    schedule = resolve_schedule(config, t_start=float(state.t))
    dt = config.controller.dt_init

    def fixed_run(step):
        ctrl = replace(config.controller, dt_init=step, dt_max=step)
        traj = evolve(
            state,
            config.t_end,
            controller=ctrl,
            schedule=schedule,
            scheme=scheme,
            precheck=False,
        )
        if traj.status != "reached_t_end":
            raise ConfigError(
                f"verification run with dt={step:g} terminated early: {traj.status}"
            )
        return traj

    rows = _relative_errors(fixed_run(dt))
    coarse_rows = _relative_errors(fixed_run(2.0 * dt))
    final_error = rows[-1][1]
    coarse_final = coarse_rows[-1][1]
    ratio = coarse_final / final_error if final_error > 0.0 else math.inf
    observed_order = math.log2(ratio) if 0.0 < ratio < math.inf else math.nan
    band = (config.verify.order_low, config.verify.order_high)
    passed = (
        all(emax <= config.verify.max_rel_error for _, emax, _ in rows)
        and band[0] <= ratio <= band[1]
    )
    return VerificationReport(
        rows=tuple(rows),
        dt=dt,
        coarse_dt=2.0 * dt,
        final_error=final_error,
        coarse_final_error=coarse_final,
        ratio=float(ratio),
        observed_order=float(observed_order),
        error_ceiling=config.verify.max_rel_error,
        order_band=band,
        passed=passed,
    )


# ---------------------------------------------------------------------------
# run comparison


@dataclass(frozen=True)
class ComparisonReport:
    """Deviation between two runs of the same scenario (resolution/scheme study)."""

    final_gap: float
    column_gaps: dict
    matched_rows: int
    chart: str
    t_end: float

    def to_text(self):
        lines = [
            f"final snapshot sup-norm gap = {format_float(self.final_gap)}",
            f"diagnostic rows matched on t: {self.matched_rows}",
            "column,max_abs_gap",
        ]
        for name in CSV_COLUMNS:
            if name in self.column_gaps:
                lines.append(f"{name},{format_float(self.column_gaps[name])}")
        return "\n".join(lines) + "\n"


def _load_run_dir(run_dir):
    echo = os.path.join(run_dir, "config_echo.yaml")
    if not os.path.isfile(echo):
        raise ConfigError(f"{run_dir} does not contain config_echo.yaml")
    config = load_config(echo)
    snaps = sorted(
        f for f in os.listdir(run_dir) if f.startswith("snapshot_") and f.endswith(".txt")
    )
    if not snaps:
        raise ConfigError(f"{run_dir} contains no snapshots")
    if config.chart == "radial":
        grid_args = (radial_grid(config.grid["rmax"], config.grid["n"]),)
    else:
        nx, ny = config.grid["nx"], config.grid["ny"]
        spacing = 2.0 * config.grid["extent"] / (nx - 1)
        grid_args = (nx, ny, spacing)
    final = state_from_table_path(
        os.path.join(run_dir, snaps[-1]), config.chart, grid_args
    )
    csv_path = os.path.join(run_dir, "diagnostics.csv")
    if not os.path.isfile(csv_path):
        raise ConfigError(f"{run_dir} does not contain diagnostics.csv")
    with open(csv_path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ConfigError(f"unexpected diagnostics columns in {run_dir}")
        data = np.array(
            [[float(cell) for cell in line.strip().split(",")] for line in fh if line.strip()]
        )
    if data.size == 0:
        raise ConfigError(f"{run_dir} has no diagnostic rows")
    return config, final, data


def _final_snapshot_gap(state_a, state_b):
    if state_a.chart == "radial":
        pa, pb = state_a.field, state_b.field
        if pa.n == pb.n and np.array_equal(pa.r, pb.r):
            return float(np.max(np.abs(pa.v - pb.v)))
        # different resolutions: spline the finer log-field onto the coarser grid
        fine, coarse = (pa, pb) if pa.n > pb.n else (pb, pa)
        if fine.rmax < coarse.rmax * (1.0 - 1e-12):
            raise ConfigError("cannot compare: finer grid does not cover the coarser")
        spline = CubicSpline(fine.r, np.log(fine.v))
        v_fine_on_coarse = np.exp(spline(coarse.r))
        return float(np.max(np.abs(v_fine_on_coarse - coarse.v)))
    fa, fb = state_a.field, state_b.field
    if fa.v.shape != fb.v.shape or fa.spacing != fb.spacing:
        raise ConfigError("cartesian comparisons require identical grids")
    return float(np.max(np.abs(fa.v - fb.v)))


def compare_runs(dir_a, dir_b):
    """Sup-norm gap of final snapshots plus per-column diagnostic gaps.

    The runs must be the same scenario modulo resolution and scheme: same
    chart, initial data, boundary kind, and t_end.
    """
    config_a, final_a, data_a = _load_run_dir(dir_a)
    config_b, final_b, data_b = _load_run_dir(dir_b)

    mismatches = []
    if config_a.chart != config_b.chart:
        mismatches.append("chart")
    if config_a.initial != config_b.initial:
        mismatches.append("initial data")
    if config_a.boundary != config_b.boundary:
        mismatches.append("boundary kind")
    if abs(config_a.t_end - config_b.t_end) > 1e-12:
        mismatches.append("t_end")
    if mismatches:
        raise ConfigError(f"runs are not comparable; they differ in: {', '.join(mismatches)}")

    if abs(final_a.t - final_b.t) > 1e-9:
        raise ConfigError("final snapshots are at different times")
    final_gap = _final_snapshot_gap(final_a, final_b)

    column_gaps = {}
    matched = 0
    tb = data_b[:, 0]
    gaps = np.zeros(len(CSV_COLUMNS) - 1)
    for row in data_a:
        j = np.argmin(np.abs(tb - row[0]))
        if abs(tb[j] - row[0]) > 1e-9:
            continue
        matched += 1
        gaps = np.maximum(gaps, np.abs(row[1:] - data_b[j, 1:]))
    if matched == 0:
        raise ConfigError("no diagnostic rows share a sample time")
    for k, name in enumerate(CSV_COLUMNS[1:]):
        column_gaps[name] = float(gaps[k])

    return ComparisonReport(
        final_gap=final_gap,
        column_gaps=column_gaps,
        matched_rows=matched,
        chart=config_a.chart,
        t_end=config_a.t_end,
    )


# ---------------------------------------------------------------------------
# initial-data check


def check_initial(config):
    """Admissibility report for a scenario's initial data (no time stepping)."""
    state = build_state(config, bind=False)
    return check_admissibility(state, config.admissibility_bound)


__all__ = [
    "ScenarioConfig",
    "SolitonSettings",
    "VerifySettings",
    "RunArtifacts",
    "VerificationReport",
    "ComparisonReport",
    "parse_config",
    "load_config",
    "build_state",
    "resolve_schedule",
    "run_scenario",
    "verify_exact",
    "compare_runs",
    "check_initial",
]
