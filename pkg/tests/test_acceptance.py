"""End-to-end acceptance suite.

Each test here is one numbered acceptance check (c01..c12). The expensive
reference runs are shared through module-scope fixtures; wall-clock budgets
are asserted where a check carries one.
"""

import math
import os
import time
from dataclasses import replace

import numpy as np
import pytest

from logdiff.fields import (
    FlowState,
    RadialProfile,
    build_initial,
    cigar_profile,
    exact_cigar_flow,
    InitialDataSpec,
    radial_grid,
)
from logdiff.geometry import (
    aperture,
    circumference_at_infinity,
    harnack_quantity,
    total_curvature,
)
from logdiff.harness import compare_runs, load_config, run_scenario
from logdiff.solver import StepController, bind_boundary, evolve
from logdiff.soliton import gauge_scale

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "configs")

RMAX = 40.0
N = 2000
T_END = 1.0
SCHEDULE = tuple(np.linspace(0.0, T_END, 11))


def reference_state():
    r = radial_grid(RMAX, N)
    st = FlowState("radial", RadialProfile(r, cigar_profile(r)))
    return bind_boundary(st, "exact_cigar")


def timed_run(scheme, dt):
    ctrl = StepController(dt_init=dt, dt_max=dt, kappa=1e6)
    t0 = time.monotonic()
    traj = evolve(reference_state(), T_END, ctrl, schedule=SCHEDULE, scheme=scheme)
    elapsed = time.monotonic() - t0
    assert traj.status == "reached_t_end"
    return traj, elapsed


def sup_rel_error(state):
    exact = exact_cigar_flow(state.field.r, state.t)
    return float(np.max(np.abs(state.field.v - exact) / exact))


@pytest.fixture(scope="module")
def reference_runs():
    """Fixed-step runs of both radial forms at three step sizes."""
    runs = {}
    for scheme in ("radial_u", "radial_v"):
        for dt in (2e-3, 1e-3, 5e-4):
            runs[scheme, dt] = timed_run(scheme, dt)
    return runs


@pytest.fixture(scope="module")
def perturbed_artifacts(tmp_path_factory):
    cfg = load_config(os.path.join(CONFIG_DIR, "perturbed_cigar.yaml"))
    out = str(tmp_path_factory.mktemp("perturbed"))
    t0 = time.monotonic()
    art = run_scenario(cfg, output_dir=out)
    return art, time.monotonic() - t0


@pytest.fixture(scope="module")
def power_law_artifacts(tmp_path_factory):
    cfg = load_config(os.path.join(CONFIG_DIR, "power_law_flat.yaml"))
    out = str(tmp_path_factory.mktemp("powerlaw"))
    art = run_scenario(cfg, output_dir=out)
    return art


@pytest.fixture(scope="module")
def planar_artifacts(tmp_path_factory):
    cfg = load_config(os.path.join(CONFIG_DIR, "planar_cigar.yaml"))
    out = str(tmp_path_factory.mktemp("planar"))
    t0 = time.monotonic()
    art = run_scenario(cfg, output_dir=out)
    return art, time.monotonic() - t0


def test_c01_exact_solution_oracle(reference_runs):
    """Implicit radial solver reproduces the closed-form flow at order 1."""
    traj_fine, secs_fine = reference_runs["radial_u", 1e-3]
    traj_coarse, secs_coarse = reference_runs["radial_u", 2e-3]
    errors = [sup_rel_error(st) for st in traj_fine.states]
    assert max(errors) <= 1e-2
    ratio = sup_rel_error(traj_coarse.states[-1]) / sup_rel_error(traj_fine.states[-1])
    order = math.log2(ratio)
    assert 0.8 <= order <= 1.2
    assert secs_fine + secs_coarse <= 60.0


def test_c02_origin_curvature_pin(reference_runs):
    """R at the origin stays 4 along the reference flow."""
    traj, _ = reference_runs["radial_u", 1e-3]
    for row in traj.samples:
        assert abs(row.R0 - 4.0) / 4.0 <= 0.02


def test_c03_h_identity(reference_runs):
    """R + |Du|^2 is grid-constant 4 on the inner region at t = 0 and t = 1."""
    traj, _ = reference_runs["radial_u", 1e-3]
    for state in (traj.states[0], traj.states[-1]):
        h = harnack_quantity(state)
        mask = state.field.r <= 20.0
        assert float(np.max(np.abs(h[mask] - 4.0))) / 4.0 <= 0.05


def test_c04_conservation_drift(reference_runs):
    """Total curvature matches its closed form at t = 0 and, along with the
    asymptotic invariants, drifts only marginally when measured at a comoving
    truncation radius."""
    traj, _ = reference_runs["radial_u", 1e-3]
    expected = 4.0 * math.pi * (1.0 - 1.0 / (1.0 + RMAX * RMAX))
    tc0 = total_curvature(traj.states[0]).value
    assert abs(tc0 - expected) / expected <= 5e-3

    # the same material circle: radius comoving with the gauge scale,
    # normalized to land on the grid edge at the final time
    scales = [gauge_scale(st) for st in traj.states]
    rho0 = RMAX / scales[-1]
    tc, cinf, ap = [], [], []
    for st, s in zip(traj.states, scales):
        radius = s * rho0
        tc.append(total_curvature(st, truncation_radius=radius).value)
        cinf.append(circumference_at_infinity(st, radius=radius).value)
        ap.append(aperture(st, radius=radius).value)
    assert (max(tc) - min(tc)) / abs(tc[0]) <= 1e-2
    assert (max(cinf) - min(cinf)) / abs(cinf[0]) <= 2e-2
    assert max(ap) - min(ap) <= 0.02


def test_c05_invariant_values():
    """Asymptotic invariants of reference data, no time stepping."""
    t0 = time.monotonic()
    r = radial_grid(RMAX, N)
    cigar = FlowState("radial", RadialProfile(r, cigar_profile(r)))
    est = circumference_at_infinity(cigar)
    assert abs(est.value - 2.0 * math.pi) / (2.0 * math.pi) <= 0.02

    flat = FlowState("radial", RadialProfile(r, np.ones(N)))
    assert abs(aperture(flat).value - 1.0) <= 0.01

    r_big = radial_grid(1000.0, 10001)
    spec = InitialDataSpec("power_law", alpha=0.5)
    power = FlowState("radial", RadialProfile(r_big, build_initial(spec, r_big)))
    assert abs(aperture(power).value - 0.5) / 0.5 <= 0.05
    assert time.monotonic() - t0 <= 5.0


def test_c06_gauge_equivalence(reference_runs):
    """The log-gauge and direct-form steppers are the same scheme in
    disguise: both first order against the reference flow, mutual gap well
    under 10*dt and shrinking linearly with dt."""
    for scheme in ("radial_u", "radial_v"):
        fine = sup_rel_error(reference_runs[scheme, 1e-3][0].states[-1])
        coarse = sup_rel_error(reference_runs[scheme, 2e-3][0].states[-1])
        assert fine <= 1e-2
        assert 0.8 <= math.log2(coarse / fine) <= 1.2

    def gap(dt):
        vu = reference_runs["radial_u", dt][0].states[-1].field.v
        vv = reference_runs["radial_v", dt][0].states[-1].field.v
        return float(np.max(np.abs(vu - vv)))

    g1, g2 = gap(1e-3), gap(5e-4)
    assert g1 <= 10.0 * 1e-3
    assert 1.6 <= g1 / g2 <= 2.4


def test_c07_scaling_covariance():
    """Doubling v and dt traces the same trajectory at doubled times."""
    def run(scale, dt, t_end):
        r = radial_grid(20.0, 1000)
        st = FlowState("radial", RadialProfile(r, scale * cigar_profile(r)))
        st = bind_boundary(st, "frozen_log_slope")
        ctrl = StepController(dt_init=dt, dt_max=dt, kappa=1e6)
        traj = evolve(st, t_end, ctrl, schedule=tuple(np.linspace(0.0, t_end, 3)))
        assert traj.status == "reached_t_end"
        return traj

    base = run(1.0, 1e-3, 1.0)
    doubled = run(2.0, 2e-3, 2.0)
    for st_b, st_d in zip(base.states, doubled.states):
        assert st_d.t == 2.0 * st_b.t
        assert float(np.max(np.abs(st_d.field.v - 2.0 * st_b.field.v))) <= 1e-6


def test_c08_cigar_classification(perturbed_artifacts):
    """A compact perturbation of the cigar flows back to the cigar."""
    art, elapsed = perturbed_artifacts
    assert art.status == "reached_t_end"
    out = art.classification
    assert out is not None and out.tag == "Cigar"
    assert out.fit_residual < 1e-2
    assert out.circumference <= 1.02 * out.initial_circumference
    assert os.path.isfile(art.classification_path)
    assert elapsed <= 120.0


def test_c09_flat_classification(power_law_artifacts):
    """Slow power-tail data spreads out: flat limit, decaying curvature,
    settling rescaled profiles."""
    art = power_law_artifacts
    assert art.status == "reached_t_end"
    out = art.classification
    assert out is not None and out.tag == "Flat"
    rows = art.trajectory.samples
    assert rows[1].t == 0.5
    assert rows[1].supR / rows[-1].supR >= 5.0
    last_gaps = out.cauchy_gaps[-3:]
    assert all(b < a for a, b in zip(last_gaps, last_gaps[1:]))


def test_c10_resolution_uniqueness(tmp_path_factory):
    """Consecutive grid doublings shrink the final-state gap by >= 3x."""
    cfg = load_config(os.path.join(CONFIG_DIR, "cigar_exact.yaml"))
    dirs = {}
    for n in (500, 1000, 2000):
        out = str(tmp_path_factory.mktemp(f"res{n}"))
        run_scenario(replace(cfg, grid={"rmax": RMAX, "n": n}), output_dir=out)
        dirs[n] = out
    gap_coarse = compare_runs(dirs[500], dirs[1000]).final_gap
    gap_fine = compare_runs(dirs[1000], dirs[2000]).final_gap
    assert gap_fine > 0.0
    assert gap_coarse / gap_fine >= 3.0


def test_c11_planar_cross_check(reference_runs, planar_artifacts):
    """The explicit cartesian solver agrees with the radial one near the
    origin on a short horizon."""
    from logdiff.geometry import radialize

    art, elapsed = planar_artifacts
    assert art.status == "reached_t_end"
    final = art.trajectory.final_state
    assert final.t == pytest.approx(0.1, abs=1e-12)
    prof = radialize(final.field)

    radial_traj, _ = reference_runs["radial_u", 1e-3]
    ref = radial_traj.states[1]
    assert ref.t == 0.1
    ref_log = np.interp(prof.r, ref.field.r, np.log(ref.field.v))
    mask = prof.r <= 3.0
    rel = np.abs(prof.v[mask] - np.exp(ref_log[mask])) / np.exp(ref_log[mask])
    assert float(np.max(rel)) <= 0.02
    assert elapsed <= 120.0


def test_c12_determinism(tmp_path_factory):
    """Re-running a scenario reproduces every artifact byte for byte."""
    from logdiff.harness import parse_config

    def artifact_bytes(art):
        blobs = []
        for path in (
            art.config_echo_path,
            art.admissibility_path,
            art.diagnostics_path,
            *art.snapshot_paths,
            art.report_path,
        ):
            with open(path, "rb") as fh:
                blobs.append((os.path.basename(path), fh.read()))
        return blobs

    flat_cfg = load_config(os.path.join(CONFIG_DIR, "flat.yaml"))
    out = str(tmp_path_factory.mktemp("flat_rerun"))
    first = artifact_bytes(run_scenario(flat_cfg, output_dir=out))
    second = artifact_bytes(run_scenario(flat_cfg, output_dir=out))
    assert first == second

    planar_doc = {
        "name": "planar_rerun",
        "chart": "cartesian",
        "initial": {"kind": "cigar", "c": 1.0},
        "grid": {"extent": 4.0, "nx": 65, "ny": 65},
        "boundary": "dirichlet_initial",
        "t_end": 0.002,
        "samples": 3,
        "controller": {"dt_init": 0.00001},
        "output_dir": "unused",
    }
    out = str(tmp_path_factory.mktemp("planar_rerun"))
    cfg = parse_config(planar_doc)
    first = artifact_bytes(run_scenario(cfg, output_dir=out))
    second = artifact_bytes(run_scenario(cfg, output_dir=out))
    assert first == second
