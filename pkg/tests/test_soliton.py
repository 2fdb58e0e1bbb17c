"""Rescaled profiles, the model fit, and the limit classifier."""

import json
import math

import numpy as np
import pytest

from logdiff.errors import ConfigError
from logdiff.fields import (
    FlowState,
    RadialProfile,
    cigar_profile,
    exact_cigar_flow,
    radial_grid,
)
from logdiff.solver import Trajectory
from logdiff.soliton import (
    ClassifierThresholds,
    RescaledProfile,
    classify_limit,
    fit_cigar,
    gauge_scale,
    max_window,
    rescaled_profile,
    stationarity_residual,
)

R = radial_grid(60.0, 1200)
TIMES = (0.0, 0.05, 0.1, 0.15, 0.2)


def states_from(vf, times=TIMES):
    return tuple(FlowState("radial", RadialProfile(R, vf(t)), t) for t in times)


def make_traj(states, status="reached_t_end"):
    return Trajectory((), states, status, states[-1])


class TestRescaling:
    def test_gauge_scale_on_reference_flow(self):
        # v(0, t) = e^{-4t}, so s = e^{2t}
        st = FlowState("radial", RadialProfile(R, exact_cigar_flow(R, 0.5)), 0.5)
        assert gauge_scale(st) == pytest.approx(math.e, rel=1e-14)

    def test_max_window_shrinks_with_scale(self):
        st = FlowState("radial", RadialProfile(R, exact_cigar_flow(R, 0.5)), 0.5)
        assert max_window(st) == pytest.approx(60.0 * math.exp(-1.0), rel=1e-12)

    def test_profile_is_normalized(self):
        st = FlowState("radial", RadialProfile(R, exact_cigar_flow(R, 0.5)), 0.5)
        prof = rescaled_profile(st, window=5.0, nodes=64)
        assert prof.values[0] == 1.0
        assert prof.scale == pytest.approx(math.e, rel=1e-14)
        assert prof.t == 0.5
        assert prof.window == 5.0
        assert prof.rho.shape == (64,)

    def test_profile_is_time_invariant_on_reference_flow(self):
        # the rescaled reference flow is 1/(1+rho^2) at every time
        profs = [
            rescaled_profile(
                FlowState("radial", RadialProfile(R, exact_cigar_flow(R, t)), t)
            )
            for t in (0.0, 0.3)
        ]
        expected = 1.0 / (1.0 + profs[0].rho ** 2)
        for prof in profs:
            assert np.max(np.abs(prof.values - expected)) < 2e-3
        assert stationarity_residual(profs) < 2e-3

    def test_oversized_window_rejected_with_hint(self):
        st = FlowState("radial", RadialProfile(R, exact_cigar_flow(R, 0.5)), 0.5)
        with pytest.raises(ValueError, match="window"):
            rescaled_profile(st, window=40.0)

    def test_stationarity_needs_two_matching_profiles(self):
        st = FlowState("radial", RadialProfile(R, cigar_profile(R)), 0.0)
        prof = rescaled_profile(st, window=5.0)
        with pytest.raises(ValueError):
            stationarity_residual([prof])
        other = rescaled_profile(st, window=4.0)
        with pytest.raises(ValueError):
            stationarity_residual([prof, other])


class TestFit:
    @pytest.mark.parametrize("c", [1.0, 4.0])
    def test_recovers_exact_member(self, c):
        rho = np.linspace(0.0, 10.0, 512)
        prof = RescaledProfile(rho, c / (c + rho * rho), 1.0, 0.0)
        fit = fit_cigar(prof)
        assert fit.converged
        assert fit.c == pytest.approx(c, rel=1e-8)
        assert fit.rms < 1e-12

    def test_recovers_under_noise(self):
        rng = np.random.default_rng(13)
        rho = np.linspace(0.0, 10.0, 512)
        clean = 2.0 / (2.0 + rho * rho)
        prof = RescaledProfile(rho, clean + 1e-4 * rng.normal(size=512), 1.0, 0.0)
        fit = fit_cigar(prof)
        assert fit.converged
        assert fit.c == pytest.approx(2.0, rel=1e-2)

    def test_flat_profile_fits_poorly(self):
        rho = np.linspace(0.0, 10.0, 512)
        fit = fit_cigar(RescaledProfile(rho, np.ones(512), 1.0, 0.0))
        assert fit.rms > 0.1


class TestThresholds:
    def test_defaults(self):
        th = ClassifierThresholds()
        assert th.stationary == 1e-2
        assert th.fit == 1e-2
        assert th.aperture == 0.05
        assert th.circumference_tolerance == 0.02

    def test_validation(self):
        with pytest.raises(ConfigError):
            ClassifierThresholds(stationary=0.0)
        with pytest.raises(ConfigError):
            ClassifierThresholds(circumference_tolerance=-0.1)


class TestClassifier:
    def test_reference_flow_is_cigar(self):
        out = classify_limit(make_traj(states_from(lambda t: exact_cigar_flow(R, t))))
        assert out.tag == "Cigar"
        assert out.c == pytest.approx(1.0, abs=1e-3)
        assert out.fit_residual < 1e-3
        assert out.circumference == pytest.approx(2.0 * math.pi, rel=1e-3)
        assert out.stationarity < 1e-3
        assert out.skipped_samples == 0
        assert len(out.cauchy_gaps) == len(TIMES) - 1
        assert out.initial_circumference_flag == "finite"

    def test_constant_flow_is_flat(self):
        out = classify_limit(make_traj(states_from(lambda t: np.ones(R.size))))
        assert out.tag == "Flat"
        assert out.initial_aperture == pytest.approx(1.0)
        assert out.initial_circumference_flag == "infinite"
        assert out.c is None

    def test_moving_profile_is_not_converged(self):
        states = list(states_from(lambda t: cigar_profile(R), TIMES[:-1]))
        states.append(
            FlowState("radial", RadialProfile(R, 0.5 * np.ones(R.size)), TIMES[-1])
        )
        out = classify_limit(make_traj(tuple(states)))
        assert out.tag == "NotConverged"
        assert out.stationarity > 0.5

    def test_stationary_power_tail_is_undetermined(self):
        out = classify_limit(
            make_traj(states_from(lambda t: (1.0 + R * R) ** -0.5, TIMES[:4]))
        )
        assert out.tag == "Undetermined"
        assert out.initial_circumference_flag == "infinite"
        assert out.initial_aperture > 0.05

    def test_overrun_samples_are_skipped(self):
        states = list(states_from(lambda t: exact_cigar_flow(R, t)))
        states.append(
            FlowState("radial", RadialProfile(R, 1e-6 * cigar_profile(R)), 0.3)
        )
        out = classify_limit(make_traj(tuple(states)))
        assert out.tag == "Cigar"
        assert out.skipped_samples == 1
        assert out.profile_times == TIMES

    def test_too_few_profiles_rejected(self):
        with pytest.raises(ConfigError, match="at least 4"):
            classify_limit(
                make_traj(states_from(lambda t: exact_cigar_flow(R, t), TIMES[:3]))
            )

    def test_unfinished_run_rejected(self):
        traj = make_traj(states_from(lambda t: np.ones(R.size)), status="blowup")
        with pytest.raises(ValueError, match="blowup"):
            classify_limit(traj)

    def test_json_document(self):
        out = classify_limit(make_traj(states_from(lambda t: exact_cigar_flow(R, t))))
        doc = json.loads(json.dumps(out.to_json_dict()))
        assert doc["tag"] == "Cigar"
        assert doc["thresholds"]["stationary"] == 1e-2
        assert isinstance(doc["caveat"], str) and doc["caveat"]
        assert doc["skipped_samples"] == 0
        assert len(doc["cauchy_gaps"]) == 4
        flat = classify_limit(make_traj(states_from(lambda t: np.ones(R.size))))
        assert flat.to_json_dict()["c"] is None
