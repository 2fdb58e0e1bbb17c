"""Normalized blow-down profiles and classification of the long-time limit.

A state is rescaled about the origin by s = v(0)^(-1/2), which normalizes
the origin value to 1 while staying inside the flow's scaling family:
vtilde(rho) = v(s rho) / v(0). On the reference flow 1/(e^{4t}+r^2) this
produces the same profile 1/(1+rho^2) at every time, so stationarity of the
rescaled profile is the practical test for soliton-type limits.

The classifier compares the final rescaled profile against the
one-parameter family c/(c+rho^2), checks stationarity between the last two
recorded profiles, and consults the initial data's asymptotic invariants
(circumference at infinity, aperture) to decide among Cigar, Flat,
Undetermined, and NotConverged.
"""

import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import ConfigError
from .geometry import TWO_PI, aperture, circumference_at_infinity, radial_view


def gauge_scale(state):
    """Blow-down length scale s = v(0)^(-1/2)."""
    v0 = state.origin_value
    if not (v0 > 0.0):
        raise ValueError("origin value must be positive")
    return float(v0) ** -0.5


@dataclass(frozen=True)
class RescaledProfile:
    """Origin-normalized profile vtilde(rho) = v(s rho)/v(0) on rho in [0, window]."""

    rho: np.ndarray
    values: np.ndarray
    scale: float
    t: float

    @property
    def window(self):
        return float(self.rho[-1])


def max_window(state):
    """Largest rescaled window the truncated grid can support, rmax / s."""
    prof = radial_view(state)
    return float(prof.r[-1]) * float(prof.v[0]) ** 0.5


def rescaled_profile(state, window=10.0, nodes=512):
    """Sample the origin-normalized profile on `nodes` points of [0, window].

    Raises ValueError when s * window overruns the grid, naming the largest
    admissible window; callers sampling a trajectory skip such states.
    """
    if not (window > 0.0):
        raise ValueError("window must be positive")
    if int(nodes) < 2:
        raise ValueError("need at least two profile nodes")
    prof = radial_view(state)
    v0 = float(prof.v[0])
    if not (v0 > 0.0):
        raise ValueError("origin value must be positive")
    s = v0**-0.5
    rmax = float(prof.r[-1])
    if s * window > rmax * (1.0 + 1e-12):
        raise ValueError(
            f"window {window:g} overruns the grid at scale {s:g}; "
            f"largest admissible window is {rmax / s:.6g}"
        )
    rho = np.linspace(0.0, window, int(nodes))
    u = np.log(prof.v)
    vals = np.exp(np.interp(s * rho, prof.r, u) - u[0])
    vals[0] = 1.0  # exact by construction
    rho.setflags(write=False)
    vals.setflags(write=False)
    t = float(state.t) if hasattr(state, "t") else 0.0
    return RescaledProfile(rho, vals, s, t)


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of vtilde against c/(c+rho^2)."""

    c: float
    rms: float
    converged: bool


def _fit_gradient(c, rho2, resid):
    # d/dc of mean residual^2; dmodel/dc = rho^2/(c+rho^2)^2
    dm = rho2 / (c + rho2) ** 2
    return 2.0 * float(np.mean(resid * dm))


def fit_cigar(profile, c_min=1e-8, c_max=None):
    """Best c in [c_min, c_max] minimizing the rms of c/(c+rho^2) - vtilde.

    c_max defaults to window^2: beyond that the model is within O(1) of the
    flat profile across the whole window and the parameter is unidentifiable.
    Coarse log-spaced scan brackets the minimum; a curvature-based seed
    c = -drho^2 / ln vtilde(drho) accelerates the safeguarded Newton solve of
    d(rms^2)/dc = 0. A minimizer pinned at either bound is returned with
    converged=True (the rms then reports how poor the best member is).
    """
    rho = np.asarray(profile.rho, dtype=float)
    y = np.asarray(profile.values, dtype=float)
    if c_max is None:
        c_max = float(rho[-1]) ** 2
    if not (0.0 < c_min < c_max):
        raise ValueError("need 0 < c_min < c_max")
    rho2 = rho * rho

    def objective(c):
        return float(np.mean((c / (c + rho2) - y) ** 2))

    grid = np.geomspace(c_min, c_max, 64)
    vals = np.array([objective(c) for c in grid])
    i = int(np.argmin(vals))
    if i == 0 or i == len(grid) - 1:
        return FitResult(float(grid[i]), math.sqrt(vals[i]), True)

    lo, hi = float(grid[i - 1]), float(grid[i + 1])
    c = float(grid[i])
    if y[1] < 1.0:  # near-origin curvature seed
        seed = float(rho2[1] / -math.log(y[1]))
        if lo < seed < hi and objective(seed) < vals[i]:
            c = seed

    g_lo = _fit_gradient(lo, rho2, lo / (lo + rho2) - y)
    g_hi = _fit_gradient(hi, rho2, hi / (hi + rho2) - y)
    for _ in range(80):
        if hi - lo < 1e-13 * max(1.0, c):
            break
        resid = c / (c + rho2) - y
        g = _fit_gradient(c, rho2, resid)
        if g == 0.0:
            break
        # keep a sign-change bracket when the scan provided one
        if g_lo < 0.0 < g_hi:
            if g > 0.0:
                hi, g_hi = c, g
            else:
                lo, g_lo = c, g
        dm = rho2 / (c + rho2) ** 2
        d2m = -2.0 * rho2 / (c + rho2) ** 3
        gp = 2.0 * float(np.mean(dm * dm + resid * d2m))
        step_ok = gp > 0.0
        if step_ok:
            c_new = c - g / gp
            step_ok = lo < c_new < hi
        if not step_ok:
            c_new = 0.5 * (lo + hi)
        if abs(c_new - c) < 1e-15 * max(1.0, c):
            c = c_new
            break
        c = c_new
    else:
        return FitResult(c, math.sqrt(objective(c)), False)
    return FitResult(c, math.sqrt(objective(c)), True)


def stationarity_residual(profiles):
    """sup |last - previous| between the final two rescaled profiles."""
    if len(profiles) < 2:
        raise ValueError("stationarity needs at least two profiles")
    a, b = profiles[-2], profiles[-1]
    if a.rho.shape != b.rho.shape or not np.array_equal(a.rho, b.rho):
        raise ValueError("profiles must share one rho grid")
    return float(np.max(np.abs(b.values - a.values)))


@dataclass(frozen=True)
class ClassifierThresholds:
    stationary: float = 1e-2
    fit: float = 1e-2
    aperture: float = 0.05
    circumference_tolerance: float = 0.02

    def __post_init__(self):
        if min(self.stationary, self.fit, self.aperture) <= 0.0:
            raise ConfigError("classifier thresholds must be positive")
        if self.circumference_tolerance < 0.0:
            raise ConfigError("circumference tolerance must be nonnegative")

    def to_json_dict(self):
        return {
            "stationary": self.stationary,
            "fit": self.fit,
            "aperture": self.aperture,
            "circumference_tolerance": self.circumference_tolerance,
        }


_CAVEAT = (
    "stationarity is assessed along the recorded sample times only, so the "
    "verdict is about that subsequence; tail class is read from the initial "
    "data inside the truncation radius"
)


@dataclass(frozen=True)
class LimitClassification:
    """Outcome of the long-time limit test.

    tag is one of Cigar, Flat, Undetermined, NotConverged. c and
    circumference are populated when the model fit ran; initial_* snapshot
    the asymptotic invariants of the starting data that the verdict leans on.
    """

    tag: str
    stationarity: float
    c: float = None
    circumference: float = None
    fit_residual: float = None
    initial_circumference: float = None
    initial_circumference_flag: str = ""
    initial_aperture: float = None
    initial_tail_exponent: float = None
    window: float = 10.0
    nodes: int = 512
    skipped_samples: int = 0
    profile_times: tuple = ()
    cauchy_gaps: tuple = ()
    thresholds: ClassifierThresholds = dataclass_field(default_factory=ClassifierThresholds)
    caveat: str = _CAVEAT

    def to_json_dict(self):
        def safe(x):
            if x is None:
                return None
            x = float(x)
            return x if math.isfinite(x) else repr(x)

        return {
            "tag": self.tag,
            "c": safe(self.c),
            "circumference": safe(self.circumference),
            "fit_residual": safe(self.fit_residual),
            "stationarity_residual": safe(self.stationarity),
            "initial_circumference": safe(self.initial_circumference),
            "initial_circumference_flag": self.initial_circumference_flag,
            "initial_aperture": safe(self.initial_aperture),
            "initial_tail_exponent": safe(self.initial_tail_exponent),
            "window": safe(self.window),
            "nodes": int(self.nodes),
            "skipped_samples": int(self.skipped_samples),
            "profile_times": [safe(t) for t in self.profile_times],
            "cauchy_gaps": [safe(g) for g in self.cauchy_gaps],
            "thresholds": self.thresholds.to_json_dict(),
            "caveat": self.caveat,
        }


def classify_limit(trajectory, window=10.0, nodes=512, thresholds=None):
    """Decide the blow-down limit of a completed run.

    Order of tests: stationarity of the last two rescaled profiles (fail ->
    NotConverged); for initial data with finite circumference at infinity, the
    model fit (non-convergent fit -> NotConverged; good fit with matching
    circumference -> Cigar, mismatch -> Undetermined); otherwise a flat
    verdict when the initial aperture is substantial and the final profile is
    near constant; else Undetermined.

    Samples whose rescaled window overruns the truncated grid are skipped; at
    least four usable profiles are required.
    """
    thresholds = thresholds or ClassifierThresholds()
    if trajectory.status != "reached_t_end":
        raise ValueError(
            f"cannot classify a run with status {trajectory.status!r}"
        )
    profiles = []
    times = []
    skipped = 0
    for st in trajectory.states:
        try:
            prof = rescaled_profile(st, window=window, nodes=nodes)
        except ValueError:
            skipped += 1
            continue
        profiles.append(prof)
        times.append(float(st.t))
    if len(profiles) < 4:
        raise ConfigError(
            f"only {len(profiles)} usable rescaled profiles (window {window:g}, "
            f"{skipped} skipped); at least 4 are required"
        )

    initial = trajectory.states[0]
    cinf0 = circumference_at_infinity(initial)
    ap0 = aperture(initial)

    gaps = tuple(
        float(np.max(np.abs(b.values - a.values)))
        for a, b in zip(profiles, profiles[1:])
    )
    stat = gaps[-1]
    common = dict(
        stationarity=stat,
        initial_circumference=cinf0.value,
        initial_circumference_flag=cinf0.flag,
        initial_aperture=ap0.value,
        initial_tail_exponent=cinf0.tail_exponent,
        window=float(window),
        nodes=int(nodes),
        skipped_samples=skipped,
        profile_times=tuple(times),
        cauchy_gaps=gaps,
        thresholds=thresholds,
    )

    if stat > thresholds.stationary:
        return LimitClassification(tag="NotConverged", **common)

    last = profiles[-1]
    extra = {}
    if cinf0.flag == "finite":
        fit = fit_cigar(last)
        if not fit.converged:
            return LimitClassification(
                tag="NotConverged", c=fit.c, fit_residual=fit.rms, **common
            )
        extra = dict(c=fit.c, fit_residual=fit.rms)
        if fit.rms < thresholds.fit:
            circ = TWO_PI * math.sqrt(fit.c)
            extra["circumference"] = circ
            if circ <= (1.0 + thresholds.circumference_tolerance) * cinf0.value:
                return LimitClassification(tag="Cigar", **extra, **common)
        # poor or over-circumference best fit: fall through to the flat test

    flat_dev = float(np.max(np.abs(last.values - 1.0)))
    if ap0.value > thresholds.aperture and flat_dev < thresholds.fit:
        return LimitClassification(tag="Flat", **extra, **common)
    return LimitClassification(tag="Undetermined", **extra, **common)


__all__ = [
    "RescaledProfile",
    "FitResult",
    "ClassifierThresholds",
    "LimitClassification",
    "gauge_scale",
    "max_window",
    "rescaled_profile",
    "fit_cigar",
    "stationarity_residual",
    "classify_limit",
]
