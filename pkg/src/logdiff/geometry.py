"""Discrete geometric functionals of a conformal metric ds^2 = v (dx^2 + dy^2).

Pointwise quantities: scalar curvature R = -(lap ln v)/v, the squared metric
gradient |Du|^2 = |grad ln v|^2 / v of u = ln v, and their sum h = R + |Du|^2
(constant 4/c on the cigar family c/(c + r^2)).

Integral and asymptotic quantities: total curvature int R dmu with
dmu = v dx dy, the negative-part integral int max{-R, 0} dmu, the
circumference at infinity lim 2 pi r sqrt(v), and the aperture
(circle length) / (2 pi * geodesic radius). The latter two only depend on the
tail, so truncated-grid estimates are paired with a fitted tail exponent p
(v ~ r^{-p}) that decides the limit class.

All stencils assume a uniform grid; every reduction is an ordinary NumPy
reduction in fixed index order, so results are deterministic.
"""

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fields import FlowState, PlanarField, RadialProfile

TWO_PI = 2.0 * math.pi

# tail-exponent fit: outer fraction of the nodes, minimum node count, and the
# tolerance around p = 2 separating infinite / finite / zero circumference
TAIL_FRACTION = 0.25
MIN_TAIL_NODES = 8
TAIL_FIT_TOLERANCE = 0.05

CSV_COLUMNS = (
    "t",
    "v0",
    "R0",
    "supR",
    "infR",
    "supGrad2",
    "supH",
    "totalCurv",
    "negCurv",
    "Cinf",
    "aperture",
    "dt",
)


def _chart_field(state):
    """Accept a FlowState or a bare field; return (chart, field)."""
    if isinstance(state, FlowState):
        return state.chart, state.field
    if isinstance(state, RadialProfile):
        return "radial", state
    if isinstance(state, PlanarField):
        return "cartesian", state
    raise TypeError(f"expected a flow state or field, got {type(state).__name__}")


# ---------------------------------------------------------------------------
# discrete operators


def _log_laplacian_radial(u, r, h):
    """lap u = u_rr + u_r / r on a uniform radial grid.

    Origin node uses the smooth-profile limit 2 u_rr(0) (one-sided second
    difference with the even-symmetry ghost); the outer node uses one-sided
    stencils and is diagnostics-grade only.
    """
    h2 = h * h
    lap = np.empty_like(u)
    lap[0] = 4.0 * (u[1] - u[0]) / h2
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h2 + (u[2:] - u[:-2]) / (
        2.0 * h * r[1:-1]
    )
    lap[-1] = (u[-3] - 2.0 * u[-2] + u[-1]) / h2 + (
        3.0 * u[-1] - 4.0 * u[-2] + u[-3]
    ) / (2.0 * h * r[-1])
    return lap


def _pad_linear(u):
    # ghost = 2*edge - inner: linear extrapolation, exact for affine fields
    return np.pad(u, 1, mode="reflect", reflect_type="odd")


def _log_laplacian_planar(u, h):
    """Five-point laplacian with linearly extrapolated ghosts on the edges."""
    up = _pad_linear(u)
    return (
        up[:-2, 1:-1] + up[2:, 1:-1] + up[1:-1, :-2] + up[1:-1, 2:] - 4.0 * u
    ) / (h * h)


def scalar_curvature(state):
    """Nodewise R = -(lap ln v) / v."""
    chart, field = _chart_field(state)
    u = np.log(field.v)
    if chart == "radial":
        lap = _log_laplacian_radial(u, field.r, field.spacing)
    else:
        lap = _log_laplacian_planar(u, field.spacing)
    return -lap / field.v


def gradient_norm_sq(state):
    """Nodewise |Du|^2 = |grad u|^2 / v with u = ln v (metric norm).

    Equals (v_x^2 + v_y^2)/v^3. For radial charts the origin value is 0
    (smooth even profile).
    """
    chart, field = _chart_field(state)
    u = np.log(field.v)
    h = field.spacing
    if chart == "radial":
        du = np.empty_like(u)
        du[0] = 0.0
        du[1:-1] = (u[2:] - u[:-2]) / (2.0 * h)
        du[-1] = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * h)
        return du * du / field.v
    up = _pad_linear(u)
    ux = (up[1:-1, 2:] - up[1:-1, :-2]) / (2.0 * h)
    uy = (up[2:, 1:-1] - up[:-2, 1:-1]) / (2.0 * h)
    return (ux * ux + uy * uy) / field.v


def harnack_quantity(state):
    """R + |Du|^2; grid-constant (= 4/c) on cigar profiles c/(c + r^2)."""
    return scalar_curvature(state) + gradient_norm_sq(state)


# ---------------------------------------------------------------------------
# radial reduction of planar fields


def radialize(field, n_theta=128):
    """Angular reduction of a planar field to its largest inscribed circle.

    Samples sqrt(v) on n_theta rays (bilinear interpolation of ln v) and
    averages; the returned profile therefore reproduces metric circle
    lengths: 2 pi r sqrt(v_rad(r)) = integral r sqrt(v) dtheta.
    """
    from scipy.ndimage import map_coordinates

    if not isinstance(field, PlanarField):
        raise TypeError("radialize expects a planar field")
    h = field.spacing
    cy, cx = field.origin_index
    k = min(cx, cy)
    radii = np.arange(k + 1) * h
    theta = np.linspace(0.0, TWO_PI, n_theta, endpoint=False)
    u = np.log(field.v)
    rows = (radii[:, None] * np.sin(theta)[None, :]) / h + cy
    cols = (radii[:, None] * np.cos(theta)[None, :]) / h + cx
    samples = map_coordinates(u, [rows, cols], order=1, mode="nearest")
    sq = np.exp(0.5 * samples).mean(axis=1)
    return RadialProfile(radii, sq * sq)


def radial_view(state, n_theta=128):
    """The state's own profile (radial chart) or its angular reduction."""
    chart, field = _chart_field(state)
    if chart == "radial":
        return field
    return radialize(field, n_theta)


# ---------------------------------------------------------------------------
# quadrature helpers


def _integrate_radial(f, r, radius=None):
    """Trapezoidal integral of f dr up to `radius` (fractional last cell).

    Returns (value, radius actually used).
    """
    if radius is None or radius >= r[-1] * (1.0 - 1e-12):
        return float(np.trapezoid(f, r)), float(r[-1])
    if radius < 0:
        raise ValueError("truncation radius must be nonnegative")
    k = int(np.searchsorted(r, radius, side="right")) - 1
    value = float(np.trapezoid(f[: k + 1], r[: k + 1])) if k >= 1 else 0.0
    dr = radius - r[k]
    if dr > 0.0:
        w = dr / (r[k + 1] - r[k])
        f_at = f[k] + w * (f[k + 1] - f[k])
        value += 0.5 * (f[k] + f_at) * dr
    return value, float(radius)


def value_at_radius(profile, radius):
    """v interpolated at a coordinate radius (piecewise linear in ln v)."""
    r = profile.r
    if not (0.0 <= radius <= r[-1] * (1.0 + 1e-12)):
        raise ValueError(f"radius {radius} outside the grid [0, {r[-1]}]")
    u = float(np.interp(radius, r, np.log(profile.v)))
    return math.exp(u)


class TotalCurvature(NamedTuple):
    value: float
    truncation_radius: float


def total_curvature(state, truncation_radius=None):
    """int R dmu over the truncated grid, dmu = v dx dy.

    Radial charts use 2 pi * trapz(R v r dr); planar charts a node sum of
    R v h^2 (over the disk of the given radius when one is supplied,
    otherwise the whole rectangle, reported as the half-extent).
    """
    chart, field = _chart_field(state)
    curv = scalar_curvature(state)
    if chart == "radial":
        f = curv * field.v * field.r
        value, rad = _integrate_radial(f, field.r, truncation_radius)
        return TotalCurvature(TWO_PI * value, rad)
    cell = field.spacing * field.spacing
    weights = curv * field.v * cell
    if truncation_radius is None:
        rad = min(field.nx // 2, field.ny // 2) * field.spacing
        return TotalCurvature(float(weights.sum()), float(rad))
    mask = field.radius() <= truncation_radius
    return TotalCurvature(float(weights[mask].sum()), float(truncation_radius))


def negative_curvature_integral(state, truncation_radius=None):
    """int max{-R, 0} dmu; equals int max{-lap ln v, 0} dx dy. Always >= 0."""
    chart, field = _chart_field(state)
    neg = np.maximum(-scalar_curvature(state), 0.0)
    if chart == "radial":
        f = neg * field.v * field.r
        value, _ = _integrate_radial(f, field.r, truncation_radius)
        return TWO_PI * value
    cell = field.spacing * field.spacing
    weights = neg * field.v * cell
    if truncation_radius is None:
        return float(weights.sum())
    mask = field.radius() <= truncation_radius
    return float(weights[mask].sum())


# ---------------------------------------------------------------------------
# tail fit and asymptotic invariants


def tail_exponent(state, fraction=TAIL_FRACTION, min_nodes=MIN_TAIL_NODES):
    """Fitted p with v ~ r^{-p}: least-squares slope of ln v vs ln r.

    Fit window is the outer `fraction` of the nodes; fewer than `min_nodes`
    nodes there is an estimation error.
    """
    prof = radial_view(state)
    n = prof.n
    start = int(n * (1.0 - fraction))
    if n - start < min_nodes:
        raise ValueError(
            f"tail fit needs at least {min_nodes} nodes in the outer "
            f"{fraction:.0%} of the grid, have {n - start}"
        )
    x = np.log(prof.r[start:])
    y = np.log(prof.v[start:])
    slope = float(np.polyfit(x, y, 1)[0])
    return -slope


class CinfEstimate(NamedTuple):
    value: float
    tail_exponent: float
    flag: str  # "infinite" | "finite" | "zero_cusp"


def circumference_at_infinity(state, radius=None):
    """Estimate of lim 2 pi r sqrt(v(r)).

    The value is 2 pi r sqrt(v) at the outermost node (or at `radius`);
    the flag classifies the limit from the tail exponent: p < 2 infinite,
    p = 2 (within TAIL_FIT_TOLERANCE) finite, p > 2 zero/cusp. Planar states
    are reduced to the largest inscribed circle first.
    """
    prof = radial_view(state)
    p = tail_exponent(prof)
    if radius is None:
        rad = prof.rmax
        vv = float(prof.v[-1])
    else:
        rad = float(radius)
        vv = value_at_radius(prof, rad)
    value = TWO_PI * rad * math.sqrt(vv)
    if p < 2.0 - TAIL_FIT_TOLERANCE:
        flag = "infinite"
    elif p <= 2.0 + TAIL_FIT_TOLERANCE:
        flag = "finite"
    else:
        flag = "zero_cusp"
    return CinfEstimate(value, p, flag)


class ApertureEstimate(NamedTuple):
    value: float
    tail_exponent: float
    decaying: bool


def aperture(state, radius=None):
    """Estimate of (metric circle length) / (2 pi * geodesic radius).

    Evaluates r sqrt(v(r)) / int_0^r sqrt(v) drho at the outermost node (or
    at `radius`). Tends to 1 - p/2 on power tails v ~ r^{-p}; `decaying`
    marks p >= 2 - TAIL_FIT_TOLERANCE, where the limit is 0 (cigar-like
    ends lose it like 1/ln r).
    """
    prof = radial_view(state)
    p = tail_exponent(prof)
    if radius is None:
        rad = prof.rmax
        vv = float(prof.v[-1])
    else:
        rad = float(radius)
        vv = value_at_radius(prof, rad)
    sq = np.sqrt(prof.v)
    denom, _ = _integrate_radial(sq, prof.r, None if radius is None else rad)
    value = rad * math.sqrt(vv) / denom
    return ApertureEstimate(value, p, p >= 2.0 - TAIL_FIT_TOLERANCE)


# ---------------------------------------------------------------------------
# admissibility


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)  # 'inf', '-inf', 'nan'
    return x


@dataclass(frozen=True)
class AdmissibilityReport:
    """Initial-data hypotheses checked against a single bound C.

    Conditions:
      complete              tail exponent p <= 2 + fit tolerance
                            (int sqrt(v) dr diverges on power tails)
      curvature_bounded     sup |R| <= C
      curvature_positive    inf R > 0 (strict; reported, not gating)
      gradient_bounded      sup |Du| <= C
      negative_part_bounded int max{-R,0} dmu <= C
      infinite_area         tail class has v outside L^1: circumference flag
                            finite-with-positive-value or infinite

    `admissible` (the evolution gate) requires complete, curvature_bounded,
    and gradient_bounded; the rest are reported.
    """

    tail_exponent: float
    sup_abs_curvature: float
    inf_curvature: float
    sup_gradient: float
    negative_curvature_integral: float
    circumference: CinfEstimate
    aperture_estimate: ApertureEstimate
    bound: float
    conditions: dict
    admissible: bool

    def to_json_dict(self):
        out = {
            "tail_exponent": self.tail_exponent,
            "sup_abs_curvature": self.sup_abs_curvature,
            "inf_curvature": self.inf_curvature,
            "sup_gradient": self.sup_gradient,
            "negative_curvature_integral": self.negative_curvature_integral,
            "circumference_estimate": self.circumference.value,
            "circumference_flag": self.circumference.flag,
            "aperture_estimate": self.aperture_estimate.value,
            "aperture_decaying": self.aperture_estimate.decaying,
            "bound": self.bound,
            "admissible": self.admissible,
        }
        for name, ok in self.conditions.items():
            out[name] = bool(ok)
        return {k: _json_safe(v) for k, v in out.items()}

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"

    def summary_lines(self):
        lines = [
            f"tail exponent p = {self.tail_exponent:.6g} "
            f"(complete: {self.conditions['complete']})",
            f"sup |R| = {self.sup_abs_curvature:.6g}, "
            f"inf R = {self.inf_curvature:.6g} (bound {self.bound:g})",
            f"sup |Du| = {self.sup_gradient:.6g}",
            f"int max(-R,0) dmu = {self.negative_curvature_integral:.6g}",
            f"circumference estimate = {self.circumference.value:.6g} "
            f"[{self.circumference.flag}]",
            f"aperture estimate = {self.aperture_estimate.value:.6g}"
            + (" [decaying]" if self.aperture_estimate.decaying else ""),
        ]
        for name, ok in self.conditions.items():
            lines.append(f"  {'pass' if ok else 'FAIL'}  {name}")
        lines.append(f"admissible for evolution: {self.admissible}")
        return lines


def check_admissibility(state, bound=10.0):
    """Evaluate the initial-data conditions; see AdmissibilityReport."""
    if not (bound > 0):
        raise ValueError("admissibility bound must be positive")
    curv = scalar_curvature(state)
    grad2 = gradient_norm_sq(state)
    p = tail_exponent(state)
    cinf = circumference_at_infinity(state)
    ap = aperture(state)
    neg = negative_curvature_integral(state)
    sup_abs = float(np.max(np.abs(curv)))
    inf_r = float(np.min(curv))
    sup_grad = math.sqrt(float(np.max(grad2)))
    conditions = {
        "complete": p <= 2.0 + TAIL_FIT_TOLERANCE,
        "curvature_bounded": sup_abs <= bound,
        "curvature_positive": inf_r > 0.0,
        "gradient_bounded": sup_grad <= bound,
        "negative_part_bounded": neg <= bound,
        "infinite_area": cinf.flag == "infinite"
        or (cinf.flag == "finite" and cinf.value > 0.0),
    }
    admissible = (
        conditions["complete"]
        and conditions["curvature_bounded"]
        and conditions["gradient_bounded"]
    )
    return AdmissibilityReport(
        tail_exponent=p,
        sup_abs_curvature=sup_abs,
        inf_curvature=inf_r,
        sup_gradient=sup_grad,
        negative_curvature_integral=neg,
        circumference=cinf,
        aperture_estimate=ap,
        bound=bound,
        conditions=conditions,
        admissible=admissible,
    )


# ---------------------------------------------------------------------------
# per-sample diagnostics


@dataclass(frozen=True)
class DiagnosticsRow:
    t: float
    v0: float
    R0: float
    supR: float
    infR: float
    supGrad2: float
    supH: float
    totalCurv: float
    negCurv: float
    Cinf: float
    aperture: float
    dt: float

    @classmethod
    def compute(cls, state, dt):
        chart, field = _chart_field(state)
        curv = scalar_curvature(state)
        grad2 = gradient_norm_sq(state)
        hq = curv + grad2
        if chart == "radial":
            v0, r0 = float(field.v[0]), float(curv[0])
        else:
            j, i = field.origin_index
            v0, r0 = float(field.v[j, i]), float(curv[j, i])
        t = state.t if isinstance(state, FlowState) else 0.0
        return cls(
            t=float(t),
            v0=v0,
            R0=r0,
            supR=float(np.max(curv)),
            infR=float(np.min(curv)),
            supGrad2=float(np.max(grad2)),
            supH=float(np.max(hq)),
            totalCurv=total_curvature(state).value,
            negCurv=negative_curvature_integral(state),
            Cinf=circumference_at_infinity(state).value,
            aperture=aperture(state).value,
            dt=float(dt),
        )

    def csv_line(self):
        from .fields import format_float

        return ",".join(format_float(getattr(self, name)) for name in CSV_COLUMNS)


__all__ = [
    "CSV_COLUMNS",
    "TAIL_FIT_TOLERANCE",
    "TAIL_FRACTION",
    "MIN_TAIL_NODES",
    "scalar_curvature",
    "gradient_norm_sq",
    "harnack_quantity",
    "radialize",
    "radial_view",
    "value_at_radius",
    "TotalCurvature",
    "total_curvature",
    "negative_curvature_integral",
    "tail_exponent",
    "CinfEstimate",
    "circumference_at_infinity",
    "ApertureEstimate",
    "aperture",
    "AdmissibilityReport",
    "check_admissibility",
    "DiagnosticsRow",
]
