"""Conformal metric fields on the plane, exact reference solutions, table I/O.

The metric is ds^2 = v (dx^2 + dy^2) with conformal factor v > 0. The log
gauge u = ln v is used throughout the solvers; v is what gets stored. Under
the flow v_t = laplacian(ln v) the conformal factor of the collapsing cigar

    v(r, t) = 1 / (e^{4t} + r^2)

is exact, which makes it the package's verification oracle.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError

INITIAL_KINDS = ("flat", "cigar", "perturbed_cigar", "power_law", "table")


def _frozen_array(a, dtype=float):
    out = np.array(a, dtype=dtype)
    out.setflags(write=False)
    return out


# ---------------------------------------------------------------------------
# value types


@dataclass(frozen=True)
class RadialProfile:
    """Rotationally symmetric conformal factor sampled on 0 = r_0 < r_1 < ...

    Invariants: at least 3 nodes, strictly increasing radii starting at 0,
    strictly positive finite values.
    """

    r: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        r = _frozen_array(self.r)
        v = _frozen_array(self.v)
        if r.ndim != 1 or v.ndim != 1 or r.shape != v.shape:
            raise ValueError("r and v must be 1-D arrays of equal length")
        if r.size < 3:
            raise ValueError("radial grid needs at least 3 nodes")
        if r[0] != 0.0:
            raise ValueError("radial grid must start at r = 0")
        if not np.all(np.diff(r) > 0):
            raise ValueError("radial grid must be strictly increasing")
        if not np.all(np.isfinite(v)) or not np.all(v > 0):
            raise ValueError("conformal factor must be positive and finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)

    @property
    def n(self):
        return self.r.size

    @property
    def rmax(self):
        return float(self.r[-1])

    @property
    def spacing(self):
        """Uniform node spacing; raises if the grid is not uniform."""
        d = np.diff(self.r)
        h = float(d[0])
        if not np.allclose(d, h, rtol=1e-9, atol=0.0):
            raise ValueError("grid is not uniform")
        return h

    def with_values(self, v):
        return RadialProfile(self.r, v)


@dataclass(frozen=True)
class PlanarField:
    """Conformal factor on a uniform cartesian grid centered at the origin.

    v has shape (ny, nx) with both extents odd so a node lands on (0, 0);
    v[j, i] sits at x = (i - nx//2) * spacing, y = (j - ny//2) * spacing.
    """

    v: np.ndarray
    spacing: float

    def __post_init__(self):
        v = _frozen_array(self.v)
        if v.ndim != 2:
            raise ValueError("planar field must be a 2-D array")
        ny, nx = v.shape
        if nx < 3 or ny < 3 or nx % 2 == 0 or ny % 2 == 0:
            raise ValueError("nx and ny must be odd and at least 3")
        if not np.all(np.isfinite(v)) or not np.all(v > 0):
            raise ValueError("conformal factor must be positive and finite")
        if not (float(self.spacing) > 0):
            raise ValueError("spacing must be positive")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def nx(self):
        return self.v.shape[1]

    @property
    def ny(self):
        return self.v.shape[0]

    @property
    def origin_index(self):
        return (self.ny // 2, self.nx // 2)

    @property
    def x(self):
        return (np.arange(self.nx) - self.nx // 2) * self.spacing

    @property
    def y(self):
        return (np.arange(self.ny) - self.ny // 2) * self.spacing

    def radius(self):
        """Euclidean distance of every node from the origin, shape (ny, nx)."""
        return np.hypot(self.x[None, :], self.y[:, None])

    @property
    def origin_value(self):
        j, i = self.origin_index
        return float(self.v[j, i])

    def with_values(self, v):
        return PlanarField(v, self.spacing)


@dataclass(frozen=True)
class FlowState:
    """A field at one instant of flow time, plus its boundary treatment.

    chart is "radial" or "cartesian"; bc is an opaque boundary-condition
    descriptor owned by the solver module (None for pure geometry work).
    """

    chart: str
    field: object
    t: float = 0.0
    bc: object = None

    def __post_init__(self):
        if self.chart not in ("radial", "cartesian"):
            raise ValueError(f"unknown chart {self.chart!r}")
        if self.chart == "radial" and not isinstance(self.field, RadialProfile):
            raise ValueError("radial chart requires a RadialProfile")
        if self.chart == "cartesian" and not isinstance(self.field, PlanarField):
            raise ValueError("cartesian chart requires a PlanarField")
        if not (self.t >= 0.0):
            raise ValueError("flow time must be nonnegative")

    @property
    def origin_value(self):
        if self.chart == "radial":
            return float(self.field.v[0])
        return self.field.origin_value

    def with_field(self, v, t=None, bc="keep"):
        new_field = self.field.with_values(v)
        return FlowState(
            self.chart,
            new_field,
            self.t if t is None else t,
            self.bc if bc == "keep" else bc,
        )


@dataclass(frozen=True)
class InitialDataSpec:
    """Recipe for initial data.

    kind "cigar" gives c/(c + r^2); "perturbed_cigar" multiplies it by
    1 + epsilon * bump(r) with a smooth bump supported on
    [bump_inner, bump_outer]; "power_law" gives (1 + r^2)^(-alpha);
    "table" reads values from a text file on the solver's own grid.
    """

    kind: str
    c: float = 1.0
    epsilon: float = 0.0
    bump_inner: float = 1.0
    bump_outer: float = 3.0
    alpha: float = 0.5
    table_path: str = ""

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(
                f"unknown initial kind {self.kind!r}; choices: {INITIAL_KINDS}"
            )
        if self.kind in ("cigar", "perturbed_cigar") and not (self.c > 0):
            raise ConfigError("cigar scale c must be positive")
        if self.kind == "perturbed_cigar":
            if not (abs(self.epsilon) < 1.0):
                raise ConfigError("perturbation amplitude must satisfy |epsilon| < 1")
            if not (0.0 <= self.bump_inner < self.bump_outer):
                raise ConfigError("bump support must satisfy 0 <= inner < outer")
        if self.kind == "power_law" and not (0.0 < self.alpha < 1.0):
            raise ConfigError("power-law exponent must satisfy 0 < alpha < 1")
        if self.kind == "table" and not self.table_path:
            raise ConfigError("table initial data requires a file path")


# ---------------------------------------------------------------------------
# gauge transforms


def u_from_v(v):
    """Log gauge u = ln v. Rejects non-positive input."""
    v = np.asarray(v, dtype=float)
    if not np.all(v > 0):
        raise ValueError("conformal factor must be positive")
    return np.log(v)


def v_from_u(u):
    return np.exp(np.asarray(u, dtype=float))


# ---------------------------------------------------------------------------
# exact solutions and initial-data formulas


def exact_cigar_flow(r, t):
    """Collapsing cigar v(r, t) = 1 / (e^{4t} + r^2), exact under v_t = lap(ln v)."""
    r = np.asarray(r, dtype=float)
    return 1.0 / (np.exp(4.0 * t) + r * r)


def cigar_profile(r, c=1.0):
    """Cigar soliton profile c / (c + r^2), normalized to v(0) = 1."""
    if not (c > 0):
        raise ValueError("cigar scale c must be positive")
    r = np.asarray(r, dtype=float)
    return c / (c + r * r)


def cigar_orbit(r, t, c=1.0):
    """Flow orbit of cigar_profile(c): v(r, t) = c / (c e^{4t/c} + r^2).

    Reduces to exact_cigar_flow for c = 1.
    """
    if not (c > 0):
        raise ValueError("cigar scale c must be positive")
    r = np.asarray(r, dtype=float)
    return c / (c * np.exp(4.0 * t / c) + r * r)


def smooth_bump(r, inner=1.0, outer=3.0):
    """C-infinity bump, 1 at the support midpoint, identically 0 outside."""
    if not (inner < outer):
        raise ValueError("bump support must satisfy inner < outer")
    r = np.asarray(r, dtype=float)
    xi = (2.0 * r - (inner + outer)) / (outer - inner)
    out = np.zeros_like(xi)
    core = np.abs(xi) < 1.0
    # exp(1 - 1/(1-xi^2)) vanishes with all derivatives at the endpoints
    out[core] = np.exp(1.0 - 1.0 / (1.0 - xi[core] ** 2))
    return out


def build_initial(spec, radius):
    """Evaluate an InitialDataSpec at Euclidean radius (any array shape).

    Table data is grid-bound and is handled by the table readers instead.
    """
    r = np.asarray(radius, dtype=float)
    if spec.kind == "flat":
        return np.ones_like(r)
    if spec.kind == "cigar":
        return cigar_profile(r, spec.c)
    if spec.kind == "power_law":
        return (1.0 + r * r) ** (-spec.alpha)
    if spec.kind == "perturbed_cigar":
        base = cigar_profile(r, spec.c)
        return base * (1.0 + spec.epsilon * smooth_bump(r, spec.bump_inner, spec.bump_outer))
    raise ConfigError("tabulated initial data must be loaded with the table readers")


def radial_grid(rmax, n):
    """Uniform radial grid with n nodes on [0, rmax]."""
    if not (rmax > 0) or n < 3:
        raise ConfigError("radial grid needs rmax > 0 and at least 3 nodes")
    return np.linspace(0.0, float(rmax), int(n))


# ---------------------------------------------------------------------------
# two/three-column table I/O

_FMT = "%.17g"


def format_float(x):
    """Canonical float formatting used in every text artifact."""
    return _FMT % float(x)


def read_table(path):
    """Read a whitespace-separated numeric table; '#' starts a comment."""
    rows = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            try:
                values = [float(p) for p in parts]
            except ValueError:
                raise ConfigError(f"{path}:{lineno}: non-numeric entry") from None
            if width is None:
                width = len(values)
                if width not in (2, 3):
                    raise ConfigError(f"{path}: expected 2 or 3 columns, got {width}")
            elif len(values) != width:
                raise ConfigError(f"{path}:{lineno}: ragged row")
            rows.append(values)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def radial_profile_from_table(table, r_grid):
    """Build a RadialProfile from a two-column (r, v) table.

    The r column must match the solver grid node for node; tabulated data is
    never resampled.
    """
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != 2:
        raise ConfigError("radial table must have two columns (r, v)")
    r_grid = np.asarray(r_grid, dtype=float)
    if table.shape[0] != r_grid.size:
        raise ConfigError(
            f"table has {table.shape[0]} rows but the grid has {r_grid.size} nodes"
        )
    tol = 1e-9 * max(1.0, float(r_grid[-1]))
    if np.max(np.abs(table[:, 0] - r_grid)) > tol:
        raise ConfigError("table radii do not match the solver grid (no resampling)")
    if not np.all(table[:, 1] > 0):
        raise ConfigError("table rejected: conformal factor must be positive")
    return RadialProfile(r_grid, table[:, 1])


def planar_field_from_table(table, nx, ny, spacing):
    """Build a PlanarField from a three-column (x, y, v) table in row-major order."""
    table = np.asarray(table, dtype=float)
    if table.ndim != 2 or table.shape[1] != 3:
        raise ConfigError("planar table must have three columns (x, y, v)")
    if table.shape[0] != nx * ny:
        raise ConfigError(
            f"table has {table.shape[0]} rows but the grid has {nx * ny} nodes"
        )
    x = (np.arange(nx) - nx // 2) * spacing
    y = (np.arange(ny) - ny // 2) * spacing
    xx = np.tile(x, ny)
    yy = np.repeat(y, nx)
    tol = 1e-9 * max(1.0, abs(x[-1]), abs(y[-1]))
    if max(np.max(np.abs(table[:, 0] - xx)), np.max(np.abs(table[:, 1] - yy))) > tol:
        raise ConfigError("table coordinates do not match the solver grid (no resampling)")
    if not np.all(table[:, 2] > 0):
        raise ConfigError("table rejected: conformal factor must be positive")
    return PlanarField(table[:, 2].reshape(ny, nx), spacing)


def state_table_text(state):
    """Serialize a state as the two/three-column text snapshot format."""
    lines = [f"# t = {format_float(state.t)}"]
    if state.chart == "radial":
        lines.append("# columns: r v")
        prof = state.field
        for r_i, v_i in zip(prof.r, prof.v):
            lines.append(f"{format_float(r_i)} {format_float(v_i)}")
    else:
        lines.append("# columns: x y v")
        fld = state.field
        x, y = fld.x, fld.y
        for j in range(fld.ny):
            for i in range(fld.nx):
                lines.append(
                    f"{format_float(x[i])} {format_float(y[j])} {format_float(fld.v[j, i])}"
                )
    return "\n".join(lines) + "\n"


def state_from_table_path(path, chart, grid_args):
    """Load a snapshot or custom table onto a known grid.

    grid_args is (r_grid,) for the radial chart and (nx, ny, spacing) for the
    cartesian chart. The flow time is taken from a '# t = ...' comment when
    present, else 0.
    """
    t = 0.0
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if stripped.startswith("#") and "t =" in stripped:
                try:
                    t = float(stripped.split("t =", 1)[1].split()[0])
                except (ValueError, IndexError):
                    pass
                break
            if stripped and not stripped.startswith("#"):
                break
    table = read_table(path)
    if chart == "radial":
        profile = radial_profile_from_table(table, *grid_args)
        return FlowState("radial", profile, t)
    field = planar_field_from_table(table, *grid_args)
    return FlowState("cartesian", field, t)


__all__ = [
    "INITIAL_KINDS",
    "RadialProfile",
    "PlanarField",
    "FlowState",
    "InitialDataSpec",
    "u_from_v",
    "v_from_u",
    "exact_cigar_flow",
    "cigar_profile",
    "cigar_orbit",
    "smooth_bump",
    "build_initial",
    "radial_grid",
    "format_float",
    "read_table",
    "radial_profile_from_table",
    "planar_field_from_table",
    "state_table_text",
    "state_from_table_path",
    "replace",
    "field",
]
