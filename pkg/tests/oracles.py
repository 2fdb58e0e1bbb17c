"""Independent numerical oracles for the test suite.

Everything here is built from scratch on purpose: high-order finite
differences evaluated on callables (never on the package's grids or
stencils) and adaptive quadrature. Tests compare package output against
these, so the two sides share no discretization code.
"""

import warnings

import numpy as np
from scipy.integrate import IntegrationWarning, quad


def _quiet_quad(*args, **kwargs):
    # FD noise in the integrand trips quad's roundoff heuristic; the values
    # are still good to ~1e-9, which is far below every tolerance used here.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(*args, **kwargs)

# 4th-order central stencils
_D1_W = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D2_W = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_OFFS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])


def d1(f, x, h):
    """4th-order first derivative of a callable."""
    return sum(w * f(x + o * h) for w, o in zip(_D1_W, _OFFS)) / h


def d2(f, x, h):
    """4th-order second derivative of a callable."""
    return sum(w * f(x + o * h) for w, o in zip(_D2_W, _OFFS)) / (h * h)


def log_laplacian_radial(v_of_r, r, h):
    """Polar Laplacian of ln v for a radial profile callable, r > 0."""

    def u(x):
        return np.log(v_of_r(x))

    return d2(u, r, h) + d1(u, r, h) / r


def pde_residual(v_of_rt, r, t, hr=1e-2, ht=1e-3):
    """Residual of v_t = lap ln v at one point, 4th-order stencils both ways."""
    v_t = d1(lambda s: v_of_rt(r, s), t, ht)
    lap = log_laplacian_radial(lambda x: v_of_rt(x, t), r, hr)
    return v_t - lap


def curvature_radial(v_of_r, r, h=1e-3):
    """R = -(lap ln v)/v at r > 0 for a radial callable."""
    return -log_laplacian_radial(v_of_r, r, h) / v_of_r(r)


def curvature_at_origin(v_of_r, h=1e-3):
    """R(0) using the even-profile limit lap = 2 u''(0)."""

    def u(x):
        return np.log(v_of_r(abs(x)))

    return -2.0 * d2(u, 0.0, h) / v_of_r(0.0)


def gradient_sq_radial(v_of_r, r, h=1e-3):
    """|Du|^2 = (u')^2 / v for a radial callable (u = ln v)."""

    def u(x):
        return np.log(v_of_r(x))

    return d1(u, r, h) ** 2 / v_of_r(r)


def total_curvature_quad(v_of_r, rmax):
    """2 pi * integral_0^rmax R v r dr by adaptive quadrature."""

    def integrand(r):
        if r == 0.0:
            return 0.0
        return curvature_radial(v_of_r, r, h=min(1e-3, r / 4.0)) * v_of_r(r) * r

    value, _ = _quiet_quad(integrand, 0.0, rmax, limit=200)
    return 2.0 * np.pi * value


def negative_curvature_quad(v_of_r, rmax):
    """2 pi * integral_0^rmax max(-R, 0) v r dr by adaptive quadrature."""

    def integrand(r):
        if r == 0.0:
            return 0.0
        rr = curvature_radial(v_of_r, r, h=min(1e-3, r / 4.0))
        return max(-rr, 0.0) * v_of_r(r) * r

    value, _ = _quiet_quad(integrand, 0.0, rmax, limit=400)
    return 2.0 * np.pi * value


def aperture_quad(v_of_r, radius):
    """r sqrt(v(r)) / integral_0^r sqrt(v) for a radial callable."""
    length, _ = _quiet_quad(lambda s: np.sqrt(v_of_r(s)), 0.0, radius, limit=200)
    return radius * np.sqrt(v_of_r(radius)) / length
