"""Backend parity: the compiled kernels must match the NumPy reference."""

import os
import subprocess
import sys

import numpy as np
import pytest

from logdiff import kernels

BACKENDS = kernels.available_backends()
needs_compiled = pytest.mark.skipif(
    "cython" not in BACKENDS, reason="compiled extension not built"
)


def random_system(rng, n):
    sub = rng.uniform(-1.0, 1.0, n - 1)
    sup = rng.uniform(-1.0, 1.0, n - 1)
    diag = 2.5 + rng.uniform(0.0, 1.0, n)  # diagonally dominant
    rhs = rng.normal(size=n)
    return sub, diag, sup, rhs


def dense_solve(sub, diag, sup, rhs):
    n = diag.size
    a = np.diag(diag) + np.diag(sub, -1) + np.diag(sup, 1)
    return np.linalg.solve(a, rhs)


@pytest.mark.parametrize("name", BACKENDS)
class TestTridiag:
    def test_matches_dense_solver(self, name):
        impl = kernels.implementation(name)
        rng = np.random.default_rng(42)
        for n in (2, 3, 17, 400):
            sub, diag, sup, rhs = random_system(rng, n)
            x = impl.tridiag_solve(sub, diag, sup, rhs)
            np.testing.assert_allclose(x, dense_solve(sub, diag, sup, rhs), rtol=1e-12)

    def test_residual_small(self, name):
        impl = kernels.implementation(name)
        rng = np.random.default_rng(3)
        sub, diag, sup, rhs = random_system(rng, 1000)
        x = impl.tridiag_solve(sub, diag, sup, rhs)
        res = diag * x
        res[:-1] += sup * x[1:]
        res[1:] += sub * x[:-1]
        assert np.max(np.abs(res - rhs)) < 1e-12 * np.max(np.abs(rhs))

    def test_accepts_readonly_input(self, name):
        impl = kernels.implementation(name)
        rng = np.random.default_rng(8)
        arrs = random_system(rng, 50)
        for a in arrs:
            a.setflags(write=False)
        x = impl.tridiag_solve(*arrs)
        assert x.shape == (50,)


@pytest.mark.parametrize("name", BACKENDS)
class TestPlanarStep:
    def test_matches_direct_laplacian(self, name):
        impl = kernels.implementation(name)
        rng = np.random.default_rng(21)
        v = np.exp(rng.normal(size=(12, 9)) * 0.1)
        out = np.empty_like(v)
        coef = 0.3
        impl.planar_log_step(v, out, coef)
        w = np.log(v)
        lap = (
            w[2:, 1:-1] + w[:-2, 1:-1] + w[1:-1, 2:] + w[1:-1, :-2] - 4.0 * w[1:-1, 1:-1]
        )
        np.testing.assert_allclose(out[1:-1, 1:-1], v[1:-1, 1:-1] + coef * lap, rtol=1e-14)
        # edges are carried over untouched
        assert np.array_equal(out[0, :], v[0, :])
        assert np.array_equal(out[-1, :], v[-1, :])
        assert np.array_equal(out[:, 0], v[:, 0])
        assert np.array_equal(out[:, -1], v[:, -1])

    def test_readonly_source(self, name):
        impl = kernels.implementation(name)
        v = np.ones((6, 6))
        v.setflags(write=False)
        out = np.zeros((6, 6))
        impl.planar_log_step(v, out, 0.25)
        assert np.array_equal(out, np.ones((6, 6)))


@needs_compiled
class TestBackendParity:
    def test_tridiag_bit_for_bit_close(self):
        py = kernels.implementation("python")
        cy = kernels.implementation("cython")
        rng = np.random.default_rng(77)
        sub, diag, sup, rhs = random_system(rng, 513)
        np.testing.assert_allclose(
            py.tridiag_solve(sub, diag, sup, rhs),
            cy.tridiag_solve(sub, diag, sup, rhs),
            rtol=1e-13,
        )

    def test_planar_step_identical(self):
        py = kernels.implementation("python")
        cy = kernels.implementation("cython")
        rng = np.random.default_rng(78)
        v = np.exp(rng.normal(size=(33, 47)) * 0.05)
        out_a, out_b = np.empty_like(v), np.empty_like(v)
        py.planar_log_step(v, out_a, 0.125)
        cy.planar_log_step(v, out_b, 0.125)
        np.testing.assert_allclose(out_a, out_b, rtol=0, atol=1e-15)


class TestSelection:
    def test_active_is_available(self):
        assert kernels.active_backend() in BACKENDS

    def test_env_override(self):
        code = (
            "from logdiff import kernels; print(kernels.active_backend())"
        )
        for want in BACKENDS:
            env = dict(os.environ, LOGDIFF_BACKEND=want)
            got = subprocess.run(
                [sys.executable, "-c", code],
                capture_output=True,
                text=True,
                env=env,
                check=True,
            ).stdout.strip()
            assert got == want

    def test_unknown_backend_rejected(self):
        env = dict(os.environ, LOGDIFF_BACKEND="fortran")
        proc = subprocess.run(
            [sys.executable, "-c", "import logdiff.kernels"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert proc.returncode != 0
        assert "LOGDIFF_BACKEND" in proc.stderr
