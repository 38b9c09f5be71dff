"""Force evaluation and finite-difference residual checks."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rotsphere.core import (
    DomainError,
    FunctionField,
    Omega,
    Regime,
    State,
    force,
    pde_residual,
    scalar_residual,
)


def fig1_field(omega=1.0):
    """Closed-form stationary family member u=sin(p), v=2cos(p)/sin(2θ)-ω."""

    def u_fn(t, theta, phi):
        return np.sin(phi + omega * t)

    def v_fn(t, theta, phi):
        return 2.0 * np.cos(phi + omega * t) / np.sin(2.0 * np.asarray(theta)) - omega

    def validity(t, theta, phi):
        th = np.asarray(theta, dtype=float)
        return np.abs(np.sin(2.0 * th)) > 1e-3

    return FunctionField(u_fn, v_fn, omega, Regime.FULL, family="fig1",
                         validity=validity)


class TestState:
    def test_phi_reduced_with_winding(self):
        s = State(t=0.0, theta=1.0, phi=7.0, u=0.0, v=0.0)
        assert 0.0 <= s.phi < 2 * math.pi
        assert_allclose(s.phi_total, 7.0, rtol=1e-15)

    def test_pole_rejected(self):
        with pytest.raises(DomainError):
            State(t=0.0, theta=0.0, phi=0.0, u=0.0, v=0.0)


class TestForce:
    def test_full_direct_substitution(self):
        f1, f2 = force(Regime.FULL, math.pi / 4, 1.0, 2.0, Omega(3.0))
        assert_allclose(f1, 12.5, rtol=1e-14)
        assert_allclose(f2, -10.0, rtol=1e-14)

    def test_full_corotating_annihilates(self):
        for theta in (0.3, 1.2, 2.9):
            f1, f2 = force(Regime.FULL, theta, 0.7, -2.0, Omega(2.0))
            assert f1 == 0.0 and f2 == 0.0

    def test_rapid_direct_substitution(self):
        f1, f2 = force(Regime.RAPID, math.pi / 4, 1.0, 0.0, Omega(2.0))
        assert_allclose(f1, 2.0, rtol=1e-14)
        assert_allclose(f2, -4.0, rtol=1e-14)

    def test_full_at_zero_omega_matches_nonrotating(self):
        rng = np.random.default_rng(3)
        theta, u, v = rng.uniform(0.2, 2.9), rng.normal(), rng.normal()
        f1, f2 = force(Regime.FULL, theta, u, v, Omega(0.0))
        assert_allclose(f1, math.sin(theta) * math.cos(theta) * v * v, rtol=1e-14)
        assert_allclose(f2, -2.0 * u * v / math.tan(theta), rtol=1e-13)

    def test_physical_transport_identity(self):
        # FULL force transported by v_phys = v sin(theta): the u-component
        # F1_phys(theta, u, v s) == F1_full(theta, u, v) exactly.
        rng = np.random.default_rng(11)
        for _ in range(50):
            theta = rng.uniform(0.2, math.pi - 0.2)
            u, v, w = rng.normal(size=3)
            s = math.sin(theta)
            f1_full, _ = force(Regime.FULL, theta, u, v, Omega(w))
            f1_phys, _ = force(Regime.PHYS_FULL, theta, u, v * s, Omega(w))
            assert abs(f1_full - f1_phys) < 1e-13 * max(1.0, abs(f1_full))

    def test_pole_raises(self):
        with pytest.raises(DomainError):
            force(Regime.FULL, 0.0, 1.0, 1.0, Omega(1.0))


class TestResidual:
    def test_trivial_corotating_exact(self):
        omega = 1.4
        fld = FunctionField(
            lambda t, th, ph: np.zeros_like(np.asarray(th, dtype=float) + t + ph),
            lambda t, th, ph: -omega * np.ones_like(np.asarray(th, dtype=float) + t + ph),
            omega,
        )
        r1, r2 = pde_residual(fld, Regime.FULL, (0.3, 1.1, 2.0), h=1e-4)
        assert r1 == 0.0 and r2 == 0.0

    def test_fig1_small_residual(self):
        fld = fig1_field(1.0)
        r1, r2 = pde_residual(fld, Regime.FULL, (0.0, math.pi / 3, 1.0), h=1e-3)
        assert abs(r1) < 1e-8 and abs(r2) < 1e-8

    def test_generic_non_solution_detected(self):
        fld = FunctionField(
            lambda t, th, ph: np.asarray(th, dtype=float) + 0.0 * (t + ph),
            lambda t, th, ph: np.zeros_like(np.asarray(th, dtype=float) + t + ph),
            1.0,
        )
        theta = math.pi / 3
        r1, _ = pde_residual(fld, Regime.FULL, (0.0, theta, 0.5), h=1e-4)
        expected = theta - math.sin(theta) * math.cos(theta)
        assert_allclose(r1, expected, rtol=1e-6)

    def test_convergence_order(self):
        # Halving h cuts the residual of an exact solution by ~16x.
        fld = fig1_field(1.0)
        pt = (0.2, 1.0, 0.7)
        r_coarse = pde_residual(fld, Regime.FULL, pt, h=2e-2)
        r_fine = pde_residual(fld, Regime.FULL, pt, h=1e-2)
        for rc, rf_ in zip(r_coarse, r_fine):
            ratio = abs(rc) / abs(rf_)
            assert 8.0 < ratio < 32.0

    def test_guard_band(self):
        fld = fig1_field(1.0)
        with pytest.raises(DomainError):
            pde_residual(fld, Regime.FULL, (0.0, 1e-7, 0.0), h=1e-4)

    def test_validity_enforced(self):
        fld = fig1_field(1.0)
        with pytest.raises(DomainError):
            pde_residual(fld, Regime.FULL, (0.0, math.pi / 2, 1.0), h=1e-4)

    def test_scalar_residual_hopf(self):
        omega = 0.7

        def u_fn(t, theta, phi):
            return theta / (1.0 + t)

        r = scalar_residual(u_fn, lambda t, th, ph, u: 0.0, (0.5, 1.0, 0.3), omega)
        assert abs(r) < 1e-10
