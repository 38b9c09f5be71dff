"""Pointwise integral evaluations: closed-form examples, identities,
limit relations, and mechanics."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rotsphere.core import DomainError, Omega, Regime, State
from rotsphere.invariants import (
    coriolis_integrals,
    coriolis_roots,
    full_integrals,
    mechanics,
    physical_rapid_integrals,
    rapid_coriolis_integrals,
    rapid_integrals,
)


def random_states(n, seed=0, theta_lo=0.15, theta_hi=math.pi - 0.15):
    rng = np.random.default_rng(seed)
    for _ in range(n):
        yield State(
            t=rng.uniform(0, 2),
            theta=rng.uniform(theta_lo, theta_hi),
            phi=rng.uniform(0, 2 * math.pi),
            u=rng.uniform(-1.5, 1.5),
            v=rng.uniform(-1.5, 1.5),
        ), rng.uniform(-1.5, 1.5)


class TestFull:
    def test_equatorial_example(self):
        s = State(t=0.0, theta=math.pi / 2, phi=0.0, u=0.0, v=1.0)
        vals = full_integrals(s, Omega(0.0)).values
        assert_allclose(
            [vals["L1"], vals["L2"], vals["L3"], vals["H"], vals["Q"], vals["I1"]],
            [0.0, 0.0, 1.0, 0.5, 0.0, 0.0],
            atol=1e-15,
        )

    def test_sum_of_squares_identity(self):
        s = State(t=0.7, theta=1.1, phi=0.4, u=0.3, v=-0.2)
        vals = full_integrals(s, Omega(0.5)).values
        lhs = vals["L1"] ** 2 + vals["L2"] ** 2 + vals["L3"] ** 2
        assert abs(lhs - 2.0 * vals["H"]) < 1e-13

    def test_cotangent_relation(self):
        s = State(t=0.7, theta=1.1, phi=0.4, u=0.3, v=-0.2)
        w = 0.5
        vals = full_integrals(s, Omega(w)).values
        p = s.phi + w * s.t
        rel = (
            math.cos(p) * vals["L1"]
            + math.sin(p) * vals["L2"]
            + vals["L3"] / math.tan(s.theta)
        )
        assert abs(rel) < 1e-13

    def test_identities_random(self):
        for s, w in random_states(300, seed=5):
            vals = full_integrals(s, Omega(w)).values
            twoH = 2.0 * vals["H"]
            if twoH < 1e-10:
                continue
            lhs = vals["L1"] ** 2 + vals["L2"] ** 2 + vals["L3"] ** 2
            assert abs(lhs - twoH) / max(1.0, twoH) < 1e-13
            p = s.phi + w * s.t
            rel = (
                math.cos(p) * vals["L1"]
                + math.sin(p) * vals["L2"]
                + vals["L3"] / math.tan(s.theta)
            )
            assert abs(rel) / max(1.0, twoH) < 1e-12

    def test_modulus_bound(self):
        # K^2 = L3^2 / 2H < 1 whenever u != 0
        for s, w in random_states(200, seed=6):
            if abs(s.u) < 1e-3:
                continue
            vals = full_integrals(s, Omega(w)).values
            assert vals["L3"] ** 2 / (2 * vals["H"]) < 1.0

    def test_zero_energy_rejected(self):
        s = State(t=0.0, theta=1.0, phi=0.0, u=0.0, v=-1.0)
        with pytest.raises(DomainError):
            full_integrals(s, Omega(1.0))


class TestCoriolis:
    def test_root_example(self):
        s = State(t=0.0, theta=math.pi / 2, phi=0.0, u=0.5, v=0.0)
        vals = coriolis_integrals(s, Omega(1.0)).values
        assert_allclose(vals["H"], 0.125, rtol=1e-14)
        assert_allclose(vals["L3"], 1.0, rtol=1e-14)
        assert_allclose(vals["A_plus"], 0.39038820320220757, rtol=1e-10)
        assert_allclose(vals["A_minus"], -0.6403882032022076, rtol=1e-10)

    def test_roots_satisfy_quadratic(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            H = rng.uniform(0.05, 2.0)
            L3 = rng.uniform(-1.0, 1.0)
            w = rng.choice([-1, 1]) * rng.uniform(0.3, 2.0)
            b = 2 * w * w - 2 * H - 2 * w * L3
            c = 2 * H + 2 * w * L3 - L3 * L3 - w * w
            for y in coriolis_roots(H, L3, w):
                assert abs(-w * w * y * y + b * y + c) < 1e-13

    def test_positivity_display(self):
        # H + 2 w L3 = (u^2 + sin^2 (v+2w)^2)/2 > 0 at admissible states
        count = 0
        for s, w in random_states(10000, seed=7):
            if w == 0.0:
                continue
            sin = math.sin(s.theta)
            H = 0.5 * (s.u ** 2 + (s.v * sin) ** 2)
            if H <= 0:
                continue
            L3 = sin * sin * (s.v + w)
            assert H + 2 * w * L3 > 0
            count += 1
        assert count > 9000

    def test_a_plus_below_one(self):
        for s, w in random_states(300, seed=8):
            if abs(w) < 0.05:
                continue
            vals = coriolis_integrals(s, Omega(w)).values
            assert vals["A_plus"] < 1.0
            assert vals["A_minus"] < vals["A_plus"]

    def test_h_l3_match_full_at_zero_omega(self):
        # CORIOLIS H and L3 at w=0 coincide with the FULL ones at w=0
        for s, _ in random_states(50, seed=9):
            sin = math.sin(s.theta)
            h_cor = 0.5 * (s.u ** 2 + (s.v * sin) ** 2)
            full = full_integrals(s, Omega(0.0)).values
            assert abs(h_cor - full["H"]) < 1e-14
            assert abs(sin * sin * s.v - full["L3"]) < 1e-14


class TestRapid:
    def test_equatorial_example(self):
        s = State(t=0.0, theta=math.pi / 2, phi=0.0, u=0.0, v=0.1)
        vals = rapid_integrals(s, Omega(2.0)).values
        assert_allclose(vals["I1"], -2.0, rtol=1e-14)
        assert_allclose(vals["I2"], 0.1, rtol=1e-14)
        assert math.isnan(vals["I3"])  # degenerate zero-amplitude case

    def test_limit_from_full_ring(self):
        # I1* = H - w L3 -> I1 as v/w -> 0, decreasing monotonically
        theta, u, w = 1.1, 0.4, 2.0
        s_ = math.sin(theta)
        diffs = []
        for ratio in (1e-1, 1e-2, 1e-3):
            v = ratio * w
            H = 0.5 * (u * u + (s_ * (v + w)) ** 2)
            L3 = s_ * s_ * (v + w)
            I1_star = H - w * L3
            I1 = 0.5 * u * u - 0.5 * (w * s_) ** 2
            diffs.append(abs(I1_star - I1))
            # the exact gap is v^2 sin^2 / 2 for the rapid ring too
            assert abs(I1_star - I1 - 0.5 * v * v * s_ * s_) < 1e-15
        assert diffs[0] > diffs[1] > diffs[2]


class TestRapidCoriolis:
    def test_equatorial_example(self):
        s = State(t=0.0, theta=math.pi / 2, phi=0.0, u=0.0, v=0.0)
        vals = rapid_coriolis_integrals(s, Omega(1.5)).values
        assert_allclose(vals["I1"], -2.25, rtol=1e-14)
        assert vals["I2"] == 0.0

    def test_exact_ring_relation(self):
        # I1* - I1 = v^2 sin^2 / 2 exactly (dropping the (v/w)^2 term)
        rng = np.random.default_rng(3)
        for _ in range(100):
            theta = rng.uniform(0.2, math.pi - 0.2)
            u, v = rng.uniform(-1, 1, 2)
            w = rng.choice([-1, 1]) * rng.uniform(0.5, 2)
            s_ = math.sin(theta)
            H = 0.5 * (u * u + (v * s_) ** 2)
            L3 = s_ * s_ * (v + w)
            I1_star = H - w * L3
            I1 = 0.5 * u * u - w * (v + w) * s_ * s_
            gap = I1_star - I1 - 0.5 * v * v * s_ * s_
            assert abs(gap) < 1e-14 * max(1.0, abs(I1_star))


class TestPhysicalRapid:
    def test_equatorial_example(self):
        s = State(t=0.0, theta=math.pi / 2, phi=0.0, u=0.0, v=0.2)
        vals = physical_rapid_integrals(s, Omega(1.0)).values
        assert_allclose(vals["I1"], -0.5, rtol=1e-14)
        assert_allclose(vals["I2"], 2.2, rtol=1e-14)

    def test_map_defect_between_rapid_systems(self):
        # transporting the rapid v-equation by v_phys = v sin(theta) misses
        # the physical rapid one by u v cos(theta) (= u_phys v_phys cot)
        theta, u, v, w = 1.0, 0.4, 0.3, 2.0
        s_, c = math.sin(theta), math.cos(theta)
        lhs = s_ * (-2 * w * u * c / s_) + u * v * c  # transported dv_phys/dt
        rhs = -2 * u * w * c  # PHYS_RAPID force
        assert abs((lhs - rhs) - u * v * c) < 1e-15
        assert abs(u * v * c) > 1e-3


class TestMechanics:
    def test_rest_state(self):
        for theta in (0.4, 1.2, 2.6):
            m = mechanics(State(0.0, theta, 0.0, 0.0, 0.0), Omega(1.3))
            assert m.E == 0.0
            assert abs(m.Hcan) < 1e-16

    def test_jacobi_equals_coriolis_energy(self):
        for s, w in random_states(100, seed=11):
            m = mechanics(s, Omega(w))
            sin = math.sin(s.theta)
            H_cor = 0.5 * (s.u ** 2 + (s.v * sin) ** 2)
            assert abs(m.E - H_cor) < 1e-13 * max(1.0, abs(m.E))
            # Hamiltonian and Jacobi integral agree at every state
            assert abs(m.Hcan - m.E) < 1e-13 * max(1.0, abs(m.E))

    def test_momenta(self):
        s = State(0.0, 1.0, 0.0, 0.7, -0.3)
        m = mechanics(s, Omega(2.0))
        assert m.p_theta == s.u
        assert_allclose(m.p_phi, math.sin(1.0) ** 2 * (s.v + 2.0), rtol=1e-15)
