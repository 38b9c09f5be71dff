"""Characteristic integration: fixed points, drift gates, reversal,
boundary handling, export."""

import csv
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from rotsphere.core import Omega, Regime, State
from rotsphere.characteristics import (
    BoundaryHit,
    integrate,
    invariant_drift,
    trajectory_to_csv,
)


def sample_full(rng):
    while True:
        theta = rng.uniform(0.4, math.pi - 0.4)
        u, v = rng.uniform(-1, 1, 2)
        w = 0.7
        s = math.sin(theta)
        twoH = u * u + (s * (v + w)) ** 2
        if twoH < 0.05 or abs(u) < 1e-3:
            continue
        K2 = (s * s * (v + w)) ** 2 / twoH
        if math.sqrt(max(1 - K2, 0.0)) > math.cos(0.12):
            continue
        return State(0.0, theta, rng.uniform(0, 2 * math.pi), u, v), w


def sample_rapid(rng):
    while True:
        theta = rng.uniform(0.5, math.pi - 0.5)
        w = rng.choice([-1, 1]) * rng.uniform(1.0, 3.0)
        s = math.sin(theta)
        u = rng.uniform(-0.85, 0.85) * abs(w) * s
        v = rng.uniform(-0.3, 0.3)
        k = (u * u - (w * s) ** 2) / (w * w)
        if k > -0.02 or 1 + k < 0.05:
            continue
        return State(0.0, theta, rng.uniform(0, 2 * math.pi), u, v), w


class TestFixedPoints:
    def test_corotating_fixed_point(self):
        w = 2.0
        start = State(0.0, 1.0, 0.0, 0.0, -w)
        traj = integrate(Regime.FULL, start, Omega(w), 5.0)
        assert_allclose(traj.theta, 1.0, atol=1e-12)
        assert_allclose(traj.u, 0.0, atol=1e-12)
        assert_allclose(traj.phi_unwrapped, -w * traj.t, atol=1e-10)

    def test_equatorial_circle(self):
        start = State(0.0, math.pi / 2, 0.0, 0.0, 0.3)
        traj = integrate(Regime.FULL, start, Omega(0.0), 8.0)
        assert_allclose(traj.theta, math.pi / 2, atol=1e-11)
        assert_allclose(traj.phi_unwrapped, 0.3 * traj.t, atol=1e-10)

    def test_fixed_point_drift_is_zero(self):
        w = 1.5
        traj = integrate(Regime.FULL, State(0.0, 1.0, 0.0, 0.0, -w), Omega(w), 5.0)
        drifts = invariant_drift(traj)
        for name in ("L1", "L2", "L3", "H"):
            assert drifts[name] < 1e-13


class TestDriftGates:
    def test_full_regime(self):
        rng = np.random.default_rng(17)
        for _ in range(5):
            start, w = sample_full(rng)
            traj = integrate(Regime.FULL, start, Omega(w), 10.0)
            drifts = invariant_drift(traj)
            for name in ("L1", "L2", "L3", "H"):
                assert drifts[name] < 1e-7
            assert drifts["I1"] < 1e-7 and drifts["I2"] < 1e-7

    def test_rapid_regime(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            start, w = sample_rapid(rng)
            traj = integrate(Regime.RAPID, start, Omega(w), 10.0)
            drifts = invariant_drift(traj)
            assert drifts["I1"] < 1e-8 and drifts["I2"] < 1e-8
            assert drifts["I3"] < 1e-6 and drifts["I4"] < 1e-6

    def test_rapid_coriolis_energy_exchange_identity(self):
        # d(u^2)/dt + sin^2 d(v^2)/dt = 0 along the characteristics
        rng = np.random.default_rng(23)
        start = State(0.0, 1.3, 0.0, 0.3, 0.2)
        w = 1.5
        traj = integrate(Regime.RAPID_CORIOLIS, start, Omega(w), 10.0)
        dense = traj.resample(4001)
        s2 = np.sin(dense.theta) ** 2
        dv2 = np.gradient(dense.v ** 2, dense.t)
        integral = np.concatenate(
            [[0.0], np.cumsum(0.5 * (s2[1:] * dv2[1:] + s2[:-1] * dv2[:-1])
                              * np.diff(dense.t))]
        )
        total = dense.u ** 2 + integral
        assert np.max(np.abs(total - total[0])) < 1e-7


class TestReversal:
    def test_time_reversal(self):
        w = 0.9
        start = State(0.0, 1.2, 0.5, 0.4, -0.1)
        fwd = integrate(Regime.FULL, start, Omega(w), 6.0, rel_tol=1e-11,
                        abs_tol=1e-13)
        end = fwd.state(-1)
        back = integrate(Regime.FULL, end, Omega(w), 0.0, rel_tol=1e-11,
                         abs_tol=1e-13)
        got = back.state(-1)
        tol = 10 * 1e-9
        assert abs(got.theta - start.theta) < tol
        assert abs(got.phi_total - start.phi_total) < tol
        assert abs(got.u - start.u) < tol
        assert abs(got.v - start.v) < tol


class TestBoundary:
    def test_poleward_escape_raises(self):
        # k > 0 rapid motion runs into the pole guard in finite time
        start = State(0.0, 0.8, 0.0, -2.5, 0.0)
        with pytest.raises(BoundaryHit) as exc:
            integrate(Regime.RAPID, start, Omega(1.0), 10.0)
        traj = exc.value.trajectory
        assert traj.status == "boundary"
        assert traj.t[-1] < 10.0
        assert traj.theta[-1] < 0.1

    def test_return_mode(self):
        start = State(0.0, 0.8, 0.0, -2.5, 0.0)
        traj = integrate(Regime.RAPID, start, Omega(1.0), 10.0,
                         on_boundary="return")
        assert traj.status == "boundary"


class TestExport:
    def test_csv_roundtrip(self, tmp_path):
        w = 0.7
        start = State(0.0, 1.1, 0.4, 0.3, -0.2)
        traj = integrate(Regime.FULL, start, Omega(w), 2.0, n_samples=50)
        path = tmp_path / "traj.csv"
        trajectory_to_csv(traj, path, config_hash="deadbeef")
        with open(path) as fh:
            comment = fh.readline()
            assert comment.startswith("# config-sha256:")
            rows = list(csv.DictReader(fh))
        assert len(rows) == 50
        assert set(rows[0]) >= {"t", "theta", "phi_unwrapped", "u", "v",
                                "L1", "L2", "L3", "H", "I1", "I2"}
        assert_allclose(float(rows[0]["theta"]), 1.1, rtol=1e-15)
        assert_allclose(float(rows[-1]["t"]), 2.0, rtol=1e-15)
