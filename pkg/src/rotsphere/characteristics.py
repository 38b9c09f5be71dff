"""Adaptive integration of the characteristic systems, with invariant-drift
reporting and CSV export.

The integrator is scipy's embedded Runge-Kutta machinery behind the module
contract (the governing equations specify no integrator); ``DOP853`` is the
default because the drift gates demand tight tolerances over long windows,
``RK45`` is available.  Longitude is integrated unreduced (winding kept) so
integrals linear in phi stay smooth; integration halts with a boundary
event when theta exits the guard band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .core import THETA_GUARD, DomainError, Omega, Regime, State, force, phi_rate
from . import invariants as inv

__all__ = [
    "Trajectory",
    "BoundaryHit",
    "StepUnderflow",
    "integrate",
    "invariant_drift",
    "trajectory_to_csv",
]


class BoundaryHit(RuntimeError):
    """theta reached the guard band; carries the partial trajectory."""

    def __init__(self, message, trajectory):
        super().__init__(message)
        self.trajectory = trajectory


class StepUnderflow(RuntimeError):
    """The step-size controller stalled."""


@dataclass
class Trajectory:
    """Sampled characteristic trajectory with its dense interpolant."""

    regime: Regime
    omega: Omega
    t: np.ndarray
    theta: np.ndarray
    phi_unwrapped: np.ndarray
    u: np.ndarray
    v: np.ndarray
    rel_tol: float
    abs_tol: float
    status: str = "completed"  # or "boundary"
    sol: object = field(default=None, repr=False)

    def state(self, i: int) -> State:
        return State(
            t=float(self.t[i]),
            theta=float(self.theta[i]),
            phi=float(self.phi_unwrapped[i]),
            u=float(self.u[i]),
            v=float(self.v[i]),
        )

    @property
    def t_end(self) -> float:
        return float(self.t[-1])

    def resample(self, n: int) -> "Trajectory":
        """Evaluate the dense output on a uniform grid of n points."""
        if self.sol is None:
            return self
        ts = np.linspace(self.t[0], self.t[-1], n)
        y = self.sol(ts)
        return Trajectory(
            regime=self.regime,
            omega=self.omega,
            t=ts,
            theta=y[0],
            phi_unwrapped=y[1],
            u=y[2],
            v=y[3],
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            status=self.status,
            sol=self.sol,
        )


def _rhs(regime: Regime, w: float):
    def rhs(t, y):
        theta, _, u, v = y
        f1, f2 = force(regime, theta, u, v, w)
        return [u, phi_rate(regime, theta, v), f1, f2]

    return rhs


def integrate(
    regime: Regime,
    start: State,
    omega,
    t_end: float,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-12,
    n_samples: int = 400,
    method: str = "DOP853",
    on_boundary: str = "raise",
) -> Trajectory:
    """Integrate the regime's characteristic system from ``start`` to t_end.

    Local error per step is controlled by (rel_tol, abs_tol).  On a theta
    boundary event the partial trajectory is raised inside
    :class:`BoundaryHit` (or returned with status ``"boundary"`` when
    ``on_boundary="return"``).  Backward integration (t_end < start.t) is
    allowed; used by the time-reversal checks.
    """
    w = omega.value if isinstance(omega, Omega) else float(omega)
    if not (THETA_GUARD < start.theta < math.pi - THETA_GUARD):
        raise DomainError("integrate: start.theta outside the guard band")
    if t_end == start.t:
        raise ValueError("integrate: t_end must differ from start.t")

    def hit_low(t, y):
        return y[0] - THETA_GUARD

    def hit_high(t, y):
        return (math.pi - THETA_GUARD) - y[0]

    hit_low.terminal = True
    hit_high.terminal = True

    y0 = [start.theta, start.phi_total, start.u, start.v]
    res = solve_ivp(
        _rhs(regime, w),
        (start.t, t_end),
        y0,
        method=method,
        rtol=rel_tol,
        atol=abs_tol,
        dense_output=True,
        events=[hit_low, hit_high],
    )
    if res.status == -1:
        raise StepUnderflow(res.message)
    ts = np.linspace(start.t, res.t[-1], n_samples)
    y = res.sol(ts)
    traj = Trajectory(
        regime=regime,
        omega=Omega(w),
        t=ts,
        theta=y[0],
        phi_unwrapped=y[1],
        u=y[2],
        v=y[3],
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        status="boundary" if res.status == 1 else "completed",
        sol=res.sol,
    )
    if traj.status == "boundary" and on_boundary == "raise":
        raise BoundaryHit(
            f"theta reached the guard band at t={res.t[-1]:.6g}", traj
        )
    return traj


# ---------------------------------------------------------------------------
# Invariant drift
# ---------------------------------------------------------------------------

def _phase_sample_count(traj: Trajectory) -> int:
    """Samples needed so elliptic phases move < half a quarter-period per
    step (the fold unwrapper's requirement)."""
    w = traj.omega.value
    span = abs(traj.t[-1] - traj.t[0])
    regime = traj.regime
    if regime is Regime.FULL:
        H = 0.5 * (traj.u[0] ** 2 + (math.sin(traj.theta[0]) * (traj.v[0] + w)) ** 2)
        rate = math.sqrt(max(2.0 * H, 1e-12))
        quarter = math.pi / 2
    elif regime is Regime.CORIOLIS:
        s = math.sin(traj.theta[0])
        H = 0.5 * (traj.u[0] ** 2 + (traj.v[0] * s) ** 2)
        L3 = s * s * (traj.v[0] + w)
        a_plus, a_minus = inv.coriolis_roots(H, L3, w)
        rate = abs(w) * math.sqrt(max(a_plus - min(a_minus, 0.0), a_plus))
        k2 = (a_plus - a_minus) / a_plus
        m = math.sqrt(1.0 / k2) if k2 > 1 else math.sqrt(k2)
        quarter = float(inv.ek.complete_k(min(m, 0.999999)))
    elif regime in (Regime.RAPID, Regime.PHYS_RAPID):
        x = math.sin(traj.theta[0])
        I1 = 0.5 * traj.u[0] ** 2 - 0.5 * (w * x) ** 2
        k = 2.0 * I1 / (w * w)
        rate = abs(w) * math.sqrt(1.0 + max(k, 0.0))
        m = 1.0 / math.sqrt(1.0 + k) if k > 0 else math.sqrt(max(1.0 + k, 1e-12))
        quarter = float(inv.ek.complete_k(min(m, 0.999999)))
    else:  # RAPID_CORIOLIS
        rate = math.sqrt(2.0)
        s = math.sin(traj.theta[0])
        I1 = 0.5 * traj.u[0] ** 2 - w * (traj.v[0] + w) * s * s
        I2 = traj.v[0] + 2.0 * w * math.log(s)
        try:
            lib = inv.RapidCoriolisLibration(I1, I2, w, float(traj.theta[0]))
            quarter = lib.G_half
        except DomainError:
            quarter = 1.0
    n = int(math.ceil(span * rate / (0.4 * quarter))) + 16
    return min(max(n, 400), 6000)


def invariant_series(traj: Trajectory) -> dict:
    """Continuous per-sample invariant values (resampled densely enough
    for the branch ledgers)."""
    dense = traj.resample(_phase_sample_count(traj))
    return inv.trajectory_series(
        dense.regime,
        dense.omega,
        dense.t,
        dense.theta,
        dense.phi_unwrapped,
        dense.u,
        dense.v,
    ), dense


def invariant_drift(traj: Trajectory) -> dict:
    """Worst relative drift per invariant: max |I(t) - I(0)| / scale with
    scale = max(1, |I(0)|)."""
    series, _ = invariant_series(traj)
    report = {}
    for name, vals in series.items():
        scale = max(1.0, abs(float(vals[0])))
        report[name] = float(np.max(np.abs(vals - vals[0]))) / scale
    return report


def trajectory_to_csv(traj: Trajectory, path, include_invariants: bool = True,
                      config_hash: str | None = None):
    """Write samples as CSV: t, theta, phi_unwrapped, u, v [+ invariants]."""
    cols = {
        "t": traj.t,
        "theta": traj.theta,
        "phi_unwrapped": traj.phi_unwrapped,
        "u": traj.u,
        "v": traj.v,
    }
    if include_invariants:
        series = inv.trajectory_series(
            traj.regime, traj.omega, traj.t, traj.theta,
            traj.phi_unwrapped, traj.u, traj.v,
        )
        for name in inv.invariant_names(traj.regime):
            if name in series:
                cols[name] = series[name]
    names = list(cols)
    with open(path, "w", encoding="utf-8") as fh:
        if config_hash is not None:
            fh.write(f"# config-sha256: {config_hash}\n")
        fh.write(",".join(names) + "\n")
        for i in range(len(traj.t)):
            fh.write(",".join(f"{float(cols[n][i]):.17g}" for n in names) + "\n")
