"""Regimes, state/field types, force evaluation and the finite-difference
PDE residual that certifies a velocity field against the governing
equations on the rotating unit sphere (radius hard-coded to 1).

Colatitude theta lives strictly inside (0, pi); all grid operations stay in
[THETA_GUARD, pi - THETA_GUARD] because the forces carry cotangent poles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

__all__ = [
    "THETA_GUARD",
    "TWO_PI",
    "DomainError",
    "Regime",
    "Omega",
    "State",
    "SolutionField",
    "FunctionField",
    "force",
    "phi_rate",
    "pde_residual",
    "scalar_residual",
    "fd1",
]

TWO_PI = 2.0 * math.pi
THETA_GUARD = 1e-6


class DomainError(ValueError):
    """Evaluation requested outside a quantity's validity domain."""


class Regime(Enum):
    """Which variant of the Euler system governs forces and invariants.

    FULL is the complete rotating-sphere system; CORIOLIS keeps only terms
    linear in the rotation speed; RAPID / RAPID_CORIOLIS keep the highest
    rotation-order terms of the respective systems; the PHYS_* tags are the
    same three force balances written in physical (tangent-vector) velocity
    components (u, v*sin(theta)).
    """

    FULL = "full"
    CORIOLIS = "coriolis"
    RAPID = "rapid"
    RAPID_CORIOLIS = "rapid_coriolis"
    PHYS_FULL = "phys_full"
    PHYS_CORIOLIS = "phys_coriolis"
    PHYS_RAPID = "phys_rapid"


PHYSICAL_REGIMES = {Regime.PHYS_FULL, Regime.PHYS_CORIOLIS, Regime.PHYS_RAPID}


@dataclass(frozen=True)
class Omega:
    """Angular speed of the sphere about the polar axis (rad / time)."""

    value: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError("Omega must be finite")


def _as_omega(omega) -> float:
    return omega.value if isinstance(omega, Omega) else float(omega)


@dataclass
class State:
    """A point (t, theta, phi, u, v) of the 5-dimensional phase space.

    ``phi`` is stored reduced mod 2*pi; the winding count is kept separately
    so trajectories stay continuous.  For PHYS_* regimes ``u`` and ``v``
    hold the physical components (u, v*sin(theta)).
    """

    t: float
    theta: float
    phi: float
    u: float
    v: float
    winding: int = 0

    def __post_init__(self):
        if not (0.0 < self.theta < math.pi):
            raise DomainError(f"theta={self.theta} outside (0, pi)")
        w, r = divmod(self.phi, TWO_PI)
        self.phi = r
        self.winding += int(w)

    @property
    def phi_total(self) -> float:
        """Unreduced longitude phi + 2*pi*winding."""
        return self.phi + TWO_PI * self.winding

    def as_array(self) -> np.ndarray:
        return np.array([self.theta, self.phi_total, self.u, self.v])


def force(regime: Regime, theta, u, v, omega):
    """Right-hand side pair (F1, F2) of the selected regime's system.

    Vectorized over the state arguments.  Raises at the cotangent poles
    theta in {0, pi}.
    """
    w = _as_omega(omega)
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0.0) | (theta >= math.pi)):
        raise DomainError("force: theta at a coordinate pole")
    s, c = np.sin(theta), np.cos(theta)
    cot = c / s
    if regime is Regime.FULL:
        f1 = s * c * (v + w) ** 2
        f2 = -2.0 * cot * u * (v + w)
    elif regime is Regime.CORIOLIS:
        f1 = s * c * v * (v + 2.0 * w)
        f2 = -2.0 * cot * u * (v + w)
    elif regime is Regime.RAPID:
        f1 = w * w * s * c
        f2 = -2.0 * w * cot * u
    elif regime is Regime.RAPID_CORIOLIS:
        f1 = 2.0 * v * w * s * c
        f2 = -2.0 * w * cot * u
    elif regime is Regime.PHYS_FULL:
        f1 = (v + w * s) ** 2 * cot
        f2 = -u * (v + 2.0 * w * s) * cot
    elif regime is Regime.PHYS_CORIOLIS:
        f1 = v * (v + 2.0 * w * s) * cot
        f2 = -u * (v + 2.0 * w * s) * cot
    elif regime is Regime.PHYS_RAPID:
        f1 = w * w * s * c
        f2 = -2.0 * u * w * c
    else:  # pragma: no cover
        raise ValueError(f"unknown regime {regime}")
    if np.isscalar(u) and np.isscalar(v) and theta.ndim == 0:
        return float(f1), float(f2)
    return f1, f2


def phi_rate(regime: Regime, theta, v):
    """d(phi)/dt along characteristics: v, or v/sin(theta) for PHYS_*."""
    if regime in PHYSICAL_REGIMES:
        return v / np.sin(theta)
    return v


# ---------------------------------------------------------------------------
# Velocity fields
# ---------------------------------------------------------------------------

def _always_valid(t, theta, phi):
    shape = np.broadcast(np.asarray(t), np.asarray(theta), np.asarray(phi)).shape
    return np.ones(shape, dtype=bool) if shape else True


@dataclass
class SolutionField:
    """An analytic velocity field (u, v)(t, theta, phi) with metadata.

    ``evaluate`` must be vectorized (numpy broadcasting); ``validity``
    returns a boolean mask of points where the family is nonsingular.
    ``frame`` is ``"rotating"`` or ``"nonrotating"``; ``velocity`` is
    ``"coordinate"`` or ``"physical"``.
    """

    family: str
    params: dict
    omega: Omega
    regime: Regime
    evaluate: Callable  # (t, theta, phi) -> (u, v)
    validity: Callable = None
    frame: str = "rotating"
    velocity: str = "coordinate"

    def __post_init__(self):
        if self.validity is None:
            self.validity = _always_valid

    def __call__(self, t, theta, phi):
        return self.evaluate(t, theta, phi)

    def is_valid(self, t, theta, phi):
        return self.validity(t, theta, phi)

    def with_meta(self, **kwargs) -> "SolutionField":
        return replace(self, **kwargs)


def FunctionField(u_fn, v_fn, omega, regime=Regime.FULL, family="custom",
                  params=None, validity=None, frame="rotating",
                  velocity="coordinate") -> SolutionField:
    """Wrap plain callables u(t,theta,phi), v(t,theta,phi) as a field."""

    def evaluate(t, theta, phi):
        return u_fn(t, theta, phi), v_fn(t, theta, phi)

    return SolutionField(
        family=family,
        params=params or {},
        omega=omega if isinstance(omega, Omega) else Omega(float(omega)),
        regime=regime,
        evaluate=evaluate,
        validity=validity,
        frame=frame,
        velocity=velocity,
    )


# ---------------------------------------------------------------------------
# Finite-difference residual
# ---------------------------------------------------------------------------

_FD4_OFFSETS = np.array([-2.0, -1.0, 1.0, 2.0])


def _fd4(vals, h):
    """(8*(f(+h)-f(-h)) - (f(+2h)-f(-2h))) / (12h) with ``vals`` ordered as
    [-2h, -h, +h, +2h].  The difference form cancels exactly on constants."""
    return (8.0 * (vals[2] - vals[1]) - (vals[3] - vals[0])) / (12.0 * h)


def fd1(f: Callable[[float], float], x0: float, h: float) -> float:
    """4th-order central first derivative of a scalar callable."""
    vals = [f(x0 + d * h) for d in _FD4_OFFSETS]
    return float(_fd4(vals, h))


def _field_uv(fld, t, theta, phi):
    u, v = fld.evaluate(t, theta, phi)
    return float(u), float(v)


def pde_residual(fld: SolutionField, regime: Regime, at, h: float = 1e-4):
    """Residual of the regime's momentum equations at a point.

    ``at`` is a State or a (t, theta, phi) triple.  Derivatives use
    4th-order central differences of half-width 2h in each of t, theta,
    phi (phi stencils rely on the field's 2*pi periodicity); residuals are

        r_i = (d/dt + u d/dtheta + phi_rate d/dphi) u_i - F_i.

    For smooth exact solutions |r| = O(h^4).  Domain error when the theta
    stencil leaves [THETA_GUARD, pi - THETA_GUARD] or validity fails.
    """
    if isinstance(at, State):
        t0, th0, ph0 = at.t, at.theta, at.phi_total
    else:
        t0, th0, ph0 = at
    if not (THETA_GUARD + 2 * h <= th0 <= math.pi - THETA_GUARD - 2 * h):
        raise DomainError("pde_residual: theta stencil exits the guard band")
    stencil_t = t0 + _FD4_OFFSETS * h
    stencil_th = th0 + _FD4_OFFSETS * h
    stencil_ph = ph0 + _FD4_OFFSETS * h
    ok = np.all(np.asarray(fld.is_valid(t0, th0, ph0)))
    for pts in (
        [(tt, th0, ph0) for tt in stencil_t]
        + [(t0, hh, ph0) for hh in stencil_th]
        + [(t0, th0, pp) for pp in stencil_ph]
    ):
        ok = ok and np.all(np.asarray(fld.is_valid(*pts)))
    if not ok:
        raise DomainError("pde_residual: stencil leaves the field's validity domain")

    u0, v0 = _field_uv(fld, t0, th0, ph0)
    du = np.zeros(3)
    dv = np.zeros(3)
    for axis, pts in enumerate(
        (
            [(tt, th0, ph0) for tt in stencil_t],
            [(t0, hh, ph0) for hh in stencil_th],
            [(t0, th0, pp) for pp in stencil_ph],
        )
    ):
        uvals = np.empty(4)
        vvals = np.empty(4)
        for i, p in enumerate(pts):
            uvals[i], vvals[i] = _field_uv(fld, *p)
        du[axis] = _fd4(uvals, h)
        dv[axis] = _fd4(vvals, h)

    rate = float(phi_rate(regime, th0, v0))
    f1, f2 = force(regime, th0, u0, v0, fld.omega)
    r1 = du[0] + u0 * du[1] + rate * du[2] - f1
    r2 = dv[0] + u0 * dv[1] + rate * dv[2] - f2
    return float(r1), float(r2)


def scalar_residual(u_fn: Callable, rhs_fn: Callable, at, omega, h: float = 1e-4,
                    advect_phi: float | None = None) -> float:
    """Residual of a scalar transport equation u_t + u u_theta + a u_phi = rhs.

    ``advect_phi`` defaults to -omega (the co-rotating reductions);
    ``rhs_fn(t, theta, phi, u)`` supplies the right-hand side.
    """
    w = _as_omega(omega)
    a = -w if advect_phi is None else advect_phi
    t0, th0, ph0 = at
    u0 = float(u_fn(t0, th0, ph0))
    ut = fd1(lambda s: u_fn(s, th0, ph0), t0, h)
    uth = fd1(lambda s: u_fn(t0, s, ph0), th0, h)
    uph = fd1(lambda s: u_fn(t0, th0, s), ph0, h)
    return float(ut + u0 * uth + a * uph - rhs_fn(t0, th0, ph0, u0))
