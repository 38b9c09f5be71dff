"""Conserved quantities of the characteristic systems, per regime.

Two evaluation modes live here.  The pointwise operations
(:func:`full_integrals` and friends) evaluate every integral at a single
state with principal branches.  The trajectory-aware
:func:`trajectory_series` evaluates the same quantities along a sampled
trajectory with continuity ledgers: the arcsin/arctan/elliptic amplitudes
that fold at libration turning points are unwrapped sample-to-sample so
the series stay continuous and drift can be measured honestly.

Conventions for the quadrature-defined integrals: the 3rd integrals
integrate their amplitude variable from the trajectory's initial position
(or from sin(theta)=1/2 when no trajectory context exists), and the 4th
integrals integrate in time from tau_ref = 0.  Integrals of motion are
only defined up to additive constants; fixed references make values
comparable and drift-testable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import DomainError, Omega, Regime, State
from . import elliptic as ek

__all__ = [
    "InvariantSet",
    "MechanicsSet",
    "full_integrals",
    "coriolis_integrals",
    "rapid_integrals",
    "rapid_coriolis_integrals",
    "physical_rapid_integrals",
    "mechanics",
    "coriolis_roots",
    "trajectory_series",
    "invariant_names",
    "ALGEBRAIC_INVARIANTS",
    "PHASE_INVARIANTS",
]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(12)


@dataclass(frozen=True)
class InvariantSet:
    """Named values of a regime's integrals of motion at one state."""

    regime: Regime
    values: dict


@dataclass(frozen=True)
class MechanicsSet:
    """Lagrangian-side quantities of the slow-rotation characteristics."""

    p_theta: float
    p_phi: float
    E: float
    Hcan: float
    L: float


ALGEBRAIC_INVARIANTS = {
    Regime.FULL: ("L1", "L2", "L3", "H"),
    Regime.CORIOLIS: ("H", "L3"),
    Regime.RAPID: ("I1", "I2"),
    Regime.RAPID_CORIOLIS: ("I1", "I2"),
    Regime.PHYS_RAPID: ("I1", "I2"),
}

PHASE_INVARIANTS = {
    Regime.FULL: ("I1", "I2"),
    Regime.CORIOLIS: ("P", "N"),
    Regime.RAPID: ("I3", "I4"),
    Regime.RAPID_CORIOLIS: ("I3", "I4"),
    Regime.PHYS_RAPID: ("I3", "I4"),
}


def invariant_names(regime: Regime):
    return ALGEBRAIC_INVARIANTS[regime] + PHASE_INVARIANTS[regime]


def _omega_value(omega) -> float:
    return omega.value if isinstance(omega, Omega) else float(omega)


def _state_tuple(s):
    if isinstance(s, State):
        return s.t, s.theta, s.phi_total, s.u, s.v
    return tuple(float(x) for x in s)


# ---------------------------------------------------------------------------
# FULL regime
# ---------------------------------------------------------------------------

def _full_algebraic(t, theta, phi, u, v, w):
    s, c = np.sin(theta), np.cos(theta)
    p = phi + w * t
    L1 = -s * c * np.cos(p) * (v + w) - np.sin(p) * u
    L2 = -s * c * np.sin(p) * (v + w) + np.cos(p) * u
    L3 = s * s * (v + w)
    H = 0.5 * (u * u + (s * (v + w)) ** 2)
    return L1, L2, L3, H


def _q_argument(theta, u, v, w):
    """cos(theta) * sqrt(2H / (u^2 + sin^2 cos^2 (v+w)^2)), clamped to [-1,1].

    The argument is <= 1 in exact arithmetic; exits beyond 1e-12 are a
    domain error, smaller exits are clamped.
    """
    s, c = math.sin(theta), math.cos(theta)
    twoH = u * u + (s * (v + w)) ** 2
    D = u * u + (s * c * (v + w)) ** 2
    if abs(u) <= 1e-15 * math.sqrt(twoH) and abs(c) < 1e-13:
        # zero-amplitude equatorial libration: Q -> 0 by convention
        return 0.0
    if D == 0.0:
        raise DomainError("Q undefined: u = 0 and cos(theta)*(v+omega) = 0")
    z = c * math.sqrt(twoH / D)
    if abs(z) > 1.0 + 1e-12:
        raise DomainError(f"Q argument {z} exits [-1, 1]")
    return min(1.0, max(-1.0, z))


def full_integrals(s, omega, sigma: int = 1) -> InvariantSet:
    """All FULL-regime integrals L1, L2, L3, H, Q, I1, I2 at a state.

    ``sigma`` is the sign of u at the trajectory's initial time; arctan
    branches are principal here (trajectory continuity is the ledger's
    job).  Domain errors: 2H = 0 (I1, I2 undefined) and Q-argument exits.
    """
    t, theta, phi, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if not 0.0 < theta < math.pi:
        raise DomainError("full_integrals: theta outside (0, pi)")
    L1, L2, L3, H = _full_algebraic(t, theta, phi, u, v, w)
    twoH = 2.0 * H
    if twoH <= 0.0:
        raise DomainError("full_integrals: 2H = 0, I1 and I2 undefined")
    sig = 1 if sigma >= 0 else -1
    Q = math.asin(_q_argument(theta, u, v, w))
    rt = math.sqrt(twoH)
    I1 = t + sig * Q / rt
    sc = math.sin(theta) * math.cos(theta)
    if u != 0.0:
        term1 = math.atan((v + w) * sc / u)
    else:
        term1 = math.copysign(math.pi / 2, (v + w) * sc) if sc * (v + w) != 0 else 0.0
    Ks = L3 / rt
    term2 = math.atan(sig * Ks * math.tan(rt * t + sig * Q))
    I2 = phi + w * t + term1 - term2
    return InvariantSet(
        Regime.FULL,
        {"L1": L1, "L2": L2, "L3": L3, "H": H, "Q": Q, "I1": I1, "I2": I2,
         "sigma": float(sig)},
    )


# ---------------------------------------------------------------------------
# CORIOLIS regime
# ---------------------------------------------------------------------------

def coriolis_roots(H: float, L3: float, w: float):
    """Roots A+/- of -w^2 y^2 + b y + c with b = 2w^2-2H-2wL3,
    c = 2H+2wL3-L3^2-w^2; the turning values of cos^2(theta)."""
    if w == 0.0:
        raise DomainError("coriolis_roots: omega must be nonzero")
    disc = (H + w * L3) ** 2 - (L3 * w) ** 2
    if disc < 0.0:
        raise DomainError("coriolis_roots: negative discriminant")
    root = math.sqrt(disc)
    a_plus = (w * w - (H + w * L3) + root) / (w * w)
    a_minus = (w * w - (H + w * L3) - root) / (w * w)
    return a_plus, a_minus


def _coriolis_phase_params(a_plus, a_minus):
    """Modulus bookkeeping for the P/N phases.

    Returns (m, famp, alpha2_eff, scaleF, note) where the elliptic phase is
    Y = F(arcsin(famp(x^2)), m), the P contribution is scaleF*Y and the N
    kernel characteristic is alpha2_eff.  For A- < 0 the direct modulus
    exceeds 1 and everything is rerouted through the reciprocal modulus.
    """
    k2 = (a_plus - a_minus) / a_plus
    if k2 <= 1.0:
        m = math.sqrt(k2)
        alpha2 = (a_plus - a_minus) / (a_plus - 1.0)

        def famp(x2):
            return np.sqrt(np.clip((a_plus - x2) / (a_plus - a_minus), 0.0, 1.0))

        return m, famp, alpha2, 1.0, "direct"
    m = math.sqrt(1.0 / k2)  # = sqrt(A+/(A+-A-)) < 1
    alpha2 = a_plus / (a_plus - 1.0)

    def famp(x2):
        return np.sqrt(np.clip((a_plus - x2) / a_plus, 0.0, 1.0))

    return m, famp, alpha2, m, "reciprocal_modulus"


def coriolis_integrals(s, omega, sign_branch: int = 1) -> InvariantSet:
    """CORIOLIS-regime integrals H, L3, A+, A-, k, P, N at a state.

    H is the omega=0 kinetic energy, L3 keeps its omega dependence.  The
    elliptic modulus k = sqrt((A+-A-)/A+) may exceed 1; P and N are then
    evaluated through the reciprocal-modulus forms.
    """
    t, theta, phi, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if w == 0.0:
        raise DomainError("coriolis_integrals: omega must be nonzero")
    sH = math.sin(theta)
    H = 0.5 * (u * u + (v * sH) ** 2)
    L3 = sH * sH * (v + w)
    if H <= 0.0:
        raise DomainError("coriolis_integrals: H must be positive")
    a_plus, a_minus = coriolis_roots(H, L3, w)
    if a_plus <= 0.0:
        raise DomainError("coriolis_integrals: A+ <= 0, motion not real")
    k = math.sqrt((a_plus - a_minus) / a_plus)
    m, famp, alpha2, scaleF, _ = _coriolis_phase_params(a_plus, a_minus)
    x2 = math.cos(theta) ** 2
    amp = math.asin(float(famp(x2)))
    Y = float(ek._f_direct(amp, m))
    sgn = 1 if sign_branch >= 0 else -1
    P = sgn * math.sqrt(a_plus) * w * t + scaleF * Y
    coefN = L3 / (w * (1.0 - a_plus) * math.sqrt(a_plus))
    N = phi + w * t - coefN * scaleF * float(ek.pi_bf(Y, alpha2, m))
    return InvariantSet(
        Regime.CORIOLIS,
        {"H": H, "L3": L3, "A_plus": a_plus, "A_minus": a_minus, "k": k,
         "P": P, "N": N},
    )


# ---------------------------------------------------------------------------
# RAPID regime (and its physical-velocity variant)
# ---------------------------------------------------------------------------

def _rapid_phase(x, k):
    """Principal elliptic phase Y and modulus m for the rapid-regime
    theta motion, branch chosen by the sign of k = 2 I1 / omega^2."""
    if k > 0.0:
        m = 1.0 / math.sqrt(1.0 + k)
        amp = np.arcsin(np.sqrt(np.clip((1.0 + k) * x * x / (k + x * x), 0.0, 1.0)))
        rate_scale = math.sqrt(1.0 + k)  # dY/dtau = -+ omega * sqrt(1+k)
        weight = 1.0 / math.sqrt(1.0 + k)  # I3 = w t + sgn * weight * Y
    else:
        if 1.0 + k <= 0.0:
            raise DomainError("rapid phase: 1 + k must be positive")
        m = math.sqrt(1.0 + k)
        amp = np.arcsin(np.sqrt(np.clip((k + x * x) / ((1.0 + k) * x * x), 0.0, 1.0)))
        rate_scale = 1.0
        weight = 1.0
    Y = ek._f_direct(amp, m)
    return Y, m, rate_scale, weight


def _rapid_x2_of_phase(Y, k, m):
    """Closed-form sin^2(theta) as a function of the elliptic phase."""
    sn, _, _ = ek.jacobi_sn_cn_dn(Y, m)
    sn2 = np.asarray(sn) ** 2
    if k > 0.0:
        return k * sn2 / (1.0 + k - sn2)
    return -k / (1.0 - (1.0 + k) * sn2)


def rapid_integrals(s, omega) -> InvariantSet:
    """RAPID-regime integrals I1, I2, I3, I4 (and k = 2 I1 / omega^2).

    I3 uses the elliptic branch matching the sign of k with x = sin(theta);
    I4 integrates the displayed sn-logarithm integrand from tau_ref = 0,
    reconstructing sin^2(theta) along the closed-form motion anchored at
    the queried state.
    """
    t, theta, phi, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if w == 0.0:
        raise DomainError("rapid_integrals: omega must be nonzero")
    x = math.sin(theta)
    if x <= 0.0:
        raise DomainError("rapid_integrals: sin(theta) must be positive")
    I1 = 0.5 * u * u - 0.5 * (w * x) ** 2
    I2 = v + 2.0 * w * math.log(x)
    k = 2.0 * I1 / (w * w)
    if 1.0 + k <= 1e-14:
        # zero-amplitude libration pinned to the equator: the elliptic
        # phase degenerates, only I1 and I2 carry information
        return InvariantSet(
            Regime.RAPID,
            {"I1": I1, "I2": I2, "I3": math.nan, "I4": math.nan, "k": k},
        )
    Y, m, rate_scale, weight = _rapid_phase(x, k)
    Y = float(Y)
    direction = math.copysign(1.0, math.cos(theta) * u) if math.cos(theta) * u != 0 else 1.0
    # dY/dt = direction * |w| * rate_scale, so this sign keeps I3 conserved
    # between folds of the principal phase.
    I3 = w * t - direction * math.copysign(1.0, w) * weight * Y
    rate = direction * abs(w) * rate_scale

    def integrand(xi):
        x2 = _rapid_x2_of_phase(Y + rate * (xi - t), k, m)
        return I2 - w * np.log(x2)

    I4 = phi - _gauss_integral(integrand, 0.0, t)
    return InvariantSet(
        Regime.RAPID,
        {"I1": I1, "I2": I2, "I3": I3, "I4": I4, "k": k},
    )


def physical_rapid_integrals(s, omega) -> InvariantSet:
    """PHYS_RAPID integrals; the state's (u, v) are the physical pair.

    I1 shares the rapid-regime theta motion (and hence I3); I2 = v + 2 w
    sin(theta); I4 integrates I2 / sin(theta(xi)) - 2w from tau_ref = 0
    along the closed-form motion.
    """
    t, theta, phi, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if w == 0.0:
        raise DomainError("physical_rapid_integrals: omega must be nonzero")
    x = math.sin(theta)
    if x <= 0.0:
        raise DomainError("physical_rapid_integrals: sin(theta) must be positive")
    I1 = 0.5 * u * u - 0.5 * (w * x) ** 2
    I2 = v + 2.0 * w * x
    k = 2.0 * I1 / (w * w)
    if 1.0 + k <= 1e-14:
        return InvariantSet(
            Regime.PHYS_RAPID,
            {"I1": I1, "I2": I2, "I3": math.nan, "I4": math.nan, "k": k},
        )
    Y, m, rate_scale, weight = _rapid_phase(x, k)
    Y = float(Y)
    direction = math.copysign(1.0, math.cos(theta) * u) if math.cos(theta) * u != 0 else 1.0
    I3 = w * t - direction * math.copysign(1.0, w) * weight * Y
    rate = direction * abs(w) * rate_scale

    def integrand(xi):
        x2 = _rapid_x2_of_phase(Y + rate * (xi - t), k, m)
        return I2 / np.sqrt(x2) - 2.0 * w

    I4 = phi - _gauss_integral(integrand, 0.0, t)
    return InvariantSet(
        Regime.PHYS_RAPID,
        {"I1": I1, "I2": I2, "I3": I3, "I4": I4, "k": k},
    )


# ---------------------------------------------------------------------------
# RAPID_CORIOLIS regime: the G-quadrature and its libration table
# ---------------------------------------------------------------------------

class RapidCoriolisLibration:
    """Libration band and phase table for the Coriolis-only rapid regime.

    The theta motion obeys (d theta/d tau)^2 = 2 R(theta) with
    R = I1 + w (w + I2 - w log sin^2) sin^2.  The phase

        G(theta) = int d theta' / sqrt(R(theta'))

    advances at sqrt(2) per unit time.  The band edges are the simple
    zeros of R bracketing the state; the Chebyshev substitution
    theta = mid - half*cos(chi) removes both square-root endpoint
    singularities, so plain Gauss quadrature applies.
    """

    def __init__(self, I1: float, I2: float, w: float, theta0: float):
        self.I1, self.I2, self.w = I1, I2, w
        if self._R(theta0) < 0.0:
            raise DomainError("state outside its own libration band")
        guard = 1e-12
        if self._R(guard) >= 0.0 or self._R(math.pi - guard) >= 0.0:
            raise DomainError(
                "no libration band: R(theta) is nonnegative at a pole "
                "(requires I1 < 0)"
            )
        # nearest sign changes on each side (R may have several bands)
        self.theta_lo = self._nearest_root(theta0, guard)
        self.theta_hi = self._nearest_root(theta0, math.pi - guard)
        self.mid = 0.5 * (self.theta_lo + self.theta_hi)
        self.half = 0.5 * (self.theta_hi - self.theta_lo)
        from scipy.interpolate import CubicSpline

        self._chi_grid = np.linspace(0.0, math.pi, 801)
        vals = self._chi_integrand(self._chi_grid)
        anti = CubicSpline(self._chi_grid, vals).antiderivative()
        self._G_of_chi = anti
        self._G_grid = anti(self._chi_grid)
        self.G_half = float(self._G_grid[-1])
        self._chi_of_G = CubicSpline(self._G_grid, self._chi_grid)

    def _R(self, theta):
        s2 = np.sin(theta) ** 2
        w = self.w
        return self.I1 + w * (w + self.I2 - w * np.log(s2)) * s2

    def _nearest_root(self, start: float, toward: float) -> float:
        """First zero of R between start (R >= 0 there) and ``toward``."""
        xs = np.linspace(start, toward, 600)
        fs = self._R(xs)
        neg = np.nonzero(fs[1:] <= 0.0)[0] + 1
        if len(neg) == 0:
            raise DomainError("libration band edge not found")
        i = int(neg[0])
        lo, hi = sorted((xs[i - 1], xs[i]))
        if self._R(lo) * self._R(hi) > 0.0:
            return xs[i - 1] if abs(self._R(xs[i - 1])) < abs(self._R(xs[i])) else xs[i]
        return brentq(self._R, lo, hi, xtol=1e-15, rtol=8.9e-16)

    def _R_prime(self, theta):
        s, c = np.sin(theta), np.cos(theta)
        w = self.w
        return 2.0 * s * c * (w * (w + self.I2) - w * w * (np.log(s * s) + 1.0))

    def _chi_integrand(self, chi):
        """1/sqrt(psi) with psi = R / ((theta_hi-theta)(theta-theta_lo));
        band-edge values by the simple-zero limit psi -> |R'| / width."""
        chi = np.asarray(chi, dtype=float)
        theta = self.mid - self.half * np.cos(chi)
        width = self.theta_hi - self.theta_lo
        quad = self.half ** 2 * np.sin(chi) ** 2
        interior = quad > 1e-12 * self.half ** 2
        psi = np.empty_like(theta)
        psi[interior] = self._R(theta[interior]) / quad[interior]
        edge = ~interior
        if np.any(edge):
            psi[edge] = np.abs(self._R_prime(theta[edge])) / width
        return 1.0 / np.sqrt(psi)

    def phase(self, theta):
        """G(theta) measured from the lower band edge (in [0, G_half])."""
        theta = np.clip(theta, self.theta_lo, self.theta_hi)
        chi = np.arccos(np.clip((self.mid - theta) / self.half, -1.0, 1.0))
        return self._G_of_chi(chi)

    def phase_from_state(self, theta, u):
        """G(theta) using u for the angle's sine.

        Near the band edges arccos((mid - theta)/half) is ill-conditioned
        and amplifies the tiny mismatch between the table's frozen band
        and a trajectory sample's own energy; sin(chi) = |u| /
        (half*sqrt(2 psi)) is exact on-trajectory and well-conditioned
        there, so the atan2 combination is uniformly accurate.
        """
        theta = np.asarray(theta, dtype=float)
        cos_chi = np.clip((self.mid - theta) / self.half, -1.0, 1.0)
        chi0 = np.arccos(cos_chi)
        psi = self._chi_integrand(chi0) ** -2.0
        sin_chi = np.abs(u) / (self.half * np.sqrt(2.0 * psi))
        chi = np.arctan2(sin_chi, cos_chi)
        return self._G_of_chi(chi)

    def theta_of_phase(self, Y):
        """theta at unwrapped phase Y (folds via the evenness of the band)."""
        Y = np.asarray(Y, dtype=float)
        r = np.mod(Y, 2.0 * self.G_half)
        g = np.where(r > self.G_half, 2.0 * self.G_half - r, r)
        chi = self._chi_of_G(g)
        return self.mid - self.half * np.cos(chi)


def rapid_coriolis_integrals(s, omega, x_ref: float = 0.5) -> InvariantSet:
    """RAPID_CORIOLIS integrals I1, I2, I3, I4 at a state.

    I3 = sqrt(2) t + G(sin theta) with G the quadrature of the radicand
    built from the state's own I1, I2 (reference at sin(theta) = x_ref
    when no trajectory context applies).  I4 integrates log sin^2 along
    the closed-form libration from tau_ref = 0.  Raises with the turning
    location when the radicand vanishes between the reference and the
    state.
    """
    t, theta, phi, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if w == 0.0:
        raise DomainError("rapid_coriolis_integrals: omega must be nonzero")
    sH = math.sin(theta)
    I1 = 0.5 * u * u - w * (v + w) * sH * sH
    I2 = v + 2.0 * w * math.log(sH)
    try:
        lib = RapidCoriolisLibration(I1, I2, w, theta)
        degenerate = lib.half < 1e-8
    except DomainError:
        degenerate = True
    if degenerate:
        return InvariantSet(
            Regime.RAPID_CORIOLIS,
            {"I1": I1, "I2": I2, "I3": math.nan, "I4": math.nan},
        )
    theta_ref = math.asin(x_ref)
    if not (lib.theta_lo <= theta_ref <= lib.theta_hi):
        # reference outside the band: the paper's antiderivative would hit
        # the turning point; anchor at the lower band edge instead.
        theta_ref = lib.theta_lo
    direction = math.copysign(1.0, u) if u != 0 else 1.0
    G = float(lib.phase(theta)) - float(lib.phase(theta_ref))
    I3 = math.sqrt(2.0) * t - direction * G
    Y0 = float(lib.phase(theta))

    def integrand(xi):
        th = lib.theta_of_phase(Y0 + direction * math.sqrt(2.0) * (xi - t))
        return np.log(np.sin(th) ** 2)

    I4 = phi + w * _gauss_integral(integrand, 0.0, t) - I2 * t
    return InvariantSet(
        Regime.RAPID_CORIOLIS,
        {"I1": I1, "I2": I2, "I3": I3, "I4": I4},
    )


# ---------------------------------------------------------------------------
# Appendix mechanics
# ---------------------------------------------------------------------------

def mechanics(s, omega) -> MechanicsSet:
    """Lagrangian, conjugate momenta, Jacobi integral and Hamiltonian of
    the slow-rotation characteristic system; asserts E = p.q' - L."""
    _, theta, _, u, v = _state_tuple(s)
    w = _omega_value(omega)
    if not 0.0 < theta < math.pi:
        raise DomainError("mechanics: theta outside (0, pi)")
    s2 = math.sin(theta) ** 2
    L = 0.5 * (u * u + s2 * v * v) + w * s2 * v
    p_theta = u
    p_phi = s2 * (v + w)
    E = p_theta * u + p_phi * v - L
    Hcan = 0.5 * p_theta ** 2 + p_phi ** 2 / (2.0 * s2) - w * p_phi + 0.5 * w * w * s2
    assert abs(E - (0.5 * (u * u + s2 * v * v))) <= 1e-12 * max(1.0, abs(E))
    return MechanicsSet(p_theta=p_theta, p_phi=p_phi, E=E, Hcan=Hcan, L=L)


# ---------------------------------------------------------------------------
# Quadrature and unwrap helpers
# ---------------------------------------------------------------------------

def _gauss_integral(fn, a: float, b: float, max_panel: float = 0.05):
    """Composite Gauss-Legendre integral of a vectorized integrand."""
    if a == b:
        return 0.0
    n = max(4, int(math.ceil(abs(b - a) / max_panel)))
    edges = np.linspace(a, b, n + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    pts = mid[:, None] + half * _GL_NODES[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    return float(np.sum(vals @ _GL_WEIGHTS) * half)


def _cumulative_gauss(fn, ts):
    """Cumulative integral of ``fn`` at the sample times ``ts``."""
    ts = np.asarray(ts, dtype=float)
    mid = 0.5 * (ts[:-1] + ts[1:])
    half = 0.5 * np.diff(ts)
    pts = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    vals = fn(pts.ravel()).reshape(pts.shape)
    segs = (vals @ _GL_WEIGHTS) * half
    return np.concatenate([[0.0], np.cumsum(segs)])


def unwrap_fold(y_principal, quarter, leg_sign):
    """Unwrap a folded phase series into a monotone phase.

    ``y_principal`` holds per-sample principal phases in [0, quarter]; the
    underlying phase advances monotonically and the principal value
    reflects at 0 and quarter.  ``leg_sign`` is the per-sample sign of
    d(y_principal)/dt, observable from the trajectory state; samples where
    it matches its initial value sit on the ascending sheet
    (Y = 2n*quarter + y), the others on the descending sheet
    (Y = 2n*quarter - y).  The remaining 2*quarter ambiguity is resolved
    by continuity, which only requires sample spacing below a
    quarter-period.
    """
    y = np.asarray(y_principal, dtype=float)
    q = np.broadcast_to(np.asarray(quarter, dtype=float), y.shape).astype(float)
    leg = np.asarray(leg_sign, dtype=float)
    ref = leg[np.nonzero(leg)[0][0]] if np.any(leg) else 1.0
    ascending = np.where(leg == 0.0, True, leg * ref > 0)
    out = np.empty_like(y)
    out[0] = y[0]
    for i in range(1, len(y)):
        qi = q[i]
        base = y[i] if ascending[i] else -y[i]
        n = round((out[i - 1] - base) / (2.0 * qi))
        out[i] = 2.0 * n * qi + base
    return out


def _atan_tan_cont(K, x):
    """Continuous extension of arctan(K * tan(x)) across tangent poles."""
    K = np.asarray(K, dtype=float)
    x = np.asarray(x, dtype=float)
    n = np.round(x / math.pi)
    r = x - n * math.pi
    return np.arctan(K * np.tan(r)) + n * math.pi * np.sign(K)


# ---------------------------------------------------------------------------
# Trajectory-aware series
# ---------------------------------------------------------------------------

def trajectory_series(regime: Regime, omega, t, theta, phi_unwrapped, u, v) -> dict:
    """Continuous invariant series along a sampled trajectory.

    Sampling must be dense enough that elliptic phases advance by less
    than half a quarter-period between samples (the integrator wrapper
    takes care of this).  Returns a dict of equal-length arrays.
    """
    w = _omega_value(omega)
    t = np.asarray(t, dtype=float)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi_unwrapped, dtype=float)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if regime is Regime.FULL:
        return _series_full(w, t, theta, phi, u, v)
    if regime is Regime.CORIOLIS:
        return _series_coriolis(w, t, theta, phi, u, v)
    if regime is Regime.RAPID:
        return _series_rapid(w, t, theta, phi, u, v, physical=False)
    if regime is Regime.PHYS_RAPID:
        return _series_rapid(w, t, theta, phi, u, v, physical=True)
    if regime is Regime.RAPID_CORIOLIS:
        return _series_rapid_coriolis(w, t, theta, phi, u, v)
    raise ValueError(f"no invariant set for regime {regime}")


def _series_full(w, t, theta, phi, u, v):
    s, c = np.sin(theta), np.cos(theta)
    L1, L2, L3, H = _full_algebraic(t, theta, phi, u, v, w)
    twoH = 2.0 * H
    rt = np.sqrt(twoH)
    sigma0 = 1.0 if u[0] >= 0 else -1.0
    K2 = np.clip(L3 * L3 / twoH, 0.0, 1.0)
    one_m = np.sqrt(np.maximum(1.0 - K2, 1e-300))
    sin_eta = np.clip(c / one_m, -1.0, 1.0)
    cos_eta = sigma0 * u * s / (rt * one_m)
    eta = np.unwrap(np.arctan2(sin_eta, cos_eta))
    I1 = t + sigma0 * eta / rt
    Ks = L3 / rt
    termA = _atan_tan_cont(Ks, sigma0 * eta)
    termB = _atan_tan_cont(sigma0 * Ks, rt * t + sigma0 * eta)
    I2 = phi + w * t + termA - termB
    return {"L1": L1, "L2": L2, "L3": L3, "H": H, "I1": I1, "I2": I2}


def _series_coriolis(w, t, theta, phi, u, v):
    s = np.sin(theta)
    H = 0.5 * (u * u + (v * s) ** 2)
    L3 = s * s * (v + w)
    disc = np.sqrt((H + w * L3) ** 2 - (L3 * w) ** 2)
    a_plus = (w * w - (H + w * L3) + disc) / (w * w)
    a_minus = (w * w - (H + w * L3) - disc) / (w * w)
    x2 = np.cos(theta) ** 2

    # Branch fixed by the initial sample; A- is conserved so this is global.
    reciprocal = (a_plus[0] - a_minus[0]) / a_plus[0] > 1.0
    if reciprocal:
        amp = np.arcsin(np.sqrt(np.clip((a_plus - x2) / a_plus, 0.0, 1.0)))
        m = np.sqrt(a_plus / (a_plus - a_minus))
        alpha2 = a_plus / (a_plus - 1.0)
        scaleF = m
    else:
        amp = np.arcsin(np.sqrt(np.clip((a_plus - x2) / (a_plus - a_minus), 0.0, 1.0)))
        m = np.sqrt((a_plus - a_minus) / a_plus)
        alpha2 = (a_plus - a_minus) / (a_plus - 1.0)
        scaleF = np.ones_like(m)

    Yp = ek._f_direct(amp, m)
    quarter = ek.complete_k(m)
    # amp grows when x^2 = cos^2 shrinks: d(amp)/dt has the sign of cos*u
    leg = np.sign(np.cos(theta) * u)
    Y = unwrap_fold(Yp, quarter, leg)
    lead = np.sqrt(a_plus) * w * t
    # Sign branch chosen so P starts flat (one discrete bit, then measured).
    F_term = scaleF * Y
    sgn = -1.0 if len(t) > 1 and (F_term[1] - F_term[0]) * (lead[1] - lead[0]) > 0 else 1.0
    P = sgn * lead + F_term

    # The Pi kernel needs a phase advancing as + sqrt(A+) w tau; -sgn*Y does
    # (and sn^2 is even, so the kernel value is insensitive to the flip).
    pi_vals = ek.pi_bf(-sgn * Y, alpha2, m)
    coefN = L3 / (w * (1.0 - a_plus) * np.sqrt(a_plus))
    N = phi + w * t - coefN * scaleF * pi_vals
    return {"H": H, "L3": L3, "P": P, "N": N,
            "A_plus": a_plus, "A_minus": a_minus}


def _series_rapid(w, t, theta, phi, u, v, physical: bool):
    x = np.sin(theta)
    I1 = 0.5 * u * u - 0.5 * (w * x) ** 2
    if physical:
        I2 = v + 2.0 * w * x
    else:
        I2 = v + 2.0 * w * np.log(x)
    k_series = 2.0 * I1 / (w * w)
    k0 = float(k_series[0])
    if k0 > 0.0:
        m0 = 1.0 / math.sqrt(1.0 + k0)
        rate_scale = math.sqrt(1.0 + k0)
        weight = 1.0 / math.sqrt(1.0 + k0)
        # k + x^2 = (u/w)^2 identically, which avoids the cancellation the
        # subtraction form suffers near turning samples
        amp = np.arcsin(np.sqrt(np.clip(
            (1.0 + k_series) * (w * x / u) ** 2, 0.0, 1.0)))
    else:
        if 1.0 + k0 <= 0.0:
            raise DomainError("rapid series: 1 + k must be positive")
        m0 = math.sqrt(1.0 + k0)
        rate_scale = 1.0
        weight = 1.0
        amp = np.arcsin(np.sqrt(np.clip(
            (u / (w * x)) ** 2 / (1.0 + k_series), 0.0, 1.0)))
    Yp = ek._f_direct(amp, m0)
    quarter = ek.complete_k(m0)
    # both branch amplitudes grow with x = sin(theta)
    leg = np.sign(np.cos(theta) * u)
    Y = unwrap_fold(Yp, np.full_like(Yp, quarter), leg)
    lead = w * t
    sgn = -1.0 if len(t) > 1 and (Y[1] - Y[0]) * (lead[1] - lead[0]) > 0 else 1.0
    I3 = lead + sgn * weight * Y

    # I4 from tau_ref = 0 along the closed-form motion anchored at sample 0.
    # I3 constancy forces dY/dt = -sgn * w / weight = -sgn * w * rate_scale.
    rate = -sgn * w * rate_scale
    Y0, t0 = Y[0], t[0]
    I2_0 = float(I2[0])

    if physical:
        def integrand(xi):
            x2 = _rapid_x2_of_phase(Y0 + rate * (xi - t0), k0, m0)
            return I2_0 / np.sqrt(x2) - 2.0 * w
    else:
        def integrand(xi):
            x2 = _rapid_x2_of_phase(Y0 + rate * (xi - t0), k0, m0)
            return I2_0 - w * np.log(x2)

    cum = _cumulative_gauss(integrand, t)
    offset = _gauss_integral(integrand, 0.0, float(t0)) if t0 != 0.0 else 0.0
    I4 = phi - (offset + cum)
    return {"I1": I1, "I2": I2, "I3": I3, "I4": I4}


def _series_rapid_coriolis(w, t, theta, phi, u, v):
    s = np.sin(theta)
    I1 = 0.5 * u * u - w * (v + w) * s * s
    I2 = v + 2.0 * w * np.log(s)
    lib = RapidCoriolisLibration(float(I1[0]), float(I2[0]), w, float(theta[0]))
    Gp = lib.phase_from_state(theta, u)
    Y = unwrap_fold(Gp, np.full_like(Gp, lib.G_half), np.sign(u))
    lead = math.sqrt(2.0) * t
    sgn = -1.0 if len(t) > 1 and (Y[1] - Y[0]) * (lead[1] - lead[0]) > 0 else 1.0
    I3 = lead + sgn * Y

    rate = -sgn * math.sqrt(2.0)
    Y0, t0 = Y[0], t[0]

    def integrand(xi):
        th = lib.theta_of_phase(Y0 + rate * (xi - t0))
        return np.log(np.sin(th) ** 2)

    cum = _cumulative_gauss(integrand, t)
    offset = _gauss_integral(integrand, 0.0, float(t0)) if t0 != 0.0 else 0.0
    I4 = phi + w * (offset + cum) - I2 * t
    return {"I1": I1, "I2": I2, "I3": I3, "I4": I4}
