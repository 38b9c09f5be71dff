"""Self-contained elliptic kernel: Carlson symmetric integrals, Legendre
incomplete integrals of the first/second/third kind, Jacobi sn/cn/dn.

All Legendre-form integrals are evaluated through the Carlson symmetric
forms (duplication iteration), which gives uniform accuracy across moduli.
Moduli k > 1 are rerouted through the reciprocal-modulus identity

    k * F(phi, k) = F(psi, 1/k),   sin(psi) = k * sin(phi),

valid while k*sin(phi) < 1; results carry a ``branch_note`` recording the
reroute.  Everything here is pure and reentrant; most entry points accept
scalars or numpy arrays (broadcasting applies).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EllipticDomainError",
    "EllipticEval",
    "carlson_rf",
    "carlson_rc",
    "carlson_rd",
    "carlson_rj",
    "ellint_f",
    "ellint_e",
    "ellint_pi",
    "complete_k",
    "complete_e",
    "complete_pi",
    "jacobi_sn_cn_dn",
    "reciprocal_modulus",
    "f_amplitude_ext",
    "e_amplitude_ext",
    "pi_bf",
    "df_dk",
]

_HALF_PI = math.pi / 2.0


class EllipticDomainError(ValueError):
    """Raised when elliptic-integral arguments leave the real domain."""


@dataclass(frozen=True)
class EllipticEval:
    """Value of an elliptic quantity plus modulus bookkeeping.

    ``branch_note`` is ``"reciprocal_modulus"`` when a modulus k > 1 was
    rerouted through k*F(phi,k) = F(psi,1/k), ``"direct"`` otherwise.
    """

    value: float
    modulus_k: float
    branch_note: str = "direct"


# ---------------------------------------------------------------------------
# Carlson symmetric forms (duplication algorithm, Carlson 1994 / DLMF 19.36)
# ---------------------------------------------------------------------------

def _as_arrays(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    return [a.copy() for a in arrs]


def _maybe_scalar(value, *inputs):
    if all(np.isscalar(a) or np.asarray(a).ndim == 0 for a in inputs):
        return float(value)
    return value


def carlson_rf(x, y, z):
    """Carlson symmetric integral R_F(x, y, z).

    Arguments must be nonnegative with at most one of them zero; symmetric
    under permutation.  Relative accuracy ~1e-15 (duplication + 7th-order
    Taylor tail).
    """
    x0, y0, z0 = x, y, z
    x, y, z = _as_arrays(x, y, z)
    if np.any(x < 0) or np.any(y < 0) or np.any(z < 0):
        raise EllipticDomainError("carlson_rf: arguments must be nonnegative")
    if np.any((x == 0).astype(int) + (y == 0) + (z == 0) >= 2):
        raise EllipticDomainError("carlson_rf: at most one argument may vanish")

    A = (x + y + z) / 3.0
    Q = (3.0e-18) ** (-1.0 / 6.0) * np.maximum(
        np.abs(A - x), np.maximum(np.abs(A - y), np.abs(A - z))
    )
    scale = np.ones_like(A)
    # A_n - x_n shrinks by 4 each round, so X = 1 - x_n/A_n is exactly the
    # Carlson series variable (A0 - x0)/(4^n A_n).
    while np.any(scale * Q > np.abs(A)):
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        A = 0.25 * (A + lam)
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        scale *= 0.25

    X = 1.0 - x / A
    Y = 1.0 - y / A
    Z = -X - Y
    E2 = X * Y - Z * Z
    E3 = X * Y * Z
    series = (
        1.0
        - E2 / 10.0
        + E3 / 14.0
        + E2 * E2 / 24.0
        - 3.0 * E2 * E3 / 44.0
        - 5.0 * E2 ** 3 / 208.0
        + 3.0 * E3 * E3 / 104.0
        + E2 * E2 * E3 / 16.0
    )
    return _maybe_scalar(series / np.sqrt(A), x0, y0, z0)


def carlson_rc(x, y):
    """Degenerate case R_C(x, y) = R_F(x, y, y) for x >= 0, y > 0."""
    return carlson_rf(x, y, y)


def carlson_rd(x, y, z):
    """Carlson integral R_D(x, y, z) = R_J(x, y, z, z); z must be positive."""
    x0, y0, z0 = x, y, z
    x, y, z = _as_arrays(x, y, z)
    if np.any(x < 0) or np.any(y < 0) or np.any(z <= 0):
        raise EllipticDomainError("carlson_rd: need x,y >= 0 and z > 0")
    if np.any((x == 0) & (y == 0)):
        raise EllipticDomainError("carlson_rd: x and y cannot both vanish")

    A = (x + y + 3.0 * z) / 5.0
    Q = (0.25e-16) ** (-1.0 / 6.0) * np.maximum(
        np.abs(A - x), np.maximum(np.abs(A - y), np.abs(A - z))
    )
    acc = np.zeros_like(A)
    scale = np.ones_like(A)
    while np.any(scale * Q > np.abs(A)):
        sx, sy, sz = np.sqrt(x), np.sqrt(y), np.sqrt(z)
        lam = sx * sy + sy * sz + sz * sx
        acc += scale / (sz * (z + lam))
        A = 0.25 * (A + lam)
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        scale *= 0.25

    X = 1.0 - x / A
    Y = 1.0 - y / A
    Z = -(X + Y) / 3.0
    E2 = X * Y - 6.0 * Z * Z
    E3 = (3.0 * X * Y - 8.0 * Z * Z) * Z
    E4 = 3.0 * (X * Y - Z * Z) * Z * Z
    E5 = X * Y * Z ** 3
    series = (
        1.0
        - 3.0 * E2 / 14.0
        + E3 / 6.0
        + 9.0 * E2 * E2 / 88.0
        - 3.0 * E4 / 22.0
        - 9.0 * E2 * E3 / 52.0
        + 3.0 * E5 / 26.0
    )
    return _maybe_scalar(scale * series / (A * np.sqrt(A)) + 3.0 * acc, x0, y0, z0)


def carlson_rj(x, y, z, p):
    """Carlson integral R_J(x, y, z, p) for x,y,z >= 0 (at most one zero), p > 0.

    Relative accuracy target 1e-13.
    """
    x0, y0, z0, p0 = x, y, z, p
    x, y, z, p = _as_arrays(x, y, z, p)
    if np.any(x < 0) or np.any(y < 0) or np.any(z < 0):
        raise EllipticDomainError("carlson_rj: x, y, z must be nonnegative")
    if np.any((x == 0).astype(int) + (y == 0) + (z == 0) >= 2):
        raise EllipticDomainError("carlson_rj: at most one of x,y,z may vanish")
    if np.any(p <= 0):
        raise EllipticDomainError("carlson_rj: p must be positive")

    A = (x + y + z + 2.0 * p) / 5.0
    delta = (p - x) * (p - y) * (p - z)
    Q = (0.25e-16) ** (-1.0 / 6.0) * np.maximum(
        np.maximum(np.abs(A - x), np.abs(A - y)),
        np.maximum(np.abs(A - z), np.abs(A - p)),
    )
    acc = np.zeros_like(A)
    scale = np.ones_like(A)
    while np.any(scale * Q > np.abs(A)):
        sx, sy, sz, sp = np.sqrt(x), np.sqrt(y), np.sqrt(z), np.sqrt(p)
        lam = sx * sy + sy * sz + sz * sx
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = (scale ** 3) * delta / (d * d)
        acc += scale * _rc_series(1.0, 1.0 + e) / d
        A = 0.25 * (A + lam)
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        p = 0.25 * (p + lam)
        scale *= 0.25

    X = 1.0 - x / A
    Y = 1.0 - y / A
    Z = 1.0 - z / A
    P = -(X + Y + Z) / 2.0
    E2 = X * Y + X * Z + Y * Z - 3.0 * P * P
    E3 = X * Y * Z + 2.0 * E2 * P + 4.0 * P ** 3
    E4 = (2.0 * X * Y * Z + E2 * P + 3.0 * P ** 3) * P
    E5 = X * Y * Z * P * P
    series = (
        1.0
        - 3.0 * E2 / 14.0
        + E3 / 6.0
        + 9.0 * E2 * E2 / 88.0
        - 3.0 * E4 / 22.0
        - 9.0 * E2 * E3 / 52.0
        + 3.0 * E5 / 26.0
    )
    return _maybe_scalar(
        scale * series / (A * np.sqrt(A)) + 6.0 * acc, x0, y0, z0, p0
    )


def _rc_series(x, y):
    """R_C(x, y) for y > 0, vectorized; used inside the R_J duplication."""
    x = np.asarray(x, dtype=float) * np.ones_like(np.asarray(y, dtype=float))
    y = np.asarray(y, dtype=float) * np.ones_like(x)
    A = (x + 2.0 * y) / 3.0
    s = (y - A) / A
    while np.any(np.abs(s) > 1e-4):
        lam = 2.0 * np.sqrt(x) * np.sqrt(y) + y
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        A = (x + 2.0 * y) / 3.0
        s = (y - A) / A
    poly = 1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))
    return poly / np.sqrt(A)


# ---------------------------------------------------------------------------
# Legendre forms via Carlson reductions
# ---------------------------------------------------------------------------

def _f_direct(phi, k):
    """F(phi, k) for 0 <= phi <= pi/2 and 0 <= k <= 1 via R_F (vectorized)."""
    phi = np.asarray(phi, dtype=float)
    k = np.asarray(k, dtype=float)
    s = np.sin(phi)
    c2 = np.cos(phi) ** 2
    q = 1.0 - (k * s) ** 2
    return s * carlson_rf(c2, q, np.ones_like(q + phi))


def _e_direct(phi, k):
    """E(phi, k) for 0 <= phi <= pi/2 and 0 <= k <= 1 (vectorized)."""
    phi = np.asarray(phi, dtype=float)
    k = np.asarray(k, dtype=float)
    s = np.sin(phi)
    c2 = np.cos(phi) ** 2
    q = 1.0 - (k * s) ** 2
    one = np.ones_like(q + phi)
    out = s * carlson_rf(c2, q, one)
    mask = (k > 0) & (s > 0)
    if np.any(mask):
        corr = (np.asarray(k * k * s ** 3) / 3.0) * carlson_rd(c2, q, one)
        out = out - np.where(mask, corr, 0.0)
    return out


def _pi_direct(phi, alpha2, k):
    """Pi(phi, alpha2, k) for 0 <= phi <= pi/2, 0 <= k <= 1 (vectorized)."""
    phi = np.asarray(phi, dtype=float)
    k = np.asarray(k, dtype=float)
    alpha2 = np.asarray(alpha2, dtype=float)
    s = np.sin(phi)
    c2 = np.cos(phi) ** 2
    q = 1.0 - (k * s) ** 2
    r = 1.0 - alpha2 * s * s
    one = np.ones_like(q + phi + r)
    out = s * carlson_rf(c2, q, one)
    nonzero = np.asarray(alpha2 * s ** 3 != 0.0)
    if np.any(nonzero):
        corr = (np.asarray(alpha2) * s ** 3 / 3.0) * carlson_rj(c2, q, one, r)
        out = out + np.where(nonzero, corr, 0.0)
    return out


def _check_phi_k(phi, k):
    if not 0.0 <= phi <= _HALF_PI + 1e-12:
        raise EllipticDomainError(f"amplitude phi={phi} must lie in [0, pi/2]")
    if k < 0.0:
        raise EllipticDomainError("modulus k must be nonnegative")
    if k * math.sin(phi) >= 1.0 and k > 1.0:
        raise EllipticDomainError(
            f"k*sin(phi) = {k * math.sin(phi):.6g} >= 1: integral not real"
        )
    if k >= 1.0 and phi >= _HALF_PI:
        raise EllipticDomainError("F(pi/2, k>=1) diverges")


def ellint_f(phi: float, k: float) -> EllipticEval:
    """Incomplete elliptic integral of the first kind F(phi, k).

    For k > 1 (with k*sin(phi) < 1) the value is computed through the
    reciprocal-modulus transformation and the returned ``branch_note`` says
    so.  Raises :class:`EllipticDomainError` when k*sin(phi) >= 1.
    """
    _check_phi_k(phi, k)
    if k <= 1.0:
        return EllipticEval(float(_f_direct(phi, k)), k, "direct")
    psi = math.asin(k * math.sin(phi))
    value = float(_f_direct(psi, 1.0 / k)) / k
    return EllipticEval(value, k, "reciprocal_modulus")


def ellint_e(phi: float, k: float) -> EllipticEval:
    """Incomplete elliptic integral of the second kind E(phi, k), k <= 1."""
    if k < 0 or k > 1:
        raise EllipticDomainError("ellint_e: modulus must lie in [0, 1]")
    if not 0.0 <= phi <= _HALF_PI + 1e-12:
        raise EllipticDomainError("ellint_e: amplitude must lie in [0, pi/2]")
    return EllipticEval(float(_e_direct(phi, k)), k, "direct")


def ellint_pi(phi: float, alpha2: float, k: float) -> EllipticEval:
    """Incomplete elliptic integral of the third kind Pi(phi, alpha2, k).

    Pi(phi, alpha2, k) = int_0^phi dx / ((1 - alpha2 sin^2 x) sqrt(1 - k^2 sin^2 x)).

    Handles circular characteristics alpha2 < 0.  Raises when the integrand
    pole 1 - alpha2 sin^2 x = 0 is crossed on the path or when the modulus
    root is crossed.
    """
    _check_phi_k(phi, k)
    if alpha2 * math.sin(phi) ** 2 >= 1.0:
        raise EllipticDomainError("ellint_pi: characteristic pole crossed on path")
    if k <= 1.0:
        return EllipticEval(float(_pi_direct(phi, alpha2, k)), k, "direct")
    # sin(x') = k sin(x) maps the integral to modulus 1/k and characteristic
    # alpha2/k^2, scaled by 1/k.
    psi = math.asin(k * math.sin(phi))
    value = float(_pi_direct(psi, alpha2 / k ** 2, 1.0 / k)) / k
    return EllipticEval(value, k, "reciprocal_modulus")


def complete_k(k):
    """Complete elliptic integral K(k) = F(pi/2, k) for 0 <= k < 1."""
    k = np.asarray(k, dtype=float)
    if np.any((k < 0) | (k >= 1)):
        raise EllipticDomainError("complete_k: modulus must lie in [0, 1)")
    one = np.ones_like(k)
    return _maybe_scalar(carlson_rf(np.zeros_like(k), 1.0 - k * k, one), k)


def complete_e(k):
    """Complete elliptic integral E(k) for 0 <= k < 1."""
    k = np.asarray(k, dtype=float)
    if np.any((k < 0) | (k >= 1)):
        raise EllipticDomainError("complete_e: modulus must lie in [0, 1)")
    zero = np.zeros_like(k)
    one = np.ones_like(k)
    val = carlson_rf(zero, 1.0 - k * k, one) - (k * k / 3.0) * carlson_rd(
        zero, 1.0 - k * k, one
    )
    return _maybe_scalar(val, k)


def complete_pi(alpha2, k):
    """Complete third-kind integral Pi(alpha2, k) for alpha2 < 1, 0 <= k < 1."""
    k = np.asarray(k, dtype=float)
    alpha2 = np.asarray(alpha2, dtype=float)
    if np.any(alpha2 >= 1.0):
        raise EllipticDomainError("complete_pi: characteristic >= 1 (pole on path)")
    zero = np.zeros_like(k + alpha2)
    one = np.ones_like(zero)
    val = carlson_rf(zero, 1.0 - k * k + zero, one) + (alpha2 / 3.0) * carlson_rj(
        zero, 1.0 - k * k + zero, one, 1.0 - alpha2 + zero
    )
    return _maybe_scalar(val, k, alpha2)


# ---------------------------------------------------------------------------
# Extended amplitudes (quasi-periodic continuation past pi/2)
# ---------------------------------------------------------------------------

def f_amplitude_ext(phi, k):
    """F(phi, k) continued to amplitudes phi in [0, pi) for 0 <= k < 1.

    Uses F(phi) = 2K - F(pi - phi) on the upper half.  Needed where the
    colatitude itself is the amplitude.  Vectorized.
    """
    phi = np.asarray(phi, dtype=float)
    kb = np.asarray(k, dtype=float)
    if np.any((kb < 0) | (kb >= 1.0)):
        raise EllipticDomainError("f_amplitude_ext: need 0 <= k < 1")
    if np.any((phi < 0) | (phi >= math.pi)):
        raise EllipticDomainError("f_amplitude_ext: amplitude must lie in [0, pi)")
    upper = phi > _HALF_PI
    base = np.where(upper, math.pi - phi, phi)
    val = _f_direct(base, kb)
    if np.any(upper):
        val = np.where(upper, 2.0 * complete_k(kb) * np.ones_like(val) - val, val)
    return _maybe_scalar(val, phi, k)


def e_amplitude_ext(phi, k):
    """E(phi, k) continued to amplitudes phi in [0, pi); companion of
    :func:`f_amplitude_ext`."""
    phi = np.asarray(phi, dtype=float)
    kb = np.asarray(k, dtype=float)
    upper = phi > _HALF_PI
    base = np.where(upper, math.pi - phi, phi)
    val = _e_direct(base, kb)
    if np.any(upper):
        val = np.where(upper, 2.0 * complete_e(kb) * np.ones_like(val) - val, val)
    return _maybe_scalar(val, phi, k)


# ---------------------------------------------------------------------------
# Jacobi elliptic functions (descending Landen / AGM)
# ---------------------------------------------------------------------------

def jacobi_sn_cn_dn(x, k):
    """Jacobi sn, cn, dn at argument ``x`` for modulus k in [0, 1].

    Descending-Landen AGM with closed-form shortcuts at the degenerate
    moduli (k < 1e-8 and 1-k < 1e-8).  Vectorized in both arguments.
    """
    xs, ks = np.broadcast_arrays(np.asarray(x, dtype=float),
                                 np.asarray(k, dtype=float))
    if np.any((ks < 0.0) | (ks > 1.0)):
        raise EllipticDomainError("jacobi_sn_cn_dn: modulus must lie in [0, 1]")
    sn = np.empty_like(xs)
    cn = np.empty_like(xs)
    dn = np.empty_like(xs)

    small = ks < 1e-8
    sn[small] = np.sin(xs[small])
    cn[small] = np.cos(xs[small])
    dn[small] = 1.0

    big = 1.0 - ks < 1e-8
    sn[big] = np.tanh(xs[big])
    cn[big] = 1.0 / np.cosh(xs[big])
    dn[big] = cn[big]

    mid = ~(small | big)
    if np.any(mid):
        xm, km = xs[mid], ks[mid]
        a = [np.ones_like(km)]
        b = [np.sqrt(1.0 - km * km)]
        c = [km.copy()]
        while np.max(np.abs(c[-1])) > 1e-17 and len(a) < 40:
            a_prev, b_prev = a[-1], b[-1]
            a.append(0.5 * (a_prev + b_prev))
            b.append(np.sqrt(a_prev * b_prev))
            c.append(0.5 * (a_prev - b_prev))
        n = len(a) - 1
        phi = (2.0 ** n) * a[n] * xm
        for m in range(n, 0, -1):
            phi = 0.5 * (phi + np.arcsin(np.clip(c[m] / a[m] * np.sin(phi), -1, 1)))
        sn[mid] = np.sin(phi)
        cn[mid] = np.cos(phi)
        dn[mid] = np.sqrt(np.maximum(1.0 - (km * sn[mid]) ** 2, 0.0))

    if np.isscalar(x) and np.isscalar(k) or xs.ndim == 0:
        return float(sn), float(cn), float(dn)
    return sn, cn, dn


def reciprocal_modulus(phi: float, k: float):
    """Apply the reciprocal-modulus map to F(phi, k) with k > 1.

    Returns ``(psi, check)`` where sin(psi) = k sin(phi) and ``check`` is
    |k*F(phi,k) - F(psi,1/k)| with both sides evaluated by adaptive
    quadrature of the defining integrals (an identity check, expected
    < 1e-10).  Domain error when k*sin(phi) >= 1.
    """
    if k <= 1.0:
        raise EllipticDomainError("reciprocal_modulus: requires k > 1")
    arg = k * math.sin(phi)
    if arg >= 1.0:
        raise EllipticDomainError("reciprocal_modulus: k*sin(phi) >= 1")
    psi = math.asin(arg)
    if phi == 0.0:
        return 0.0, 0.0
    from scipy.integrate import quad

    def integrand(m):
        return lambda t: 1.0 / math.sqrt(1.0 - (m * math.sin(t)) ** 2)

    lhs, _ = quad(integrand(k), 0.0, phi, epsabs=1e-13, epsrel=1e-13, limit=200)
    rhs, _ = quad(integrand(1.0 / k), 0.0, psi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return psi, abs(k * lhs - rhs)


# ---------------------------------------------------------------------------
# Third kind in Jacobi-argument (Byrd-Friedman) form, and dF/dk
# ---------------------------------------------------------------------------

def pi_bf(y, alpha2, k):
    """Pi(y, alpha2, k) = int_0^y dt / (1 - alpha2 sn^2(t, k)) for real y.

    ``y`` is the Jacobi argument (not the amplitude); the quasi-periodicity
    Pi(2K +/- y) = 2 Pi_complete +/- Pi(y) extends the value to arbitrary
    unwrapped phases.  Requires 0 <= k < 1 and alpha2 < 1 (no pole on the
    real path).  Vectorized in all arguments.
    """
    ys, a2, ks = np.broadcast_arrays(
        np.asarray(y, dtype=float),
        np.asarray(alpha2, dtype=float),
        np.asarray(k, dtype=float),
    )
    if np.any((ks < 0.0) | (ks >= 1.0)):
        raise EllipticDomainError("pi_bf: need 0 <= k < 1")
    if np.any(a2 >= 1.0):
        raise EllipticDomainError("pi_bf: characteristic pole on path")
    K = complete_k(ks)
    Pic = complete_pi(a2, ks)
    n = np.floor(ys / (2.0 * K))
    r = ys - 2.0 * n * K  # r in [0, 2K)
    flip = r > K
    r_base = np.where(flip, 2.0 * K - r, r)
    sn, _, _ = jacobi_sn_cn_dn(r_base, ks)
    amp = np.arcsin(np.clip(sn, -1.0, 1.0))
    inc = _pi_direct(amp, a2, ks)
    val = 2.0 * n * Pic + np.where(flip, 2.0 * Pic - inc, inc)
    return _maybe_scalar(val, y, alpha2, k)


def df_dk(phi: float, k: float) -> float:
    """Closed-form modulus derivative dF(phi,k)/dk for 0 < k < 1.

    dF/dk = (E - (1-k^2) F) / (k (1-k^2)) - k sin(phi) cos(phi)
            / ((1-k^2) sqrt(1 - k^2 sin^2 phi)),
    with amplitude extended to [0, pi) like :func:`f_amplitude_ext`.
    """
    if not 0.0 < k < 1.0:
        raise EllipticDomainError("df_dk: need 0 < k < 1")
    kp2 = 1.0 - k * k
    F = f_amplitude_ext(phi, k)
    E = e_amplitude_ext(phi, k)
    s, c = math.sin(phi), math.cos(phi)
    delta = math.sqrt(1.0 - (k * s) ** 2)
    return (E - kp2 * F) / (k * kp2) - k * s * c / (kp2 * delta)
