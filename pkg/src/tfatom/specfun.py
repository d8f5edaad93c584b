"""Spherical Bessel functions and the zero-energy basis of the pure tail.

The zero-energy radial equation in the inverse-quartic far field,

    f''(r) = [l(l+1)/r^2 - C r^(-4)] f(r),

is solved exactly by F(r) = sqrt(r) J_{-(2l+1)/2}(a/r) and
G(r) = sqrt(r) Y_{-(2l+1)/2}(a/r) with a = sqrt(C).  Through the
half-integer connection formulas

    J_{-(l+1/2)}(z) = (-1)^(l+1) sqrt(2z/pi) y_l(z),
    Y_{-(l+1/2)}(z) = (-1)^l     sqrt(2z/pi) j_l(z),

these reduce to elementary spherical Bessel functions of argument a/r:

    F(r) = (-1)^(l+1) sqrt(2a/pi) y_l(a/r),
    G(r) = (-1)^l     sqrt(2a/pi) j_l(a/r),

with the constant Wronskian F G' - F' G = -2/pi.  The signs are kept
exactly as written: boundary angles are compared modulo pi, which absorbs
an overall sign but not an F/G swap.

Only the half-integer orders needed by the quartic tail are implemented;
fractional orders for other tail exponents are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "spherical_j",
    "spherical_y",
    "spherical_jy_derivative",
    "BasisPair",
    "basis_eval",
    "basis_wronskian",
    "limit_domain_function",
]


def _as_positive_array(z, name):
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0.0):
        raise ValueError(f"{name} requires z > 0")
    return z


def _spherical_jn_upward(ell, z, j0, j1):
    if ell == 0:
        return j0
    if ell == 1:
        return j1
    jm, jc = j0, j1
    for k in range(1, ell):
        jm, jc = jc, (2 * k + 1) / z * jc - jm
    return jc


def spherical_j(ell: int, z):
    """Spherical Bessel j_l(z), z > 0.

    Closed forms for l <= 2; upward recurrence when z dominates l,
    downward (Miller) recurrence otherwise since upward is unstable for
    z < l.
    """
    if ell < 0:
        raise ValueError("ell must be a non-negative integer")
    z = _as_positive_array(z, "spherical_j")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    for i, zi in enumerate(z):
        out[i] = _spherical_j_scalar(ell, float(zi))
    return float(out[0]) if scalar else out


def _spherical_j_series(ell, z):
    # ascending series; the closed forms cancel catastrophically for small z
    term = 1.0
    for k in range(1, ell + 1):
        term *= z / (2 * k + 1)
    acc = term
    m = 1
    factor = 1.0
    while True:
        factor *= -0.5 * z * z / (m * (2 * ell + 2 * m + 1))
        acc += term * factor
        if abs(term * factor) < 1e-18 * abs(acc) + 1e-300:
            return acc
        m += 1


def _spherical_j_scalar(ell, z):
    if z < 0.6:
        return _spherical_j_series(ell, z)
    sin_z, cos_z = math.sin(z), math.cos(z)
    j0 = sin_z / z
    if ell == 0:
        return j0
    j1 = sin_z / z**2 - cos_z / z
    if ell == 1:
        return j1
    if ell == 2:
        return (3.0 / z**3 - 1.0 / z) * sin_z - 3.0 / z**2 * cos_z
    if z >= ell + 0.5:
        return _spherical_jn_upward(ell, z, j0, j1)
    # downward recurrence, normalized against j_0 or j_1
    start = ell + int(math.sqrt(40.0 * ell)) + 12
    jp, jc = 0.0, 1e-250
    vals = {}
    for k in range(start, 0, -1):
        jm = (2 * k + 1) / z * jc - jp
        jp, jc = jc, jm
        if k - 1 in (ell, 1, 0):
            vals[k - 1] = jm
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            vals = {key: v * 1e-250 for key, v in vals.items()}
    if abs(j0) >= abs(j1):
        scale = j0 / vals[0]
    else:
        scale = j1 / vals[1]
    return vals[ell] * scale


def spherical_y(ell: int, z):
    """Spherical Bessel y_l(z), z > 0; upward recurrence is stable."""
    if ell < 0:
        raise ValueError("ell must be a non-negative integer")
    z = _as_positive_array(z, "spherical_y")
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    y0 = -np.cos(z) / z
    if ell == 0:
        return float(y0[0]) if scalar else y0
    y1 = -np.cos(z) / z**2 - np.sin(z) / z
    if ell == 1:
        return float(y1[0]) if scalar else y1
    ym, yc = y0, y1
    for k in range(1, ell):
        ym, yc = yc, (2 * k + 1) / z * yc - ym
    return float(yc[0]) if scalar else yc


def spherical_jy_derivative(kind: str, ell: int, z):
    """d/dz of j_l or y_l via f_l' = f_(l-1) - (l+1)/z f_l."""
    fn = spherical_j if kind == "j" else spherical_y
    z = np.asarray(z, dtype=float)
    if ell == 0:
        return -fn(1, z)
    return fn(ell - 1, z) - (ell + 1) / z * fn(ell, z)


@dataclass(frozen=True)
class BasisPair:
    """Solution basis (F, G) of f'' = [l(l+1)/r^2 - a^2 r^(-4)] f.

    ``convention`` records the combination of J/Y of order -(2l+1)/2 that
    defines F and G, including signs.
    """

    ell: int
    a: float
    convention: str = (
        "F = sqrt(r) J_(-(2l+1)/2)(a/r) = (-1)^(l+1) sqrt(2a/pi) y_l(a/r); "
        "G = sqrt(r) Y_(-(2l+1)/2)(a/r) = (-1)^l sqrt(2a/pi) j_l(a/r)"
    )

    def __post_init__(self):
        if self.ell < 0 or self.ell != int(self.ell):
            raise ValueError("ell must be a non-negative integer")
        if self.a <= 0.0:
            raise ValueError("tail strength a must be positive")


def basis_eval(pair: BasisPair, r):
    """Evaluate (F, G, F', G') at radius r > 0; derivatives are analytic."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("basis_eval requires r > 0")
    ell, a = pair.ell, pair.a
    z = a / r
    sign = -1.0 if ell % 2 == 0 else 1.0  # (-1)^(l+1)
    amp = math.sqrt(2.0 * a / math.pi)
    jl = spherical_j(ell, z)
    yl = spherical_y(ell, z)
    jp = spherical_jy_derivative("j", ell, z)
    yp = spherical_jy_derivative("y", ell, z)
    dz = -a / r**2
    F = sign * amp * yl
    G = -sign * amp * jl
    Fp = sign * amp * yp * dz
    Gp = -sign * amp * jp * dz
    return F, G, Fp, Gp


def basis_wronskian(pair: BasisPair, r):
    """F G' - F' G at r; identically -2/pi for the exact basis."""
    F, G, Fp, Gp = basis_eval(pair, r)
    return F * Gp - Fp * G


def limit_domain_function(tau: float, ell: int, pair: BasisPair, r):
    """Boundary-condition function of the limiting operator at angle tau.

    Evaluates sin(tau pi + l pi/2 + pi/4) j_l(a/r)
            - cos(tau pi + l pi/2 + pi/4) y_l(a/r),
    a zero-energy solution of the l-channel equation in the pure tail.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("limit_domain_function requires r > 0")
    ang = tau * math.pi + ell * math.pi / 2.0 + math.pi / 4.0
    z = pair.a / r
    return math.sin(ang) * spherical_j(ell, z) - math.cos(ang) * spherical_y(ell, z)
