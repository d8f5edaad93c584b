"""Universal Thomas-Fermi profile and derived constants.

The mean-field potential of a neutral atom with nuclear charge Z (units
hbar = e = 2m = 1) scales exactly:

    Phi_Z(x) = Z^(4/3) * Phi_1(Z^(1/3) x),

so everything reduces to the charge-one potential Phi_1.  Writing
Phi_1(r) = chi(r/b) / r with b = (3 pi / 4)^(2/3) turns the radial TF
equation

    Phi'' + (2/r) Phi' = 4 pi (3 Phi / (5 c_tf))^(3/2),   c_tf = (3/5)(3 pi^2)^(2/3)

into the dimensionless universal equation

    chi'' = chi^(3/2) / sqrt(x),   chi(0) = 1,  chi(inf) = 0.

The far field of chi is the exact particular solution 144/x^3, approached
very slowly: the leading correction decays like x^(-s) with
s = (sqrt(73) - 7)/2 ~ 0.772.  A matched correction series of that form is
used beyond ``tail_switch`` so the potential stays accurate far out, which
the boundary-phase experiments need.

Solution strategy
-----------------
* origin: series chi = 1 + B x + (4/3) x^(3/2) + ... seeded at small x,
  with B = chi'(0) the shooting unknown,
* B by bisection: trajectories either cross zero (B too negative) or
  overshoot x^3 chi = 144 (B too positive),
* tail amplitude A of the correction series by shooting from far out:
  integrate backward and require the arrival at small x to be consistent
  with the origin series (value- and slope-extracted B must agree).  This
  gives a second, independent determination of chi'(0).

The final profile is series / backward-integration / tail-series, glued
C^1-continuously.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.interpolate import InterpolatedUnivariateSpline

__all__ = [
    "TfConstants",
    "UniversalChi",
    "ConvergenceError",
    "C_TF",
    "C_INFINITY",
    "B_LENGTH",
    "TAIL_EXPONENT",
    "solve_universal_chi",
    "default_chi",
    "phi1_at",
    "phi1_log_interpolator",
    "phi1_prime_at",
    "phi_Z_at",
    "classical_constant",
    "tf_residual",
    "sommerfeld_tail_error",
    "save_profile",
    "load_profile",
]

C_TF = 0.6 * (3.0 * math.pi**2) ** (2.0 / 3.0)
C_INFINITY = 81.0 * math.pi**2
B_LENGTH = (0.75 * math.pi) ** (2.0 / 3.0)
# decay exponent of the leading correction to the 144/x^3 asymptote
TAIL_EXPONENT = 0.5 * (math.sqrt(73.0) - 7.0)

_SERIES_ORDER = 40          # origin series in powers of sqrt(x)
_TAIL_ORDER = 8             # tail correction series in powers of A*x^(-s)


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve fails; carries diagnostics."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


# ----------------------------------------------------------------------
# origin series: chi = sum a_k x^(k/2), a_0 = 1, a_1 = 0, a_2 = B
# ----------------------------------------------------------------------

def _origin_series_coeffs(slope: float, order: int = _SERIES_ORDER) -> np.ndarray:
    """Half-power series coefficients of chi near x = 0 for chi'(0) = slope.

    chi'' = chi^(3/2)/sqrt(x) forces a_3 = 4/3 and determines a_k for
    k >= 3 recursively; chi^(3/2) is expanded by Miller's power rule.
    """
    a = np.zeros(order + 1)
    b = np.zeros(order + 1)  # series of chi^(3/2)
    a[0] = 1.0
    a[2] = slope
    b[0] = 1.0
    p = 1.5
    for k in range(order - 2):
        if k >= 1:
            acc = 0.0
            for j in range(1, k + 1):
                acc += ((p + 1.0) * j - k) * a[j] * b[k - j]
            b[k] = acc / k
        # match chi'' term x^((k+3)/2 - 2) against RHS term x^((k-1)/2)
        a[k + 3] = 4.0 * b[k] / ((k + 3.0) * (k + 1.0))
    return a


def _origin_series_eval(a: np.ndarray, x, derivatives: int = 1):
    """Evaluate the origin series (and derivatives) at x, scalar or array.

    Returns (chi, chi') by default, (chi, chi', chi'') with derivatives=2.
    Horner in sqrt(x).
    """
    x = np.asarray(x, dtype=float)
    sq = np.sqrt(x)
    val = np.zeros_like(x)
    der = np.zeros_like(x)
    dd = np.zeros_like(x)
    for k in range(len(a) - 1, -1, -1):
        val = val * sq + a[k]
        if k > 0:
            der = der * sq + a[k] * (0.5 * k)
        if k > 1:
            dd = dd * sq + a[k] * (0.5 * k) * (0.5 * k - 1.0)
    der = der * sq / x
    dd = dd / x
    if derivatives == 2:
        return val, der, dd
    return val, der


# ----------------------------------------------------------------------
# tail correction series: chi = (144/x^3) * (1 + sum c_k (A x^(-s))^k)
# ----------------------------------------------------------------------

def _tail_series_coeffs(order: int = _TAIL_ORDER) -> np.ndarray:
    """Universal coefficients c_k of the tail correction series (c_1 = 1).

    Plugging chi = 144 x^(-3) (1 + psi), psi = sum c_k v^k, v = A x^(-s)
    into the ODE gives  c_k [(3+ks)(4+ks) - 18] = 12 R_k  where R_k is the
    v^k coefficient of (1+psi)^(3/2) built from lower orders.  k = 1 is the
    indicial equation defining s, so c_1 is free; A carries the scale.
    """
    s = TAIL_EXPONENT
    c = np.zeros(order + 1)
    c[0] = 1.0
    c[1] = 1.0
    for k in range(2, order + 1):
        # power series of (1 + psi)^(3/2) with c_k temporarily zero
        w = np.zeros(k + 1)
        w[0] = 1.0
        p = 1.5
        for n in range(1, k + 1):
            acc = 0.0
            for j in range(1, n + 1):
                cj = c[j] if j != k else 0.0
                acc += ((p + 1.0) * j - n) * cj * w[n - j]
            w[n] = acc / n
        denom = (3.0 + k * s) * (4.0 + k * s) - 18.0
        c[k] = 12.0 * w[k] / denom
    return c


_TAIL_COEFFS = _tail_series_coeffs()


def _tail_eval(amp: float, x, coeffs: np.ndarray = _TAIL_COEFFS):
    """chi and chi' from the corrected asymptote with amplitude ``amp``."""
    x = np.asarray(x, dtype=float)
    s = TAIL_EXPONENT
    v = amp * x ** (-s)
    val = np.zeros_like(x)
    der = np.zeros_like(x)
    for k in range(len(coeffs) - 1, -1, -1):
        ck = coeffs[k]
        if ck == 0.0:
            continue
        ex = -3.0 - k * s
        term = 144.0 * ck * (amp**k) * x**ex
        val = val + term
        der = der + ex * term / x
    return val, der, v


# ----------------------------------------------------------------------
# ODE in the log variable u = ln x:  chi_uu - chi_u = e^(3u/2) chi^(3/2)
# ----------------------------------------------------------------------

def _rhs_log(u, y):
    chi = y[0]
    src = math.exp(1.5 * u) * (chi * math.sqrt(chi) if chi > 0.0 else 0.0)
    return (y[1], y[1] + src)


def _event_zero(u, y):
    return y[0]


_event_zero.terminal = True


def _event_overshoot(u, y):
    return y[0] * math.exp(3.0 * u) - 144.0


_event_overshoot.terminal = True


def _shoot_origin(slope, u0, u_end, rtol, atol):
    """Integrate from the series seed; classify the trajectory.

    Returns -1 if chi crossed zero (slope too negative), +1 if x^3 chi
    overshot 144 (too positive), 0 if unclassified by u_end.
    """
    a = _origin_series_coeffs(slope)
    x0 = math.exp(u0)
    val, der = _origin_series_eval(a, x0)
    sol = solve_ivp(
        _rhs_log,
        (u0, u_end),
        (float(val), float(x0 * der)),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=(_event_zero, _event_overshoot),
    )
    if sol.t_events[0].size:
        return -1
    if sol.t_events[1].size:
        return +1
    return 0


def _bisect_origin_slope(u0, rtol, atol, lo=-1.9, hi=-1.3, u_end=math.log(300.0)):
    """Bisection on chi'(0) between zero-crossing and overshoot trajectories."""
    flo = _shoot_origin(lo, u0, u_end, rtol, atol)
    fhi = _shoot_origin(hi, u0, u_end, rtol, atol)
    if flo != -1 or fhi != +1:
        raise ConvergenceError(
            "shooting bracket does not classify: need chi->0 crossing at the "
            "lower end and x^3 chi > 144 at the upper end",
            bracket=(lo, hi), classify=(flo, fhi),
        )
    while hi - lo > 1e-15 * abs(lo):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        cls = _shoot_origin(mid, u0, u_end, rtol, atol)
        if cls == -1:
            lo = mid
        elif cls == +1:
            hi = mid
        else:
            # unclassified this deep into the bracket: good enough
            break
    return 0.5 * (lo + hi)


def _rhs_loglog(u, y):
    # S = ln chi as a function of u = ln x:  S'' = S' - S'^2 + e^(3u/2 + S/2)
    return (y[1], y[1] - y[1] * y[1] + math.exp(1.5 * u + 0.5 * y[0]))


def _integrate_tail_inward(amp, u_far, u_stop, rtol, atol, t_eval=None):
    """Backward pass in (ln x, ln chi) variables; uniformly well scaled."""
    far_x = math.exp(u_far)
    val, der, _ = _tail_eval(amp, far_x)
    sol = solve_ivp(
        _rhs_loglog,
        (u_far, u_stop),
        (float(math.log(val)), float(far_x * der / val)),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
    )
    if not sol.success:
        raise ConvergenceError("tail-anchored integration failed", amplitude=amp)
    return sol


def _slope_from_series_value(target_val, x1):
    """B such that the origin series reproduces target_val at x1."""
    b = -1.6
    for _ in range(60):
        a = _origin_series_coeffs(b)
        val, _ = _origin_series_eval(a, x1)
        a_d = _origin_series_coeffs(b + 1e-7)
        val_d, _ = _origin_series_eval(a_d, x1)
        dv = (val_d - val) / 1e-7
        step = (target_val - val) / dv
        b += step
        if abs(step) < 1e-14:
            break
    return b


def _slope_from_series_slope(target_der, x1):
    """B such that the origin series reproduces chi'(x1) = target_der."""
    b = -1.6
    for _ in range(60):
        a = _origin_series_coeffs(b)
        _, der = _origin_series_eval(a, x1)
        a_d = _origin_series_coeffs(b + 1e-7)
        _, der_d = _origin_series_eval(a_d, x1)
        dd = (der_d - der) / 1e-7
        step = (target_der - der) / dd
        b += step
        if abs(step) < 1e-14:
            break
    return b


# ----------------------------------------------------------------------
# public data types
# ----------------------------------------------------------------------

@dataclass
class TfConstants:
    """Exact reduction constants plus the computed classical constant."""

    c_tf: float = C_TF
    c_infinity: float = C_INFINITY
    b_length: float = B_LENGTH
    d_cl: float = float("nan")


@dataclass
class UniversalChi:
    """Solved dimensionless TF profile chi on a log grid.

    ``chi``/``chi_prime`` evaluate the composite representation: origin
    series below ``series_radius``, spline of the backward-integrated
    solution in the middle, corrected asymptote beyond ``tail_switch``.
    """

    grid: np.ndarray
    values: np.ndarray
    slope_origin: float
    tail_switch: float
    series_radius: float
    tail_amplitude: float
    residual_tol: float
    quad_tol: float
    slope_origin_shooting: float = float("nan")
    tail_slope_mismatch: float = float("nan")
    _series: np.ndarray = field(default=None, repr=False)
    _spline: InterpolatedUnivariateSpline = field(default=None, repr=False)

    def __post_init__(self):
        if self._series is None:
            self._series = _origin_series_coeffs(self.slope_origin)
        if self._spline is None:
            mask = (self.grid >= 0.999 * self.series_radius) & (
                self.grid <= self.tail_switch * 1.05
            )
            self._spline = InterpolatedUnivariateSpline(
                np.log(self.grid[mask]), np.log(self.values[mask]), k=5, ext=2
            )

    def chi(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x <= 0.0):
            raise ValueError("chi requires x > 0")
        out = np.empty_like(x)
        lo = x < self.series_radius
        hi = x > self.tail_switch
        mid = ~np.logical_or(lo, hi)
        if lo.any():
            out[lo] = _origin_series_eval(self._series, x[lo])[0]
        if mid.any():
            out[mid] = np.exp(self._spline(np.log(x[mid])))
        if hi.any():
            out[hi] = _tail_eval(self.tail_amplitude, x[hi])[0]
        return out[0] if scalar else out

    def chi_prime(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        if np.any(x <= 0.0):
            raise ValueError("chi_prime requires x > 0")
        out = np.empty_like(x)
        lo = x < self.series_radius
        hi = x > self.tail_switch
        mid = ~np.logical_or(lo, hi)
        if lo.any():
            out[lo] = _origin_series_eval(self._series, x[lo])[1]
        if mid.any():
            lx = np.log(x[mid])
            out[mid] = np.exp(self._spline(lx)) * self._spline(lx, 1) / x[mid]
        if hi.any():
            out[hi] = _tail_eval(self.tail_amplitude, x[hi])[1]
        return out[0] if scalar else out

    def constants(self, quad_tol: float | None = None) -> TfConstants:
        return TfConstants(d_cl=classical_constant(self, quad_tol or self.quad_tol))


# ----------------------------------------------------------------------
# solver
# ----------------------------------------------------------------------

def solve_universal_chi(
    tolerance: float = 1e-8,
    grid: tuple[float, float, int] = (1e-6, 1e4, 6001),
    series_radius: float = 0.2,
    tail_switch: float = 3000.0,
    far_anchor: float = 30000.0,
    quad_tol: float = 1e-9,
    rtol: float = 1e-13,
    atol: float = 1e-14,
) -> UniversalChi:
    """Solve chi'' = chi^(3/2)/sqrt(x), chi(0) = 1, chi(inf) = 0.

    Parameters
    ----------
    tolerance:
        Bound the ODE residual of the returned profile must satisfy.
    grid:
        (x_min, x_max, n) log-spaced sample grid of the stored profile.
    series_radius, tail_switch:
        Switch points of the composite representation.
    far_anchor:
        Abscissa where the tail correction series seeds the backward
        integration (its truncation error is smallest there).

    Raises
    ------
    ConvergenceError
        If the shooting bracket fails to classify or the two slope
        extractions at the series junction cannot be reconciled.
    ValueError
        For grids that do not cover [1e-6, 1e4] or non-positive tolerance.
    """
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    x_min, x_max, n_grid = grid
    if x_min > 1e-6 or x_max < 1e4:
        raise ValueError("grid must cover at least [1e-6, 1e4]")
    if x_min <= 0.0:
        raise ValueError(
            "grid must start at positive x; integration cannot start at 0 "
            "(enlarge series_radius instead of shrinking the grid start)"
        )

    u_seed = math.log(min(series_radius, 1e-3))
    u_far = math.log(far_anchor)
    u_join = math.log(0.75 * series_radius)
    x_join = math.exp(u_join)

    # origin-side method: bisection on the initial slope
    slope_shoot = _bisect_origin_slope(u_seed, rtol, atol)

    # tail-side method: shoot on the correction amplitude A; require the
    # value- and slope-extracted origin slopes at the junction to agree
    def slope_gap(amp):
        sol = _integrate_tail_inward(amp, u_far, u_join, rtol, atol)
        chi1 = math.exp(sol.y[0][-1])
        chiu1 = chi1 * sol.y[1][-1]
        b_val = _slope_from_series_value(chi1, x_join)
        b_slp = _slope_from_series_slope(chiu1 / x_join, x_join)
        return b_val - b_slp, b_val

    try:
        from scipy.optimize import brentq

        tail_amplitude = brentq(lambda a: slope_gap(a)[0], -13.3, -12.6,
                                xtol=1e-12, rtol=1e-15)
    except ValueError as exc:
        raise ConvergenceError(
            "tail amplitude bracket [-13.3, -12.6] does not straddle a root",
        ) from exc
    gap, slope_origin = slope_gap(tail_amplitude)

    if abs(slope_origin - slope_shoot) > 1e-6:
        raise ConvergenceError(
            "origin-slope determinations disagree beyond 1e-6",
            shooting=slope_shoot, tail_anchored=slope_origin,
        )

    # assemble the composite profile on the requested grid
    xs = np.geomspace(x_min, x_max, int(n_grid))
    series_coeffs = _origin_series_coeffs(slope_origin)
    vals = np.empty_like(xs)

    lo = xs < series_radius
    vals[lo] = _origin_series_eval(series_coeffs, xs[lo])[0]

    # one stable inward pass from the far anchor fills the middle; the
    # dense sampling backs the evaluation spline
    mid = (xs >= series_radius) & (xs <= tail_switch)
    u_dense = np.log(np.geomspace(x_join, tail_switch * 1.02, 2800))[::-1]
    sol = _integrate_tail_inward(tail_amplitude, u_far, u_join - 1e-9,
                                 rtol, atol, t_eval=u_dense)
    spline = InterpolatedUnivariateSpline(sol.t[::-1], sol.y[0][::-1], k=5, ext=2)
    vals[mid] = np.exp(spline(np.log(xs[mid])))

    hi = xs > tail_switch
    vals[hi] = _tail_eval(tail_amplitude, xs[hi])[0]

    profile = UniversalChi(
        grid=xs,
        values=vals,
        slope_origin=slope_origin,
        tail_switch=tail_switch,
        series_radius=series_radius,
        tail_amplitude=tail_amplitude,
        residual_tol=tolerance,
        quad_tol=quad_tol,
        slope_origin_shooting=slope_shoot,
        tail_slope_mismatch=abs(gap),
        _series=series_coeffs,
        _spline=spline,
    )
    res = tf_residual(profile)
    if res > tolerance:
        raise ConvergenceError(
            "profile residual above tolerance; refine grid or tolerances",
            residual=res, tolerance=tolerance,
        )
    return profile


_DEFAULT_CHI: UniversalChi | None = None


def default_chi() -> UniversalChi:
    """Solve once with defaults and cache (the profile is immutable)."""
    global _DEFAULT_CHI
    if _DEFAULT_CHI is None:
        _DEFAULT_CHI = solve_universal_chi()
    return _DEFAULT_CHI


# ----------------------------------------------------------------------
# potential evaluation
# ----------------------------------------------------------------------

def phi1_at(chi: UniversalChi, r):
    """Charge-one TF potential Phi_1(r) = chi(r/b)/r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("phi1_at requires r > 0")
    return chi.chi(r / B_LENGTH) / r


def phi1_log_table(chi: UniversalChi, t_lo: float = math.log(1e-10),
                   t_hi: float = math.log(5e8), n: int = 46000):
    """(t_lo, t_hi, ln Phi_1 samples on the uniform t-grid) for fast paths."""
    ts = np.linspace(t_lo, t_hi, n)
    return t_lo, t_hi, np.log(phi1_at(chi, np.exp(ts)))


def phi1_log_interpolator(chi: UniversalChi, t_lo: float = math.log(1e-10),
                          t_hi: float = math.log(5e8), n: int = 46000):
    """Fast scalar t -> Phi_1(e^t) via a uniform log-log table.

    Inner-loop companion to :func:`phi1_at` for ODE right-hand sides:
    cubic interpolation of ln Phi_1 on a uniform grid in t = ln r, pure
    float arithmetic, with power-law continuations outside the table.
    """
    t_lo, t_hi, arr = phi1_log_table(chi, t_lo, t_hi, n)
    table = arr.tolist()
    h = (t_hi - t_lo) / (n - 1)
    amp = chi.tail_amplitude
    s = TAIL_EXPONENT
    lb = math.log(B_LENGTH)
    c_inf = 144.0 * B_LENGTH**3

    def phi_exp_t(t: float) -> float:
        if t < t_lo:
            return math.exp(-t)  # chi -> 1 at the origin
        if t > t_hi:
            v = amp * math.exp(-s * (t - lb))
            return c_inf * math.exp(-4.0 * t) * (1.0 + v + _TAIL_COEFFS[2] * v * v)
        p = (t - t_lo) / h
        i = int(p)
        if i < 1:
            i = 1
        elif i > n - 3:
            i = n - 3
        x = p - i
        f0, f1, f2, f3 = table[i - 1], table[i], table[i + 1], table[i + 2]
        # cubic Lagrange on offsets (-1, 0, 1, 2)
        val = (
            -f0 * x * (x - 1.0) * (x - 2.0) / 6.0
            + f1 * (x + 1.0) * (x - 1.0) * (x - 2.0) / 2.0
            - f2 * (x + 1.0) * x * (x - 2.0) / 2.0
            + f3 * (x + 1.0) * x * (x - 1.0) / 6.0
        )
        return math.exp(val)

    return phi_exp_t


def phi1_prime_at(chi: UniversalChi, r):
    """d Phi_1 / dr."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise ValueError("phi1_prime_at requires r > 0")
    u = r / B_LENGTH
    return chi.chi_prime(u) / (r * B_LENGTH) - chi.chi(u) / r**2


def phi_Z_at(chi: UniversalChi, Z: float, x):
    """Phi_Z(x) = Z^(4/3) Phi_1(Z^(1/3) x), exact scaling composition."""
    if Z <= 0.0:
        raise ValueError("phi_Z_at requires Z > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("phi_Z_at requires x > 0")
    zc = float(Z) ** (1.0 / 3.0)
    return zc**4 * phi1_at(chi, zc * x)


# ----------------------------------------------------------------------
# classical constant
# ----------------------------------------------------------------------

def _quad_sqrt_profile(f, lo, hi, epsabs):
    val, _ = quad(f, lo, hi, epsabs=epsabs, epsrel=1e-13, limit=400)
    return val


def classical_constant(chi: UniversalChi, tolerance: float | None = None,
                       route: str = "r") -> float:
    """D_cl = (1/pi) * integral of sqrt(Phi_1) dr.

    The integrand behaves like r^(-1/2) at the origin and like
    sqrt(C_inf) r^(-2) at infinity; both ends are regularized by
    substitution (r = p^2 and r = 1/q).  ``route`` selects the r-space
    form or the equivalent chi-space form (sqrt(b)/pi) * int sqrt(chi/u) du.
    The 3-D form (1/4 pi^2) int sqrt(Phi_1) |x|^(-2) dx reduces to the
    r-space form algebraically (the 4 pi r^2 measure cancels |x|^(-2)).
    """
    eps = tolerance if tolerance is not None else chi.quad_tol
    if route == "r":
        b = B_LENGTH

        def inner(p):  # r = p^2, dr = 2 p dp; sqrt(Phi_1) * 2p
            r = p * p
            return 2.0 * p * math.sqrt(chi.chi(r / b) / r)

        def middle(r):
            return math.sqrt(chi.chi(r / b) / r)

        def outer(q):  # r = 1/q, dr = dq/q^2
            r = 1.0 / q
            return math.sqrt(chi.chi(r / b) / r) / q**2

        r_a, r_b = 0.25, 50.0
        total = (
            _quad_sqrt_profile(inner, 0.0, math.sqrt(r_a), eps)
            + _quad_sqrt_profile(middle, r_a, r_b, eps)
            + _quad_sqrt_profile(outer, 1e-30, 1.0 / r_b, eps)
        )
        return total / math.pi
    if route == "chi":
        def inner(p):  # u = p^2
            return 2.0 * math.sqrt(chi.chi(p * p))

        def middle(u):
            return math.sqrt(chi.chi(u) / u)

        def outer(q):  # u = 1/q
            return math.sqrt(chi.chi(1.0 / q)) * q ** (-1.5)

        u_a, u_b = 0.25, 50.0
        total = (
            _quad_sqrt_profile(inner, 0.0, math.sqrt(u_a), eps)
            + _quad_sqrt_profile(middle, u_a, u_b, eps)
            + _quad_sqrt_profile(outer, 1e-30, 1.0 / u_b, eps)
        )
        return total * math.sqrt(B_LENGTH) / math.pi
    raise ValueError(f"unknown route {route!r}")


def phase_norm_integral(chi: UniversalChi, Z: float, tolerance: float = 1e-10) -> float:
    """(1/pi) * integral of sqrt(Phi_Z) dr, quadratured directly in r."""
    if Z <= 0.0:
        raise ValueError("Z must be positive")

    def inner(p):
        r = p * p
        return 2.0 * p * math.sqrt(phi_Z_at(chi, Z, r))

    def middle(r):
        return math.sqrt(phi_Z_at(chi, Z, r))

    def outer(q):
        r = 1.0 / q
        return math.sqrt(phi_Z_at(chi, Z, r)) / q**2

    zc = float(Z) ** (1.0 / 3.0)
    r_a, r_b = 0.25 / zc, 50.0 / zc
    total = (
        _quad_sqrt_profile(inner, 0.0, math.sqrt(r_a), tolerance)
        + _quad_sqrt_profile(middle, r_a, r_b, tolerance)
        + _quad_sqrt_profile(outer, 1e-30, 1.0 / r_b, tolerance)
    )
    return total / math.pi


# ----------------------------------------------------------------------
# residual diagnostics
# ----------------------------------------------------------------------

def _residual_from_spline(spline, u):
    """|chi_xx - rhs|/rhs with chi = exp(S(ln x)) from a log-log spline."""
    x = np.exp(u)
    s0 = spline(u)
    s1 = spline(u, 1)
    s2 = spline(u, 2)
    chi = np.exp(s0)
    chi_xx = chi * (s2 + s1 * s1 - s1) / x**2
    rhs = chi**1.5 / np.sqrt(x)
    return np.abs(chi_xx - rhs) / rhs


def tf_residual(chi: UniversalChi, values: np.ndarray | None = None) -> float:
    """Max relative ODE defect of the profile at interior grid nodes.

    chi'' is evaluated analytically from each piece of the composite
    representation (origin series, middle log-log spline, tail correction
    series) and compared with chi^(3/2)/sqrt(x), normalized by the local
    source magnitude.  When ``values`` is given, the middle-region spline
    is rebuilt from those samples instead, so tampered values show up.
    """
    x = chi.grid[1:-1]
    out = 0.0

    lo = x < chi.series_radius
    if lo.any():
        v, _, dd = _origin_series_eval(chi._series, x[lo], derivatives=2)
        rhs = v**1.5 / np.sqrt(x[lo])
        out = max(out, float(np.max(np.abs(dd - rhs) / rhs)))

    mid = (x >= chi.series_radius) & (x <= chi.tail_switch)
    if mid.any():
        if values is None:
            spline = chi._spline
        else:
            mask = (chi.grid >= 0.999 * chi.series_radius) & (
                chi.grid <= chi.tail_switch * 1.05
            )
            spline = InterpolatedUnivariateSpline(
                np.log(chi.grid[mask]), np.log(values[mask]), k=5, ext=2
            )
        out = max(out, float(np.max(_residual_from_spline(spline, np.log(x[mid])))))

    hi = x > chi.tail_switch
    if hi.any():
        xt = x[hi]
        s = TAIL_EXPONENT
        amp = chi.tail_amplitude
        v = np.zeros_like(xt)
        dd = np.zeros_like(xt)
        for k in range(len(_TAIL_COEFFS) - 1, -1, -1):
            ck = _TAIL_COEFFS[k]
            ex = -3.0 - k * s
            term = 144.0 * ck * (amp**k) * xt**ex
            v = v + term
            dd = dd + ex * (ex - 1.0) * term / xt**2
        rhs = v**1.5 / np.sqrt(xt)
        out = max(out, float(np.max(np.abs(dd - rhs) / rhs)))

    return out


def sommerfeld_tail_error(chi: UniversalChi, x) -> tuple[np.ndarray, np.ndarray]:
    """Relative deviation of chi from the bare 144/x^3 asymptote at x,
    paired with the leading-order prediction |A| x^(-s)."""
    x = np.asarray(x, dtype=float)
    dev = np.abs(chi.chi(x) * x**3 / 144.0 - 1.0)
    pred = np.abs(chi.tail_amplitude) * x ** (-TAIL_EXPONENT)
    return dev, pred


# ----------------------------------------------------------------------
# profile persistence (CSV values + JSON header)
# ----------------------------------------------------------------------

def save_profile(chi: UniversalChi, csv_path, json_path=None) -> None:
    """Write the profile as CSV (x, chi) plus a JSON header."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "chi"])
        for xv, cv in zip(chi.grid, chi.values):
            writer.writerow([f"{xv:.17g}", f"{cv:.17g}"])
    header = {
        "slope_origin": chi.slope_origin,
        "b": B_LENGTH,
        "tail_switch": chi.tail_switch,
        "series_radius": chi.series_radius,
        "tail_amplitude": chi.tail_amplitude,
        "tolerances": {"residual": chi.residual_tol, "quad": chi.quad_tol},
        "slope_origin_shooting": chi.slope_origin_shooting,
    }
    json_path.write_text(json.dumps(header, indent=2, sort_keys=True))


def load_profile(csv_path, json_path=None) -> UniversalChi:
    """Rebuild a UniversalChi from files written by :func:`save_profile`."""
    csv_path = Path(csv_path)
    json_path = Path(json_path) if json_path else csv_path.with_suffix(".json")
    header = json.loads(json_path.read_text())
    xs, vals = [], []
    with csv_path.open() as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            xs.append(float(row[0]))
            vals.append(float(row[1]))
    return UniversalChi(
        grid=np.asarray(xs),
        values=np.asarray(vals),
        slope_origin=header["slope_origin"],
        tail_switch=header["tail_switch"],
        series_radius=header["series_radius"],
        tail_amplitude=header["tail_amplitude"],
        residual_tol=header["tolerances"]["residual"],
        quad_tol=header["tolerances"]["quad"],
        slope_origin_shooting=header.get("slope_origin_shooting", float("nan")),
    )
