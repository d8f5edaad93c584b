import math

import numpy as np
import pytest
from scipy import special
from scipy.integrate import solve_ivp

from tfatom import specfun
from tfatom.specfun import BasisPair, basis_eval, basis_wronskian

A_TF = math.sqrt(81.0 * math.pi**2)  # 9 pi


def test_closed_form_anchors():
    assert specfun.spherical_j(0, math.pi) == pytest.approx(0.0, abs=1e-15)
    assert specfun.spherical_y(0, math.pi) == pytest.approx(1.0 / math.pi,
                                                            rel=1e-14)
    assert specfun.spherical_j(1, math.pi) == pytest.approx(1.0 / math.pi,
                                                            rel=1e-14)


@pytest.mark.parametrize("ell", range(9))
def test_bessel_against_scipy(ell):
    rng = np.random.default_rng(7 + ell)
    zs = np.concatenate([rng.uniform(0.01, 1.0, 8),
                         rng.uniform(1.0, 40.0, 8), [1e-3, 300.0]])
    for z in zs:
        ref_j = special.spherical_jn(ell, z)
        ref_y = special.spherical_yn(ell, z)
        scale_j = max(abs(ref_j), 1e-280)
        scale_y = max(abs(ref_y), 1e-280)
        assert abs(specfun.spherical_j(ell, z) - ref_j) / scale_j < 1e-11
        assert abs(specfun.spherical_y(ell, z) - ref_y) / scale_y < 1e-11


def test_closed_forms_where_both_apply():
    # recurrence-free closed forms for l <= 2 against the explicit
    # trigonometric expressions, away from their cancellation region
    for z in np.linspace(0.7, 60.0, 40):
        s, c = math.sin(z), math.cos(z)
        assert specfun.spherical_j(0, z) == pytest.approx(s / z, rel=1e-12)
        assert specfun.spherical_j(1, z) == pytest.approx(
            s / z**2 - c / z, rel=1e-12, abs=1e-14)
        assert specfun.spherical_j(2, z) == pytest.approx(
            (3 / z**3 - 1 / z) * s - 3 / z**2 * c, rel=1e-12, abs=1e-14)
        assert specfun.spherical_y(0, z) == pytest.approx(-c / z, rel=1e-12,
                                                          abs=1e-14)


@pytest.mark.parametrize("ell", [0, 1, 2, 4, 7])
def test_jy_wronskian(ell):
    for z in (0.3, 2.0, 9.0, 70.0):
        j = specfun.spherical_j(ell, z)
        y = specfun.spherical_y(ell, z)
        jp = specfun.spherical_jy_derivative("j", ell, z)
        yp = specfun.spherical_jy_derivative("y", ell, z)
        assert j * yp - jp * y == pytest.approx(1.0 / z**2, rel=1e-10)


def test_domain_errors():
    with pytest.raises(ValueError):
        specfun.spherical_j(0, 0.0)
    with pytest.raises(ValueError):
        specfun.spherical_y(1, -2.0)
    with pytest.raises(ValueError):
        BasisPair(-1, 1.0)
    with pytest.raises(ValueError):
        BasisPair(0, 0.0)


@pytest.mark.parametrize("ell", [0, 1, 2, 5])
def test_basis_matches_paper_convention(ell):
    # F, G equal sqrt(r) J/Y of order -(2l+1)/2 exactly, signs included
    pair = BasisPair(ell, A_TF)
    for r in (0.17, 1.3, 8.0, 60.0):
        F, G, _, _ = basis_eval(pair, r)
        z = A_TF / r
        ref_F = math.sqrt(r) * special.jv(-(2 * ell + 1) / 2.0, z)
        ref_G = math.sqrt(r) * special.yv(-(2 * ell + 1) / 2.0, z)
        scale = math.sqrt(2.0 * A_TF / math.pi) * max(1.0, math.sqrt(r) * z)
        assert abs(F - ref_F) < 1e-10 * scale
        assert abs(G - ref_G) < 1e-10 * scale


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_basis_ode_residual(ell):
    # F'' = [l(l+1)/r^2 - a^2/r^4] F, second derivative by central
    # differences of the analytic first derivative
    pair = BasisPair(ell, A_TF)
    for r in (0.1, 1.0, 10.0):
        # fourth-order stencil on the analytic first derivatives keeps the
        # differentiation error below the 1e-9 contract
        h = 1e-4 * r**2 / A_TF
        fp = [basis_eval(pair, r + k * h)[2] for k in (-2, -1, 1, 2)]
        gp = [basis_eval(pair, r + k * h)[3] for k in (-2, -1, 1, 2)]
        d2F = (fp[0] - 8 * fp[1] + 8 * fp[2] - fp[3]) / (12.0 * h)
        d2G = (gp[0] - 8 * gp[1] + 8 * gp[2] - gp[3]) / (12.0 * h)
        F, G, _, _ = basis_eval(pair, r)
        w = ell * (ell + 1) / r**2 - A_TF**2 / r**4
        assert abs(d2F - w * F) < 1e-9 * abs(w * F) + 1e-11 * abs(w)
        assert abs(d2G - w * G) < 1e-9 * abs(w * G) + 1e-11 * abs(w)


def test_basis_wronskian_constant():
    for ell in (0, 1, 2, 5):
        pair = BasisPair(ell, A_TF)
        for r in (0.1, 1.0, 10.0):
            assert basis_wronskian(pair, r) == pytest.approx(
                -2.0 / math.pi, rel=1e-10)


def test_ell0_elementary_solutions():
    # for l = 0 the basis reduces to r-scaled sine/cosine of a/r
    pair = BasisPair(0, A_TF)
    amp = math.sqrt(2.0 * A_TF / math.pi)
    for r in (0.3, 2.0, 11.0):
        F, G, _, _ = basis_eval(pair, r)
        assert F == pytest.approx(amp * (r / A_TF) * math.cos(A_TF / r),
                                  rel=1e-12, abs=1e-14)
        assert G == pytest.approx(amp * (r / A_TF) * math.sin(A_TF / r),
                                  rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("ell", [0, 1, 2])
def test_basis_completeness(ell):
    # a numerical zero-energy solution in the pure tail is a fixed
    # combination of F and G to better than 1e-8 over a decade
    pair = BasisPair(ell, A_TF)

    def rhs(r, y):
        w = ell * (ell + 1) / r**2 - A_TF**2 / r**4
        return (y[1], w * y[0])

    sol = solve_ivp(rhs, (1.0, 12.0), (0.7, -0.3), method="DOP853",
                    rtol=1e-12, atol=1e-14, dense_output=True)
    r0 = 2.0
    f0, fp0 = sol.sol(r0)
    F, G, Fp, Gp = basis_eval(pair, r0)
    wfg = F * Gp - Fp * G
    coef_F = (f0 * Gp - fp0 * G) / wfg
    coef_G = -(f0 * Fp - fp0 * F) / wfg
    rs = np.geomspace(1.0, 10.0, 60)
    F, G, _, _ = basis_eval(pair, rs)
    recon = coef_F * F + coef_G * G
    truth = sol.sol(rs)[0]
    assert np.max(np.abs(recon - truth)) / np.max(np.abs(truth)) < 1e-8


def test_limit_domain_function_anchor():
    pair = BasisPair(0, A_TF)
    r = A_TF / math.pi  # so the Bessel argument is pi
    val = specfun.limit_domain_function(0.0, 0, pair, r)
    assert val == pytest.approx(-math.sqrt(2.0) / (2.0 * math.pi), rel=1e-12)


def test_limit_domain_function_solves_ode():
    # the combination equals (-1)^l [sin(ang) G + cos(ang) F] / sqrt(2a/pi),
    # so its derivative is available analytically through basis_eval
    ell, tau = 1, 0.3
    pair = BasisPair(ell, A_TF)
    ang = tau * math.pi + ell * math.pi / 2.0 + math.pi / 4.0
    amp = math.sqrt(2.0 * A_TF / math.pi)

    def ldf_prime(r):
        _, _, Fp, Gp = basis_eval(pair, r)
        return (-1) ** ell * (math.sin(ang) * Gp + math.cos(ang) * Fp) / amp

    for r in (0.5, 2.0, 9.0):
        val = specfun.limit_domain_function(tau, ell, pair, r)
        # consistency of the decomposition itself
        F, G, _, _ = basis_eval(pair, r)
        recon = (-1) ** ell * (math.sin(ang) * G + math.cos(ang) * F) / amp
        assert recon == pytest.approx(val, rel=1e-12, abs=1e-14)
        h = 1e-4 * r**2 / A_TF
        d1 = [ldf_prime(r + k * h) for k in (-2, -1, 1, 2)]
        d2 = (d1[0] - 8 * d1[1] + 8 * d1[2] - d1[3]) / (12.0 * h)
        w = ell * (ell + 1) / r**2 - A_TF**2 / r**4
        assert abs(d2 - w * val) < 1e-9 * abs(w) * max(abs(val), 0.05)


def test_limit_domain_function_tau_period():
    pair = BasisPair(2, A_TF)
    for r in (0.4, 3.0):
        v0 = specfun.limit_domain_function(0.2, 2, pair, r)
        v1 = specfun.limit_domain_function(1.2, 2, pair, r)
        assert v1 == pytest.approx(-v0, rel=1e-12, abs=1e-14)
