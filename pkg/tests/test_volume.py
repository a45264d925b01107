import math

import numpy as np
import pytest

from volumenes import heisenberg
from volumenes.dilation import DilatedStructure
from volumenes.errors import ConfigError, FitError, QuadratureError
from volumenes.geodesic import jacobian_arrays
from volumenes.heisenberg import c0, c1, c1_rhs, g0
from volumenes.volume import (
    V2_LADDER,
    ExpansionReport,
    QuadratureSpec,
    ball_volume,
    fit_expansion,
    fit_ratios,
    harmonic_residual,
    integrate_ball,
    observed_order,
    predicted_ratio,
    richardson_eps2,
    try_integrate_ball,
    u2_domain_integral,
    u2_integral_check,
    v2_ladder,
    v2_samples,
    v2_theta_average,
    volume_kappa,
)

SMALL = QuadratureSpec(8, 8, 16)


def test_quadrature_spec():
    quad = QuadratureSpec.parse("8,8,16", tol_ode=1e-9)
    assert quad == QuadratureSpec(8, 8, 16, 1e-9)
    assert quad.n_nodes == 1024
    assert quad.doubled() == QuadratureSpec(16, 16, 32, 1e-9)


@pytest.mark.parametrize("text", ["8,8", "8,7,16", "2,8,8", "a,b,c"])
def test_quadrature_spec_rejects(text):
    with pytest.raises(ConfigError):
        QuadratureSpec.parse(text)


def test_predicted_ratio():
    assert predicted_ratio(0.0, 0.1) == pytest.approx(c0())
    assert predicted_ratio(4.0, 0.1) == pytest.approx(c0() * (1 - 0.04 * c1()))


def test_volume_kappa(nf_radial, nf_traceless):
    assert volume_kappa(nf_radial) == pytest.approx(4.0)
    assert volume_kappa(nf_traceless) == pytest.approx(0.0, abs=1e-14)


def test_u2_integral_identity():
    lhs, rhs = u2_integral_check()
    assert lhs == pytest.approx(rhs, abs=1e-9)
    assert rhs < 0
    assert -rhs / c0() == pytest.approx(c1(), rel=1e-12)
    assert rhs == c1_rhs()


def test_heisenberg_ball_volume(heis):
    result = integrate_ball(heis, 0.1, SMALL)
    assert result.ok
    assert result.negative_nodes == 0
    assert not result.domain_violation
    assert result.n_nodes == SMALL.n_nodes
    assert result.ratio == pytest.approx(c0(), rel=1e-5)


def test_heisenberg_volume_scales_as_eps4(heis):
    a = ball_volume(heis, 0.1, SMALL)
    b = ball_volume(heis, 0.05, SMALL)
    assert a / 0.1**4 == pytest.approx(b / 0.05**4, rel=1e-9)


def test_positive_curvature_shrinks_the_ball(nf_radial):
    result = integrate_ball(nf_radial, 0.1, SMALL)
    assert result.ratio < c0()


def test_failed_volume_is_reported(nf_radial):
    too_big = try_integrate_ball(nf_radial, 3.0, SMALL)
    assert not too_big.ok
    assert too_big.volume is None and too_big.ratio is None
    assert "eps" in too_big.error
    assert not try_integrate_ball(nf_radial, 0.0, SMALL).ok
    with pytest.raises(ConfigError):
        integrate_ball(nf_radial, -0.1, SMALL)


def test_fit_ratios_recovers_exact_data():
    eps = np.array([0.2, 0.15, 0.1, 0.07, 0.05])
    volumes = 0.8 * (1.0 - 0.6 * eps**2) * eps**4
    c0_est, slope, residuals = fit_ratios(eps, volumes)
    assert c0_est == pytest.approx(0.8, rel=1e-12)
    assert slope == pytest.approx(-0.6, rel=1e-10)
    np.testing.assert_allclose(residuals, 0.0, atol=1e-12)


def test_fit_ratios_rejects_degenerate_ladder():
    eps = [0.1, 0.1 - 1e-10, 0.1 - 2e-10]
    with pytest.raises(FitError):
        fit_ratios(eps, [e**4 for e in eps])


@pytest.mark.parametrize("ladder", [(0.1, 0.05), (0.1, 0.2, 0.05, 0.01), (0.5, 0.2, 0.1, 0.05), (0.2, 0.1, 0.1, 0.05)])
def test_fit_expansion_validates_ladder(heis, ladder):
    with pytest.raises(ConfigError):
        fit_expansion(heis, ladder, SMALL)


def test_report_ratios():
    report = ExpansionReport(eps_list=(0.2, 0.1), volumes=(0.0016, 0.0001), c0_est=1.0, slope_est=0.0, residuals=(0.0, 0.0))
    assert report.ratios == pytest.approx((1.0, 1.0))
    assert report.c0_theory == c0()


def test_observed_order_and_richardson():
    ladder = np.array(V2_LADDER)
    values = 1.5 + 3.0 * ladder**2
    assert observed_order(ladder, values) == pytest.approx(2.0, rel=1e-9)
    assert richardson_eps2(ladder, values) == pytest.approx(1.5, rel=1e-12)
    assert observed_order(ladder, np.full(3, 2.0)) is None
    assert observed_order(ladder[:2], values[:2]) is None


@pytest.mark.parametrize("rho, w", [(0.0, 1.0), (1.5, 1.0), (1.0, 0.0), (1.0, 6.2)])
def test_v2_average_validates_arguments(nf_radial, rho, w):
    with pytest.raises(ConfigError):
        v2_theta_average(nf_radial, rho, w)


def test_v2_average_scales_like_rho5(nf_radial):
    full = v2_theta_average(nf_radial, 1.0, 2.0)
    half = v2_theta_average(nf_radial, 0.5, 2.0)
    assert half / full == pytest.approx(2.0**-5, rel=0.02)


def test_harmonic_residual_is_samples_minus_average(nf_radial):
    samples = v2_samples(nf_radial, 1.0, 2.0, 0.05)
    residual = harmonic_residual(nf_radial, 1.0, 2.0, 0.05)
    np.testing.assert_allclose(samples - residual, 0.5 * 4.0 * float(g0(2.0)), rtol=1e-9)


@pytest.mark.slow
@pytest.mark.parametrize("w", [1.0, 2.0, math.pi])
def test_v2_average_matches_closed_form(nf_radial, w):
    ladder = V2_LADDER
    values = v2_ladder(nf_radial, 1.0, w, ladder)
    assert observed_order(ladder, values) >= 1.8
    target = 0.5 * 4.0 * float(g0(w))
    assert richardson_eps2(ladder, values) == pytest.approx(target, rel=0.05)


@pytest.mark.slow
def test_harmonic_part_averages_to_zero(nf_radial):
    means = [abs(float(np.mean(harmonic_residual(nf_radial, 1.0, 2.0, eps)))) for eps in (0.1, 0.05, 0.025)]
    assert means[2] < means[1] < means[0]


@pytest.mark.slow
def test_u2_domain_integral(nf_radial):
    value = u2_domain_integral(nf_radial, 0.05, QuadratureSpec(12, 16, 32))
    assert value == pytest.approx(4.0 * c1_rhs(), rel=0.05)


@pytest.mark.slow
def test_quadrature_doubling_check(heis):
    with pytest.raises(QuadratureError):
        integrate_ball(heis, 0.1, SMALL, check_tol=1e-16)


@pytest.mark.slow
def test_default_quadrature_is_converged(heis):
    result = integrate_ball(heis, 0.1, QuadratureSpec(), check_tol=1e-7, workers=4)
    assert result.ok
    assert result.convergence <= 1e-7
    assert result.n_nodes == 16 * 32 * 48


def test_integrand_vanishes_on_heisenberg_cut_locus(heis):
    w = np.array([2.0 * math.pi, -2.0 * math.pi])
    det = jacobian_arrays(heis, 1.0, 0.5, w, fd_step=1e-3, tol=1e-12)
    np.testing.assert_allclose(det, 0.0, atol=1e-7)


@pytest.mark.parametrize("w", [2.0 * math.pi, -2.0 * math.pi])
def test_integrand_at_cut_locus_is_second_order_in_eps(nf_radial, w):
    dets = [
        jacobian_arrays(DilatedStructure(eps, nf_radial).structure, 1.0, 0.5, w, fd_step=1e-3, tol=1e-12)[0]
        for eps in (0.1, 0.05)
    ]
    assert abs(dets[0]) > 1e-6
    assert dets[0] / dets[1] == pytest.approx(4.0, rel=0.15)


@pytest.mark.slow
def test_heisenberg_fit(heis):
    report = fit_expansion(heis, (0.2, 0.15, 0.1, 0.05), SMALL)
    assert report.c0_est == pytest.approx(heisenberg.c0(), rel=1e-5)
    assert report.slope_est == pytest.approx(0.0, abs=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("family_fixture", ["nf_radial", "nf_traceless"])
def test_fit_slope_follows_volume_curvature(request, family_fixture):
    s = request.getfixturevalue(family_fixture)
    report = fit_expansion(s, (0.2, 0.15, 0.1, 0.07, 0.05), QuadratureSpec(12, 16, 32))
    assert report.monotone
    if report.kappa_vol == 0:
        assert abs(report.slope_est) <= 0.05
    else:
        assert report.slope_est == pytest.approx(report.slope_theory, rel=0.1)
