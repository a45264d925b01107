import math

import numpy as np
import pytest

from volumenes import heisenberg
from volumenes.heisenberg import (
    SERIES_W,
    SERIES_WT,
    TWO_PI,
    c0,
    c1,
    c1_rhs,
    g0,
    heis_cut_time,
    heis_exp,
    heis_jacobian,
    heis_state,
    sine_integral,
    u2_integrand,
    u2_split_integrand,
    unit_ball_volume,
)


def test_exp_closes_after_one_turn():
    r = heis_exp(1.0, 0.0, TWO_PI)
    assert r.x == pytest.approx(0.0, abs=1e-14)
    assert r.y == pytest.approx(0.0, abs=1e-14)
    assert r.z == pytest.approx(1.0 / (4.0 * math.pi), rel=1e-14)
    assert not r.valid_series


def test_exp_straight_line():
    r = heis_exp(1.0, 0.0, 0.0)
    assert (r.x, r.y, r.z) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)
    assert r.valid_series


def test_exp_endpoint_lies_in_the_disc(rng):
    for rho, theta, w in zip(rng.uniform(0, 2, 20), rng.uniform(0, TWO_PI, 20), rng.uniform(-10, 10, 20)):
        r = heis_exp(rho, theta, w)
        assert math.hypot(r.x, r.y) <= rho + 1e-14


def test_state_series_branch_is_continuous():
    for w in (SERIES_WT * 0.999, SERIES_WT * 1.001):
        near = np.array(heis_state(1.0, 0.4, w)[:3])
        x = math.cos(0.4) * math.sin(w) / w + math.sin(0.4) * (math.cos(w) - 1) / w
        assert near[0] == pytest.approx(x, abs=1e-12)
    below = np.array(heis_state(0.8, 1.3, SERIES_WT * (1 - 1e-9))[:3])
    above = np.array(heis_state(0.8, 1.3, SERIES_WT * (1 + 1e-9))[:3])
    np.testing.assert_allclose(below, above, atol=1e-12)


def test_state_advances_theta():
    _, _, _, theta, w = heis_state(1.0, 0.5, 2.0, 0.25)
    assert theta == pytest.approx(1.0)
    assert w == pytest.approx(2.0)


def test_exp_matches_finite_difference_jacobian():
    rho, theta, w = 0.9, 0.7, 2.5
    h = 1e-5

    def point(r, t, v):
        return np.array(heis_state(r, t, v)[:3], dtype=float)

    cols = [
        (point(rho + h, theta, w) - point(rho - h, theta, w)) / (2 * h),
        (point(rho, theta + h, w) - point(rho, theta - h, w)) / (2 * h),
        (point(rho, theta, w + h) - point(rho, theta, w - h)) / (2 * h),
    ]
    det = np.linalg.det(np.column_stack(cols))
    assert abs(det) == pytest.approx(heis_jacobian(rho, theta, w), rel=1e-6)


def test_jacobian_values():
    assert heis_jacobian(1.0, 0.0, math.pi) == pytest.approx(4.0 / math.pi**4, rel=1e-14)
    assert heis_jacobian(1.0, 0.0, TWO_PI) == pytest.approx(0.0, abs=1e-15)
    assert heis_jacobian(1.0, 0.0, -TWO_PI) == pytest.approx(0.0, abs=1e-15)
    assert heis_jacobian(1.0, 0.0, 0.0) == pytest.approx(1.0 / 12.0, rel=1e-14)
    assert heis_jacobian(2.0, 0.3, math.pi) == pytest.approx(8 * 4.0 / math.pi**4, rel=1e-14)


def test_jacobian_positive_inside_first_turn():
    w = np.linspace(-TWO_PI + 1e-3, TWO_PI - 1e-3, 401)
    assert np.all(heis_jacobian(1.0, 0.0, w) > 0)


@pytest.mark.parametrize("fn", [g0, u2_integrand, u2_split_integrand, lambda v: heis_jacobian(1.0, 0.0, v)])
def test_series_branch_agrees_at_threshold(fn):
    lo = fn(SERIES_W * (1 - 1e-9))
    hi = fn(SERIES_W * (1 + 1e-9))
    assert float(lo) == pytest.approx(float(hi), rel=1e-9, abs=1e-12)


def test_g0_values_and_parity():
    assert g0(TWO_PI) == pytest.approx(-3.0 / (16.0 * math.pi**4), rel=1e-12)
    w = np.array([0.1, 0.7, 1.5, 3.0, 6.0])
    np.testing.assert_allclose(g0(w), g0(-w), rtol=1e-14)


def test_split_integrand_equals_u2_integrand():
    w = np.linspace(-TWO_PI, TWO_PI, 161)
    np.testing.assert_allclose(u2_split_integrand(w), u2_integrand(w), rtol=1e-10, atol=1e-13)


def test_sine_integral():
    assert sine_integral(TWO_PI) == pytest.approx(1.4181515761326284, rel=1e-12)
    assert sine_integral(0.0) == 0.0
    with pytest.raises(ValueError):
        sine_integral(-1.0)


def test_volume_constants():
    assert c0() == pytest.approx(0.82587, abs=1e-5)
    assert c1() == pytest.approx(0.14923, abs=1e-5)
    assert c1_rhs() == pytest.approx(-c0() * c1(), rel=1e-12)


def test_unit_ball_volume_is_c0():
    assert unit_ball_volume() == pytest.approx(c0(), abs=1e-8)


def test_cut_time():
    assert heis_cut_time(TWO_PI) == pytest.approx(1.0)
    assert heis_cut_time(-math.pi) == pytest.approx(2.0)
    assert heis_cut_time(0.0) == math.inf


def test_quotient_series_reproduces_sinc():
    coeffs = heisenberg._SINC_SERIES
    w = 0.3
    assert heisenberg._polyval(coeffs, w) == pytest.approx(math.sin(w) / w, rel=1e-14)
