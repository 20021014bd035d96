import math

import mpmath
import numpy as np
from scipy.integrate import trapezoid
import pytest
from hypothesis import given, settings, strategies as st

from talbot_csl.errors import QuadratureError
from talbot_csl.numerics import (
    QuadratureSpec,
    bessel_j,
    si_over_x_minus_one,
    sinc_minus_one,
    bessel_j_orders,
    gamma_function,
    integrate_adaptive,
    integrate_damped_semiinf,
    si_over_x,
    sinc,
    sine_integral,
    spherical_j1,
)

mpmath.mp.dps = 40


def si_series(x):
    """Power series for Si summed in high precision."""
    with mpmath.workdps(40 + int(abs(x) / 2)):
        return _si_series(mpmath.mpf(x))


def _si_series(x):
    total, term, k = mpmath.mpf(0), x, 0
    while True:
        contrib = term / (2 * k + 1)
        total += contrib
        if abs(contrib) < mpmath.mpf(10) ** -35 * max(1, abs(total)):
            return float(total)
        term *= -x * x / ((2 * k + 2) * (2 * k + 3))
        k += 1


def test_sine_integral_values():
    assert sine_integral(0.0) == 0.0
    assert sine_integral(1.0) == pytest.approx(si_series(1.0), abs=1e-15)
    assert sine_integral(1.0) == pytest.approx(0.946083070367, abs=1e-12)
    assert abs(sine_integral(1e6) - math.pi / 2) < 2e-6


@pytest.mark.parametrize("x", [1e-8, 0.3, 2.0, 7.5, 33.0, 120.0, 999.0])
def test_sine_integral_against_series(x):
    assert sine_integral(x) == pytest.approx(si_series(x), abs=1e-12)
    assert sine_integral(-x) == -sine_integral(x)


def test_si_over_x_and_sinc_limits():
    assert si_over_x(0.0) == 1.0
    assert si_over_x(1e-5) == pytest.approx(1 - 1e-10 / 18, rel=1e-15)
    assert si_over_x(2.0) == pytest.approx(sine_integral(2.0) / 2.0, rel=1e-15)
    assert sinc(0.0) == 1.0
    assert sinc(math.pi) == pytest.approx(0.0, abs=1e-16)


def test_spherical_j1():
    assert spherical_j1(1e-6) / 1e-6 == pytest.approx(1 / 3, rel=1e-9)
    assert spherical_j1(math.pi) == pytest.approx(1 / math.pi, rel=1e-14)
    xs = np.linspace(-30, 30, 301)
    assert np.allclose(spherical_j1(-xs), -spherical_j1(xs), atol=0, rtol=0)


def test_gamma():
    assert gamma_function(1.0) == 1.0
    assert gamma_function(5.0) == pytest.approx(24.0, rel=1e-15)
    assert gamma_function(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_function(0.9) == pytest.approx(float(mpmath.gamma(mpmath.mpf("0.9"))), rel=1e-12)
    assert gamma_function(0.9) == pytest.approx(1.0686287021, rel=1e-10)
    with pytest.raises(ValueError):
        gamma_function(0.0)


def test_bessel_trivial():
    assert bessel_j(0, 0.0) == 1.0
    assert all(bessel_j(n, 0.0) == 0.0 for n in range(1, 6))
    assert abs(bessel_j(0, 2.4048255577)) < 1e-9
    x = 1e-4
    assert abs(bessel_j(1, x) - x / 2) < x**3


def first_zero_by_bisection():
    f = lambda x: mpmath.besselj(0, x)
    a, b = mpmath.mpf(2), mpmath.mpf(3)
    for _ in range(120):
        m = (a + b) / 2
        if f(a) * f(m) <= 0:
            b = m
        else:
            a = m
    return float(a)


def test_bessel_zero_oracle():
    assert abs(bessel_j(0, first_zero_by_bisection())) < 1e-12


@pytest.mark.parametrize("z", [0.5, 3.7, 19.0, 20.5, 55.0, 99.0, 3 + 4j, -7 + 2j, 30j, 60 - 60j, 0.01 + 0.2j])
def test_bessel_against_mpmath(z):
    orders = bessel_j_orders(80, z)
    for n in (0, 1, 2, 5, 13, 40, 80):
        ref = complex(mpmath.besselj(n, mpmath.mpc(z)))
        if abs(ref) < 1e-280:
            continue
        assert abs(orders[n] - ref) <= 1e-10 * abs(ref) + 1e-300


def test_bessel_negative_order_parity():
    for n in range(0, 8):
        assert bessel_j(-n, 2.3) == pytest.approx((-1) ** n * bessel_j(n, 2.3), rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 60.0), st.floats(-20.0, 20.0), st.integers(1, 50))
def test_bessel_recurrence(re, im, n):
    z = complex(re, im)
    j = bessel_j_orders(n + 1, z)
    resid = abs(j[n - 1] + j[n + 1] - 2 * n / z * j[n])
    assert resid <= 1e-9 * max(1.0, abs(j[n]))


def test_bessel_sum_of_squares():
    j = bessel_j_orders(60, 5.0)
    assert j[0] ** 2 + 2 * np.sum(j[1:] ** 2) == pytest.approx(1.0, abs=1e-10)


def test_gaussian_integrals():
    assert integrate_damped_semiinf(lambda x: np.exp(-x * x), 1.0).value == pytest.approx(
        math.sqrt(math.pi) / 2, rel=1e-10)
    assert integrate_damped_semiinf(lambda x: x * x * np.exp(-x * x), 1.0).value == pytest.approx(
        math.sqrt(math.pi) / 4, rel=1e-10)


def test_damped_oscillatory_vs_trapezoid(rng):
    for _ in range(3):
        a, w, s = rng.uniform(0.5, 3.0), rng.uniform(1.0, 40.0), rng.uniform(0.3, 2.0)
        f = lambda x: (1 + a * x) * np.cos(w * x) * np.exp(-(x / s) ** 2)
        est = integrate_damped_semiinf(f, s).value
        x = np.linspace(0, 30 * s, 1_000_001)
        ref = trapezoid(f(x), x)
        assert est == pytest.approx(ref, rel=1e-6, abs=1e-9)


def test_quadrature_linear_in_integrand():
    f = lambda x: np.exp(-x * x) * np.cos(3 * x)
    g = lambda x: x * np.exp(-x * x)
    a = integrate_damped_semiinf(f, 1.0).value
    b = integrate_damped_semiinf(g, 1.0).value
    c = integrate_damped_semiinf(lambda x: 2.5 * f(x) - 0.7 * g(x), 1.0).value
    assert c == pytest.approx(2.5 * a - 0.7 * b, rel=1e-10)


def test_quadrature_vector_components_and_failure():
    res = integrate_adaptive(lambda x: np.stack([np.sin(x), 1e-30 * np.cos(x)], axis=1), 0.0, math.pi,
                             QuadratureSpec(1e-10, 1e-300, 200))
    assert res.value[0] == pytest.approx(2.0, rel=1e-10)
    assert res.value[1] == pytest.approx(0.0, abs=1e-38)
    with pytest.raises(QuadratureError) as info:
        integrate_adaptive(lambda x: 1 / np.sqrt(np.abs(x - 0.3)), 0.0, 1.0, QuadratureSpec(1e-14, 1e-300, 8))
    assert np.isfinite(info.value.estimate)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(0.0, 1e-14, 10)
    assert QuadratureSpec() == QuadratureSpec(1e-8, 1e-14, 2000)


@pytest.mark.parametrize("x", [1e-9, 1e-5, 0.01, 0.3, 0.49, 0.5, 0.7, 3.0, 40.0])
def test_minus_one_helpers_vs_mpmath(x):
    with mpmath.workdps(50):
        mx = mpmath.mpf(x)
        si_ref = float(mpmath.si(mx) / mx - 1)
        sinc_ref = float(mpmath.sin(mx) / mx - 1)
    assert si_over_x_minus_one(x) == pytest.approx(si_ref, rel=1e-13)
    assert sinc_minus_one(x) == pytest.approx(sinc_ref, rel=1e-13)
    assert si_over_x_minus_one(-x) == si_over_x_minus_one(x)
