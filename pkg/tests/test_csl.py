import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import sici

from talbot_csl.constants import AMU, HBAR, M0, radius_from_mass
from talbot_csl.csl import (
    ADLER_POINT,
    CslParams,
    csl_f,
    csl_kernel,
    csl_kernel_ln,
    csl_path_overlap,
    csl_rate,
    form_factor,
    kernel_separation,
)

RHO = 2330.0
MASS = 1e6 * AMU
R = radius_from_mass(MASS, RHO)


def test_form_factor_limits():
    assert form_factor(R, RHO, 0.0) == pytest.approx(MASS, rel=1e-12)
    # q R / hbar = pi: j1(pi) = 1/pi, so mu = 4 rho R^3 / pi... = 3 m / pi^2
    assert form_factor(R, RHO, math.pi * HBAR / R) == pytest.approx(3 * MASS / math.pi**2, rel=1e-12)
    small = form_factor(R, RHO, 1e-4 * HBAR / R)
    assert small == pytest.approx(MASS, rel=1e-8)


def test_point_particle_rate():
    # R << r_c: Gamma -> sqrt(2) lambda (m/m0)^2
    r_c = 100 * R
    params = CslParams(1e-8, r_c)
    expected = math.sqrt(2) * 1e-8 * (MASS / M0) ** 2
    assert csl_rate(params, R, RHO) == pytest.approx(expected, rel=2e-4)


def test_rate_oracle_quad():
    r_c = 1e-7
    params = CslParams(1.0, r_c)

    def integrand(u):
        return u * u * math.exp(-u * u) * float(form_factor(R, RHO, HBAR * u / r_c)) ** 2

    ref = 4 * math.sqrt(2 / math.pi) * quad(integrand, 0, 12, limit=400, epsabs=0, epsrel=1e-11)[0] / M0**2
    assert csl_rate(params, R, RHO) == pytest.approx(ref, rel=1e-7)


def test_rate_scaling_large_particle():
    # for R >> r_c the rate grows like surface, well below the R^6 point-particle law
    r_c = 1e-8
    small, big = 10 * r_c, 20 * r_c
    g1 = csl_rate(CslParams(1.0, r_c), small, RHO)
    g2 = csl_rate(CslParams(1.0, r_c), big, RHO)
    assert g2 / g1 < 64.64


def test_f_limits():
    params = CslParams(1e-8, 1e-7)
    assert csl_f(0.0, params, R, RHO) == 0.0
    assert csl_f(1e4 * 1e-7, params, R, RHO) == pytest.approx(1.0, rel=1e-4)
    assert csl_f(1e4 * 1e-7, params, R, RHO, normalized=False) == pytest.approx(math.pi / 2, rel=1e-4)
    assert csl_path_overlap(0.0, params, R, RHO) == pytest.approx(1.0, rel=1e-12)
    assert csl_path_overlap(1e4 * 1e-7, params, R, RHO) < 1e-3


def test_f_point_particle_oracle():
    # point particle: weight u^2 e^{-u^2}, independent of the form factor
    r_c = 1e-6
    params = CslParams(1.0, r_c)
    x = 0.7 * r_c
    num = quad(lambda u: u * u * math.exp(-u * u) * sici(u * x / r_c)[0], 0, 12, epsrel=1e-12)[0]
    den = math.sqrt(math.pi) / 4
    assert csl_f(x, params, R, RHO) == pytest.approx(2 / math.pi * num / den, rel=1e-4)


@settings(max_examples=15, deadline=None)
@given(st.floats(-10, -5), st.lists(st.floats(0, 5e-6), min_size=2, max_size=6))
def test_overlap_monotone_and_bounded(log_rc, xs):
    params = CslParams(1.0, 10**log_rc)
    xs = np.sort(np.array(xs))
    ov = csl_path_overlap(xs, params, R, RHO)
    assert np.all(np.diff(ov) <= 1e-9)
    assert np.all((ov > 0) & (ov <= 1 + 1e-12))
    f = csl_f(xs, params, R, RHO)
    # Si overshoots pi/2, so the rescaled f is bounded by max Si / (pi/2), not by 1
    assert np.all((f >= -1e-12) & (f <= sici(math.pi)[0] / (math.pi / 2)))


def test_f_rises_then_overshoots():
    params = CslParams(1.0, 1e-7)
    x = np.linspace(0, 2e-7, 21)
    f = csl_f(x, params, R, RHO)
    assert np.all(np.diff(f) > 0)
    assert csl_f(1e-7, params, R, RHO) < csl_f(2e-7, params, R, RHO)
    # weighted Si average overshoots by a few percent before settling at 1
    peak = csl_f(np.linspace(2e-7, 6e-7, 41), params, R, RHO).max()
    assert 1.03 < peak < 1.05


def test_negative_separation_rejected():
    with pytest.raises(ValueError):
        csl_f(-1.0, CslParams(1.0, 1e-7), R, RHO)


@pytest.mark.parametrize("conv", ["path-averaged", "rescaled-f"])
def test_kernel_limits(conv):
    times, geom = (0.04, 0.04), (MASS, 177.5e-9)
    params = CslParams(ADLER_POINT[1], ADLER_POINT[0], conv)
    gamma = csl_rate(params, R, RHO)
    ln = csl_kernel_ln(np.arange(0, 40), times, geom, params, R, RHO)
    big = csl_kernel_ln([10**7], times, geom, params, R, RHO)[0]
    if conv == "path-averaged":
        assert csl_kernel(0, times, geom, params, R, RHO) == pytest.approx(1.0, abs=1e-12)
        assert np.all(ln <= 1e-12)
        assert np.all(np.diff(ln) <= 1e-10)
        assert big == pytest.approx(-gamma * 0.08, rel=1e-2)
    else:
        # literal exp{Gamma (f - 1) t}: full decay at n = 0, plateau 1 at large separation
        assert ln[0] == pytest.approx(-gamma * 0.08, rel=1e-12)
        assert big == pytest.approx(0.0, abs=1e-3 * gamma * 0.08)
    zero = CslParams(0.0, 1e-7, conv)
    assert np.all(csl_kernel_ln(np.arange(5), times, geom, zero, R, RHO) == 0)


def test_kernel_separation_formula():
    x = kernel_separation(3, 0.1, 0.2, MASS, 1e-7)
    assert x == pytest.approx(6.62607015e-34 * 3 * 0.02 / (MASS * 1e-7 * 0.3), rel=1e-14)


def test_invalid_params():
    with pytest.raises(ValueError):
        CslParams(-1.0, 1e-7)
    with pytest.raises(ValueError):
        CslParams(1.0, 0.0)
    with pytest.raises(ValueError):
        CslParams(1.0, 1e-7, "other")
