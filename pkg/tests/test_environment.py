import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_ref

from talbot_csl.constants import AMU, EPS0, HBAR, K_B, NITROGEN, C
from talbot_csl.environment import (
    EnvironmentParams,
    InternalTempTrajectory,
    TrapParams,
    _scattering_bracket,
    c6_coefficient,
    collision_rate,
    emission_rate,
    env_kernel_components,
    env_kernel_ln,
    internal_temperature_trajectory,
    particle_c6,
    spectral_rates,
    static_polarizability,
)
from talbot_csl.numerics import si_over_x, sinc

from conftest import sphere

D = 177.5e-9


def test_c6_reductions(si):
    alpha = 1e-38
    i = NITROGEN.ionization_energy
    gas_same = type(NITROGEN)(NITROGEN.polarizability_volume, i, NITROGEN.mass)
    expected = 3 * alpha * NITROGEN.polarizability * i / (64 * math.pi**2 * EPS0**2)
    assert c6_coefficient(alpha, i, gas_same) == pytest.approx(expected, rel=1e-14)
    assert c6_coefficient(2 * alpha, 5e-19, NITROGEN) == pytest.approx(2 * c6_coefficient(alpha, 5e-19, NITROGEN), rel=1e-15)


def hand_collision_rate(c6, pressure, temperature):
    """Independent arithmetic: prefactor, vdW cross section, flux."""
    v = math.sqrt(2 * 1.380649e-23 * temperature / (28 * 1.66053906660e-27))
    pre = 4 * math.pi * gamma_ref(0.9) / (5 * math.sin(math.pi / 5))
    return pre * (3 * math.pi * c6 / (2 * 1.054571817e-34 * v)) ** 0.4 * pressure * v / (1.380649e-23 * temperature)


def test_collision_rate_regression(si):
    opt = sphere(si, 1e6)
    c6 = particle_c6(si, opt, NITROGEN)
    assert c6 > 0 and math.isfinite(c6)
    env = EnvironmentParams(300.0, 1e-8)
    rate = collision_rate(env, c6)
    assert rate == pytest.approx(hand_collision_rate(c6, 1e-8, 300.0), rel=1e-9)
    assert rate == pytest.approx(0.2115, rel=2e-3)  # frozen regression value
    assert collision_rate(EnvironmentParams(300.0, 0.0), c6) == 0.0
    assert collision_rate(EnvironmentParams(300.0, 3e-8), c6) == pytest.approx(3 * rate, rel=1e-14)


def test_static_polarizability_uses_longest_wavelength(si):
    opt = sphere(si, 1e6)
    eps = complex(si.optical_table.n_real[-1], si.optical_table.n_imag[-1]) ** 2
    assert static_polarizability(opt) == pytest.approx(
        (4 * math.pi * EPS0 * opt.radius**3 * (eps - 1) / (eps + 2)).real, rel=1e-14)


def test_spectral_rates(si):
    opt = sphere(si, 1e6)
    w = 2 * math.pi * C / 10e-6
    g_abs, g_sca = spectral_rates(opt, EnvironmentParams(300.0), w)
    assert g_abs > 0 and g_sca > 0
    assert g_abs == pytest.approx(1.3e-14, rel=0.5)  # regression scale; see exact check below
    from talbot_csl.optics import cross_sections
    sca, ab = cross_sections(opt, w)
    bose = 1 / math.expm1(HBAR * w / (K_B * 300.0))
    assert g_abs == pytest.approx((w / (math.pi * C)) ** 2 * ab * bose, rel=1e-14)
    assert spectral_rates(opt, EnvironmentParams(1e-3), w) == (0.0, 0.0)
    assert spectral_rates(opt, EnvironmentParams(300.0), 1e20) == (0.0, 0.0)


def test_emission_rate_limits(si):
    opt = sphere(si, 1e6)
    w = 2 * math.pi * C / 10e-6
    assert emission_rate(opt, w, 0.0) == 0.0
    vals = [emission_rate(opt, w, t) for t in (50.0, 100.0, 300.0, 900.0)]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    from talbot_csl.constants import OpticalTable
    from talbot_csl.optics import SphereOptics
    lossless = SphereOptics(opt.radius, OpticalTable(np.array([1e-7, 1e-3]), np.array([1.5, 1.5]), np.zeros(2)))
    assert emission_rate(lossless, w, 300.0) == 0.0


def test_trajectory_equilibrium_and_heating(si):
    opt = sphere(si, 1e6)
    env = EnvironmentParams(4.0)
    cold = internal_temperature_trajectory(si, opt, TrapParams(intensity=1e-30), env, (0.5, 0.5))
    assert np.max(np.abs(cold.temperatures - 4.0)) < 1.0
    hot = internal_temperature_trajectory(si, opt, TrapParams(), env, (0.2, 0.2))
    heating = hot.temperatures[hot.times <= 1.0]
    assert np.all(np.diff(heating) >= 0)
    assert np.all(hot.temperatures > 0)
    assert np.max(np.diff(hot.times)) <= 0.01 + 1e-12
    with pytest.raises(ValueError):
        internal_temperature_trajectory(si, opt, TrapParams(), env, (0.2, 0.2), step=2e-3)


def test_brackets_nonpositive():
    a = np.linspace(0, 100, 20001)
    assert np.all(si_over_x(a) - 1 <= 0)
    assert np.all(_scattering_bracket(a) <= 1e-15)
    assert np.all(sinc(a) - 1 <= 0)


def env_case(si, pressure=1e-8, temperature=300.0, traj=True):
    opt = sphere(si, 1e6)
    env = EnvironmentParams(temperature, pressure)
    c6 = particle_c6(si, opt, env.gas)
    tr = InternalTempTrajectory.constant(350.0, 5.0) if traj else None
    return opt, env, c6, tr


def test_order_zero(si):
    opt, env, c6, tr = env_case(si, pressure=0.0)
    assert env_kernel_ln([0], (0.04, 0.04), 1e6 * AMU, D, opt, env, c6, tr)[0] == 0.0
    opt, env, c6, tr = env_case(si)
    ln0 = env_kernel_ln([0], (0.04, 0.05), 1e6 * AMU, D, opt, env, c6, tr)[0]
    assert ln0 == pytest.approx(-collision_rate(env, c6) * 0.09, rel=1e-14)


def test_kernel_bounded_and_monotone(si):
    opt, env, c6, tr = env_case(si)
    n = np.arange(0, 31)
    for conv in ("as-printed", "symmetric"):
        env_c = EnvironmentParams(300.0, 1e-8, scattering_time_convention=conv)
        ln = env_kernel_ln(n, (0.05, 0.03), 1e6 * AMU, D, opt, env_c, c6, tr)
        assert np.all(ln <= 0)
        assert np.all(np.diff(ln) <= 1e-12)


def test_kernel_saturates(si):
    opt, env, c6, tr = env_case(si)
    n = np.array([2000, 4000, 8000, 10**6])
    comps = env_kernel_components(n, (0.04, 0.04), 1e6 * AMU, D, opt, env, c6, tr)
    absorption = comps["absorption"]
    # decoherence grows with order but approaches the total-rate limit (1/n tail)
    assert np.all(np.diff(absorption) <= 0)
    assert absorption[2] == pytest.approx(absorption[3], rel=0.03)


def test_cold_dark_vacuum_is_coherent(si):
    opt = sphere(si, 1e6)
    env = EnvironmentParams(1e-3, 0.0)
    tr = InternalTempTrajectory(np.array([0.0, 5.0]), np.array([1e-3, 1e-3]))
    ln = env_kernel_ln(np.arange(0, 20), (0.04, 0.04), 1e6 * AMU, D, opt, env, 0.0, tr)
    assert np.all(np.abs(ln) < 1e-300)
