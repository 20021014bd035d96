"""Environmental decoherence: gas collisions, thermal photons and internal heating."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import C, EPS0, HBAR, H, K_B, NITROGEN, GasSpecies, Material
from .errors import IntegrationError
from .numerics import (
    QuadratureSpec,
    gamma_function,
    integrate_adaptive,
    si_over_x_minus_one,
    sinc_minus_one,
)
from .optics import SphereOptics, cross_sections, rayleigh_polarizability

SCATTERING_TIME_CONVENTIONS = ("as-printed", "symmetric")
ENV_QUADRATURE = QuadratureSpec(1e-8, 1e-300, 4000)
_COLLISION_PREFACTOR = 4 * math.pi * gamma_function(0.9) / (5 * math.sin(math.pi / 5))
_THETA_NODES, _THETA_WEIGHTS = np.polynomial.legendre.leggauss(48)
_THETA_NODES = 0.5 * (_THETA_NODES + 1.0)
_THETA_WEIGHTS = 0.5 * _THETA_WEIGHTS


@dataclass(frozen=True)
class EnvironmentParams:
    temperature: float = 300.0
    pressure: float = 1e-8
    gas: GasSpecies = NITROGEN
    gas_velocity: float | None = None
    scattering_time_convention: str = "as-printed"

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("environment temperature must be positive")
        if not self.pressure >= 0:
            raise ValueError("gas pressure must be >= 0")
        if self.gas_velocity is not None and not self.gas_velocity > 0:
            raise ValueError("gas velocity must be positive")
        if self.scattering_time_convention not in SCATTERING_TIME_CONVENTIONS:
            raise ValueError(f"scattering_time_convention must be one of {SCATTERING_TIME_CONVENTIONS}")

    @property
    def mean_gas_velocity(self) -> float:
        if self.gas_velocity is not None:
            return self.gas_velocity
        return math.sqrt(2 * K_B * self.temperature / self.gas.mass)


@dataclass(frozen=True)
class TrapParams:
    wavelength: float = 1550e-9
    cooling_time: float = 1.0
    intensity: float = 90e9
    mech_frequency: float = 200.0
    com_temperature: float = 20e-3

    def __post_init__(self):
        for name in ("wavelength", "cooling_time", "intensity", "mech_frequency", "com_temperature"):
            if not getattr(self, name) > 0:
                raise ValueError(f"trap {name} must be positive")


@dataclass(frozen=True)
class InternalTempTrajectory:
    """Internal temperature samples; time zero is the start of trapping."""

    times: np.ndarray
    temperatures: np.ndarray
    release_time: float = 0.0
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.times.shape != self.temperatures.shape or self.times.ndim != 1:
            raise ValueError("trajectory arrays must be 1-d and of equal length")
        if np.any(~(self.temperatures > 0)):
            raise ValueError("internal temperature must stay positive")

    @classmethod
    def constant(cls, temperature: float, duration: float = 1.0) -> "InternalTempTrajectory":
        return cls(np.array([0.0, duration]), np.array([temperature, temperature]))

    def __call__(self, t):
        return np.interp(t, self.times, self.temperatures)

    def after_release(self, tau):
        """Temperature at time ``tau`` after release from the trap."""
        return self(self.release_time + np.asarray(tau))


# ---------------------------------------------------------------------------
# collisions


def static_polarizability(optics: SphereOptics) -> float:
    """Real static polarizability from the longest tabulated wavelength (Rayleigh formula)."""
    table = optics.table
    eps = complex(table.n_real[-1], table.n_imag[-1]) ** 2
    return float(np.real(rayleigh_polarizability(optics.radius, eps)))


def c6_coefficient(alpha_static: float, ionization_energy: float, gas: GasSpecies) -> float:
    """van der Waals constant C6 = 3 alpha alpha_g I I_g / (32 pi^2 eps0^2 (I + I_g)), J m^6."""
    i, ig = ionization_energy, gas.ionization_energy
    return 3 * alpha_static * gas.polarizability * i * ig / (32 * math.pi**2 * EPS0**2 * (i + ig))


def particle_c6(material: Material, optics: SphereOptics, gas: GasSpecies) -> float:
    return c6_coefficient(static_polarizability(optics), material.ionization_energy, gas)


def collision_rate(env: EnvironmentParams, c6: float) -> float:
    """Collisional decoherence rate (1/s); every collision is taken to be fully decohering."""
    if env.pressure == 0:
        return 0.0
    v = env.mean_gas_velocity
    cross = (3 * math.pi * c6 / (2 * HBAR * v)) ** 0.4
    return _COLLISION_PREFACTOR * cross * env.pressure * v / (K_B * env.temperature)


# ---------------------------------------------------------------------------
# thermal photons


def _bose(omega, temperature):
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(HBAR * np.asarray(omega) / (K_B * temperature))


def spectral_rates(optics: SphereOptics, env: EnvironmentParams, omega):
    """Thermal absorption and scattering rates per unit angular frequency.

    Zero outside the optical table's frequency range.
    """
    omega = np.asarray(omega, dtype=float)
    lo, hi = optics.table.omega_range
    inside = (omega >= lo) & (omega <= hi)
    w = np.clip(omega, lo, hi)
    sca, ab = cross_sections(optics, w)
    pref = (w / (math.pi * C)) ** 2 * _bose(w, env.temperature)
    g_abs = np.where(inside, pref * ab, 0.0)
    g_sca = np.where(inside, pref * sca, 0.0)
    if omega.ndim == 0:
        return float(g_abs), float(g_sca)
    return g_abs, g_sca


def _emission_weight(optics: SphereOptics, omega):
    """(w/pi c)^2 sigma_abs Im{(eps-1)/(eps+2)}, zero outside the table range."""
    omega = np.asarray(omega, dtype=float)
    lo, hi = optics.table.omega_range
    inside = (omega >= lo) & (omega <= hi)
    w = np.clip(omega, lo, hi)
    _, ab = cross_sections(optics, w)
    eps = optics.permittivity(w / C)
    cm = np.imag((eps - 1.0) / (eps + 2.0))
    return np.where(inside, (w / (math.pi * C)) ** 2 * ab * cm, 0.0)


def emission_rate(optics: SphereOptics, omega, internal_temperature):
    """Thermal emission rate per unit angular frequency at internal temperature T_int."""
    omega, t = np.broadcast_arrays(np.asarray(omega, dtype=float), np.asarray(internal_temperature, dtype=float))
    weight = _emission_weight(optics, omega.ravel()).reshape(omega.shape)
    return _apply_boltzmann(weight, omega, t)


def _apply_boltzmann(weight, omega, t):
    with np.errstate(divide="ignore", over="ignore"):
        boltz = np.where(t > 0, np.exp(-HBAR * omega / (K_B * np.where(t > 0, t, 1.0))), 0.0)
    out = weight * boltz
    return out if np.ndim(out) else float(out)


def _log_omega_integral(optics: SphereOptics, func, spec=ENV_QUADRATURE):
    """Integral over the tabulated frequency range in ln(omega); func(omega) -> (nodes, k)."""
    lo, hi = optics.table.omega_range
    # table nodes are kinks of the interpolated optical constants
    knots = np.log(2 * math.pi * C / np.asarray(optics.table.wavelength))
    breaks = sorted(set(knots[(knots > math.log(lo)) & (knots < math.log(hi))]))

    def integrand(u):
        w = np.exp(u)
        return func(w) * w[:, None]

    return integrate_adaptive(integrand, math.log(lo), math.log(hi), spec, breakpoints=breaks)


def emission_power(optics: SphereOptics, temperatures) -> np.ndarray:
    """Radiated power P_emi(T) = int hbar w gamma_emi(w, T) dw for each temperature."""
    temps = np.atleast_1d(np.asarray(temperatures, dtype=float))

    def func(w):
        weight = _emission_weight(optics, w) * HBAR * w
        boltz = np.exp(-HBAR * w[:, None] / (K_B * temps[None, :]))
        return weight[:, None] * boltz

    return np.asarray(_log_omega_integral(optics, func).value)


# ---------------------------------------------------------------------------
# internal temperature


def _emission_interpolant(optics: SphereOptics, t_max: float):
    grid = np.geomspace(1e-2, max(2 * t_max, 50.0), 400)
    power = emission_power(optics, grid)
    tiny = np.finfo(float).tiny
    logp = np.log(np.maximum(power, tiny))
    lgrid = np.log(grid)

    def p_emi(t):
        if t <= grid[0]:
            return float(power[0] * (t / grid[0]) ** 4) if t > 0 else 0.0
        return float(np.exp(np.interp(math.log(t), lgrid, logp)))

    return p_emi


def internal_temperature_trajectory(material: Material, optics: SphereOptics, trap: TrapParams,
                                    env: EnvironmentParams, times, initial_temperature: float | None = None,
                                    step: float = 1e-3, sample_every: float = 1e-2) -> InternalTempTrajectory:
    """Internal temperature through trapping (laser heating) and free fall (emission cooling).

    Fixed-step RK4; the trap phase lasts ``trap.cooling_time`` and the free
    fall ``t1 + t2``. Samples are stored every ``sample_every`` seconds.
    """
    if step > 1e-3 or step <= 0:
        raise ValueError("RK4 step must be in (0, 1 ms]")
    t1, t2 = times
    t0 = env.temperature if initial_temperature is None else float(initial_temperature)
    mass = material.density * 4.0 / 3.0 * math.pi * optics.radius**3
    heat_capacity = mass * material.specific_heat
    omega_trap = 2 * math.pi * C / trap.wavelength
    _, sigma_trap = cross_sections(optics, omega_trap)
    p_abs = sigma_trap * trap.intensity
    # upper bound on the temperature reached, for the emission table
    t_bound = t0 + p_abs * trap.cooling_time / heat_capacity
    p_emi = _emission_interpolant(optics, t_bound)

    def rhs(temp, heating):
        return ((p_abs if heating else 0.0) - p_emi(max(temp, 0.0))) / heat_capacity

    phases = [(trap.cooling_time, True), (t1 + t2, False)]
    sample_times = [0.0]
    samples = [t0]
    temp = t0
    now = 0.0
    next_sample = sample_every
    for duration, heating in phases:
        nsteps = max(1, math.ceil(duration / step - 1e-9))
        h = duration / nsteps
        start = now
        for i in range(nsteps):
            k1 = rhs(temp, heating)
            k2 = rhs(temp + 0.5 * h * k1, heating)
            k3 = rhs(temp + 0.5 * h * k2, heating)
            k4 = rhs(temp + h * k3, heating)
            temp = temp + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not (temp > 0 and math.isfinite(temp)):
                raise IntegrationError(f"internal temperature became {temp} at t = {start + (i + 1) * h:.4g} s")
            now = start + (i + 1) * h
            if now >= next_sample - 1e-12:
                sample_times.append(now)
                samples.append(temp)
                next_sample += sample_every
        if sample_times[-1] != now:
            sample_times.append(now)
            samples.append(temp)
    meta = {"absorbed_power_W": float(p_abs), "heat_capacity_J_per_K": float(heat_capacity)}
    return InternalTempTrajectory(np.array(sample_times), np.array(samples), trap.cooling_time, meta)


# ---------------------------------------------------------------------------
# decoherence kernel


def kernel_argument(n, omega, t1: float, t2: float, mass: float, period: float):
    """a_n = n h w t1 t2 / ((t1 + t2) m c d)."""
    return np.multiply.outer(np.asarray(omega, dtype=float),
                             np.asarray(n, dtype=float)) * H * t1 * t2 / ((t1 + t2) * mass * C * period)


def _scattering_bracket(a):
    # 2 Si(2a)/(2a) - sinc(a)^2 - 1, rearranged to avoid cancellation at small a
    a = np.asarray(a, dtype=float)
    s = sinc_minus_one(a)
    return 2.0 * si_over_x_minus_one(2.0 * a) - 2.0 * s - s * s


def env_kernel_components(n, times, mass: float, period: float, optics: SphereOptics, env: EnvironmentParams,
                          c6: float, trajectory: InternalTempTrajectory | None,
                          spec: QuadratureSpec = ENV_QUADRATURE,
                          channels: tuple[str, ...] = ("collision", "absorption", "scattering", "emission")) -> dict:
    """ln R_n split by channel (collision, absorption, scattering, emission) for orders ``n``.

    Channels not listed in ``channels`` are returned as zeros without being integrated.
    """
    n = np.atleast_1d(np.asarray(n))
    if np.any(n < 0):
        raise ValueError("order n must be >= 0")
    t1, t2 = times
    total = t1 + t2
    t_sca = (t1 - t2) if env.scattering_time_convention == "as-printed" else total
    gamma_coll = collision_rate(env, c6)
    out = {"collision": np.full(n.shape, -gamma_coll * total)}

    def thermal(w):
        g_abs, g_sca = spectral_rates(optics, env, w)
        a = kernel_argument(n, w, t1, t2, mass, period)
        return np.concatenate([g_abs[:, None] * si_over_x_minus_one(a) * total,
                               g_sca[:, None] * _scattering_bracket(a) * t_sca], axis=1)

    if "absorption" in channels or "scattering" in channels:
        vals = np.asarray(_log_omega_integral(optics, thermal, spec).value)
    else:
        vals = np.zeros(2 * n.size)
    out["absorption"] = vals[: n.size]
    out["scattering"] = vals[n.size:]

    if trajectory is None or "emission" not in channels:
        out["emission"] = np.zeros(n.shape)
    else:
        temps_in = trajectory.after_release(t1 * (1.0 - _THETA_NODES))
        temps_out = trajectory.after_release(t1 + t2 * _THETA_NODES)

        def emission(w):
            weight = _emission_weight(optics, w)[:, None]
            e_in = _apply_boltzmann(weight, w[:, None], temps_in[None, :])
            e_out = _apply_boltzmann(weight, w[:, None], temps_out[None, :])
            rate = (t1 * e_in + t2 * e_out) * _THETA_WEIGHTS[None, :]
            a = kernel_argument(n, w, t1, t2, mass, period)
            bracket = sinc_minus_one(a[:, None, :] * _THETA_NODES[None, :, None])
            return np.einsum("wt,wtn->wn", rate, bracket)

        out["emission"] = np.asarray(_log_omega_integral(optics, emission, spec).value)
    for key in ("absorption", "emission"):
        out[key] = np.minimum(out[key], 0.0)
    return out


def env_kernel_ln(n, times, mass, period, optics, env, c6, trajectory=None,
                  exclude: tuple[str, ...] = ()) -> np.ndarray:
    """ln R_n summed over channels, omitting any named in ``exclude``."""
    comps = env_kernel_components(n, times, mass, period, optics, env, c6, trajectory)
    return sum(v for k, v in comps.items() if k not in exclude)
