"""Continuous spontaneous localization: mass form factor, rate, saturation function and kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .constants import H, HBAR, M0
from .numerics import QuadratureSpec, integrate_damped_semiinf, si_over_x_minus_one, sine_integral, spherical_j1

CSL_QUADRATURE = QuadratureSpec(1e-8, 1e-300, 4000)
_PREFACTOR = 4.0 * math.sqrt(2.0 / math.pi)

# "path-averaged": R_n = exp{-Gamma t [1 - <Si(u)/u>]}, no decoherence at zero
#   separation and full decoherence at large separation.
# "rescaled-f": R_n = exp{Gamma (f - 1) t} with the Si-weighted f rescaled to [0, 1].
KERNEL_CONVENTIONS = ("path-averaged", "rescaled-f")
ADLER_POINT = (1e-7, 10 ** -8.5)
GRW_POINT = (1e-7, 1e-16)


@dataclass(frozen=True)
class CslParams:
    rate: float
    r_c: float
    kernel_convention: str = "path-averaged"

    def __post_init__(self):
        if not self.rate >= 0:
            raise ValueError("csl rate must be >= 0")
        if not self.r_c > 0:
            raise ValueError("csl r_c must be positive")
        if self.kernel_convention not in KERNEL_CONVENTIONS:
            raise ValueError(f"kernel_convention must be one of {KERNEL_CONVENTIONS}")


def form_factor(radius: float, density: float, q):
    """Fourier transform of a homogeneous sphere's mass density, in kg.

    mu(q) = rho (4 pi hbar R^2 / q) j1(q R / hbar), with mu(0) = m.
    """
    q = np.asarray(q, dtype=float)
    x = q * radius / HBAR
    # j1(x)/x is regular; (4 pi hbar R^2/q) j1 = 4 pi R^3 j1(x)/x
    safe = np.where(x == 0, 1.0, x)
    ratio = np.where(x < 1e-3, 1.0 / 3.0 - x * x / 30.0, spherical_j1(safe) / safe)
    return density * 4.0 * math.pi * radius ** 3 * ratio


def _weight(u, r_c: float, radius: float, density: float):
    """Integrand weight u^2 exp(-u^2) mu(hbar u / r_c)^2 in u = q r_c / hbar."""
    mu = form_factor(radius, density, HBAR * u / r_c)
    return u * u * np.exp(-u * u) * mu * mu


@lru_cache(maxsize=4096)
def _rate_per_lambda(r_c: float, radius: float, density: float) -> float:
    res = integrate_damped_semiinf(lambda u: _weight(u, r_c, radius, density), 1.0, CSL_QUADRATURE)
    return _PREFACTOR * res.value / (M0 * M0)


def csl_rate(params: CslParams, radius: float, density: float) -> float:
    """Total CSL decoherence rate Gamma_CSL (1/s)."""
    if params.rate == 0:
        return 0.0
    return params.rate * _rate_per_lambda(params.r_c, radius, density)


def _weighted_average(func, x, r_c: float, radius: float, density: float) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    scaled = x / r_c

    def integrand(u):
        w = _weight(u, r_c, radius, density)
        return w[:, None] * func(u[:, None] * scaled[None, :])

    num = integrate_damped_semiinf(integrand, 1.0, CSL_QUADRATURE).value
    den = _rate_per_lambda(r_c, radius, density) * M0 * M0 / _PREFACTOR
    return np.asarray(num) / den


def csl_f(x, params: CslParams, radius: float, density: float, normalized: bool = True):
    """Si-weighted saturation function.

    With ``normalized`` the 2/pi factor is applied so that f(0) = 0 and
    f(inf) = 1; otherwise f(inf) = pi/2.
    """
    if np.any(np.asarray(x) < 0):
        raise ValueError("separation must be >= 0")
    val = _weighted_average(sine_integral, x, params.r_c, radius, density)
    if normalized:
        val = val * (2.0 / math.pi)
    return val if np.ndim(x) else float(val[0])


def csl_path_overlap(x, params: CslParams, radius: float, density: float):
    """Path-averaged coherence factor <Si(u)/u>: 1 at x = 0, 0 as x -> inf."""
    if np.any(np.asarray(x) < 0):
        raise ValueError("separation must be >= 0")
    val = 1.0 + _path_deficit(x, params, radius, density)
    return val if np.ndim(x) else float(val[0])


def _path_deficit(x, params: CslParams, radius: float, density: float) -> np.ndarray:
    """<Si(u)/u> - 1, averaged without cancellation; <= 0 termwise."""
    return np.minimum(_weighted_average(si_over_x_minus_one, x, params.r_c, radius, density), 0.0)


def kernel_separation(n, t1: float, t2: float, mass: float, period: float):
    """x_n = h n t1 t2 / (m d (t1 + t2))."""
    return H * np.asarray(n, dtype=float) * t1 * t2 / (mass * period * (t1 + t2))


def csl_kernel_ln(n, times, geometry, params: CslParams, radius: float, density: float):
    """ln R_n^CSL for an array of orders."""
    t1, t2 = times
    mass, period = geometry
    n = np.atleast_1d(np.asarray(n))
    if np.any(n < 0):
        raise ValueError("order n must be >= 0")
    gamma = csl_rate(params, radius, density)
    if gamma == 0:
        return np.zeros(n.shape)
    x = kernel_separation(n, t1, t2, mass, period)
    total = t1 + t2
    if params.kernel_convention == "rescaled-f":
        return gamma * (csl_f(x, params, radius, density) - 1.0) * total
    return gamma * _path_deficit(x, params, radius, density) * total


def csl_kernel(n: int, times, geometry, params: CslParams, radius: float, density: float) -> float:
    """R_n^CSL in (0, 1]."""
    return float(np.exp(csl_kernel_ln([n], times, geometry, params, radius, density)[0]))
