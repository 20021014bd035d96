"""Optical phase grating: eikonal quantities and generalized Talbot coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C, HBAR
from .errors import NumericIntegrityError
from .numerics import QuadratureSpec, bessel_j_orders, integrate_adaptive
from .optics import SphereOptics, amplitude_products, cross_sections, standing_wave_force

# I0 normalisation of the coherent term: with the force evaluated per unit peak
# standing-wave intensity, 16/I0 -> 4 reproduces phi0 = 2 Re(alpha) E/(hbar c eps0 a)
# in the Rayleigh limit.
_COHERENT_PREFACTOR = 4.0
IMAG_TOLERANCE = 1e-9


@dataclass(frozen=True)
class GratingParams:
    wavelength: float = 355e-9
    pulse_energy_per_area: float = 0.0

    def __post_init__(self):
        if self.wavelength <= 0:
            raise ValueError("grating wavelength must be positive")
        if self.pulse_energy_per_area < 0:
            raise ValueError("pulse energy per area must be >= 0")

    @property
    def period(self) -> float:
        return self.wavelength / 2.0

    @property
    def k(self) -> float:
        return 2 * math.pi / self.wavelength

    @property
    def omega(self) -> float:
        return 2 * math.pi * C / self.wavelength

    @property
    def photons_per_area(self) -> float:
        return self.pulse_energy_per_area / (HBAR * self.omega)


@dataclass(frozen=True)
class EikonalQuantities:
    """Grating-interaction functions at one separation ``s``.

    ``phase_amplitude`` is the eikonal phase phi0 (the amplitude of zeta_coh)
    and ``xi`` = s/d; both are kept so the classical limit can be formed.
    """

    zeta_coh: float
    a: float
    b: float
    F: float
    c_abs: float
    phase_amplitude: float = 0.0
    xi: float = 0.0

    @classmethod
    def pure_phase(cls, phi0: float, xi: float) -> "EikonalQuantities":
        return cls(phi0 * math.sin(math.pi * xi), 0.0, 0.0, 0.0, 0.0, phi0, xi)


def eikonal_phase(optics: SphereOptics, grating: GratingParams) -> float:
    """phi0, the peak coherent phase modulation imprinted by the pulse."""
    k = grating.k
    force = standing_wave_force(optics, k, -grating.wavelength / 8, intensity_norm=1.0)
    return _COHERENT_PREFACTOR * force * grating.pulse_energy_per_area / (HBAR * k)


def pulse_energy_for_phase(optics: SphereOptics, wavelength: float, phi0: float) -> float:
    """E_L/a_L giving eikonal phase ``phi0`` (the phase is linear in pulse energy)."""
    unit = eikonal_phase(optics, GratingParams(wavelength, 1.0))
    if unit <= 0:
        raise NumericIntegrityError("non-positive eikonal phase per unit pulse energy")
    return phi0 / unit


def eikonal_table(optics: SphereOptics, grating: GratingParams, s,
                  spec: QuadratureSpec = QuadratureSpec(1e-8, 1e-14, 20000)) -> list[EikonalQuantities]:
    """Eikonal quantities at every separation in ``s`` (m)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    k = grating.k
    d = grating.period
    xi = s / d
    phi0 = eikonal_phase(optics, grating)
    zeta = phi0 * np.sin(math.pi * xi)
    n_ph = grating.photons_per_area
    if n_ph == 0:
        zero = np.zeros_like(s)
        a = b = big_f = c_abs = zero
    else:
        _, sigma_abs = cross_sections(optics, grating.omega)
        c_abs = 4.0 * sigma_abs * n_ph * (1.0 - np.cos(math.pi * xi))
        ks = k * s

        def integrand(nz):
            same, cross = amplitude_products(optics, k, nz)
            arg = nz[:, None] * ks[None, :]
            return np.concatenate([
                np.real(cross)[:, None] * (np.cos(arg) - np.cos(ks)[None, :]),
                np.imag(cross)[:, None] * np.sin(arg),
                same[:, None] * (np.cos(ks[None, :] - arg) - 1.0),
            ], axis=1)

        # panels resolve roughly one oscillation of cos(k n_z s) each
        n_break = int(min(max(np.max(np.abs(ks)) / math.pi, 1), 4000))
        breaks = list(np.linspace(-1, 1, n_break + 1)[1:-1])
        res = integrate_adaptive(integrand, -1.0, 1.0, spec, breakpoints=breaks)
        pref = 8 * math.pi * n_ph * 2 * math.pi
        vals = pref * np.asarray(res.value)
        m = s.size
        a, b, big_f = vals[:m], vals[m:2 * m], np.minimum(vals[2 * m:], 0.0)
    return [
        EikonalQuantities(float(zeta[i]), float(a[i]), float(b[i]), float(big_f[i]),
                          float(c_abs[i]), float(phi0), float(xi[i]))
        for i in range(s.size)
    ]


def eikonal_quantities(optics: SphereOptics, grating: GratingParams, s: float) -> EikonalQuantities:
    return eikonal_table(optics, grating, [s])[0]


# ---------------------------------------------------------------------------
# Talbot coefficients


def _g_orders(jmax: int, zeta: float, amp: float):
    """G_j = ((zeta+A)/(zeta-A))^(j/2) J_j(sign(zeta-A) sqrt(zeta^2-A^2)) for j = -jmax..jmax.

    Written as ((zeta+A)/w)^j J_j(w) with w^2 = zeta^2 - A^2, which is entire
    in (zeta, A); the ratio's pole at zeta = A is removable and needs no offset.
    """
    w = np.sqrt(complex(zeta * zeta - amp * amp))
    plus, minus = zeta + amp, zeta - amp
    j = np.arange(jmax + 1)
    if abs(w) <= 1.0:
        q = -(w * w) / 4.0
        series = np.ones(jmax + 1, dtype=complex)
        term = np.ones(jmax + 1, dtype=complex)
        for m in range(1, 60):
            term = term * q / (m * (j + m))
            series += term
            if np.all(np.abs(term) <= 1e-17 * np.abs(series)):
                break
        lead_p = np.empty(jmax + 1, dtype=complex)
        lead_m = np.empty(jmax + 1, dtype=complex)
        lead_p[0] = lead_m[0] = 1.0
        for i in range(1, jmax + 1):
            lead_p[i] = lead_p[i - 1] * (plus / 2.0) / i
            lead_m[i] = lead_m[i - 1] * (-minus / 2.0) / i
        pos = lead_p * series
        neg = lead_m * series
    else:
        bj = bessel_j_orders(jmax, w)
        with np.errstate(over="ignore", invalid="ignore"):
            pos = np.where(bj == 0, 0.0, np.power(plus / w, j) * bj)
            neg = np.where(bj == 0, 0.0, np.power(-minus / w, j) * bj)
    return pos, neg


def _series_coefficient(eik: EikonalQuantities, n: int, zeta: float, extra_terms: int = 0) -> float:
    if n < 0 or n > 200:
        raise ValueError("order n must be within 0..200")
    amp = eik.a + 0.5 * eik.c_abs
    w = math.sqrt(abs(zeta * zeta - amp * amp))
    b = eik.b
    kmax = int(math.ceil(abs(b))) + int(math.ceil(w)) + 30 + extra_terms
    if b == 0.0:
        kmax = 0
    jmax = n + kmax
    g_pos, g_neg = _g_orders(jmax, zeta, amp)
    jb = bessel_j_orders(kmax, b) if kmax else np.ones(1)
    total = 0.0 + 0.0j
    for k in range(-kmax, kmax + 1):
        jk = jb[abs(k)] * (-1 if (k < 0 and k % 2) else 1)
        order = n + k
        g = g_pos[order] if order >= 0 else g_neg[-order]
        total += jk * g
    value = math.exp(eik.F - 0.5 * eik.c_abs) * total
    if not np.isfinite(value):
        raise NumericIntegrityError(f"Talbot series for n={n} is not finite")
    if abs(value.imag) > IMAG_TOLERANCE * max(1.0, abs(value.real)):
        raise NumericIntegrityError(
            f"Talbot coefficient n={n} has imaginary residue {value.imag:.3e}"
        )
    return float(value.real)


def talbot_coefficient(eik: EikonalQuantities, n: int, extra_terms: int = 0) -> float:
    """Generalized Talbot coefficient B_n at the separation ``eik`` was evaluated for."""
    return _series_coefficient(eik, n, eik.zeta_coh, extra_terms)


def classical_coefficient(eik: EikonalQuantities, n: int, extra_terms: int = 0) -> float:
    """Shadow-pattern coefficient: coherent kick linearised, sin(pi xi) -> pi xi."""
    zeta = eik.phase_amplitude * math.pi * eik.xi
    return _series_coefficient(eik, n, zeta, extra_terms)
