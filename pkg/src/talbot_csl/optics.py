"""Light-sphere interaction in the Rayleigh and Mie regimes.

Conventions follow Bohren & Huffman (time dependence exp(-i w t)). The
scattering amplitude f has units of length, |f|^2 integrated over the full
solid angle is the scattering cross section and the forward amplitude gives
the extinction through the optical theorem sigma_ext = (4 pi / k) Im f(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import spherical_jn, spherical_yn

from .constants import C, EPS0, OpticalTable
from .errors import NumericIntegrityError

RAYLEIGH_LIMIT = 0.1
REGIMES = ("auto", "rayleigh", "mie")


def rayleigh_polarizability(radius: float, eps):
    """Clausius-Mossotti polarizability 4 pi eps0 R^3 (eps-1)/(eps+2), SI units."""
    eps = np.asarray(eps, dtype=complex)
    if np.any(np.abs(eps + 2.0) < 1e-12):
        raise NumericIntegrityError("Frohlich resonance eps = -2: polarizability diverges")
    alpha = 4 * math.pi * EPS0 * radius**3 * (eps - 1.0) / (eps + 2.0)
    return alpha if alpha.ndim else complex(alpha)


def mie_order_cutoff(x: float) -> int:
    return int(math.ceil(x + 4.0 * x ** (1.0 / 3.0) + 2.0))


@lru_cache(maxsize=4096)
def mie_coefficients(x: float, m: complex, extra_orders: int = 0):
    """Mie coefficients a_n, b_n (n = 1..l_max) for size parameter x and relative index m."""
    nstop = mie_order_cutoff(x) + extra_orders
    mx = m * x
    nmx = int(max(nstop, abs(mx))) + 16
    d = np.zeros(nmx + 1, dtype=complex)
    for n in range(nmx, 0, -1):
        d[n - 1] = n / mx - 1.0 / (d[n] + n / mx)
    orders = np.arange(0, nstop + 1)
    psi = x * spherical_jn(orders, x)
    chi = -x * spherical_yn(orders, x)
    xi = psi - 1j * chi
    n = orders[1:]
    dn = d[1 : nstop + 1]
    ta = dn / m + n / x
    tb = m * dn + n / x
    a = (ta * psi[1:] - psi[:-1]) / (ta * xi[1:] - xi[:-1])
    b = (tb * psi[1:] - psi[:-1]) / (tb * xi[1:] - xi[:-1])
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


def _pi_tau(nmax: int, mu: np.ndarray):
    """Angular functions pi_n(mu), tau_n(mu) for n = 1..nmax, shape (nmax, len(mu))."""
    mu = np.asarray(mu, dtype=float)
    pi = np.zeros((nmax + 1,) + mu.shape)
    tau = np.zeros_like(pi)
    pi[1] = 1.0
    tau[1] = mu
    for n in range(2, nmax + 1):
        pi[n] = (2 * n - 1) / (n - 1) * mu * pi[n - 1] - n / (n - 1) * pi[n - 2]
        tau[n] = n * mu * pi[n] - (n + 1) * pi[n - 1]
    return pi[1:], tau[1:]


def amplitude_functions(x: float, m: complex, mu, extra_orders: int = 0):
    """Bohren-Huffman S1(mu), S2(mu) with mu = cos(scattering angle)."""
    a, b = mie_coefficients(x, complex(m), extra_orders)
    nmax = a.size
    n = np.arange(1, nmax + 1)
    pi, tau = _pi_tau(nmax, mu)
    weight = ((2 * n + 1) / (n * (n + 1))).reshape((-1,) + (1,) * (pi.ndim - 1))
    s1 = np.sum(weight * (a.reshape(weight.shape) * pi + b.reshape(weight.shape) * tau), axis=0)
    s2 = np.sum(weight * (a.reshape(weight.shape) * tau + b.reshape(weight.shape) * pi), axis=0)
    return s1, s2


@dataclass(frozen=True, eq=False)
class SphereOptics:
    """Homogeneous dielectric sphere of ``radius`` (m) with tabulated optical data."""

    radius: float
    table: OpticalTable
    regime: str = "auto"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")

    def refractive_index(self, k):
        return self.table.index(2 * math.pi / np.asarray(k, dtype=float))

    def permittivity(self, k):
        n = self.refractive_index(k)
        return n * n

    def size_parameter(self, k):
        return np.asarray(k, dtype=float) * self.radius

    def uses_mie(self, k) -> np.ndarray | bool:
        if self.regime == "rayleigh":
            return np.zeros(np.shape(k), bool) if np.ndim(k) else False
        if self.regime == "mie":
            return np.ones(np.shape(k), bool) if np.ndim(k) else True
        out = self.size_parameter(k) > RAYLEIGH_LIMIT
        return out if np.ndim(out) else bool(out)

    def polarizability(self, k):
        return rayleigh_polarizability(self.radius, self.permittivity(k))


def cross_sections(optics: SphereOptics, omega):
    """Scattering and absorption cross sections (m^2) at angular frequency ``omega``.

    Vectorised over ``omega``; points in the Mie regime fall back to a
    per-frequency partial-wave sum.
    """
    omega = np.asarray(omega, dtype=float)
    k = omega / C
    eps = optics.permittivity(k)
    alpha = rayleigh_polarizability(optics.radius, eps)
    sca = k**4 * np.abs(alpha) ** 2 / (6 * math.pi * EPS0**2)
    ab = k * np.imag(alpha) / EPS0
    mie = np.atleast_1d(optics.uses_mie(k))
    if np.any(mie):
        sca = np.array(sca, dtype=float, ndmin=1)
        ab = np.array(ab, dtype=float, ndmin=1)
        k1 = np.atleast_1d(k)
        n1 = np.atleast_1d(np.sqrt(eps + 0j))
        for i in np.flatnonzero(mie):
            sca[i], ab[i] = _mie_cross_sections(k1[i], optics.radius, n1[i])
        if omega.ndim == 0:
            sca, ab = sca[0], ab[0]
    ab = np.where(np.imag(eps) == 0, 0.0, np.maximum(ab, 0.0))
    if omega.ndim == 0:
        return float(sca), float(ab)
    return sca, ab


def _mie_cross_sections(k: float, radius: float, m: complex, extra_orders: int = 0):
    x = k * radius
    a, b = mie_coefficients(x, complex(m), extra_orders)
    n = np.arange(1, a.size + 1)
    pref = 2 * math.pi / k**2
    ext = pref * np.sum((2 * n + 1) * np.real(a + b))
    sca = pref * np.sum((2 * n + 1) * (np.abs(a) ** 2 + np.abs(b) ** 2))
    return float(sca), float(max(ext - sca, 0.0))


def mie_extinction(optics: SphereOptics, k: float) -> float:
    m = complex(optics.refractive_index(k))
    a, b = mie_coefficients(k * optics.radius, m)
    n = np.arange(1, a.size + 1)
    return float(2 * math.pi / k**2 * np.sum((2 * n + 1) * np.real(a + b)))


def scattering_amplitude(optics: SphereOptics, k: float, n_z):
    """Polarisation- and azimuth-averaged scalar amplitude f(k, n_z) in metres.

    Rayleigh: (k^2 alpha / 4 pi eps0) sqrt((1 + n_z^2)/2). Mie: modulus
    sqrt((|S1|^2 + |S2|^2)/2)/k carrying the phase of i(S1 + S2).
    """
    n_z = np.asarray(n_z, dtype=float)
    if np.any(np.abs(n_z) > 1):
        raise ValueError("|n_z| must be <= 1")
    if optics.uses_mie(k):
        m = complex(optics.refractive_index(k))
        s1, s2 = amplitude_functions(k * optics.radius, m, n_z)
        modulus = np.sqrt(0.5 * (np.abs(s1) ** 2 + np.abs(s2) ** 2)) / k
        phase = np.exp(1j * np.angle(1j * (s1 + s2)))
        out = modulus * phase
    else:
        alpha = optics.polarizability(k)
        out = k**2 * alpha / (4 * math.pi * EPS0) * np.sqrt(0.5 * (1 + n_z**2))
    return out if np.ndim(out) else complex(out)


def amplitude_products(optics: SphereOptics, k: float, n_z):
    """Azimuth-averaged |f(k, kn)|^2 and f*(k, kn) f(-k, kn) for x-polarised light.

    The second product couples the two counter-propagating beams of the
    standing wave; in the Rayleigh limit it equals the first.
    """
    n_z = np.asarray(n_z, dtype=float)
    if optics.uses_mie(k):
        m = complex(optics.refractive_index(k))
        s1, s2 = amplitude_functions(k * optics.radius, m, n_z)
        s1r, s2r = amplitude_functions(k * optics.radius, m, -n_z)
        same = 0.5 * (np.abs(s1) ** 2 + np.abs(s2) ** 2) / k**2
        cross = 0.5 * (np.conj(s1) * s1r - np.conj(s2) * s2r) / k**2
    else:
        alpha = optics.polarizability(k)
        f0 = abs(k**2 * alpha / (4 * math.pi * EPS0)) ** 2
        same = f0 * 0.5 * (1 + n_z**2)
        cross = same.astype(complex)
    return same, cross


# ---------------------------------------------------------------------------
# standing-wave force


def standing_wave_force(optics: SphereOptics, k: float, z, intensity_norm: float = 1.0):
    """Longitudinal force (N) at position ``z`` in a standing wave cos(kz) of peak intensity ``intensity_norm``.

    Antinodes sit at z = 0, nodes at z = lambda/4. Rayleigh regime:
    F = -(Re alpha / 2 eps0 c) I k sin(2kz). In the Mie regime the amplitude
    comes from a Maxwell-stress-tensor integral of the full multipole fields
    of both beams; the sin(2kz) dependence is exact for equal counter-propagating
    beams.
    """
    z = np.asarray(z, dtype=float)
    if optics.uses_mie(k):
        amplitude = mie_standing_wave_amplitude(optics, k) * intensity_norm
    else:
        alpha = optics.polarizability(k)
        amplitude = -np.real(alpha) / (2 * EPS0 * C) * k
        amplitude *= intensity_norm
    out = amplitude * np.sin(2 * k * z)
    return out if out.ndim else float(out)


def mie_standing_wave_amplitude(optics: SphereOptics, k: float) -> float:
    """Coefficient A in F_z = A I sin(2kz) from the stress tensor, per unit peak intensity."""
    m = complex(optics.refractive_index(k))
    x = k * optics.radius
    # F(z0) with sin(2 k z0) = -1
    fz = stress_tensor_force(x, m, z_phase=-math.pi / 4)[2]
    # fz is in units eps0 E0^2 / k^2 with peak intensity I = 2 eps0 c E0^2
    return float(-fz / (2 * C * k**2))


def _scattered_fields(x: float, m: complex, rho: float, theta, phi, extra_orders: int = 4):
    """Scattered E and eta*H (spherical components) of a +z, x-polarised unit plane wave."""
    a, b = mie_coefficients(x, m, extra_orders)
    nmax = a.size
    n = np.arange(1, nmax + 1)
    mu = np.cos(theta)
    sin_t = np.sin(theta)
    pi, tau = _pi_tau(nmax, mu)
    orders = np.arange(0, nmax + 1)
    h = spherical_jn(orders, rho) + 1j * spherical_yn(orders, rho)
    hn = h[1:]
    dh = h[:-1] - n * hn / rho
    en = (1j ** n) * (2 * n + 1) / (n * (n + 1))
    cp, sp = np.cos(phi), np.sin(phi)

    def s(coef, arr):
        return np.tensordot(coef, arr, axes=1)

    nn1 = n * (n + 1)
    # E_s = sum E_n (i a_n N_e1n - b_n M_o1n)
    er = cp * sin_t * s(1j * en * a * nn1 * hn / rho, pi)
    et = cp * (s(1j * en * a * dh, tau) - s(en * b * hn, pi))
    ep = sp * (-s(1j * en * a * dh, pi) + s(en * b * hn, tau))
    # eta H_s = sum E_n (i b_n N_o1n + a_n M_e1n)
    hr = sp * sin_t * s(1j * en * b * nn1 * hn / rho, pi)
    ht = sp * (s(1j * en * b * dh, tau) - s(en * a * hn, pi))
    hp = cp * (s(1j * en * b * dh, pi) - s(en * a * hn, tau))
    return (er, et, ep), (hr, ht, hp)


def _sph_to_cart(theta, phi, comps):
    r, t, p = comps
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    return np.stack([
        r * st * cp + t * ct * cp - p * sp,
        r * st * sp + t * ct * sp + p * cp,
        r * ct - t * st,
    ])


def stress_tensor_force(x: float, m: complex, z_phase: float, beams=(1.0, 1.0),
                        n_theta: int = 48, n_phi: int = 16):
    """Time-averaged force on a sphere in two counter-propagating x-polarised plane waves.

    The incident field is beams[0] exp(i(kz + z_phase)) + beams[1] exp(-i(kz + z_phase)),
    unit amplitude, with the sphere at the origin; ``z_phase`` = k z0 places the
    sphere at z0 in the standing wave. Returns the Cartesian force in units of
    eps0 E0^2 / k^2.
    """
    rho = x + 1.0
    mu, w_mu = np.polynomial.legendre.leggauss(n_theta)
    phi = 2 * math.pi * np.arange(n_phi) / n_phi
    theta = np.arccos(mu)[:, None] * np.ones((1, n_phi))
    ph = np.ones((n_theta, 1)) * phi[None, :]
    weights = (w_mu[:, None] * (2 * math.pi / n_phi)) * np.ones((1, n_phi))

    normal = np.stack([np.sin(theta) * np.cos(ph), np.sin(theta) * np.sin(ph), np.cos(theta)])
    pos = rho * normal

    def beam_fields(points):
        px, py, pz = points
        t = np.arccos(np.clip(pz / rho, -1, 1))
        p = np.arctan2(py, px)
        es, hs = _scattered_fields(x, m, rho, t, p)
        e = _sph_to_cart(t, p, es)
        hh = _sph_to_cart(t, p, hs)
        plane = np.exp(1j * pz)
        e[0] = e[0] + plane
        hh[1] = hh[1] + plane
        return e, hh

    rot = np.array([1.0, -1.0, -1.0]).reshape(3, 1, 1)
    e1, h1 = beam_fields(pos)
    e2, h2 = beam_fields(rot * pos)
    e2, h2 = rot * e2, rot * h2
    c1 = beams[0] * np.exp(1j * z_phase)
    c2 = beams[1] * np.exp(-1j * z_phase)
    e = c1 * e1 + c2 * e2
    hh = c1 * h1 + c2 * h2
    e_n = np.sum(np.conj(e) * normal, axis=0)
    h_n = np.sum(np.conj(hh) * normal, axis=0)
    energy = np.sum(np.abs(e) ** 2 + np.abs(hh) ** 2, axis=0)
    t_n = 0.5 * np.real(e * e_n + hh * h_n - 0.5 * energy * normal)
    return np.sum(t_n * weights * rho**2, axis=(1, 2))
