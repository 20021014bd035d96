"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy.special import jv

from talbot_csl.constants import HBAR


def _propagate(A, B, C, t, m):
    """Free Schrodinger evolution of exp(-A x^2 + B x + C) by time t (closed-form Gaussian integral)."""
    a = m / (2 * HBAR * t)
    den = A - 1j * a
    A2 = -((-2j * a) ** 2 / (4 * den) + 1j * a)
    B2 = B * (-1j * a) / den
    C2 = B * B / (4 * den) + C + 0.5 * np.log(a / (1j * math.pi)) + 0.5 * np.log(math.pi / den)
    return A2, B2, C2


def direct_propagation(x, m, t1, t2, sx, sp, d, phi0, jmax=40, npts=801):
    """Screen density from explicit wave-packet propagation.

    The Gaussian mixed state is written as minimum-uncertainty packets of
    width ``sx`` with Gaussian-distributed mean momentum. Each packet is
    propagated for t1, multiplied by exp(i phi0 cos^2(pi x/d)) expanded in
    plane waves, propagated for t2 and its modulus squared is averaged.
    """
    kick = math.sqrt(sp**2 - (HBAR / (2 * sx)) ** 2)
    total = t1 + t2
    width = HBAR * total / (2 * m * sx)
    lo, hi = m * (x.min() - 12 * width) / total, m * (x.max() + 12 * width) / total
    nodes, weights = np.polynomial.legendre.leggauss(npts)
    p0s = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    wts = 0.5 * (hi - lo) * weights * np.exp(-(p0s**2) / (2 * kick**2)) / (math.sqrt(2 * math.pi) * kick)
    js = np.arange(-jmax, jmax + 1)
    amps = np.exp(1j * phi0 / 2) * (1j) ** js * jv(js, phi0 / 2)
    a0, c0 = 1 / (4 * sx**2), -0.25 * math.log(2 * math.pi * sx**2)
    out = np.zeros_like(x)
    for p0, wt in zip(p0s, wts):
        a1, b1, c1 = _propagate(a0, 1j * p0 / HBAR, c0, t1, m)
        psi = np.zeros_like(x, dtype=complex)
        for j, amp in zip(js, amps):
            a2, b2, c2 = _propagate(a1, b1 + 2j * math.pi * j / d, c1, t2, m)
            psi += amp * np.exp(-a2 * x**2 + b2 * x + c2)
        out += wt * np.abs(psi) ** 2
    return out
