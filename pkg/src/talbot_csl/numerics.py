"""Special functions and adaptive quadrature used by the physics modules."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import QuadratureError

# ---------------------------------------------------------------------------
# elementary special functions


def sine_integral(x):
    """Si(x) = int_0^x sin(t)/t dt, vectorised."""
    si, _ = special.sici(np.asarray(x, dtype=float))
    return si if np.ndim(si) else float(si)


def sinc(x):
    """Unnormalised sinc, sin(x)/x with sinc(0) = 1."""
    x = np.asarray(x, dtype=float)
    return np.sinc(x / np.pi)


def si_over_x(x):
    """Si(x)/x with the removable singularity filled in (value 1 at 0)."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    safe = np.where(small, 1.0, x)
    x2 = x * x
    series = 1.0 - x2 / 18.0 + x2 * x2 / 600.0
    out = np.where(small, series, special.sici(safe)[0] / safe)
    return out if out.ndim else float(out)


def _even_series(x2, coeffs):
    out = np.zeros_like(x2)
    for c in coeffs[::-1]:
        out = (out + c) * x2
    return out


# Taylor coefficients of x^(2k), k >= 1, for sin(x)/x - 1 and Si(x)/x - 1
_SINC_M1 = [(-1) ** k / math.factorial(2 * k + 1) for k in range(1, 10)]
_SI_M1 = [(-1) ** k / ((2 * k + 1) * math.factorial(2 * k + 1)) for k in range(1, 10)]


def sinc_minus_one(x):
    """sin(x)/x - 1 without cancellation at small x."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.5
    out = np.where(small, _even_series(x * x, _SINC_M1), sinc(x) - 1.0)
    return out if out.ndim else float(out)


def si_over_x_minus_one(x):
    """Si(x)/x - 1 without cancellation at small x."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 0.5
    safe = np.where(small, 1.0, x)
    out = np.where(small, _even_series(x * x, _SI_M1), special.sici(safe)[0] / safe - 1.0)
    return out if out.ndim else float(out)


def spherical_j1(x):
    """Spherical Bessel j1(x) = sin x / x^2 - cos x / x.

    A Taylor branch is used for |x| < 1e-3 where the closed form cancels.
    """
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-3
    safe = np.where(small, 1.0, x)
    closed = np.sin(safe) / safe**2 - np.cos(safe) / safe
    x2 = x * x
    series = x / 3.0 * (1.0 - x2 / 10.0 + x2 * x2 / 280.0)
    out = np.where(small, series, closed)
    return out if out.ndim else float(out)


def gamma_function(x: float) -> float:
    """Euler Gamma for x > 0."""
    if not x > 0:
        raise ValueError("gamma_function is defined here for x > 0 only")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# Bessel functions of integer order, complex argument

_SERIES_RADIUS = 1.0


def _bessel_series(nmax: int, z: complex) -> np.ndarray:
    n = np.arange(nmax + 1)
    half = z / 2.0
    lead = np.empty(nmax + 1, dtype=complex)
    lead[0] = 1.0
    for k in range(1, nmax + 1):
        lead[k] = lead[k - 1] * half / k
    term = np.ones(nmax + 1, dtype=complex)
    total = term.copy()
    q = -half * half
    for m in range(1, 40):
        term = term * q / (m * (n + m))
        total += term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return lead * total


def _bessel_miller(nmax: int, z: complex) -> np.ndarray:
    az = abs(z)
    start = int(max(nmax, az) + 40 + 4 * math.sqrt(az))
    start += start % 2
    f = np.zeros(start + 2, dtype=complex)
    f[start] = 1e-300
    two_over_z = 2.0 / z
    for k in range(start, 0, -1):
        f[k - 1] = k * two_over_z * f[k] - f[k + 1]
        if abs(f[k - 1]) > 1e250:
            f[k - 1 :] *= 1e-250
    # generating function at t = -i (Im z >= 0) or t = +i keeps every term
    # the same size as the target exp(-+iz), so the sum does not cancel
    if z.imag >= 0:
        phase = (-1j) ** np.arange(1, start + 1)
        target = np.exp(-1j * z)
    else:
        phase = (1j) ** np.arange(1, start + 1)
        target = np.exp(1j * z)
    norm = f[0] + 2.0 * np.sum(phase * f[1 : start + 1])
    return f[: nmax + 1] * (target / norm)


def bessel_j_orders(nmax: int, z) -> np.ndarray:
    """J_0(z) ... J_nmax(z) for one (possibly complex) argument.

    Ascending series for |z| <= 1, Miller's downward recurrence otherwise.
    Returns a real array when ``z`` is real.
    """
    if nmax < 0:
        raise ValueError("nmax must be >= 0")
    is_real = not np.iscomplexobj(z) or complex(z).imag == 0.0
    zc = complex(z)
    if zc == 0:
        out = np.zeros(nmax + 1, dtype=complex)
        out[0] = 1.0
    elif abs(zc) <= _SERIES_RADIUS:
        out = _bessel_series(nmax, zc)
    else:
        out = _bessel_miller(nmax, zc)
    return out.real.copy() if is_real else out


def bessel_j(order: int, z):
    """Bessel function of the first kind J_order(z), integer order (may be negative)."""
    order = int(order)
    if abs(order) > 500:
        raise ValueError("|order| must be <= 500")
    val = bessel_j_orders(abs(order), z)[abs(order)]
    if order < 0 and abs(order) % 2:
        val = -val
    return val.item() if isinstance(val, np.generic) else val


# ---------------------------------------------------------------------------
# adaptive quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-8
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 2000

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class QuadratureResult:
    value: float | np.ndarray
    error: float
    panels: int


@lru_cache(maxsize=None)
def _gauss_pair():
    x_lo, w_lo = np.polynomial.legendre.leggauss(10)
    x_hi, w_hi = np.polynomial.legendre.leggauss(21)
    nodes = np.concatenate([x_lo, x_hi])
    return nodes, w_lo, w_hi


def _panels(f, a: np.ndarray, b: np.ndarray):
    """Gauss-10 and Gauss-21 estimates on each panel [a_i, b_i]."""
    nodes, w_lo, w_hi = _gauss_pair()
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    y = np.asarray(f(x.ravel()))
    y = y.reshape(x.shape + y.shape[1:])
    lo = np.tensordot(w_lo, np.moveaxis(y[:, :10], 1, 0), axes=1)
    hi = np.tensordot(w_hi, np.moveaxis(y[:, 10:], 1, 0), axes=1)
    scale = half.reshape((-1,) + (1,) * (lo.ndim - 1))
    return lo * scale, hi * scale


def integrate_adaptive(f, a: float, b: float, spec: QuadratureSpec = DEFAULT_QUADRATURE,
                       breakpoints=None) -> QuadratureResult:
    """Globally adaptive Gauss-Legendre quadrature of ``f`` over [a, b].

    Each panel is integrated with a 10- and a 21-point Gauss rule; their
    difference is the panel error. The worst panel is bisected until the
    summed error meets ``spec``.

    ``f`` receives a 1-d array of abscissae and returns an array whose first
    axis matches it; extra trailing axes are integrated simultaneously and the
    tolerance applies to every component.
    """
    edges = [a] + sorted(p for p in (breakpoints or ()) if a < p < b) + [b]
    g_lo, g_hi = _panels(f, np.array(edges[:-1], float), np.array(edges[1:], float))
    panels = {}
    heap = []
    total = np.sum(g_hi, axis=0)
    total_err = np.sum(np.abs(g_hi - g_lo), axis=0)

    def tolerance():
        return np.maximum(spec.absolute_tolerance, spec.relative_tolerance * np.abs(total))

    # panels are ranked by error relative to each component's own tolerance,
    # so components of very different magnitude all get refined
    tol = tolerance()
    for i in range(len(edges) - 1):
        err_vec = np.abs(g_hi[i] - g_lo[i])
        panels[i] = (edges[i], edges[i + 1], g_hi[i], err_vec)
        heap.append((-float(np.max(err_vec / tol)), i))
    heapq.heapify(heap)
    next_id = len(panels)
    while True:
        tol = tolerance()
        if np.all(total_err <= tol):
            break
        if len(panels) >= spec.max_subdivisions:
            raise QuadratureError(
                f"no convergence after {spec.max_subdivisions} panels",
                estimate=total, error=float(np.max(total_err)),
            )
        _, idx = heapq.heappop(heap)
        pa, pb, pval, perr = panels.pop(idx)
        pm = 0.5 * (pa + pb)
        c_lo, c_hi = _panels(f, np.array([pa, pm]), np.array([pm, pb]))
        total = total - pval + c_hi[0] + c_hi[1]
        total_err = total_err - perr
        for j, (lo_edge, hi_edge) in enumerate(((pa, pm), (pm, pb))):
            err_vec = np.abs(c_hi[j] - c_lo[j])
            total_err = total_err + err_vec
            panels[next_id] = (lo_edge, hi_edge, c_hi[j], err_vec)
            heapq.heappush(heap, (-float(np.max(err_vec / tol)), next_id))
            next_id += 1
    value = total if np.ndim(total) else float(total)
    return QuadratureResult(value, float(np.max(total_err)), len(panels))


DAMPING_CUTOFF = 30.0


def integrate_damped_semiinf(f, damping_scale: float,
                             spec: QuadratureSpec = DEFAULT_QUADRATURE) -> QuadratureResult:
    """Integral over [0, inf) of an integrand decaying like exp(-(x/scale)^2).

    The domain is truncated at 30 damping scales, where exp(-900) is far
    below any tolerance in use.
    """
    if damping_scale <= 0:
        raise ValueError("damping_scale must be positive")
    upper = DAMPING_CUTOFF * damping_scale
    # a few initial panels so narrow features near the origin are seen
    breaks = [upper * t for t in (1 / 30, 2 / 30, 4 / 30, 8 / 30)]
    return integrate_adaptive(f, 0.0, upper, spec, breakpoints=breaks)
