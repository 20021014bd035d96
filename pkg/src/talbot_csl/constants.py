"""Physical constants, material records and tabulated optical constants."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import constants as _sc

from .errors import OpticalRangeError, OpticalTableError


@dataclass(frozen=True)
class PhysicalConstants:
    """SI constants. ``hbar`` is always derived from ``h``."""

    h: float = _sc.h
    c: float = _sc.c
    k_B: float = _sc.k
    eps0: float = _sc.epsilon_0
    amu: float = _sc.atomic_mass
    m_nucleon: float = _sc.m_n
    g: float = _sc.g

    @property
    def hbar(self) -> float:
        return self.h / (2.0 * math.pi)


CONSTANTS = PhysicalConstants()
H = CONSTANTS.h
HBAR = CONSTANTS.hbar
C = CONSTANTS.c
K_B = CONSTANTS.k_B
EPS0 = CONSTANTS.eps0
AMU = CONSTANTS.amu
M0 = CONSTANTS.m_nucleon
G = CONSTANTS.g


@dataclass(frozen=True, eq=False)
class OpticalTable:
    """Complex refractive index sampled on a strictly increasing wavelength grid."""

    wavelength: np.ndarray
    n_real: np.ndarray
    n_imag: np.ndarray
    source: str = ""

    def __post_init__(self):
        wl = np.asarray(self.wavelength, dtype=float)
        nr = np.asarray(self.n_real, dtype=float)
        ni = np.asarray(self.n_imag, dtype=float)
        if not (wl.ndim == nr.ndim == ni.ndim == 1 and wl.size == nr.size == ni.size):
            raise OpticalTableError("wavelength, n_real and n_imag must be 1-d and equally long")
        if wl.size < 2:
            raise OpticalTableError("optical table needs at least 2 rows")
        if np.any(wl <= 0):
            raise OpticalTableError("wavelengths must be positive")
        if np.any(np.diff(wl) <= 0):
            raise OpticalTableError("non-monotone wavelengths: rows must be strictly increasing")
        if np.any(ni < 0):
            raise OpticalTableError("negative n_imag: gain medium unsupported")
        for name, arr in (("wavelength", wl), ("n_real", nr), ("n_imag", ni)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return self.wavelength.size

    @property
    def wavelength_range(self) -> tuple[float, float]:
        return float(self.wavelength[0]), float(self.wavelength[-1])

    @property
    def omega_range(self) -> tuple[float, float]:
        lo, hi = self.wavelength_range
        return 2 * math.pi * C / hi, 2 * math.pi * C / lo

    def index(self, wavelength):
        """Linearly interpolated complex index n + ik at ``wavelength`` (m)."""
        wl = np.asarray(wavelength, dtype=float)
        lo, hi = self.wavelength_range
        # relative slack so that omega -> wavelength round trips at the ends pass
        slack = 1e-12
        if np.any(wl < lo * (1 - slack)) or np.any(wl > hi * (1 + slack)):
            raise OpticalRangeError(
                f"wavelength outside optical table range [{lo:.6g}, {hi:.6g}] m"
            )
        wl = np.clip(wl, lo, hi)
        n = np.interp(wl, self.wavelength, self.n_real) + 1j * np.interp(
            wl, self.wavelength, self.n_imag
        )
        return n if n.ndim else complex(n)


def load_optical_table(path) -> OpticalTable:
    """Read an optical-constants CSV (``wavelength_m,n_real,n_imag``).

    Lines starting with ``#`` are comments. The first non-comment line must
    be the header.
    """
    path = Path(path)
    rows = []
    header_seen = False
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            fields = next(csv.reader([stripped]))
            if not header_seen:
                if [f.strip() for f in fields] != ["wavelength_m", "n_real", "n_imag"]:
                    raise OpticalTableError(
                        f"{path}:{lineno}: expected header 'wavelength_m,n_real,n_imag'"
                    )
                header_seen = True
                continue
            if len(fields) != 3:
                raise OpticalTableError(f"{path}:{lineno}: expected 3 columns, got {len(fields)}")
            try:
                values = tuple(float(f) for f in fields)
            except ValueError as exc:
                raise OpticalTableError(f"{path}:{lineno}: {exc}") from None
            if not all(math.isfinite(v) for v in values):
                raise OpticalTableError(f"{path}:{lineno}: non-finite value")
            rows.append((lineno, *values))
    if not header_seen:
        raise OpticalTableError(f"{path}: missing header")
    if len(rows) < 2:
        raise OpticalTableError(f"{path}: optical table needs at least 2 rows")
    for (_, wl0, _, _), (lineno, wl1, _, _) in zip(rows, rows[1:]):
        if wl1 <= wl0:
            raise OpticalTableError(f"{path}:{lineno}: non-monotone wavelengths")
    for lineno, _, _, ni in rows:
        if ni < 0:
            raise OpticalTableError(f"{path}:{lineno}: negative n_imag, gain medium unsupported")
    arr = np.array([r[1:] for r in rows])
    return OpticalTable(arr[:, 0], arr[:, 1], arr[:, 2], source=str(path))


def permittivity(table: OpticalTable, omega):
    """Relative permittivity (n + ik)^2 at angular frequency ``omega`` (rad/s)."""
    omega = np.asarray(omega, dtype=float)
    n = table.index(2 * math.pi * C / omega)
    return n * n


def radius_from_mass(mass: float, density: float) -> float:
    """Radius of a homogeneous sphere of given mass and density."""
    if mass <= 0 or density <= 0:
        raise ValueError("mass and density must be positive")
    return (3.0 * mass / (4.0 * math.pi * density)) ** (1.0 / 3.0)


@dataclass(frozen=True)
class Material:
    name: str
    density: float
    specific_heat: float
    ionization_energy: float
    optical_table: OpticalTable = field(repr=False, compare=False)

    def __post_init__(self):
        if self.density <= 0 or self.specific_heat <= 0 or self.ionization_energy <= 0:
            raise ValueError(f"material {self.name!r}: density, specific heat and ionization energy must be positive")


@dataclass(frozen=True)
class GasSpecies:
    """Residual gas. ``polarizability_volume`` is alpha/(4 pi eps0) in m^3."""

    polarizability_volume: float
    ionization_energy: float
    mass: float

    def __post_init__(self):
        if min(self.polarizability_volume, self.ionization_energy, self.mass) <= 0:
            raise ValueError("gas polarizability, ionization energy and mass must be positive")

    @property
    def polarizability(self) -> float:
        return 4 * math.pi * EPS0 * self.polarizability_volume


NITROGEN = GasSpecies(polarizability_volume=1.74e-30, ionization_energy=15.6e-19, mass=28 * AMU)

_DATA_FILES = {"Si": "si.csv", "SiO2": "sio2.csv"}
_BULK = {
    # density kg/m^3, specific heat J/(kg K), ionization energy J
    "Si": (2329.0, 700.0, 5e-19),
    "SiO2": (1850.0, 700.0, 5e-19),
}


def data_path(filename: str) -> Path:
    return Path(str(resources.files("talbot_csl") / "data" / filename))


@lru_cache(maxsize=None)
def builtin_material(name: str) -> Material:
    """``Si`` or ``SiO2`` with the shipped optical table."""
    try:
        rho, cm, ion = _BULK[name]
    except KeyError:
        raise KeyError(f"unknown material {name!r}; known: {sorted(_BULK)}") from None
    table = load_optical_table(data_path(_DATA_FILES[name]))
    return Material(name, rho, cm, ion, table)


def known_materials() -> list[str]:
    return sorted(_BULK)
