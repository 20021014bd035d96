import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from talbot_csl.constants import (
    AMU,
    CONSTANTS,
    OpticalTable,
    builtin_material,
    load_optical_table,
    permittivity,
    radius_from_mass,
)
from talbot_csl.errors import OpticalRangeError, OpticalTableError


def write_table(tmp_path, rows, header="wavelength_m,n_real,n_imag"):
    path = tmp_path / "t.csv"
    path.write_text("# test table\n" + header + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n")
    return path


def test_constants_positive_and_hbar_exact():
    c = CONSTANTS
    for v in (c.h, c.c, c.k_B, c.eps0, c.amu, c.g, c.hbar):
        assert v > 0
    assert c.hbar == c.h / (2 * math.pi)


def test_two_row_table(tmp_path):
    t = load_optical_table(write_table(tmp_path, [(300e-9, 1.5, 0.0), (400e-9, 1.6, 0.1)]))
    assert len(t) == 2


def test_out_of_order_rejected(tmp_path):
    with pytest.raises(OpticalTableError, match="non-monotone"):
        load_optical_table(write_table(tmp_path, [(400e-9, 1.5, 0.0), (300e-9, 1.6, 0.1)]))


def test_gain_medium_rejected(tmp_path):
    with pytest.raises(OpticalTableError, match="gain medium unsupported"):
        load_optical_table(write_table(tmp_path, [(300e-9, 1.5, -0.1), (400e-9, 1.6, 0.1)]))


def test_parse_error_names_line(tmp_path):
    with pytest.raises(OpticalTableError, match=r"t\.csv:4:"):
        load_optical_table(write_table(tmp_path, [(300e-9, 1.5, 0.0), ("abc", 1.6, 0.1)]))


def omega_of(lam):
    return 2 * math.pi * CONSTANTS.c / lam


def test_permittivity_examples():
    t = OpticalTable(np.array([300e-9, 400e-9]), np.array([1.5, 1.7]), np.array([0.0, 0.0]))
    assert permittivity(t, omega_of(300e-9)) == pytest.approx(2.25, rel=1e-12)
    assert permittivity(t, omega_of(350e-9)) == pytest.approx(2.56, rel=1e-12)
    t2 = OpticalTable(np.array([300e-9, 400e-9]), np.array([1.0, 1.0]), np.array([1.0, 1.0]))
    assert permittivity(t2, omega_of(320e-9)) == pytest.approx(2j, abs=1e-12)


def test_out_of_range_names_bounds():
    t = OpticalTable(np.array([300e-9, 400e-9]), np.array([1.5, 1.7]), np.array([0.0, 0.0]))
    with pytest.raises(OpticalRangeError, match="3e-07"):
        permittivity(t, omega_of(500e-9))


def test_permittivity_continuous_at_rows(si):
    t = si.optical_table
    for lam in t.wavelength[1:-1]:
        w = omega_of(lam)
        lo, hi = permittivity(t, w * (1 - 1e-13)), permittivity(t, w * (1 + 1e-13))
        assert abs(lo - hi) <= 1e-10 * abs(lo)


def test_radius_examples():
    r7 = radius_from_mass(1e7 * AMU, 2329.0)
    assert r7 == pytest.approx(1.19e-8, rel=0.01)
    assert 2 * math.pi * r7 / 355e-9 == pytest.approx(0.21, abs=0.01)
    assert radius_from_mass(1.0, 3.0 / (4 * math.pi)) == pytest.approx(1.0, rel=1e-15)
    assert radius_from_mass(1e6 * AMU, 2329.0) == pytest.approx(5.54e-9, rel=0.01)


@given(st.floats(1e-25, 1e-10), st.floats(100.0, 2e4))
def test_radius_cube_root_scaling(m, rho):
    assert radius_from_mass(8 * m, rho) == pytest.approx(2 * radius_from_mass(m, rho), rel=1e-15)


def test_builtin_tables_cover_grating_and_trap():
    for name in ("Si", "SiO2"):
        lo, hi = builtin_material(name).optical_table.wavelength_range
        assert lo <= 355e-9 and hi >= 1550e-9 and hi >= 100e-6
