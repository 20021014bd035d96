import sys

import numpy as np
import pytest

from talbot_csl.constants import AMU, builtin_material, radius_from_mass
from talbot_csl.optics import SphereOptics


@pytest.fixture(scope="session")
def si():
    return builtin_material("Si")


@pytest.fixture(scope="session")
def sio2():
    return builtin_material("SiO2")


def sphere(material, mass_amu, regime="auto"):
    radius = radius_from_mass(mass_amu * AMU, material.density)
    return SphereOptics(radius, material.optical_table, regime)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
