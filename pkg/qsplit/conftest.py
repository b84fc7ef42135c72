"""
Shared pytest fixtures: bundled scenarios, validated potentials and packets
"""
from dataclasses import replace

import numpy as np
import pytest

from qsplit.apps.potential.analyzers import validate
from qsplit.apps.potential.models import PotentialSpec, UnitSystem
from qsplit.apps.scenarios.models import ScenarioContext
from qsplit.apps.scenarios.serializers import load_scenario
from qsplit.apps.spectral.analyzers import gaussian_spectrum
from qsplit.apps.spectral.models import KGrid
from qsplit.manage import resolve_scenario

GAAS_MASS = 0.067
E0 = 0.25
L0 = 7.5


@pytest.fixture(scope='session')
def k0():
    return float(UnitSystem.wavenumber(E0, GAAS_MASS))


@pytest.fixture(scope='session')
def barrier():
    return validate(PotentialSpec(a=500.0, b=505.0, mass=GAAS_MASS, segments=[(5.0, 0.3)]))


@pytest.fixture(scope='session')
def well():
    return validate(PotentialSpec(a=500.0, b=505.0, mass=GAAS_MASS, segments=[(5.0, -0.3)]))


@pytest.fixture(scope='session')
def delta():
    return validate(PotentialSpec(a=None, b=None, mass=GAAS_MASS, delta=(500.0, 0.1)))


@pytest.fixture(scope='session')
def double_barrier():
    return validate(PotentialSpec(a=500.0, b=516.0, mass=GAAS_MASS,
                                  segments=[(3.0, 0.3), (10.0, 0.0), (3.0, 0.3)]))


@pytest.fixture(scope='session')
def stepped():
    return validate(PotentialSpec(a=500.0, b=505.0, mass=GAAS_MASS, segments=[(2.0, 0.3), (3.0, 0.1)]))


@pytest.fixture(scope='session')
def free():
    return validate(PotentialSpec(a=500.0, b=505.0, mass=GAAS_MASS, segments=[(5.0, 0.0)]))


@pytest.fixture(scope='session')
def coarse_grid(k0):
    """1024-point grid: resolves |x| up to about 2700 nm"""
    return KGrid.around(k0, L0, n=1024)


@pytest.fixture(scope='session')
def packet(k0, coarse_grid):
    return gaussian_spectrum(L0, k0, coarse_grid, GAAS_MASS)


def _context(name: str, k_points: int = 1024) -> ScenarioContext:
    scenario = load_scenario(resolve_scenario(name))
    return ScenarioContext(replace(scenario, k_points=k_points))


@pytest.fixture(scope='session')
def barrier_context():
    return _context('barrier')


@pytest.fixture(scope='session')
def well_context():
    return _context('well')


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
