"""Pytest configuration and fixtures"""

import numpy as np
import pytest

from swiftdeco.config import get_settings
from swiftdeco.core.constants import ELECTRON_MASS
from swiftdeco.schemas.bath import BathDistribution, BathSpec, ParticleSpec
from swiftdeco.services.cross_sections import (GaussianForwardCrossSection,
                                               IsotropicCrossSection)
from swiftdeco.services.scenario_service import ScenarioService


@pytest.fixture(autouse=True)
def clear_settings_cache():
    """Settings are re-read for every test so env overrides stay local."""
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


@pytest.fixture
def rng():
    """Seeded random stream"""
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def fig3_scenario():
    """Heavy particle at seven bath rms speeds"""
    return ScenarioService.load_scenario("fig3")


@pytest.fixture(scope="session")
def isotropic_scenario():
    """Hard-sphere scattering in a thermal gas"""
    return ScenarioService.load_scenario("isotropic_d3")


@pytest.fixture(scope="session")
def alpha_scenario():
    """5 MeV alpha particle in air, range calibrated"""
    return ScenarioService.load_scenario("alpha_air")


@pytest.fixture(scope="session")
def frozen_scenario():
    """Projectile in a gas at rest"""
    return ScenarioService.load_scenario("frozen_bath")


@pytest.fixture
def isotropic_model_d3():
    return IsotropicCrossSection(sigma0=1e-19, d=3)


@pytest.fixture
def forward_model_d3():
    return GaussianForwardCrossSection(sigma0=1e-20, theta0=0.2, d=3)


@pytest.fixture
def heavy_particle_d3():
    """1000 m_e projectile with |k0| = 1e11 1/m along x"""
    return ParticleSpec(mass_S=1000.0 * ELECTRON_MASS, k0=[1e11, 0.0, 0.0])


@pytest.fixture
def electron_bath():
    """Electron gas at room temperature"""
    return BathSpec(mass_B=ELECTRON_MASS, temperature=300.0, number_density=1e25)


@pytest.fixture
def frozen_electron_bath():
    return BathSpec(
        mass_B=ELECTRON_MASS,
        temperature=0.0,
        number_density=1e25,
        distribution=BathDistribution.FROZEN,
    )
