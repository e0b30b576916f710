import pytest

from models import PhysParams


@pytest.fixture
def landau_phys() -> PhysParams:
    return PhysParams(m=1, e=1, B=1, theta=0.2)


@pytest.fixture
def oscillator_phys() -> PhysParams:
    return PhysParams(m=1, e=1, B=0.5, omega=0.3, theta=0.1)
