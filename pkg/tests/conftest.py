import pytest

from channel_models import GainDistribution, PlayerModel
from config import db_to_linear
from equilibrium import find_fixed_points, interior_points

HIGH_POWER = 1e4   # 40 dB


def rayleigh_player(isr_bar: float, power_scale: float = 1.0) -> PlayerModel:
    return PlayerModel(GainDistribution.rayleigh(1.0), GainDistribution.rayleigh(isr_bar), power_scale)


@pytest.fixture
def symmetric_player():
    return rayleigh_player(1.0, HIGH_POWER)


@pytest.fixture
def strong_player():
    """Cross link 6 dB below the direct link."""
    return rayleigh_player(db_to_linear(-6.0), HIGH_POWER)


@pytest.fixture(scope="session")
def symmetric_point():
    p = rayleigh_player(1.0, HIGH_POWER)
    interior = interior_points(find_fixed_points(p, p))
    return min(interior, key=lambda pt: abs(pt.a1 - 0.5))
