import math

import pytest

from ratchet_lab.model import EffectivePlanck, RatchetPotential


@pytest.fixture
def pot():
    """Experimental potential: K=1, alpha=0.3, phi=0."""
    return RatchetPotential(K=1.0, alpha=0.3, phi=0.0)


@pytest.fixture
def hbar_res():
    return EffectivePlanck(0.5 * math.pi)


@pytest.fixture
def hbar_offres():
    return EffectivePlanck(0.35 * math.pi)


PAPER_WAVELENGTH = 532e-9
PAPER_PERIOD = 600e-6
PAPER_FOCAL = 0.3
PAPER_REFLECTIVITY = 0.95
PAPER_DISTANCE_HALF_PI = 0.169172
