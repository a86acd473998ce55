import math

import pytest
from hypothesis import settings

from moddist.generators import ModularDistanceParams

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

# every coprime p < q <= 5
PQ_SWEEP = [(p, q) for q in range(2, 6) for p in range(1, q) if math.gcd(p, q) == 1]


@pytest.fixture
def odd():
    """The odd-distance case p = 1, q = 2, k = 1."""
    return ModularDistanceParams(1, 2, 1)
