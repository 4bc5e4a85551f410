import mpmath
import pytest
from hypothesis import settings

settings.register_profile("mpde", deadline=None, max_examples=40)
settings.load_profile("mpde")


@pytest.fixture(autouse=True)
def precision_256():
    """Pin the working precision for every test."""
    old = mpmath.mp.prec
    mpmath.mp.prec = 256
    yield
    mpmath.mp.prec = old
