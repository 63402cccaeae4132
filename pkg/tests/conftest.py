import pytest

from convexent.numerics import SeededStream


@pytest.fixture
def stream():
    return SeededStream(42, "test")
