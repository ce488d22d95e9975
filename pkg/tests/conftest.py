import mpmath
import pytest


@pytest.fixture(autouse=True)
def working_precision():
    """All tests run at the default 60 significant digits."""
    with mpmath.workdps(60):
        yield
