import pytest
import structlog


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: full-scale statistical sweeps (deselect with -m 'not slow')"
    )


@pytest.fixture(autouse=True)
def _reset_structlog():
    # CLI runs bind structlog to the (captured, later closed) stderr of that test.
    yield
    structlog.reset_defaults()
