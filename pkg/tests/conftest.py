import numpy as np
import pytest

from backstep import ControlProfile, Spectrum, SystemSpec


@pytest.fixture(scope="session")
def water():
    return SystemSpec()


@pytest.fixture(scope="session")
def sp64(water):
    return Spectrum.from_spec(water, 64)


@pytest.fixture(scope="session")
def unit64():
    return ControlProfile.unit(64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for res in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(res.line())
