import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mrnldp import Alphabet, ModelSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def two_type_spec():
    return ModelSpec(Alphabet(("a", "b")), np.array([0.5, 0.5]),
                     np.array([[1.0, 2.0], [2.0, 1.0]]), 4)


@pytest.fixture
def asym_spec():
    return ModelSpec(Alphabet(("a", "b")), np.array([0.4, 0.6]),
                     np.array([[1.0, 3.0], [0.5, 2.0]]), 4, symmetric=False)


_CRITERIA = []


@pytest.fixture
def criterion(capsys):
    """Record and print one acceptance line: ``criterion(k, ok, detail)``."""

    def record(k, ok, detail):
        line = f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append((k, line))
        with capsys.disabled():
            print("\n" + line)

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
