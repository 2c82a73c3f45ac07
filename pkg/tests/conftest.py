import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cptsim.materials import default_registry  # noqa: E402


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def air(registry):
    return registry.lookup("air")


@pytest.fixture(scope="session")
def water(registry):
    return registry.lookup("water")


@pytest.fixture(scope="session")
def glass(registry):
    return registry.lookup("glass")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS):
        terminalreporter.write_line(line)
