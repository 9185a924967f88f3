import sys

import pytest

from flie.mission import run_mission
from flie.world import bundled_scenario

REFERENCE_SCENARIOS = ("reference_box", "flat_wall", "two_structures")


@pytest.fixture(scope="session")
def missions():
    """Completed runs of the bundled scenarios, keyed by name."""
    out = {}
    for name in REFERENCE_SCENARIOS + ("empty",):
        scene = bundled_scenario(name)
        state, log = run_mission(scene)
        out[name] = (scene, state, log)
    return out



def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
