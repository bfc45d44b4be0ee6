import sys
from pathlib import Path

import pytest
from hypothesis import settings

from cqcomplete.syntax import parse

settings.register_profile("repo", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repo")

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def load(name: str):
    return parse((SCENARIOS / name).read_text())


@pytest.fixture(scope="session")
def school():
    return load("school.cq")


@pytest.fixture(scope="session")
def conn():
    return load("conn.cq")


@pytest.fixture(scope="session")
def learners():
    return load("learners.cq")


@pytest.fixture(scope="session")
def scenarios_dir():
    return SCENARIOS


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
