import os

import pytest
from hypothesis import HealthCheck, settings

from polyground.parser import parse_program
from polyground.typegraph import TypeEnv

PROGRAMS = os.path.join(os.path.dirname(__file__), "..", "src", "polyground", "programs")

settings.register_profile(
    "polyground",
    max_examples=500,
    derandomize=True,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("polyground")


def program_path(name):
    return os.path.join(PROGRAMS, name)


def load(name):
    with open(program_path(name), encoding="utf-8") as fh:
        prog, sig = parse_program(fh.read())
    return prog, sig, TypeEnv(sig)


def env_of(src):
    prog, sig = parse_program(src)
    return prog, sig, TypeEnv(sig)


@pytest.fixture
def lists():
    return load("lists.tlp")


@pytest.fixture
def nests():
    return load("nests.tlp")


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
