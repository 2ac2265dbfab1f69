import numpy as np
import pytest

from energycast.align import fuse
from energycast.datagen import profile, synth_building


def make_dataset(kind="academic", days=30, seed=42, **overrides):
    return fuse(synth_building(profile(kind, **overrides), days, seed))


@pytest.fixture(scope="session")
def small_academic():
    return make_dataset("academic", 30)


@pytest.fixture(scope="session")
def small_facilities():
    return make_dataset("facilities", 30)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


VERDICTS = []


def record_verdict(line):
    VERDICTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
