import os

import numpy as np
import pytest
from hypothesis import settings

from z2hubbard.encoder import ModelParams
from z2hubbard.lattice import LatticeSpec, build_layout

settings.register_profile("default", deadline=None, max_examples=60)
settings.register_profile("ci", deadline=None, max_examples=200)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow") or os.environ.get("Z2HUBBARD_RUN_SLOW"):
        return
    skip = pytest.mark.skip(reason="slow; enable with --run-slow or Z2HUBBARD_RUN_SLOW=1")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def layout22():
    return build_layout(LatticeSpec(2, 2))


@pytest.fixture(scope="session")
def layout22x():
    return build_layout(LatticeSpec(2, 2), extra_rishon=True)


@pytest.fixture(scope="session")
def layout21():
    return build_layout(LatticeSpec(2, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def params():
    return ModelParams(t=0.1, U=1.0, Ntarget=4)
