"""
Shared fixtures: source path, seeded generators and a quiet configuration
"""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from multireference_alignment.utils.config_manager import ConfigManager, set_config  # noqa: E402


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(autouse=True)
def quiet_config():
    """Install a configuration with logging off; restore the previous one afterwards"""
    config = ConfigManager()
    config.set("logging_settings.enable_logs", False)
    previous = set_config(config)
    yield config
    set_config(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def signal(rng):
    return rng.standard_normal(8)


@pytest.fixture
def distribution(rng):
    weights = rng.uniform(0.1, 1.0, size=8)
    return weights / weights.sum()
