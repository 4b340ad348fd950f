from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def so3_benchmark_config():
    from liesync.experiment import load_config_file
    return load_config_file(FIXTURES / "so3_three_agent.cfg")


@pytest.fixture(scope="session")
def so3_gradient_config():
    from liesync.experiment import load_config_file
    return load_config_file(FIXTURES / "so3_three_agent_gradient.cfg")


@pytest.fixture(scope="session")
def se3_benchmark_config():
    from liesync.experiment import load_config_file
    return load_config_file(FIXTURES / "se3_three_agent.cfg")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
