from pathlib import Path

import numpy as np
import pytest

from sinr_ldp.config.kernel import KernelConfig
from sinr_ldp.config.model import DomainConfig, ModelConfig
from sinr_ldp.empirical import Partition, make_partition
from sinr_ldp.types import PoweredPointSet

CONFIGS_PATH = Path(__file__).parent.parent / "configs"


@pytest.fixture
def configs_path() -> Path:
    return CONFIGS_PATH


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(42)


@pytest.fixture
def unit_square() -> DomainConfig:
    return DomainConfig(lows=(0.0, 0.0), highs=(1.0, 1.0))


@pytest.fixture
def single_bin(unit_square: DomainConfig) -> Partition:
    return make_partition(unit_square, float("inf"), 1, 1)


@pytest.fixture
def constant_kernel() -> KernelConfig:
    # Q = a_λ κ = 0.99 at λ = 4 with the default a_λ = λ^{-1/2}
    return KernelConfig(kappa=1.98, theta=0.0)


@pytest.fixture
def model() -> ModelConfig:
    return ModelConfig()


@pytest.fixture
def four_points() -> PoweredPointSet:
    return PoweredPointSet(
        locations=np.array([[0.1, 0.2], [0.8, 0.3], [0.4, 0.9], [0.6, 0.6]]),
        powers=np.array([0.5, 1.0, 1.5, 2.0]),
    )


@pytest.fixture
def two_bins(unit_square: DomainConfig) -> Partition:
    # one cell, one regular power bin and the overflow bin
    return make_partition(unit_square, 1.0, 1, 1)
