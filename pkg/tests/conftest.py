import numpy as np
import pytest

from weylvd.potential import PotentialSpec, SparseWindowSequence, make_sparse_bump_train


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def zero_potential() -> PotentialSpec:
    return PotentialSpec.zero(200.0, 0.25)


@pytest.fixture
def step_potential() -> PotentialSpec:
    samples = np.zeros(81)
    samples[:20] = 2.0
    samples[20:40] = -1.0
    return PotentialSpec(samples=samples, h=0.25)


@pytest.fixture
def small_bump_train() -> tuple[PotentialSpec, SparseWindowSequence]:
    # x_max = 3 * 1 + 5 * (1 + 2 + 4) = 38
    return make_sparse_bump_train(3.0, 1.0, 2.0, 3, first_gap=5.0, h=0.25)
