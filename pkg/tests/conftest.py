import numpy as np
import pytest

from tscircle import AscentConfig, ascend, build_tensor


@pytest.fixture(scope="session")
def tensor8():
    # shared spectral-weight cache; ~1 s to build, reused across modules
    return build_tensor(8)


@pytest.fixture(scope="session")
def extremizer16():
    res = ascend(config=AscentConfig(n=16, seed=0))
    assert res.converged
    return res


@pytest.fixture()
def rng():
    return np.random.default_rng(20260815)
