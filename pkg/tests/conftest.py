import numpy as np
import pytest

from sqcorr import HyperParams, ModeParams


@pytest.fixture
def h4() -> HyperParams:
    """Hyperparameters of the fourth-harmonic reference dataset."""
    return HyperParams(B=0.471, mu=0.4226, alpha=0.127, n_th=0.001, d=50)


@pytest.fixture
def h5() -> HyperParams:
    """Hyperparameters of the fifth-harmonic reference dataset."""
    return HyperParams(B=0.397, mu=0.32, alpha=0.161, n_th=0.001, d=50)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260814)


@pytest.fixture
def thermal_mode() -> ModeParams:
    return ModeParams(n_th=0.5)
