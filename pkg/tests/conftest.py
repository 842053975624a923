import numpy as np
import pytest

from excap.kernels import (
    BrownianSheet,
    GaussianSq,
    IsotropicTabulated,
    LongMemory,
    OrnsteinUhlenbeck,
    Riesz,
    Tabulated1D,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def gauss():
    return GaussianSq(1.0)


@pytest.fixture
def ou():
    return OrnsteinUhlenbeck(1.0)


def _exp_table():
    # an exponential profile sampled finely; well conditioned, so interpolation
    # error does not break positive definiteness
    r = np.linspace(0.0, 6.0, 241)
    return np.column_stack([r, np.exp(-r)]).tolist()


def all_kernels():
    """One instance of each kernel kind, paired with a point sampler."""
    return [
        ("gauss_sq", GaussianSq(0.7)),
        ("gauss_sq_2d", GaussianSq(1.3, dim=2)),
        ("ou", OrnsteinUhlenbeck(2.0)),
        ("long_memory", LongMemory(0.5, 1.5)),
        ("riesz", Riesz(0.4)),
        ("brownian_sheet", BrownianSheet(2)),
        ("iso_tab", IsotropicTabulated(_exp_table(), dim=2)),
        ("tab_1d", Tabulated1D([[0, 1.0], [0.5, 0.8], [2.0, 0.3]])),
    ]
