import os
import sys

import numpy as np
import pytest

# Add app to path
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.schemas.params import BlockMaximaSample, ExcessSample
from app.schemas.propriety import QuadConfig


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def excesses3():
    return ExcessSample(excesses=[1.0, 2.0, 3.0])


@pytest.fixture
def maxima4():
    return BlockMaximaSample(maxima=[0.0, 1.0, 2.0, 4.0])


@pytest.fixture
def quad_cfg():
    return QuadConfig(
        xi_half_width=4.0, log_u_half_width=4.0, doubling_limit=12,
        cell_tol=1e-8, growth_factor=1.01, cell_limit=200,
    )
