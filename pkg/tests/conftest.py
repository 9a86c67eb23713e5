"""Shared fixtures: the two epidemic fixtures and their solved profiles.

The profile solves are session-scoped; the heavy acceptance experiments
reuse them instead of re-solving.
"""

import numpy as np
import pytest

from latticefronts import (CharParams, make_holling2_model, make_ricker_model,
                           solve_profile)

HOLLING_PARAMS = dict(a1=1.0, a2=1.0, d1=1.0, d2=1.0, alpha1=2.0, alpha2=2.0,
                      beta1=1.0, beta2=1.0, gamma1=1.0, gamma2=1.0)
RICKER_PARAMS = dict(a=0.5, a1=1.0, a2=1.0, d1=1.0, d2=1.0, p=4.0, q=1.0,
                     m=1.0)


@pytest.fixture(scope="session")
def holling():
    return make_holling2_model(**HOLLING_PARAMS)


@pytest.fixture(scope="session")
def ricker():
    return make_ricker_model(**RICKER_PARAMS)


@pytest.fixture(scope="session")
def holling_params(holling):
    return CharParams.from_system(holling)


@pytest.fixture(scope="session")
def holling_profile(holling):
    """The standing fixture: c = 1.1*c_star, m = 10, L = 40, tol 1e-8."""
    return solve_profile(holling, c_multiplier=1.1, m=10, L=40.0, tol=1e-8,
                         max_iter=2000)


@pytest.fixture(scope="session")
def ricker_profile(ricker):
    return solve_profile(ricker, c_multiplier=1.2, m=10, L=40.0, tol=1e-8,
                         max_iter=2000)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260809)
