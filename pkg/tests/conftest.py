"""Shared fixtures: small grids and a band-limited random field factory."""

import numpy as np
import pytest

from nsch import Grid, PotentialParams, ScalarField

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def torus32():
    return Grid("periodic_torus", TWO_PI, TWO_PI, 32, 32)


@pytest.fixture(scope="session")
def torus64():
    return Grid("periodic_torus", TWO_PI, TWO_PI, 64, 64)


@pytest.fixture(scope="session")
def torus128():
    return Grid("periodic_torus", TWO_PI, TWO_PI, 128, 128)


@pytest.fixture(scope="session")
def rect32():
    return Grid("neumann_rectangle", 1.0, 1.5, 32, 48)


@pytest.fixture(scope="session")
def pp():
    return PotentialParams(theta=1.0, theta_c=2.0)


@pytest.fixture(scope="session")
def band_limited():
    """Factory for random real fields supported strictly inside radius K.

    Triple products of radius-K fields stay alias-free whenever 3K < N, so
    tests of cubic terms pick K accordingly.
    """

    def make(grid, K, seed, amp=1.0, mean=0.0):
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((grid.Nx, grid.Ny))
        hat = grid.to_hat(noise) * grid.trunc_mask(K)
        hat[0, 0] = 0.0
        f = grid.to_phys(hat)
        sup = float(np.max(np.abs(f)))
        if sup > 0:
            f = f * (amp / sup)
        return ScalarField(grid, phys=f + mean)

    return make
