"""Shared fixtures: small Gram matrices and a cheap solver profile."""

import numpy as np
import pytest

from lasso_audit import DEFAULT_CONFIG, GramMatrix


@pytest.fixture(scope="session")
def fast_config():
    # enough accuracy for unit tests at a fraction of the default budget
    return DEFAULT_CONFIG.reduced()


@pytest.fixture(scope="session")
def identity4():
    return GramMatrix(np.eye(4))


@pytest.fixture(scope="session")
def equicorr4():
    sigma = np.full((4, 4), 0.5)
    np.fill_diagonal(sigma, 1.0)
    return GramMatrix(sigma)


def random_gram(rng, p, jitter=0.05):
    """Random nonsingular PSD matrix with unit diagonal."""
    a = rng.standard_normal((p, p))
    sigma = a.T @ a / p + jitter * np.eye(p)
    d = np.sqrt(np.diag(sigma))
    sigma = sigma / np.outer(d, d)
    return GramMatrix((sigma + sigma.T) / 2.0)
