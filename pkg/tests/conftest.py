import numpy as np
import pytest

from pairml import DgpConfig, Theta, generate_pair_sample


def make_sample(q, beta, sigma2, psi, seed, k=None):
    """Draw a pair sample from the exact pair-level DGP."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if k is None:
        k = beta.shape[0]
    config = DgpConfig(q=q, theta=Theta(beta=beta, sigma2=sigma2, psi=psi),
                       seed=seed, k=k)
    return generate_pair_sample(config)


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)
