import numpy as np
import pytest

from olsucb import GammaMatrix, PolicyConfig, build_parallel_paths
from olsucb._backend import HAVE_KERNEL


def random_psd(rng, d, rank=None):
    m = rng.standard_normal((rank or d, d))
    c = m.T @ m
    return 0.5 * (c + c.T)


def random_gamma(rng, d, diag=None):
    """Valid prior: nonnegative PSD entries with bounded correlations."""
    a = np.abs(rng.standard_normal((d + 1, d)))
    g = a.T @ a
    if diag is not None:
        s = np.sqrt(np.asarray(diag) / np.diag(g))
        g = g * np.outer(s, s)
    g = 0.5 * (g + g.T)
    return GammaMatrix(g)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paths_instance():
    return build_parallel_paths(5, 3, 0.5, 1.0, 1.0)


@pytest.fixture
def ols_true_cov(paths_instance):
    return PolicyConfig.ols_ucb(GammaMatrix.from_covariance(paths_instance.cov), 0.0)


backends = pytest.mark.parametrize(
    "backend",
    ["python", pytest.param("compiled", marks=pytest.mark.skipif(not HAVE_KERNEL, reason="kernel not built"))],
)
