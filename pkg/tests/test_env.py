import numpy as np
import pytest

from olsucb import (
    CovarianceMatrix,
    RngStream,
    build_parallel_paths,
    empirical_noise_covariance,
    matrix_sqrt,
    sample_reward,
    sample_rewards,
)
from olsucb.env import parallel_paths_sqrt
from olsucb.model import block_covariance

from conftest import random_psd


class TestMatrixSqrt:
    def test_identity(self):
        np.testing.assert_allclose(matrix_sqrt(CovarianceMatrix(np.eye(3))).sqrt_cov, np.eye(3), atol=1e-15)

    def test_full_block(self):
        s = matrix_sqrt(CovarianceMatrix(np.ones((2, 2)))).sqrt_cov
        np.testing.assert_allclose(s, np.sqrt(2) / 2 * np.ones((2, 2)), atol=1e-12)
        # closed form at gamma=1, m=2 and its square
        closed = parallel_paths_sqrt(1, 2, 1.0)
        np.testing.assert_allclose(closed, np.sqrt(2) / 2 * np.ones((2, 2)), atol=1e-15)
        np.testing.assert_allclose(closed @ closed, np.ones((2, 2)), atol=1e-15)

    @pytest.mark.parametrize("gamma", [0.0, 0.25, 0.5, 0.75, 1.0])
    @pytest.mark.parametrize("m", [2, 3, 5])
    def test_closed_form(self, gamma, m):
        inst = build_parallel_paths(3, m, gamma, 1.0)
        s = matrix_sqrt(inst.cov).sqrt_cov
        assert np.abs(s - parallel_paths_sqrt(3, m, gamma)).max() <= 1e-10

    def test_random_psd(self, rng):
        for _ in range(100):
            d = int(rng.integers(1, 8))
            c = random_psd(rng, d, rank=int(rng.integers(1, d + 1)))
            noise = matrix_sqrt(CovarianceMatrix(c))
            s = noise.sqrt_cov
            assert np.array_equal(s, s.T)
            assert np.abs(s @ s - c).max() <= 1e-8


class TestSampling:
    def test_zero_noise_returns_mean(self):
        inst = build_parallel_paths(2, 2, 0.0)
        inst = type(inst)(inst.mu, CovarianceMatrix(np.zeros((4, 4))), inst.actions)
        noise = matrix_sqrt(inst.cov)
        x = sample_rewards(inst, noise, RngStream(3), 50)
        assert (x == inst.mu).all()

    def test_sample_mean(self):
        inst = build_parallel_paths(2, 2, 0.6, sigma=1.5, delta=0.8)
        noise = matrix_sqrt(inst.cov)
        n = 10**5
        x = sample_rewards(inst, noise, RngStream(11, 2), n)
        assert (np.abs(x.mean(axis=0) - inst.mu) <= 4 * 1.5 / np.sqrt(n)).all()

    def test_determinism(self):
        inst = build_parallel_paths(3, 2, 0.3)
        noise = matrix_sqrt(inst.cov)
        a = [sample_reward(inst, noise, r) for r in [RngStream(5, 1)] for _ in range(10)]
        r2 = RngStream(5, 1)
        b = [sample_reward(inst, noise, r2) for _ in range(10)]
        np.testing.assert_array_equal(a, b)
        assert r2.step_counter == 10

    def test_streams_independent_of_order(self):
        # run 3's stream does not depend on whether runs 0..2 were drawn first
        first = RngStream(99, 3).normals(5, 4)
        for k in range(3):
            RngStream(99, k).normals(100, 4)
        np.testing.assert_array_equal(first, RngStream(99, 3).normals(5, 4))
        assert not np.array_equal(first, RngStream(99, 2).normals(5, 4))
        assert not np.array_equal(first, RngStream(98, 3).normals(5, 4))


class TestEmpiricalCovariance:
    def test_identity(self):
        noise = matrix_sqrt(CovarianceMatrix(np.eye(2)))
        emp = empirical_noise_covariance(noise, 10**5, RngStream(1))
        assert np.abs(emp - np.eye(2)).max() <= 0.05

    def test_block(self):
        c = CovarianceMatrix(block_covariance(1, 2, 0.8))
        emp = empirical_noise_covariance(matrix_sqrt(c), 10**5, RngStream(2))
        assert abs(emp[0, 1] - 0.8) <= 0.05

    def test_zero(self):
        noise = matrix_sqrt(CovarianceMatrix(np.zeros((3, 3))))
        np.testing.assert_array_equal(empirical_noise_covariance(noise, 2, RngStream(0)), np.zeros((3, 3)))
