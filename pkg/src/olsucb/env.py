"""Correlated Gaussian reward sampling and seeded random streams."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure
from .model import TOL_PSD, CovarianceMatrix, ProblemInstance

SQRT_TOL = 1e-8


@dataclass(frozen=True)
class NoiseModel:
    sqrt_cov: np.ndarray
    source_cov: CovarianceMatrix


def matrix_sqrt(C: CovarianceMatrix) -> NoiseModel:
    """Symmetric PSD square root by eigendecomposition.

    Eigenvalues with magnitude at most TOL_PSD are set to exactly zero, so
    round-off in the null space of a singular C does not surface as
    sqrt(1e-16) = 1e-8 entries in the root.
    """
    c = C.entries
    try:
        w, v = np.linalg.eigh(c)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(f"eigendecomposition failed: {exc}") from exc
    if w.size and w[0] < -TOL_PSD:
        raise EigenFailure(f"eigenvalue {w[0]!r} below tolerance")
    w = np.where(np.abs(w) <= TOL_PSD, 0.0, w)
    s = (v * np.sqrt(w)) @ v.T
    s = 0.5 * (s + s.T)
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    if np.abs(s @ s - c).max(initial=0.0) > SQRT_TOL * scale:
        raise EigenFailure("square root does not reproduce the covariance")
    s.setflags(write=False)
    return NoiseModel(s, C)


def parallel_paths_sqrt(n_paths: int, m: int, gamma: float, sigma: float = 1.0) -> np.ndarray:
    """Closed-form square root of the block covariance used by parallel paths."""
    d = n_paths * m
    blocks = np.kron(np.eye(n_paths), np.ones((m, m)))
    root = np.sqrt(1.0 - gamma) * np.eye(d) + (
        np.sqrt(1.0 + gamma * (m - 1)) - np.sqrt(1.0 - gamma)
    ) / m * blocks
    return sigma * root


class RngStream:
    """Random stream owned by one run.

    The stream is a pure function of ``(master_seed, run_index)``: a Philox
    generator keyed from a SeedSequence with the run index as spawn key, so
    run k draws the same numbers whatever else executes alongside it.
    ``step_counter`` counts reward vectors drawn so far.
    """

    def __init__(self, master_seed: int, run_index: int = 0):
        self.master_seed = int(master_seed)
        self.run_index = int(run_index)
        self.step_counter = 0
        ss = np.random.SeedSequence(self.master_seed, spawn_key=(self.run_index,))
        self.generator = np.random.Generator(np.random.Philox(ss))

    def normals(self, n: int, d: int) -> np.ndarray:
        self.step_counter += n
        return self.generator.standard_normal((n, d))

    def __repr__(self):
        return (
            f"RngStream(master_seed={self.master_seed}, run_index={self.run_index}, "
            f"step_counter={self.step_counter})"
        )


def sample_rewards(inst: ProblemInstance, noise: NoiseModel, rng: RngStream, n: int) -> np.ndarray:
    """``n`` full reward vectors mu + C^{1/2} eps, one per row."""
    eps = rng.normals(n, inst.d)
    # rows of eps @ S equal (S eps)^T because S is symmetric
    return inst.mu + eps @ noise.sqrt_cov


def sample_reward(inst: ProblemInstance, noise: NoiseModel, rng: RngStream) -> np.ndarray:
    return sample_rewards(inst, noise, rng, 1)[0]


def empirical_noise_covariance(noise: NoiseModel, n_samples: int, rng: RngStream) -> np.ndarray:
    """Sample covariance of ``n_samples`` draws of C^{1/2} eps."""
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    d = noise.sqrt_cov.shape[0]
    eta = rng.normals(n_samples, d) @ noise.sqrt_cov
    return np.atleast_2d(np.cov(eta, rowvar=False))
