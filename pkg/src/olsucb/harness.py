"""Seeded episodes, cross-run aggregation and parameter sweeps."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import _backend, _fallback
from .env import NoiseModel, RngStream, matrix_sqrt, sample_rewards
from .errors import HorizonTooShort, InvalidValue
from .model import GammaMatrix, ProblemInstance, build_parallel_paths, greedy_init_cover
from .policies import PolicyConfig, PolicyKind, f_confidence

_KIND_CODES = {PolicyKind.OLS_UCB: 0, PolicyKind.ESCB2: 1, PolicyKind.COMB_UCB1: 2}


@dataclass(frozen=True)
class ParallelPathsSpec:
    n_paths: int = 5
    m: int = 3
    gamma: float = 0.0
    sigma: float = 1.0
    delta: float = 1.0

    def build(self) -> ProblemInstance:
        return build_parallel_paths(self.n_paths, self.m, self.gamma, self.sigma, self.delta)


@dataclass(frozen=True)
class ExperimentConfig:
    instance: ProblemInstance
    policy: PolicyConfig
    T: int
    n_runs: int = 1
    master_seed: int = 0
    record_stride: int = 10
    # set when the instance came from the parallel-paths family; needed by sweep
    paths: ParallelPathsSpec | None = None

    def __post_init__(self):
        if self.T < 1:
            raise InvalidValue("T", "must be >= 1")
        if self.n_runs < 1:
            raise InvalidValue("n_runs", "must be >= 1")
        if self.record_stride < 1:
            raise InvalidValue("record_stride", "must be >= 1")
        k = len(greedy_init_cover(self.instance.actions))
        if self.T < k:
            raise HorizonTooShort(f"T={self.T} is shorter than the {k}-stage initialization")

    def stages(self) -> np.ndarray:
        s = list(range(0, self.T + 1, self.record_stride))
        if s[-1] != self.T:
            s.append(self.T)
        return np.array(s, dtype=np.int64)


@dataclass(frozen=True)
class RegretCurve:
    """Cumulative pseudo-regret at recorded stages, per run and aggregated.

    ``std`` is the sample standard deviation across runs (0 for one run).
    """

    stages: np.ndarray
    per_run: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_runs(self) -> int:
        return self.per_run.shape[0]

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_std(self) -> float:
        return float(self.std[-1])

    @classmethod
    def from_runs(cls, stages, rows) -> "RegretCurve":
        per_run = np.vstack(rows)
        mean = per_run.mean(axis=0)
        if per_run.shape[0] > 1:
            std = per_run.std(axis=0, ddof=1)
        else:
            std = np.zeros_like(mean)
        return cls(stages, per_run, mean, std)


@dataclass(frozen=True)
class Episode:
    chosen: np.ndarray
    curve: RegretCurve


def f_table(T: int, m: int, lam: float) -> np.ndarray:
    """f(t) for t = 0..T; entry 0 is unused."""
    tab = np.zeros(T + 1)
    for t in range(1, T + 1):
        tab[t] = f_confidence(t, m, lam)
    return tab


def play(
    inst: ProblemInstance,
    cfg: PolicyConfig,
    rewards: np.ndarray,
    ftab: np.ndarray | None = None,
    backend: str | None = None,
    observer=None,
) -> np.ndarray:
    """Run the initialization cover then index-driven stages over ``rewards``
    (one full reward vector per stage); returns chosen action indices.

    The policy only ever sees rewards masked to its chosen action.
    """
    T = rewards.shape[0]
    cover = greedy_init_cover(inst.actions)
    if T < len(cover):
        raise HorizonTooShort(f"T={T} is shorter than the {len(cover)}-stage initialization")
    if ftab is None:
        ftab = f_table(T, inst.m, cfg.lam)
    backend = "python" if observer is not None else _backend.resolve(backend)
    if backend == "python":
        return _fallback.run_choices(inst.actions, rewards, cfg, ftab, cover, observer)
    d = inst.d
    if cfg.kind is PolicyKind.OLS_UCB:
        gamma = np.ascontiguousarray(cfg.gamma_matrix.entries, dtype=float)
    else:
        gamma = np.zeros((d, d))
    diag = np.ascontiguousarray(cfg.diag if cfg.diag is not None else np.zeros(d), dtype=float)
    act_idx = np.array(inst.actions.indices, dtype=np.int64)
    return _backend._kernel.run_choices(
        act_idx,
        np.ascontiguousarray(rewards, dtype=float),
        gamma,
        diag,
        float(cfg.lam),
        _KIND_CODES[cfg.kind],
        np.ascontiguousarray(ftab, dtype=float),
        np.array(cover, dtype=np.int64),
    )


def _episode(cfg: ExperimentConfig, run_index, noise, ftab, backend, observer=None):
    rng = RngStream(cfg.master_seed, run_index)
    rewards = sample_rewards(cfg.instance, noise, rng, cfg.T)
    chosen = play(cfg.instance, cfg.policy, rewards, ftab, backend, observer)
    regret = np.concatenate(([0.0], np.cumsum(cfg.instance.gaps.action_gaps[chosen])))
    return chosen, regret[cfg.stages()]


def run_episode(
    cfg: ExperimentConfig, run_index: int, backend: str | None = None, observer=None
) -> Episode:
    """One seeded run; its reward stream depends only on (master_seed, run_index)."""
    noise = matrix_sqrt(cfg.instance.cov)
    ftab = f_table(cfg.T, cfg.instance.m, cfg.policy.lam)
    chosen, row = _episode(cfg, run_index, noise, ftab, backend, observer)
    return Episode(chosen, RegretCurve.from_runs(cfg.stages(), [row]))


def run_experiment(cfg: ExperimentConfig, n_jobs: int = 1, backend: str | None = None) -> RegretCurve:
    """``cfg.n_runs`` independent episodes aggregated in run-index order.

    With ``n_jobs > 1`` episodes run on a thread pool; the output does not
    depend on ``n_jobs``.
    """
    noise: NoiseModel = matrix_sqrt(cfg.instance.cov)
    ftab = f_table(cfg.T, cfg.instance.m, cfg.policy.lam)
    backend = _backend.resolve(backend)

    def one(k):
        return _episode(cfg, k, noise, ftab, backend)[1]

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            rows = list(pool.map(one, range(cfg.n_runs)))
    else:
        rows = [one(k) for k in range(cfg.n_runs)]
    return RegretCurve.from_runs(cfg.stages(), rows)


@dataclass(frozen=True)
class SweepRow:
    m: int
    gamma: float
    final_mean_regret: float
    final_std_regret: float
    n_runs: int


def policy_for_instance(policy: PolicyConfig, inst: ProblemInstance) -> PolicyConfig:
    """Re-derive the policy prior for a rebuilt instance: OLS-UCB gets the
    true covariance as its gamma matrix, ESCB-2 keeps a uniform proxy."""
    if policy.kind is PolicyKind.OLS_UCB:
        return replace(policy, gamma_matrix=GammaMatrix.from_covariance(inst.cov))
    if policy.kind is PolicyKind.ESCB2:
        return replace(policy, diag=np.full(inst.d, float(policy.diag[0])))
    return policy


def sweep(
    base: ExperimentConfig,
    gamma_grid,
    m_grid,
    n_jobs: int = 1,
    backend: str | None = None,
) -> list[SweepRow]:
    """Final mean regret over a (m, gamma) grid of parallel-paths instances,
    m in the outer loop."""
    if base.paths is None:
        raise InvalidValue("instance.kind", "sweep requires a parallel_paths instance")
    rows = []
    for m in m_grid:
        for g in gamma_grid:
            spec = replace(base.paths, m=int(m), gamma=float(g))
            inst = spec.build()
            cfg = replace(base, instance=inst, policy=policy_for_instance(base.policy, inst), paths=spec)
            curve = run_experiment(cfg, n_jobs=n_jobs, backend=backend)
            rows.append(SweepRow(int(m), float(g), curve.final_mean, curve.final_std, cfg.n_runs))
    return rows
