"""Policy state, OLS estimates, exploration widths and action selection.

Scalar arithmetic here is written as explicit loops in a fixed order. The
compiled episode kernel (``_kernel.pyx``) repeats the same operations in
the same order, so both backends pick bit-identical action sequences.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidValue, MaskMismatch, UnpulledArm
from .model import ActionSet, GammaMatrix

UNEXPLORED = float("nan")
ESCB2_DEFAULT_DIAG = 0.5


class PolicyKind(str, enum.Enum):
    OLS_UCB = "ols_ucb"
    ESCB2 = "escb2"
    COMB_UCB1 = "comb_ucb1"


@dataclass(frozen=True)
class PolicyConfig:
    """Policy parameters.

    ``gamma_matrix`` and ``lam`` are used by OLS-UCB, ``diag`` by ESCB-2
    (per-arm variance proxies). CombUCB1 uses neither.
    """

    kind: PolicyKind
    gamma_matrix: GammaMatrix | None = None
    lam: float = 0.0
    diag: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if not self.lam >= 0:
            raise InvalidValue("policy.lambda", "must be >= 0")
        if self.kind is PolicyKind.OLS_UCB and self.gamma_matrix is None:
            raise InvalidValue("policy.gamma", "OLS-UCB needs a gamma matrix")
        if self.kind is PolicyKind.ESCB2:
            if self.diag is None:
                raise InvalidValue("policy.gamma", "ESCB-2 needs per-arm variance proxies")
            diag = np.array(self.diag, dtype=float)
            if np.any(diag <= 0):
                raise InvalidValue("policy.gamma", "ESCB-2 variance proxies must be positive")
            diag.setflags(write=False)
            object.__setattr__(self, "diag", diag)

    @classmethod
    def ols_ucb(cls, gamma_matrix: GammaMatrix, lam: float = 0.0) -> "PolicyConfig":
        return cls(PolicyKind.OLS_UCB, gamma_matrix=gamma_matrix, lam=lam)

    @classmethod
    def escb2(cls, d: int, diag=None) -> "PolicyConfig":
        if diag is None:
            diag = np.full(d, ESCB2_DEFAULT_DIAG)
        return cls(PolicyKind.ESCB2, diag=diag)

    @classmethod
    def comb_ucb1(cls) -> "PolicyConfig":
        return cls(PolicyKind.COMB_UCB1)


@dataclass
class PolicyState:
    """Everything a policy has observed before stage ``t``."""

    t: int
    pulls: np.ndarray
    pair_pulls: np.ndarray
    reward_sums: np.ndarray = field(repr=False)

    @classmethod
    def fresh(cls, d: int) -> "PolicyState":
        return cls(
            t=1,
            pulls=np.zeros(d, dtype=np.int64),
            pair_pulls=np.zeros((d, d), dtype=np.int64),
            reward_sums=np.zeros(d),
        )

    @property
    def d(self) -> int:
        return self.pulls.shape[0]


def f_confidence(t: int, m: int, lam: float = 0.0) -> float:
    """Confidence level log t + (m+2) log log t [+ (m/2) log(1 + e/lam)].

    The log-log factor is clamped to log(max(log t, 1)); the lambda term is
    dropped when lam == 0.
    """
    lt = math.log(t)
    val = lt + (m + 2) * math.log(max(lt, 1.0))
    if lam > 0:
        val += (m / 2) * math.log(1.0 + math.e / lam)
    return val


def ols_estimate(state: PolicyState) -> np.ndarray:
    """Per-arm empirical means; ``UNEXPLORED`` (NaN) for arms never pulled."""
    est = np.full(state.d, UNEXPLORED)
    seen = state.pulls > 0
    est[seen] = state.reward_sums[seen] / state.pulls[seen]
    return est


def _require_pulled(state, arms):
    for i in arms:
        if state.pulls[i] < 1:
            raise UnpulledArm(f"arm {i} has not been pulled")


def exploration_width(state: PolicyState, A, cfg: PolicyConfig, f_t: float) -> float:
    """OLS-UCB width sqrt(2 f_t Q) where

    Q = lam * sum_i G_ii / n_i + sum_{i,j in A} n_ij G_ij / (n_i n_j).
    """
    _require_pulled(state, A)
    g = cfg.gamma_matrix.entries
    pulls = state.pulls
    pair = state.pair_pulls
    s_lam = 0.0
    for i in A:
        s_lam += g[i, i] / pulls[i]
    s_pair = 0.0
    for i in A:
        for j in A:
            s_pair += pair[i, j] * g[i, j] / (pulls[i] * pulls[j])
    q = cfg.lam * s_lam + s_pair
    return math.sqrt(2.0 * f_t * q)


def escb2_width(state: PolicyState, A, diag, f_t: float) -> float:
    _require_pulled(state, A)
    s = 0.0
    for i in A:
        s += diag[i] / state.pulls[i]
    return math.sqrt(2.0 * f_t * s)


def combucb1_width(state: PolicyState, A, t: int) -> float:
    """sqrt(1.5 log t) * sum_i 1/sqrt(n_i), zero at t = 1."""
    _require_pulled(state, A)
    lt = math.log(t) if t > 1 else 0.0
    s = 0.0
    for i in A:
        s += 1.0 / math.sqrt(state.pulls[i])
    return math.sqrt(1.5 * lt) * s


def _mean_sum(state, A):
    s = 0.0
    for i in A:
        s += state.reward_sums[i] / state.pulls[i]
    return s


def index_value(state: PolicyState, A, cfg: PolicyConfig, f_t: float | None = None) -> float:
    """Optimistic index of action ``A``: empirical mean plus exploration width.

    ``f_t`` defaults to ``f_confidence(state.t, |A|, cfg.lam)``.
    """
    _require_pulled(state, A)
    if cfg.kind is PolicyKind.COMB_UCB1:
        width = combucb1_width(state, A, state.t)
    else:
        if f_t is None:
            f_t = f_confidence(state.t, len(A), cfg.lam)
        if cfg.kind is PolicyKind.ESCB2:
            width = escb2_width(state, A, cfg.diag, f_t)
        else:
            width = exploration_width(state, A, cfg, f_t)
    return _mean_sum(state, A) + width


def select_action(state: PolicyState, actions: ActionSet, cfg: PolicyConfig, f_t: float) -> int:
    """Exhaustive argmax of the index; the lowest action index wins ties."""
    best_k = -1
    best = -math.inf
    for k, A in enumerate(actions.indices):
        v = index_value(state, A, cfg, f_t)
        if v > best or best_k < 0:
            best_k, best = k, v
    return best_k


def update_state(state: PolicyState, A, observed) -> PolicyState:
    """Record one stage of semi-bandit feedback.

    ``observed`` is a length-d vector that is NaN everywhere except on the
    arms of ``A``. The state is updated in place and returned.
    """
    observed = np.asarray(observed, dtype=float)
    support = tuple(np.flatnonzero(~np.isnan(observed)).tolist())
    if support != tuple(sorted(A)):
        raise MaskMismatch(f"observed support {support} differs from action {tuple(A)}")
    for i in A:
        state.pulls[i] += 1
        state.reward_sums[i] += observed[i]
        for j in A:
            state.pair_pulls[i, j] += 1
    state.t += 1
    return state


@dataclass(frozen=True)
class VarianceSplit:
    quadratic: float
    independent_term: float
    coupled_term: float
    gamma_A: float

    @property
    def holds(self) -> bool:
        return self.quadratic <= self.independent_term + self.coupled_term + 1e-9


def variance_split(state: PolicyState, A, G: GammaMatrix) -> VarianceSplit:
    """Both sides of the bound splitting the pair-count quadratic form into
    an independent-arms part and a fully-coupled part."""
    _require_pulled(state, A)
    g = G.entries
    n = state.pulls
    quad = 0.0
    for i in A:
        for j in A:
            quad += state.pair_pulls[i, j] * g[i, j] / (n[i] * n[j])
    gamma_a = G.action_correlation(A)
    indep = 0.0
    root = 0.0
    for i in A:
        indep += g[i, i] / n[i]
        root += math.sqrt(g[i, i] / n[i])
    return VarianceSplit(quad, (1.0 - gamma_a) * indep, gamma_a * root * root, gamma_a)
