"""Problem instances, action sets, covariance and prior matrices.

Everything here is immutable after construction: numpy arrays are copied
and flagged read-only so instances can be shared across concurrent runs.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    InvalidActionSet,
    InvalidGamma,
    InvalidGammaMatrix,
    NotPositiveSemiDefinite,
    NotSymmetric,
    TooManyActions,
)

TOL_PSD = 1e-10
DOMINANCE_TOL = 1e-9


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check_square(entries, what):
    a = np.asarray(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{what} must be a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch(f"{what} has non-finite entries")
    return a


def _check_sym_psd(a, what):
    if not np.array_equal(a, a.T):
        i, j = np.unravel_index(np.argmax(np.abs(a - a.T)), a.shape)
        raise NotSymmetric(f"{what} is not symmetric: entry ({i},{j}) differs from ({j},{i})")
    if a.size:
        w = np.linalg.eigvalsh(a)
        if w[0] < -TOL_PSD:
            raise NotPositiveSemiDefinite(w[0], what)


@dataclass(frozen=True)
class CovarianceMatrix:
    """Symmetric PSD subgaussian covariance matrix of the reward noise."""

    entries: np.ndarray

    def __post_init__(self):
        a = _check_square(self.entries, "covariance")
        _check_sym_psd(a, "covariance")
        object.__setattr__(self, "entries", _frozen(a))

    @property
    def d(self) -> int:
        return self.entries.shape[0]


def validate_covariance(entries) -> CovarianceMatrix:
    """Validate a square matrix as a covariance; raises NotSymmetric or
    NotPositiveSemiDefinite (carrying the most negative eigenvalue)."""
    return CovarianceMatrix(entries)


@dataclass(frozen=True)
class GammaMatrix:
    """Prior dominance matrix handed to the policy.

    Besides being symmetric PSD, all entries must be nonnegative and
    bounded by the geometric mean of the matching diagonal entries.
    """

    entries: np.ndarray

    def __post_init__(self):
        a = _check_square(self.entries, "gamma matrix")
        _check_sym_psd(a, "gamma matrix")
        if np.any(a < 0):
            raise InvalidGammaMatrix("gamma matrix has negative entries")
        diag = np.diag(a)
        ceiling = np.sqrt(np.outer(diag, diag)) + 1e-12
        if np.any(a > ceiling):
            i, j = np.argwhere(a > ceiling)[0]
            raise InvalidGammaMatrix(
                f"gamma[{i},{j}]={a[i, j]!r} exceeds sqrt(gamma[{i},{i}]*gamma[{j},{j}])"
            )
        object.__setattr__(self, "entries", _frozen(a))

    @classmethod
    def diagonal(cls, values) -> "GammaMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def from_covariance(cls, cov: CovarianceMatrix) -> "GammaMatrix":
        return cls(cov.entries)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    @property
    def diag(self) -> np.ndarray:
        return np.diag(self.entries)

    def correlation(self, i: int, j: int) -> float:
        """Correlation coefficient of arms i and j; 0 when a variance vanishes."""
        den = self.entries[i, i] * self.entries[j, j]
        if den <= 0:
            return 0.0
        return float(self.entries[i, j] / math.sqrt(den))

    def action_correlation(self, arms: Sequence[int]) -> float:
        """Largest off-diagonal correlation of the matrix restricted to ``arms``."""
        best = 0.0
        for a, b in itertools.combinations(arms, 2):
            best = max(best, self.correlation(a, b))
        return best

    def correlation_ceiling(self, actions: "ActionSet") -> float:
        """Static over-approximation of the trajectory correlation ceiling:
        the maximum of ``action_correlation`` over every action."""
        return max(self.action_correlation(a) for a in actions.indices)


@dataclass(frozen=True)
class ActionSet:
    """Explicit, ordered list of actions, each a set of exactly ``m`` arms.

    ``indices`` holds sorted arm tuples, ``incidence`` the matching 0/1
    matrix with one row per action.
    """

    d: int
    m: int
    indices: tuple
    incidence: np.ndarray = field(repr=False, compare=False)

    def __init__(self, d: int, m: int, actions: Iterable):
        rows = []
        for act in actions:
            a = np.asarray(act)
            if a.ndim == 1 and a.shape[0] == d and np.isin(a, (0, 1)).all() and a.dtype != object:
                rows.append(tuple(int(i) for i in np.flatnonzero(a)))
            else:
                raise InvalidActionSet(f"action {act!r} is not a 0/1 vector of length {d}")
        self._setup(d, m, rows)

    @classmethod
    def from_indices(cls, d: int, m: int, actions: Iterable[Iterable[int]]) -> "ActionSet":
        obj = cls.__new__(cls)
        rows = []
        for act in actions:
            arms = sorted(int(i) for i in act)
            if len(set(arms)) != len(arms):
                raise InvalidActionSet(f"action {list(act)!r} repeats an arm")
            if arms and (arms[0] < 0 or arms[-1] >= d):
                raise InvalidActionSet(f"action {list(act)!r} has arms outside [0, {d})")
            rows.append(tuple(arms))
        obj._setup(d, m, rows)
        return obj

    def _setup(self, d, m, rows):
        if not (isinstance(d, (int, np.integer)) and isinstance(m, (int, np.integer))):
            raise InvalidActionSet("d and m must be integers")
        d, m = int(d), int(m)
        if d < 1 or m < 1 or m > d:
            raise InvalidActionSet(f"need 1 <= m <= d, got d={d}, m={m}")
        if not rows:
            raise InvalidActionSet("action set is empty")
        for r in rows:
            if len(r) != m:
                raise InvalidActionSet(f"action {list(r)} has {len(r)} arms, expected m={m}")
        if len(set(rows)) != len(rows):
            raise InvalidActionSet("actions are not pairwise distinct")
        inc = np.zeros((len(rows), d), dtype=np.int8)
        for k, r in enumerate(rows):
            inc[k, list(r)] = 1
        uncovered = np.flatnonzero(inc.sum(axis=0) == 0)
        if uncovered.size:
            raise InvalidActionSet(f"arms {uncovered.tolist()} appear in no action")
        inc.setflags(write=False)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "indices", tuple(rows))
        object.__setattr__(self, "incidence", inc)

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __getitem__(self, k):
        return self.indices[k]


def build_msubsets(d: int, m: int, cap: int = 10**6) -> ActionSet:
    """All m-subsets of range(d) in lexicographic order."""
    if not 1 <= m <= d:
        raise InvalidActionSet(f"need 1 <= m <= d, got d={d}, m={m}")
    n = math.comb(d, m)
    if n > cap:
        raise TooManyActions(f"binomial({d}, {m}) = {n} exceeds cap {cap}")
    return ActionSet.from_indices(d, m, itertools.combinations(range(d), m))


def greedy_init_cover(actions: ActionSet) -> list:
    """Action indices whose union covers every arm.

    Greedy set cover; at each step the action covering the most uncovered
    arms wins, lowest index on ties.
    """
    uncovered = np.ones(actions.d, dtype=bool)
    inc = actions.incidence.astype(bool)
    cover = []
    while uncovered.any():
        gain = (inc & uncovered).sum(axis=1)
        k = int(np.argmax(gain))  # first maximiser
        cover.append(k)
        uncovered &= ~inc[k]
    return cover


@dataclass(frozen=True)
class GapReport:
    action_gaps: np.ndarray
    # NaN where an arm only belongs to optimal actions
    arm_min_gaps: np.ndarray
    delta_min: float | None
    delta_max: float | None
    optimal: tuple

    @property
    def degenerate(self) -> bool:
        return self.delta_min is None


@dataclass(frozen=True)
class ProblemInstance:
    """Ground truth of a semi-bandit problem: means, noise covariance, actions."""

    mu: np.ndarray
    cov: CovarianceMatrix
    actions: ActionSet
    sigma: float | None = None

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        if mu.ndim != 1:
            raise DimensionMismatch("mu must be a vector")
        if not isinstance(self.cov, CovarianceMatrix):
            object.__setattr__(self, "cov", CovarianceMatrix(self.cov))
        if not (mu.shape[0] == self.cov.d == self.actions.d):
            raise DimensionMismatch(
                f"mu has {mu.shape[0]} arms, cov {self.cov.d}, actions {self.actions.d}"
            )
        object.__setattr__(self, "mu", _frozen(mu))
        object.__setattr__(self, "_gaps", compute_gaps(self))

    @property
    def d(self) -> int:
        return self.actions.d

    @property
    def m(self) -> int:
        return self.actions.m

    @property
    def gaps(self) -> GapReport:
        return self._gaps

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "m": self.m,
            "mu": [float(x) for x in self.mu],
            "cov": [[float(x) for x in row] for row in self.cov.entries],
            "actions": [list(a) for a in self.actions.indices],
            "sigma": None if self.sigma is None else float(self.sigma),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProblemInstance":
        actions = ActionSet.from_indices(obj["d"], obj["m"], obj["actions"])
        return cls(
            mu=np.asarray(obj["mu"], dtype=float),
            cov=CovarianceMatrix(obj["cov"]),
            actions=actions,
            sigma=obj.get("sigma"),
        )


def action_means(mu, actions: ActionSet) -> np.ndarray:
    # fsum keeps per-action means correctly rounded
    return np.array([math.fsum(float(mu[i]) for i in a) for a in actions.indices])


def compute_gaps(inst: ProblemInstance) -> GapReport:
    values = action_means(inst.mu, inst.actions)
    best = values.max()
    gaps = best - values
    optimal = tuple(int(k) for k in np.flatnonzero(gaps == 0))
    arm_min = np.full(inst.actions.d, np.nan)
    for k, arms in enumerate(inst.actions.indices):
        g = gaps[k]
        if g > 0:
            for i in arms:
                if not g >= arm_min[i]:  # NaN compares false
                    arm_min[i] = g
    pos = gaps[gaps > 0]
    dmin = float(pos.min()) if pos.size else None
    dmax = float(pos.max()) if pos.size else None
    gaps.setflags(write=False)
    arm_min.setflags(write=False)
    return GapReport(gaps, arm_min, dmin, dmax, optimal)


def block_covariance(n_paths: int, m: int, gamma: float, sigma: float = 1.0) -> np.ndarray:
    """sigma^2 * ((1 - gamma) I + gamma J_blocks) with one m x m block per path."""
    d = n_paths * m
    blocks = np.kron(np.eye(n_paths), np.ones((m, m)))
    return sigma**2 * ((1.0 - gamma) * np.eye(d) + gamma * blocks)


def build_parallel_paths(
    n_paths: int, m: int, gamma: float, sigma: float = 1.0, delta: float = 1.0
) -> ProblemInstance:
    """Disjoint paths of m arms each; path 0 is optimal with mean 0, every
    other path has mean -delta spread evenly as -delta/m per arm."""
    if n_paths < 2:
        raise InvalidActionSet("parallel paths need n_paths >= 2")
    if not 0.0 <= gamma <= 1.0:
        raise InvalidGamma(f"gamma must lie in [0, 1], got {gamma!r}")
    if sigma <= 0 or delta <= 0:
        raise InvalidActionSet("sigma and delta must be positive")
    d = n_paths * m
    actions = ActionSet.from_indices(d, m, [range(p * m, (p + 1) * m) for p in range(n_paths)])
    mu = np.full(d, -delta / m)
    mu[:m] = 0.0
    cov = CovarianceMatrix(block_covariance(n_paths, m, gamma, sigma))
    return ProblemInstance(mu=mu, cov=cov, actions=actions, sigma=float(sigma))


@dataclass(frozen=True)
class DominanceReport:
    passed: bool
    worst_margin: float
    trials: int


def dominance_check(C, G, trials: int, rng: np.random.Generator) -> DominanceReport:
    """Falsification test of v'Cv <= v'Gv on random positive vectors.

    ``worst_margin`` is the smallest observed v'Gv - v'Cv. A pass proves
    nothing; a failure is a certificate.
    """
    c = C.entries if hasattr(C, "entries") else np.asarray(C, dtype=float)
    g = G.entries if hasattr(G, "entries") else np.asarray(G, dtype=float)
    if c.shape != g.shape:
        raise DimensionMismatch(f"shapes {c.shape} and {g.shape} differ")
    v = 1.0 - rng.random((trials, c.shape[0]))  # uniform on (0, 1]
    margin = np.einsum("ki,ij,kj->k", v, g - c, v)
    worst = float(margin.min())
    return DominanceReport(bool(worst >= -DOMINANCE_TOL), worst, trials)
