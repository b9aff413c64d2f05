"""Closed-form regret bound evaluators.

These are reference curves for plots and sanity checks, not proofs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInstance, NonPositiveLambda, NotDivisible, UndefinedGap
from .policies import f_confidence


@dataclass(frozen=True)
class BoundReport:
    value: float
    per_arm_terms: list | None = None
    parameters: dict = field(default_factory=dict)
    note: str | None = None

    def to_json(self) -> dict:
        out = {"value": self.value, "parameters": self.parameters}
        if self.per_arm_terms is not None:
            out["per_arm_terms"] = self.per_arm_terms
        if self.note:
            out["note"] = self.note
        return out


def positive_ceil(x: float) -> int:
    """Smallest positive integer >= x, so that ceil(0) == 1."""
    return max(1, math.ceil(x))


def lower_bound_rate(d: int, m: int, sigma: float, delta: float, gamma: float) -> float:
    """Asymptotic regret per log t any consistent policy pays on parallel paths:
    (1 + gamma (m-1)) * 2 sigma^2 (d - m) / delta."""
    if d <= m:
        raise DegenerateInstance(f"need d > m, got d={d}, m={m}")
    if d % m:
        raise NotDivisible(f"d={d} is not a multiple of m={m}")
    return (1 + gamma * (m - 1)) * 2 * sigma**2 * (d - m) / delta


def kl_gaussian_paths(delta: float, sigma: float, m: int, gamma: float) -> float:
    """KL divergence between a suboptimal and the optimal path reward:
    two Gaussians with common variance sigma^2 m (1 + gamma (m-1))."""
    var = sigma**2 * m * (1 + gamma * (m - 1))
    return delta**2 / (2 * var)


def correlation_bracket(m: int, lam: float, gamma: float) -> float:
    """5 (lam + 1 - gamma) ceil(log m / 1.6)^2 + 45 gamma m, natural log."""
    c = positive_ceil(math.log(m) / 1.6)
    return 5 * (lam + 1 - gamma) * c**2 + 45 * gamma * m


def theorem2_upper_bound(
    G,
    gaps,
    C_diag_max: float,
    delta_min: float,
    delta_max: float,
    T: int,
    m: int,
    lam: float,
    gamma: float,
    d: int,
) -> BoundReport:
    """Finite-time OLS-UCB regret bound.

    ``gaps`` holds per-arm minimal gaps; NaN or None marks an arm that only
    belongs to optimal actions, which contributes nothing to the sum.
    """
    if not lam > 0:
        raise NonPositiveLambda("the finite-time bound requires lambda > 0")
    if delta_min is None or delta_max is None or not delta_min > 0:
        raise UndefinedGap("delta_min must be defined and positive")
    g = G.entries if hasattr(G, "entries") else np.asarray(G, dtype=float)
    lead = 16 * f_confidence(T, m, lam) * correlation_bracket(m, lam, gamma)
    terms = []
    total = 0.0
    for i in range(d):
        gi = gaps[i]
        if gi is None or math.isnan(gi):
            terms.append(0.0)
            continue
        if gi <= 0:
            raise UndefinedGap(f"arm {i} has non-positive minimal gap {gi!r}")
        term = lead * g[i, i] / gi
        terms.append(term)
        total += term
    extra = 8 * d * m**2 * C_diag_max * delta_max / delta_min**2 + 4 * delta_max
    params = {
        "T": T, "m": m, "lambda": lam, "gamma": gamma, "d": d,
        "C_diag_max": C_diag_max, "delta_min": delta_min, "delta_max": delta_max,
    }
    return BoundReport(total + extra, terms, params)


def corollary_gapfree_bound(G, T: int, m: int, lam: float, gamma: float, d: int) -> float:
    """sqrt(d T log T max_i G_ii * bracket) with the hidden constant set to 1.

    A shape curve only: the true bound carries an unspecified constant.
    """
    if not lam > 0:
        raise NonPositiveLambda("the gap-free bound requires lambda > 0")
    if T < 2:
        raise ValueError("T must be at least 2")
    g = G.entries if hasattr(G, "entries") else np.asarray(G, dtype=float)
    gmax = float(np.max(np.diag(g)))
    return math.sqrt(d * T * math.log(T) * gmax * correlation_bracket(m, lam, gamma))
