"""Combinatorial semi-bandits with correlation-aware confidence widths.

OLS-UCB, ESCB-2 and CombUCB1 policies, the parallel-paths lower-bound
instance, closed-form bound evaluators and a seeded experiment harness.
"""
from ._backend import HAVE_KERNEL, default_backend
from .bounds import (
    BoundReport,
    corollary_gapfree_bound,
    kl_gaussian_paths,
    lower_bound_rate,
    theorem2_upper_bound,
)
from .env import (
    NoiseModel,
    RngStream,
    empirical_noise_covariance,
    matrix_sqrt,
    sample_reward,
    sample_rewards,
)
from .harness import (
    ExperimentConfig,
    ParallelPathsSpec,
    RegretCurve,
    run_episode,
    run_experiment,
    sweep,
)
from .model import (
    ActionSet,
    CovarianceMatrix,
    GammaMatrix,
    ProblemInstance,
    build_msubsets,
    build_parallel_paths,
    compute_gaps,
    dominance_check,
    greedy_init_cover,
    validate_covariance,
)
from .policies import (
    PolicyConfig,
    PolicyKind,
    PolicyState,
    combucb1_width,
    exploration_width,
    f_confidence,
    index_value,
    ols_estimate,
    select_action,
    update_state,
    variance_split,
)

__version__ = "0.1.0"
