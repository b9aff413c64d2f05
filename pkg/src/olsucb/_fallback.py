"""Pure-Python episode loop, used when the compiled kernel is unavailable.

Built on the public policy operations, so it is also the reference the
compiled kernel is tested against.
"""
import numpy as np

from .model import ActionSet
from .policies import PolicyConfig, PolicyState, select_action, update_state


def run_choices(actions: ActionSet, rewards, cfg: PolicyConfig, ftab, cover, observer=None):
    """Play ``len(rewards)`` stages and return the chosen action indices.

    ``observer(t, state, k)`` is called at every stage before the state is
    updated with the feedback of action ``k``.
    """
    T, d = rewards.shape
    state = PolicyState.fresh(d)
    chosen = np.empty(T, dtype=np.int64)
    masked = np.full(d, np.nan)
    for t in range(1, T + 1):
        if t <= len(cover):
            k = cover[t - 1]
        else:
            k = select_action(state, actions, cfg, ftab[t])
        if observer is not None:
            observer(t, state, k)
        A = actions.indices[k]
        masked.fill(np.nan)
        masked[list(A)] = rewards[t - 1, list(A)]
        update_state(state, A, masked)
        chosen[t - 1] = k
    return chosen
