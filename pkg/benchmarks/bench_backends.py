"""Time the compiled episode kernel against the pure-Python loop.

    python benchmarks/bench_backends.py [--T 5000] [--runs 3]

Both backends replay the same reward streams; the script also checks that
they choose identical actions.
"""
import argparse
import time

import numpy as np

from olsucb import GammaMatrix, PolicyConfig, build_msubsets, build_parallel_paths
from olsucb._backend import HAVE_KERNEL
from olsucb.env import RngStream, matrix_sqrt, sample_rewards
from olsucb.harness import f_table, play
from olsucb.model import ProblemInstance


def cases():
    for m in (2, 3, 5):
        inst = build_parallel_paths(5, m, 0.5)
        yield f"paths(5 x {m}) ols_ucb", inst, PolicyConfig.ols_ucb(GammaMatrix.from_covariance(inst.cov))
    inst = build_parallel_paths(5, 3, 0.5)
    yield "paths(5 x 3) escb2", inst, PolicyConfig.escb2(inst.d)
    yield "paths(5 x 3) comb_ucb1", inst, PolicyConfig.comb_ucb1()
    d, m = 8, 3
    inst = ProblemInstance(np.linspace(0, 0.5, d), 0.25 * np.eye(d), build_msubsets(d, m))
    yield f"msubsets({d}, {m}) ols_ucb [{len(inst.actions)} actions]", inst, PolicyConfig.ols_ucb(GammaMatrix.from_covariance(inst.cov))


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, default=5000)
    ap.add_argument("--runs", type=int, default=3, help="repetitions; best time is kept")
    args = ap.parse_args()
    if not HAVE_KERNEL:
        raise SystemExit("compiled kernel not built; nothing to compare")

    print(f"{'case':45s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  same")
    for name, inst, pol in cases():
        rewards = sample_rewards(inst, matrix_sqrt(inst.cov), RngStream(0), args.T)
        ftab = f_table(args.T, inst.m, pol.lam)
        tp, a = timed(lambda: play(inst, pol, rewards, ftab, backend="python"), args.runs)
        tc, b = timed(lambda: play(inst, pol, rewards, ftab, backend="compiled"), args.runs)
        print(f"{name:45s} {tp:10.4f} {tc:11.5f} {tp / tc:7.0f}x  {np.array_equal(a, b)}")


if __name__ == "__main__":
    main()
