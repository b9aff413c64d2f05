"""Command-line front end.

    olsucb run      --config exp.json [--out regret.csv] [--seed N] [--set key=value ...]
    olsucb sweep    --config exp.json ...
    olsucb bounds   --config exp.json ...
    olsucb validate --config exp.json ...

Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 configuration
error (missing file, unknown key, invalid value), 4 validation failed.
"""
from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import bounds as bnd
from .errors import BanditError, ConfigError, InvalidValue, UnknownKey
from .harness import ExperimentConfig, ParallelPathsSpec, RegretCurve, run_experiment, sweep
from .model import (
    ActionSet,
    CovarianceMatrix,
    GammaMatrix,
    ProblemInstance,
    build_msubsets,
    dominance_check,
)
from .policies import ESCB2_DEFAULT_DIAG, PolicyConfig, PolicyKind

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, EXIT_CONFIG, EXIT_INVALID = 0, 1, 2, 3, 4

TOP_DEFAULTS = {
    "T": 10000,
    "n_runs": 200,
    "seed": 0,
    "record_stride": 10,
    "n_jobs": 1,
    "dominance_trials": 10000,
}
INSTANCE_KEYS = {
    "parallel_paths": {"kind": None, "n_paths": 5, "m": 3, "gamma": 0.0, "sigma": 1.0, "delta": 1.0},
    "msubsets": {"kind": None, "d": None, "m": None, "mu": None, "cov": None, "sigma": None, "cap": 10**6},
    "explicit": {"kind": None, "d": None, "m": None, "mu": None, "cov": None, "actions": None, "sigma": None},
}
POLICY_DEFAULTS = {"kind": "ols_ucb", "lambda": 0.0, "gamma": None}
GAMMA_KEYS = {"true_cov": {"source"}, "explicit": {"source", "matrix"}, "diagonal": {"source", "value"}}
SWEEP_DEFAULTS = {"gamma_grid": [0.0, 0.25, 0.5, 0.75, 1.0], "m_grid": [2, 3, 5]}


@dataclass
class CliConfig:
    """A fully defaulted, validated configuration."""

    raw: dict
    experiment: ExperimentConfig
    gamma_matrix: GammaMatrix
    n_jobs: int = 1
    gamma_grid: list = field(default_factory=list)
    m_grid: list = field(default_factory=list)


def _reject_unknown(obj, allowed, prefix):
    if not isinstance(obj, dict):
        raise InvalidValue(prefix.rstrip("."), "must be a JSON object")
    for key in obj:
        if key not in allowed:
            raise UnknownKey(prefix + key)


def _int(raw, key, lo):
    v = raw[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise InvalidValue(key, "must be an integer")
    if v < lo:
        raise InvalidValue(key, f"must be >= {lo}")
    return v


def _num(raw, key, prefix, lo=None, hi=None, strict=False):
    v = raw[key]
    name = prefix + key
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InvalidValue(name, "must be a number")
    if lo is not None and (v <= lo if strict else v < lo):
        raise InvalidValue(name, f"must be {'>' if strict else '≥'} {lo}")
    if hi is not None and v > hi:
        raise InvalidValue(name, f"must be ≤ {hi}")
    return float(v)


def normalize(raw: dict) -> dict:
    """Check keys and fill defaults; no matrices are built here."""
    allowed = set(TOP_DEFAULTS) | {"instance", "policy", "sweep"}
    _reject_unknown(raw, allowed, "")
    out = copy.deepcopy(TOP_DEFAULTS)
    out.update(copy.deepcopy(raw))
    for key in ("T", "n_runs", "record_stride", "n_jobs", "dominance_trials"):
        _int(out, key, 1)
    seed = out["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InvalidValue("seed", "must be an integer in [0, 2^64)")

    inst = out.get("instance")
    if inst is None:
        inst = {"kind": "parallel_paths"}
    if not isinstance(inst, dict):
        raise InvalidValue("instance", "must be a JSON object")
    kind = inst.get("kind", "parallel_paths")
    if kind not in INSTANCE_KEYS:
        raise InvalidValue("instance.kind", f"must be one of {sorted(INSTANCE_KEYS)}")
    _reject_unknown(inst, INSTANCE_KEYS[kind], "instance.")
    full = {k: v for k, v in INSTANCE_KEYS[kind].items() if v is not None or k == "sigma"}
    full.update(inst)
    full["kind"] = kind
    for key, v in INSTANCE_KEYS[kind].items():
        if v is None and key not in ("kind", "sigma") and key not in full:
            raise InvalidValue("instance." + key, "is required")
    if kind == "parallel_paths":
        for key in ("n_paths", "m"):
            if isinstance(full[key], bool) or not isinstance(full[key], int) or full[key] < (2 if key == "n_paths" else 1):
                raise InvalidValue("instance." + key, "must be an integer >= " + ("2" if key == "n_paths" else "1"))
        _num(full, "gamma", "instance.", 0.0, 1.0)
        _num(full, "sigma", "instance.", 0.0, strict=True)
        _num(full, "delta", "instance.", 0.0, strict=True)
    out["instance"] = full

    pol = out.get("policy") or {}
    _reject_unknown(pol, POLICY_DEFAULTS, "policy.")
    pfull = dict(POLICY_DEFAULTS)
    pfull.update(pol)
    try:
        PolicyKind(pfull["kind"])
    except ValueError:
        raise InvalidValue("policy.kind", f"must be one of {[k.value for k in PolicyKind]}") from None
    _num(pfull, "lambda", "policy.", 0.0)
    if pfull["gamma"] is None:
        if pfull["kind"] == PolicyKind.ESCB2.value:
            pfull["gamma"] = {"source": "diagonal", "value": ESCB2_DEFAULT_DIAG}
        else:
            pfull["gamma"] = {"source": "true_cov"}
    gsrc = pfull["gamma"]
    if not isinstance(gsrc, dict) or gsrc.get("source") not in GAMMA_KEYS:
        raise InvalidValue("policy.gamma.source", f"must be one of {sorted(GAMMA_KEYS)}")
    _reject_unknown(gsrc, GAMMA_KEYS[gsrc["source"]], "policy.gamma.")
    for key in GAMMA_KEYS[gsrc["source"]]:
        if key not in gsrc:
            raise InvalidValue("policy.gamma." + key, "is required")
    if gsrc["source"] == "diagonal":
        _num(gsrc, "value", "policy.gamma.", 0.0, strict=True)
    out["policy"] = pfull

    sw = out.get("sweep") or {}
    _reject_unknown(sw, SWEEP_DEFAULTS, "sweep.")
    sfull = copy.deepcopy(SWEEP_DEFAULTS)
    sfull.update(sw)
    if not sfull["gamma_grid"] or not all(
        isinstance(g, (int, float)) and not isinstance(g, bool) and 0 <= g <= 1 for g in sfull["gamma_grid"]
    ):
        raise InvalidValue("sweep.gamma_grid", "must be a non-empty list of numbers in [0, 1]")
    if not sfull["m_grid"] or not all(isinstance(m, int) and not isinstance(m, bool) and m >= 1 for m in sfull["m_grid"]):
        raise InvalidValue("sweep.m_grid", "must be a non-empty list of positive integers")
    out["sweep"] = sfull
    return out


def _build_instance(spec):
    kind = spec["kind"]
    if kind == "parallel_paths":
        paths = ParallelPathsSpec(spec["n_paths"], spec["m"], float(spec["gamma"]),
                                  float(spec["sigma"]), float(spec["delta"]))
        return paths.build(), paths
    cov = CovarianceMatrix(spec["cov"])
    if kind == "msubsets":
        actions = build_msubsets(spec["d"], spec["m"], spec["cap"])
    else:
        actions = ActionSet.from_indices(spec["d"], spec["m"], spec["actions"])
    return ProblemInstance(np.asarray(spec["mu"], dtype=float), cov, actions, spec.get("sigma")), None


def _build_gamma(src, inst):
    if src["source"] == "true_cov":
        return GammaMatrix.from_covariance(inst.cov)
    if src["source"] == "diagonal":
        return GammaMatrix.diagonal(np.full(inst.d, float(src["value"])))
    return GammaMatrix(src["matrix"])


def _wrap(key, fn, *args):
    try:
        return fn(*args)
    except ConfigError:
        raise
    except (BanditError, TypeError, KeyError, ValueError) as exc:
        raise InvalidValue(key, str(exc)) from None


def build(raw: dict) -> CliConfig:
    """Construct model objects from a normalized config, enforcing invariants."""
    inst, paths = _wrap("instance", _build_instance, raw["instance"])
    gamma = _wrap("policy.gamma", _build_gamma, raw["policy"]["gamma"], inst)
    if gamma.d != inst.d:
        raise InvalidValue("policy.gamma", f"dimension {gamma.d} does not match d={inst.d}")
    kind = PolicyKind(raw["policy"]["kind"])
    lam = float(raw["policy"]["lambda"])
    if kind is PolicyKind.OLS_UCB:
        policy = PolicyConfig.ols_ucb(gamma, lam)
    elif kind is PolicyKind.ESCB2:
        policy = _wrap("policy.gamma", PolicyConfig.escb2, inst.d, gamma.diag)
    else:
        policy = PolicyConfig.comb_ucb1()
    exp = _wrap("T", ExperimentConfig, inst, policy, raw["T"], raw["n_runs"], raw["seed"],
                raw["record_stride"], paths)
    return CliConfig(raw, exp, gamma, raw["n_jobs"], raw["sweep"]["gamma_grid"], raw["sweep"]["m_grid"])


def apply_overrides(raw: dict, overrides, seed=None) -> dict:
    """Apply ``key.path=value`` overrides; values are parsed as JSON when possible."""
    raw = copy.deepcopy(raw)
    for item in overrides or ():
        if "=" not in item:
            raise InvalidValue(item, "override must look like key=value")
        path, _, text = item.partition("=")
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = raw
        parts = path.strip().split(".")
        for p in parts[:-1]:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise InvalidValue(path, "cannot descend into a non-object")
        node[parts[-1]] = value
    if seed is not None:
        raw["seed"] = seed
    return raw


def load_raw(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None


def parse_config(path, overrides=(), seed=None) -> CliConfig:
    return build(normalize(apply_overrides(load_raw(path), overrides, seed)))


def fmt(x) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def curve_csv(curve: RegretCurve) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "mean_regret", "std_regret", "n_runs"])
    for t, mu, sd in zip(curve.stages, curve.mean, curve.std):
        w.writerow([int(t), fmt(mu), fmt(sd), curve.n_runs])
    return buf.getvalue()


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "gamma", "final_mean_regret", "final_std_regret", "n_runs"])
    for r in rows:
        w.writerow([r.m, fmt(r.gamma), fmt(r.final_mean_regret), fmt(r.final_std_regret), r.n_runs])
    return buf.getvalue()


def bounds_report(cc: CliConfig) -> dict:
    exp = cc.experiment
    inst = exp.instance
    gaps = inst.gaps
    lam = exp.policy.lam
    gamma_ceiling = cc.gamma_matrix.correlation_ceiling(inst.actions)
    out = {"d": inst.d, "m": inst.m, "T": exp.T, "lambda": lam, "gamma_ceiling": gamma_ceiling}

    spec = cc.raw["instance"]
    if spec["kind"] == "parallel_paths":
        sigma, delta, g = float(spec["sigma"]), float(spec["delta"]), float(spec["gamma"])
        out["lower_bound_rate"] = bnd.lower_bound_rate(inst.d, inst.m, sigma, delta, g)
        out["kl_divergence"] = bnd.kl_gaussian_paths(delta, sigma, inst.m, g)
    else:
        out["lower_bound_rate"] = None
        out["kl_divergence"] = None

    if lam <= 0:
        note = "requires lambda > 0; set policy.lambda"
        out["theorem2"] = {"value": None, "note": note}
        out["corollary"] = {"value": None, "note": note}
    elif gaps.degenerate:
        out["theorem2"] = {"value": None, "note": "no suboptimal action"}
        out["corollary"] = {"value": None, "note": "no suboptimal action"}
    else:
        rep = bnd.theorem2_upper_bound(
            cc.gamma_matrix, gaps.arm_min_gaps, float(np.max(np.diag(inst.cov.entries))),
            gaps.delta_min, gaps.delta_max, exp.T, inst.m, lam, gamma_ceiling, inst.d,
        )
        out["theorem2"] = rep.to_json()
        out["corollary"] = {
            "value": bnd.corollary_gapfree_bound(cc.gamma_matrix, max(exp.T, 2), inst.m, lam, gamma_ceiling, inst.d),
            "note": "shape curve: implied constant set to 1",
        }
    return out


def validate_report(raw: dict) -> tuple[dict, str | None]:
    report = {"instance": "ok", "gamma": "ok", "config": "ok", "dominance": None}
    try:
        cc = build(raw)
    except InvalidValue as exc:
        section = "gamma" if exc.key.startswith("policy.gamma") else (
            "instance" if exc.key.startswith("instance") else "config")
        report[section] = str(exc)
        report["passed"] = False
        return report, str(exc)
    rng = np.random.default_rng(np.random.SeedSequence(raw["seed"]))
    dom = dominance_check(cc.experiment.instance.cov, cc.gamma_matrix, raw["dominance_trials"], rng)
    report["dominance"] = {"passed": dom.passed, "worst_margin": dom.worst_margin, "trials": dom.trials}
    report["passed"] = dom.passed
    if not dom.passed:
        return report, f"dominance check failed: worst margin {dom.worst_margin!r}"
    return report, None


def _emit(text, out_path):
    if out_path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def execute(args) -> int:
    """Run one parsed invocation and return its exit status."""
    try:
        raw = normalize(apply_overrides(load_raw(args.config), args.set, args.seed))
        if args.subcommand == "validate":
            report, failure = validate_report(raw)
            _emit(json.dumps(report, indent=2) + "\n", args.out)
            if failure:
                print(f"olsucb: validation failed: {failure}", file=sys.stderr)
                return EXIT_INVALID
            return EXIT_OK
        cc = build(raw)
    except ConfigError as exc:
        print(f"olsucb: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.subcommand == "run":
            text = curve_csv(run_experiment(cc.experiment, n_jobs=cc.n_jobs))
        elif args.subcommand == "sweep":
            text = sweep_csv(sweep(cc.experiment, cc.gamma_grid, cc.m_grid, n_jobs=cc.n_jobs))
        else:
            text = json.dumps(bounds_report(cc), indent=2) + "\n"
        _emit(text, args.out)
    except ConfigError as exc:
        print(f"olsucb: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BanditError, OSError) as exc:
        print(f"olsucb: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # one diagnostic line, no usage dump
        self.exit(EXIT_USAGE, f"olsucb: usage error: {message}\n")


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="olsucb", description="Combinatorial semi-bandit experiments")
    parser.add_argument("subcommand", choices=["run", "sweep", "bounds", "validate"])
    parser.add_argument("--config", required=True, help="JSON experiment config")
    parser.add_argument("--out", default=None, help="output file (default stdout)")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry, e.g. policy.lambda=0.1 (repeatable)")
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if args.seed is not None and not 0 <= args.seed < 2**64:
        print("olsucb: config error: invalid value for 'seed': must be in [0, 2^64)", file=sys.stderr)
        return EXIT_CONFIG
    return execute(args)


if __name__ == "__main__":
    sys.exit(main())
