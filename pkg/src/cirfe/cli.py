"""Command line entry point: ``cirfe simulate|check|covariance|compare``.

Exit status is 0 on success and 2 when the model fails its checks.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from cirfe.analysis import CovarianceError, asymptotic_covariance
from cirfe.compare import compare_estimators
from cirfe.estimator import EstimatorKind, NetworkState
from cirfe.montecarlo import ModelCheckError, run_monte_carlo
from cirfe.report import model_checks, run_report
from cirfe.scenarios import load_scenario
from cirfe.sensing import GainError

EXIT_OK = 0
EXIT_CHECK_FAILED = 2


def _override(cfg, args):
    kw = {}
    for name in ("trials", "horizon", "seed"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "estimator", None):
        kw["estimator"] = EstimatorKind(args.estimator)
    return cfg.with_(**kw) if kw else cfg


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    cfg = _override(load_scenario(args.scenario), args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        res = run_monte_carlo(cfg, keep_trajectories=args.trajectory)
    except (ModelCheckError, GainError) as exc:
        print(f"model check failed: {exc}", file=sys.stderr)
        _write_json(out / "report.json", {"checks": model_checks(cfg.model, cfg.schedule), "error": str(exc)})
        return EXIT_CHECK_FAILED
    (out / "errors.csv").write_text(res.errors_csv())
    _write_json(out / "report.json", run_report(res))
    if args.trajectory:
        (out / "trajectory.csv").write_text(res.trajectory_csv())
    interests = cfg.model.interests if cfg.estimator is not EstimatorKind.CLASSICAL else None
    if interests is not None:
        state = NetworkState.from_lifted(res.final_states[0], interests, cfg.horizon)
        _write_json(out / "checkpoint.json", state.to_dict(interests))
    print(f"{cfg.name}: {cfg.trials} trials x {cfg.horizon} steps in {res.wall_time:.1f}s -> {out}")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = load_scenario(args.scenario)
    rep = model_checks(cfg.model, cfg.schedule)
    print(json.dumps(rep, indent=2, sort_keys=True))
    return EXIT_OK if rep["passed"] else EXIT_CHECK_FAILED


def cmd_covariance(args) -> int:
    cfg = load_scenario(args.scenario)
    a = args.gain if args.gain is not None else cfg.schedule.a
    try:
        cov = asymptotic_covariance(cfg.model, a)
    except CovarianceError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CHECK_FAILED
    with np.printoptions(precision=6, suppress=True, linewidth=160):
        print(f"gain a = {a:.6g}")
        print("slowest rates:", cov.rates[:3])
        print(cov.s_r)
    return EXIT_OK


def cmd_compare(args) -> int:
    base = _override(load_scenario(args.scenario), args)
    kinds = [EstimatorKind(k) for k in args.estimators.split(",")]
    comps = [int(c) - 1 for c in args.components.split(",")]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        cmp = compare_estimators([base.with_(estimator=k) for k in kinds], comps)
    except (ModelCheckError, GainError) as exc:
        print(f"model check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    (out / "comparison.csv").write_text(cmp.to_csv())
    _write_json(out / "report.json", cmp.to_dict())
    print(json.dumps(cmp.to_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cirfe", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_opts(sp):
        sp.add_argument("--scenario", required=True, help="built-in name or JSON config path")
        sp.add_argument("--trials", type=int)
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--seed", type=int)

    sp = sub.add_parser("simulate", help="Monte Carlo run")
    run_opts(sp)
    sp.add_argument("--estimator", choices=[k.value for k in EstimatorKind])
    sp.add_argument("--out", required=True)
    sp.add_argument("--trajectory", action="store_true", help="also dump per-trial estimates at logged steps")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check", help="observability, interest and gain checks")
    sp.add_argument("--scenario", required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("covariance", help="print the asymptotic covariance")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--gain", type=float)
    sp.set_defaults(func=cmd_covariance)

    sp = sub.add_parser("compare", help="CIRFE against the classical estimator")
    run_opts(sp)
    sp.add_argument("--estimators", default="cirfe,classical")
    sp.add_argument("--components", default="1", help="1-based, comma separated")
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
