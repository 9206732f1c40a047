"""Command-line front end: run experiments, sweep alpha, print theory
quantities, validate environment files."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

from . import theory
from .environment import gap_profile, serialize_env, validate_separation
from .harness import (
    ExperimentConfig,
    PolicyConfig,
    default_gamma,
    resolve_env,
    run_experiment,
)


def _policy_config(args, tag: str = "sgr") -> PolicyConfig:
    return PolicyConfig(
        tag=tag,
        alpha=args.alpha,
        delta=args.delta,
        gamma=args.gamma,
        radius_constant=args.radius_constant,
        baseline_contribution_mode=args.baseline_mode,
        carry_budget=args.carry_budget,
        resample_on_restart=args.resample_on_restart,
    )


def _add_policy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=0.7, help="risk parameter in (0, 1]")
    parser.add_argument("--delta", type=float, default=0.05, help="confidence level")
    parser.add_argument(
        "--gamma", type=float, default=None, help="forced-exploration rate (default sqrt(ln T / T))"
    )
    parser.add_argument("--radius-constant", type=float, default=2.0)
    parser.add_argument(
        "--baseline-mode",
        choices=("lcb", "ucb"),
        default="lcb",
        help="how baseline pulls enter the budget history",
    )
    parser.add_argument("--carry-budget", action="store_true")
    parser.add_argument("--resample-on-restart", action="store_true")


def _cmd_run(args) -> int:
    env = resolve_env(args.env)
    config = ExperimentConfig(
        env=env,
        algos=tuple(args.algo),
        policy=_policy_config(args),
        reps=args.reps,
        seed0=args.seed,
        outdir=args.out,
        workers=args.workers,
        save_runs=args.save_runs,
    )
    reports = run_experiment(config)
    for tag, report in reports.items():
        print(
            f"{tag}: final regret {report.final_regret:.1f} "
            f"(stderr {report.final_stderr:.1f}, R={report.R}, "
            f"violations {sum(v is not None for v in report.violation_rounds)}/{report.R})"
        )
    if args.out:
        print(f"wrote CSVs to {args.out}")
    return 0


def _cmd_sweep_alpha(args) -> int:
    env = resolve_env(args.env)
    rows = []
    for alpha in args.alphas:
        policy = replace(_policy_config(args), alpha=alpha)
        config = ExperimentConfig(
            env=env,
            algos=tuple(args.algo),
            policy=policy,
            reps=args.reps,
            seed0=args.seed,
            outdir=None,
            workers=args.workers,
        )
        reports = run_experiment(config)
        for tag, report in reports.items():
            rows.append((alpha, tag, report.final_regret, report.final_stderr))
            print(f"alpha={alpha}: {tag} final regret {report.final_regret:.1f}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "alpha_sweep.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["alpha", "algo", "final_mean_regret", "stderr"])
            for alpha, tag, regret, stderr in rows:
                writer.writerow([repr(alpha), tag, repr(regret), repr(stderr)])
        print(f"wrote {path}")
    return 0


def _cmd_theory(args) -> int:
    env = resolve_env(args.env)
    profile = gap_profile(env)
    gamma = args.gamma if args.gamma is not None else default_gamma(env.T)
    inputs = theory.TheoryInputs(
        profile=profile, T=env.T, delta=args.delta, alpha=args.alpha, gamma=gamma, K=env.K
    )
    print(f"env {env.name or args.env}: K={env.K}, T={env.T}, G_T={inputs.G_T}")
    print(f"B(T, delta) = {theory.b_of(env.T, args.delta):.4f}")
    for g in range(1, profile.n_segments):
        try:
            d_g = theory.delay_global(inputs, g)
            print(f"boundary {g} (round {env.starts[g]}): d_g = {d_g}")
        except ValueError as exc:
            print(f"boundary {g} (round {env.starts[g]}): d_g undefined ({exc})")
        n_bse = theory.n_baseline(inputs, g)
        print(f"  N_bse (segment {g}) = {n_bse:.1f}")
        for i in range(1, env.K + 1):
            d_loc = theory.delay_local(inputs, i, g)
            if profile.opt[g - 1][i] > 0:
                h1, h2, h2bar, h3 = theory.hardness(inputs, i, g)
                print(
                    f"  arm {i}: d_local = {d_loc}, H1 = {h1:.3f}, H2 = {h2:.3f}, "
                    f"H2bar = {h2bar:.3f}, H3 = {h3:.3f}"
                )
            else:
                print(f"  arm {i}: d_local = {d_loc} (optimal in segment {g - 1})")
    print(f"bound_sgr (order-only) = {theory.bound_sgr(inputs):.1f}")
    print(f"bound_slr (order-only) = {theory.bound_slr(inputs):.1f}")
    print(f"gap-independent global = {theory.bound_gap_independent(inputs, 'global'):.1f}")
    print(f"gap-independent local  = {theory.bound_gap_independent(inputs, 'local'):.1f}")
    return 0


def _cmd_validate(args) -> int:
    env = resolve_env(args.env)
    print(serialize_env(env), end="")
    gamma = args.gamma if args.gamma is not None else default_gamma(env.T)
    mode = args.mode or ("global" if env.is_global() else "local")
    reports = validate_separation(env, args.delta, gamma, mode=mode)
    if not reports:
        print("single segment: separation vacuously satisfied")
        return 0
    ok = True
    for rep in reports:
        status = "ok" if rep.satisfied else "VIOLATED (advisory)"
        print(
            f"boundary {rep.boundary} at round {rep.round}: delay bound {rep.delay}, "
            f"segment lengths {rep.gap_before}/{rep.gap_after}: {status}"
        )
        ok = ok and rep.satisfied
    print("separation assumption " + ("holds" if ok else "fails (advisory only)"))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="safebandits",
        description="Safe piecewise-i.i.d. bandit simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="replicated policy-vs-environment runs")
    p_run.add_argument("--env", required=True, help="preset name or env file path")
    p_run.add_argument("--algo", required=True, nargs="+")
    p_run.add_argument("--reps", type=int, default=20)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", default=None)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--save-runs", action="store_true")
    _add_policy_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep-alpha", help="regret versus the risk parameter")
    p_sweep.add_argument("--env", required=True)
    p_sweep.add_argument("--algo", required=True, nargs="+")
    p_sweep.add_argument("--alphas", type=float, required=True, nargs="+")
    p_sweep.add_argument("--reps", type=int, default=20)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    _add_policy_flags(p_sweep)
    p_sweep.set_defaults(func=_cmd_sweep_alpha)

    p_theory = sub.add_parser("theory", help="print closed-form theory quantities")
    p_theory.add_argument("--env", required=True)
    p_theory.add_argument("--alpha", type=float, default=0.7)
    p_theory.add_argument("--delta", type=float, default=0.05)
    p_theory.add_argument("--gamma", type=float, default=None)
    p_theory.set_defaults(func=_cmd_theory)

    p_val = sub.add_parser("validate", help="check an environment file")
    p_val.add_argument("--env", required=True)
    p_val.add_argument("--delta", type=float, default=0.05)
    p_val.add_argument("--gamma", type=float, default=None)
    p_val.add_argument(
        "--mode",
        choices=("global", "local"),
        default=None,
        help="default: inferred from whether every arm changes at every boundary",
    )
    p_val.set_defaults(func=_cmd_validate)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
