"""Command-line interface for instance generation, metrics, runs, and sweeps.

Exit codes are a stable contract: 0 on success, 1 for domain or runtime
errors (bad parameter values, missing files), 2 for usage errors (unknown
flags, missing required flags, malformed flag values).  Progress and
confirmations go to stderr; stdout carries only the metrics report.
"""

from __future__ import annotations

import argparse
import os
import sys

from rank1bandit.harness import ExperimentConfig, run_many, write_trace_csv
from rank1bandit.instances import (
    compute_metrics,
    needle_instance,
    parse_instance_spec,
    pbm_like_instance,
    save_instance,
)
from rank1bandit.policies import POLICIES

_POLICY_NAMES = sorted(POLICIES)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_gen_instance(args: argparse.Namespace) -> int:
    if args.kind == "needle":
        inst = needle_instance(args.K, args.L, args.p_u, args.p_v,
                               args.delta_u, args.delta_v)
    else:
        inst = pbm_like_instance(args.K, args.L, args.head_mass, args.decay)
    save_instance(inst, args.out)
    _info(f"wrote {inst.K}x{inst.L} instance to {args.out}")
    return 0


def cmd_metrics(args: argparse.Namespace) -> int:
    inst = parse_instance_spec(args.instance)
    m = compute_metrics(inst)
    for name, value in [
        ("K", inst.K),
        ("L", inst.L),
        ("best_row", m.best_row),
        ("best_col", m.best_col),
        ("best_value", m.best_value),
        ("mu", m.mu),
        ("p_max", m.p_max),
        ("gamma", m.gamma),
        ("min_row_gap", m.min_row_gap),
        ("min_col_gap", m.min_col_gap),
    ]:
        print(f"{name} = {value}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = ExperimentConfig(
        instance=args.instance,
        policy=args.policy,
        horizon=args.horizon,
        runs=args.runs,
        master_seed=args.seed,
    )
    _info(f"running {args.policy} on {args.instance}: "
          f"horizon={args.horizon}, runs={args.runs}, seed={args.seed}")
    result = run_many(config, jobs=args.jobs)
    write_trace_csv(result, args.out)
    _info(f"final mean pseudo-regret {result.mean_pseudo_regret[-1]:.6g}; "
          f"wrote {args.out}")
    return 0


def _dedup_with_warning(values: list, label: str) -> list:
    seen: list = []
    for v in values:
        if v in seen:
            _info(f"warning: duplicate {label} {v} ignored")
        else:
            seen.append(v)
    return seen


def cmd_sweep(args: argparse.Namespace) -> int:
    sizes = _dedup_with_warning(args.sizes, "size")
    policies = _dedup_with_warning(args.policies, "policy")
    os.makedirs(args.out_dir, exist_ok=True)
    cells = [(p, s) for p in policies for s in sizes]
    for idx, (policy, size) in enumerate(cells, start=1):
        spec = f"needle:K={size},L={size},p={args.p},gap={args.gap}"
        config = ExperimentConfig(
            instance=spec,
            policy=policy,
            horizon=args.horizon,
            runs=args.runs,
            master_seed=args.seed,
        )
        _info(f"[{idx}/{len(cells)}] {policy} K=L={size}")
        result = run_many(config, jobs=args.jobs)
        path = os.path.join(args.out_dir, f"{policy}_{size}x{size}.csv")
        write_trace_csv(result, path)
        _info(f"  wrote {path}")
    return 0


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        ) from None


def _policy_list(text: str) -> list[str]:
    names = text.split(",")
    for name in names:
        if name not in POLICIES:
            raise argparse.ArgumentTypeError(
                f"unknown policy {name!r}; choose from {', '.join(_POLICY_NAMES)}"
            )
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rank1bandit",
        description="Simulate rank-1 Bernoulli bandit policies and report regret.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "gen-instance",
        help="generate an instance file",
        description="Generate a rank-1 instance and write it to a file.",
    )
    gen.add_argument("--kind", choices=["needle", "pbm-like"], required=True)
    gen.add_argument("--K", type=int, required=True, help="number of rows")
    gen.add_argument("--L", type=int, required=True, help="number of columns")
    gen.add_argument("--p-u", type=float, default=0.25,
                     help="needle: baseline row mean (default 0.25)")
    gen.add_argument("--p-v", type=float, default=0.25,
                     help="needle: baseline column mean (default 0.25)")
    gen.add_argument("--delta-u", type=float, default=0.5,
                     help="needle: row gap above baseline (default 0.5)")
    gen.add_argument("--delta-v", type=float, default=0.5,
                     help="needle: column gap above baseline (default 0.5)")
    gen.add_argument("--head-mass", type=float, default=0.9,
                     help="pbm-like: mean of the first coordinate (default 0.9)")
    gen.add_argument("--decay", type=float, default=0.8,
                     help="pbm-like: geometric decay per position (default 0.8)")
    gen.add_argument("--out", required=True, help="output instance file")
    gen.set_defaults(func=cmd_gen_instance)

    met = sub.add_parser(
        "metrics",
        help="print hardness metrics of an instance",
        description="Print best pair, gaps, mu, p_max, and gamma as key-value lines.",
    )
    met.add_argument(
        "--instance", required=True,
        help="instance file path or inline spec such as "
             "needle:K=8,L=8,p=0.25,gap=0.5 or "
             "pbm-like:K=16,L=16,head_mass=0.85,decay=0.6",
    )
    met.set_defaults(func=cmd_metrics)

    run = sub.add_parser(
        "run",
        help="run one policy on one instance and write a regret CSV",
        description="Run repeated seeded simulations and write the aggregate "
                    "regret trace as CSV.",
    )
    run.add_argument("--instance", required=True,
                     help="instance file path or inline generator spec")
    run.add_argument("--policy", choices=_POLICY_NAMES, required=True)
    run.add_argument("--horizon", type=int, required=True)
    run.add_argument("--runs", type=int, default=20)
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--jobs", type=int, default=None,
                     help="worker processes (default: RANK1BANDIT_JOBS "
                          "or the logical processor count)")
    run.add_argument("--out", required=True, help="output CSV path")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser(
        "sweep",
        help="run a (policy, size) grid of needle experiments",
        description="Run every policy on square needle instances of every "
                    "size, writing {policy}_{K}x{L}.csv per cell.",
    )
    sweep.add_argument("--sizes", type=_int_list, required=True,
                       help="comma-separated K=L values, e.g. 8,16,32")
    sweep.add_argument("--policies", type=_policy_list, required=True,
                       help=f"comma-separated from: {', '.join(_POLICY_NAMES)}")
    sweep.add_argument("--p", type=float, default=0.25,
                       help="needle baseline mean (default 0.25)")
    sweep.add_argument("--gap", type=float, default=0.5,
                       help="needle gap (default 0.5)")
    sweep.add_argument("--horizon", type=int, required=True)
    sweep.add_argument("--runs", type=int, default=20)
    sweep.add_argument("--seed", type=int, default=0, help="master seed")
    sweep.add_argument("--jobs", type=int, default=None,
                       help="worker processes (default: RANK1BANDIT_JOBS "
                            "or the logical processor count)")
    sweep.add_argument("--out-dir", required=True, help="output directory")
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 after --help
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
