"""Command-line front end.

Subcommands: estimate (single private mean), quantile (single private
quantile), simulate (experiment grid to CSV/JSONL), report (figures from a
results CSV), ssa (subsample-and-aggregate), and bounds (closed-form
diagnostics). Releasing subcommands require an explicit --budget and
--seed. Every flag can also be supplied through an environment variable
with the DPWINSOR_ prefix (for example DPWINSOR_BUDGET); explicit flags
win. Exit codes: 0 success, 1 runtime estimator failure, 2 usage or
validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import bounds as bounds_mod
from . import report as report_mod
from . import simulate as simulate_mod
from .aggregate import (
    ClippedAggregator,
    Table,
    WinsorizedAggregator,
    mean_statistic,
    ols_statistic,
    run_ssa,
    synthetic_panel,
)
from .empirical import load_values
from .noise import NoiseKind, PrivacyKind, RandomStream
from .quantile import GeometricGrid, GridExhaustedError, QuantileBudget, default_max_steps, private_quantile
from .winsorized import practical_winsorized_mean

ENV_PREFIX = "DPWINSOR_"

_CASTS = {
    "budget": float,
    "seed": int,
    "kind": str,
    "C": float,
    "eta": float,
    "lower": float,
    "upper": float,
    "beta": float,
    "input": str,
    "budget_split": str,
    "q": float,
    "b1": float,
    "b2": float,
    "scan_slack": int,
    "jobs": int,
    "m": int,
    "group_size": int,
    "stat": str,
    "response": str,
    "features": str,
    "column": str,
    "synthetic": int,
    "aggregator": str,
    "config": str,
    "output": str,
    "jsonl": str,
    "results": str,
    "outdir": str,
}


def _fill_from_env(args: argparse.Namespace) -> None:
    for name, cast in _CASTS.items():
        if getattr(args, name, None) is None:
            raw = os.environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                setattr(args, name, cast(raw))


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            flag = "--" + name.replace("_", "-") if name != "C" else "--C"
            raise ValueError(f"{flag} is required (or set {ENV_PREFIX}{name.upper()})")


def _privacy_kind(name: str) -> PrivacyKind:
    try:
        return PrivacyKind(name.lower())
    except ValueError:
        raise ValueError(f"--kind must be 'pdp' or 'zcdp', got {name!r}") from None


def _zero_noise(args: argparse.Namespace) -> NoiseKind | None:
    if getattr(args, "unsafe_zero_noise", False):
        print(
            "WARNING: zero-noise run requested; the output is NOT differentially private",
            file=sys.stderr,
        )
        return NoiseKind.ZERO
    return None


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _read_dataset(args: argparse.Namespace):
    if getattr(args, "input", None):
        return load_values(args.input)
    return load_values(sys.stdin)


def _search_grid(args: argparse.Namespace) -> GeometricGrid:
    slack = args.scan_slack if args.scan_slack is not None else 64
    return GeometricGrid(
        args.beta, args.lower, args.upper,
        default_max_steps(args.beta, args.lower, args.upper, slack),
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_estimate(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    if args.suggest_bounds is not None:
        n, mu0, sigma0 = args.suggest_bounds
        lo, hi = bounds_mod.recommend_bounds(int(n), mu0, sigma0)
        _emit({"lower": lo, "upper": hi, "suggestion_only": True})
        return 0
    _require(args, "budget", "seed", "lower", "upper")
    kind = _privacy_kind(args.kind)
    noise = _zero_noise(args)
    data = _read_dataset(args)
    estimate = practical_winsorized_mean(
        data,
        args.C,
        args.eta,
        _search_grid(args),
        args.budget,
        RandomStream(args.seed),
        kind=kind,
        budget_split=args.budget_split,
        noise=noise,
    )
    payload = {
        "value": estimate.value,
        "clip_lo": estimate.clip_interval.lo,
        "clip_hi": estimate.clip_interval.hi,
        "noise_scale": estimate.noise_scale,
        "total_budget_strict": estimate.total_budget_strict,
        "total_budget_literal": estimate.total_budget_literal,
    }
    if noise is not None:
        payload["unsafe_zero_noise"] = True
    _emit(payload)
    return 0


def cmd_quantile(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    _require(args, "budget", "seed", "q", "lower", "upper")
    kind = _privacy_kind(args.kind)
    noise = _zero_noise(args)
    data = _read_dataset(args)
    b1 = args.b1 if args.b1 is not None else args.budget / 2.0
    b2 = args.b2 if args.b2 is not None else args.budget / 2.0
    budget = QuantileBudget(b1, b2, kind)
    result = private_quantile(
        data, args.q, budget, _search_grid(args), RandomStream(args.seed), noise
    )
    payload = {
        "value": result.value,
        "steps": result.steps_taken,
        "hit_cap": result.hit_cap,
        "negated": result.negated,
        "total_budget": budget.total,
    }
    if noise is not None:
        payload["unsafe_zero_noise"] = True
    _emit(payload)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    _require(args, "config", "output")
    grid = simulate_mod.load_grid_config(args.config)
    if args.seed is not None:
        grid = simulate_mod.with_seed(grid, args.seed)
    jobs = args.jobs if args.jobs is not None else 1
    rows = simulate_mod.run_grid(grid, jobs=jobs)
    simulate_mod.write_csv(rows, args.output)
    payload = {"output": args.output, "rows": len(rows)}
    if args.jsonl:
        simulate_mod.write_jsonl(rows, args.jsonl)
        payload["jsonl"] = args.jsonl
    _emit(payload)
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    _require(args, "results", "outdir")
    written = report_mod.render_report(args.results, args.outdir)
    _emit(written)
    return 0


def cmd_ssa(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    _require(args, "budget", "seed")
    kind = _privacy_kind(args.kind)
    noise = _zero_noise(args)
    stream = RandomStream(args.seed)

    if args.synthetic is not None:
        table = synthetic_panel(args.synthetic, 8, stream)
    elif args.input:
        table = Table.from_csv(args.input)
    else:
        table = Table.from_csv(sys.stdin)

    if args.stat == "ols":
        _require(args, "response", "features")
        stat = ols_statistic(args.response, [f.strip() for f in args.features.split(",")])
    elif args.stat == "mean":
        _require(args, "column")
        stat = mean_statistic(args.column)
    else:
        raise ValueError(f"--stat must be 'mean' or 'ols', got {args.stat!r}")

    if args.m is not None:
        m = args.m
    elif args.group_size is not None:
        m = len(table) // args.group_size
    else:
        raise ValueError("one of --m or --group-size is required")

    if args.aggregator == "clipped":
        aggregator = ClippedAggregator(args.lower, args.upper, kind)
    else:
        aggregator = WinsorizedAggregator(
            _search_grid(args),
            clip_count=args.C,
            eta=args.eta,
            kind=kind,
            budget_split=args.budget_split,
        )
    result = run_ssa(table, stat, m, aggregator, args.budget, stream, noise=noise)
    payload = {
        "estimates": [float(v) for v in result.estimates],
        "labels": list(stat.labels) if stat.labels else [f"coord_{j}" for j in range(stat.dim)],
        "groups": result.plan.m,
        "group_size": result.plan.k,
        "dropped": result.plan.dropped,
        "total_budget_strict": result.total_budget_strict,
    }
    if noise is not None:
        payload["unsafe_zero_noise"] = True
    _emit(payload)
    return 0


def cmd_bounds(args: argparse.Namespace) -> int:
    _fill_from_env(args)
    op = args.op
    if op == "zeta":
        from .winsorized import theoretical_clip_level

        value = theoretical_clip_level(args.n, args.eta, args.delta, args.lower, args.upper, args.beta)
    elif op == "clip-level":
        from .winsorized import practical_clip_level

        value = practical_clip_level(args.n, args.C, args.eta)
    elif op == "grid-coarseness":
        oracle = _oracle_from_flags(args)
        value = bounds_mod.grid_coarseness_bound(oracle, args.zeta, args.lower, args.upper)
    elif op == "aggregation-envelope":
        value = bounds_mod.aggregation_envelope(
            args.m, args.eta, args.delta, args.beta, args.upper, args.lower, args.e3
        )
    elif op == "sample-size":
        value = bounds_mod.required_sample_size(
            args.t, args.sigma, args.delta, args.lower, args.upper, args.beta, args.e3,
            constant=args.constant,
        )
    elif op == "trimmed-limit":
        value = bounds_mod.trimmed_mean_limit_exp(args.p)
    elif op == "recommend":
        lo, hi = bounds_mod.recommend_bounds(args.n, args.mu0, args.sigma0, margin=args.margin)
        _emit({"lower": lo, "op": op, "upper": hi})
        return 0
    else:
        raise ValueError(f"unknown bounds operation: {op!r}")
    _emit({"op": op, "value": value})
    return 0


def _oracle_from_flags(args: argparse.Namespace):
    name = args.dist
    if name == "uniform":
        return bounds_mod.uniform_oracle(args.lo, args.hi)
    if name == "gaussian":
        return bounds_mod.gaussian_oracle(args.mu, args.sigma)
    if name == "exponential":
        return bounds_mod.exponential_oracle(args.rate)
    if name == "student-t":
        return bounds_mod.student_t_oracle(args.df)
    raise ValueError(f"unknown distribution: {name!r}")


# ---------------------------------------------------------------------------
# parser


def _add_common_release_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--budget", type=float, default=None, help="total privacy budget")
    parser.add_argument("--kind", default="zcdp", choices=["pdp", "zcdp"])
    parser.add_argument("--seed", type=int, default=None, help="replay seed (required)")
    parser.add_argument("--lower", type=float, default=None, help="lower search bound")
    parser.add_argument("--upper", type=float, default=None, help="upper search bound")
    parser.add_argument("--beta", type=float, default=1.001, help="grid growth factor")
    parser.add_argument("--scan-slack", type=int, default=None, dest="scan_slack",
                        help="extra scan steps past the stated bounds (default 64)")
    parser.add_argument("--input", default=None, help="input path (default: stdin)")
    parser.add_argument("--unsafe-zero-noise", action="store_true",
                        help="replace all noise with zeros; testing only, voids privacy")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpwinsor",
        description="Differentially private robust mean estimation and simulation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="private winsorized mean of a numeric file")
    _add_common_release_flags(est)
    est.add_argument("--C", type=float, default=5.0, help="points to clip from each end")
    est.add_argument("--eta", type=float, default=0.0, help="suspected contamination fraction")
    est.add_argument("--budget-split", default="strict", choices=["strict", "literal"],
                     dest="budget_split")
    est.add_argument("--suggest-bounds", nargs=3, type=float, default=None,
                     metavar=("N", "MU0", "SIGMA0"),
                     help="print recommended (lower, upper) for the given n, mean bound, "
                          "std bound, then exit without estimating")
    est.set_defaults(func=cmd_estimate)

    qua = sub.add_parser("quantile", help="private quantile of a numeric file")
    _add_common_release_flags(qua)
    qua.add_argument("--q", type=float, default=None, help="quantile level in (0, 1]")
    qua.add_argument("--b1", type=float, default=None, help="target-noise budget (default budget/2)")
    qua.add_argument("--b2", type=float, default=None, help="scan-noise budget (default budget/2)")
    qua.set_defaults(func=cmd_quantile)

    sim = sub.add_parser("simulate", help="run an experiment grid and write CSV/JSONL tables")
    sim.add_argument("--config", default=None, help="grid config path (key = value lines)")
    sim.add_argument("--output", default=None, help="results CSV path")
    sim.add_argument("--jsonl", default=None, help="optional JSON-lines output path")
    sim.add_argument("--jobs", type=int, default=None, help="parallel worker processes")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.set_defaults(func=cmd_simulate)

    rep = sub.add_parser("report", help="render figures and a summary from a results CSV")
    rep.add_argument("--results", default=None, help="results CSV from 'simulate'")
    rep.add_argument("--outdir", default=None, help="directory for figures and summary.csv")
    rep.set_defaults(func=cmd_report)

    ssa = sub.add_parser("ssa", help="subsample-and-aggregate over CSV records")
    _add_common_release_flags(ssa)
    ssa.add_argument("--stat", default="mean", choices=["mean", "ols"])
    ssa.add_argument("--column", default=None, help="column for --stat mean")
    ssa.add_argument("--response", default=None, help="response column for --stat ols")
    ssa.add_argument("--features", default=None, help="comma-separated feature columns")
    ssa.add_argument("--m", type=int, default=None, help="number of groups")
    ssa.add_argument("--group-size", type=int, default=None, dest="group_size",
                     help="requested group size (m becomes N // k)")
    ssa.add_argument("--aggregator", default="winsorized", choices=["winsorized", "clipped"])
    ssa.add_argument("--C", type=float, default=1.0)
    ssa.add_argument("--eta", type=float, default=0.0)
    ssa.add_argument("--budget-split", default="strict", choices=["strict", "literal"],
                     dest="budget_split")
    ssa.add_argument("--synthetic", type=int, default=None,
                     help="generate a synthetic panel with this many subjects instead of reading input")
    ssa.set_defaults(func=cmd_ssa)

    bnd = sub.add_parser("bounds", help="evaluate a closed-form bound or limit")
    bnd_sub = bnd.add_subparsers(dest="op", required=True)

    b_zeta = bnd_sub.add_parser("zeta", help="theoretical clip level")
    b_zeta.add_argument("--n", type=int, required=True)
    b_zeta.add_argument("--eta", type=float, default=0.0)
    b_zeta.add_argument("--delta", type=float, required=True)
    b_zeta.add_argument("--lower", type=float, required=True)
    b_zeta.add_argument("--upper", type=float, required=True)
    b_zeta.add_argument("--beta", type=float, required=True)
    b_zeta.set_defaults(func=cmd_bounds)

    b_clip = bnd_sub.add_parser("clip-level", help="practical clip level max(C/n, eta)")
    b_clip.add_argument("--n", type=int, required=True)
    b_clip.add_argument("--C", type=float, required=True)
    b_clip.add_argument("--eta", type=float, default=0.0)
    b_clip.set_defaults(func=cmd_bounds)

    b_bn = bnd_sub.add_parser("grid-coarseness",
                              help="largest admissible beta - 1 for a named distribution")
    b_bn.add_argument("--dist", required=True,
                      choices=["uniform", "gaussian", "exponential", "student-t"])
    b_bn.add_argument("--zeta", type=float, required=True)
    b_bn.add_argument("--lower", type=float, required=True)
    b_bn.add_argument("--upper", type=float, required=True)
    b_bn.add_argument("--lo", type=float, default=0.0)
    b_bn.add_argument("--hi", type=float, default=1.0)
    b_bn.add_argument("--mu", type=float, default=0.0)
    b_bn.add_argument("--sigma", type=float, default=1.0)
    b_bn.add_argument("--rate", type=float, default=1.0)
    b_bn.add_argument("--df", type=float, default=3.0)
    b_bn.set_defaults(func=cmd_bounds)

    b_env = bnd_sub.add_parser("aggregation-envelope",
                               help="error envelope for aggregating m subsample statistics")
    b_env.add_argument("--m", type=int, required=True)
    b_env.add_argument("--eta", type=float, default=0.0)
    b_env.add_argument("--delta", type=float, required=True)
    b_env.add_argument("--beta", type=float, required=True)
    b_env.add_argument("--lower", type=float, required=True)
    b_env.add_argument("--upper", type=float, required=True)
    b_env.add_argument("--e3", type=float, required=True)
    b_env.set_defaults(func=cmd_bounds)

    b_n = bnd_sub.add_parser("sample-size", help="sample size sufficient for deviation t")
    b_n.add_argument("--t", type=float, required=True)
    b_n.add_argument("--sigma", type=float, required=True)
    b_n.add_argument("--delta", type=float, required=True)
    b_n.add_argument("--lower", type=float, required=True)
    b_n.add_argument("--upper", type=float, required=True)
    b_n.add_argument("--beta", type=float, required=True)
    b_n.add_argument("--e3", type=float, required=True)
    b_n.add_argument("--constant", type=float, default=1.0)
    b_n.set_defaults(func=cmd_bounds)

    b_tm = bnd_sub.add_parser("trimmed-limit",
                              help="limit of the symmetric trimmed mean on the unit exponential")
    b_tm.add_argument("--p", type=float, required=True)
    b_tm.set_defaults(func=cmd_bounds)

    b_rec = bnd_sub.add_parser("recommend", help="recommended symmetric search bounds")
    b_rec.add_argument("--n", type=int, required=True)
    b_rec.add_argument("--mu0", type=float, required=True)
    b_rec.add_argument("--sigma0", type=float, required=True)
    b_rec.add_argument("--margin", type=float, default=2.0)
    b_rec.set_defaults(func=cmd_bounds)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GridExhaustedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
