"""Command-line front end.

Subcommands: ``solve`` (transport between two measure files), ``bench``
(convergence sweep to CSV + JSON sidecar), ``rates`` (theoretical rate
table), and ``verify`` (randomized property suites).  Exit codes: 0 ok,
2 parse error, 3 certificate failure, 4 invalid setting/cost/estimator
combination, 5 property-suite failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from . import convergence, verify
from .benchmarks import OracleParams, parse_setting
from .costs import CostError, cost_matrix, parse_cost
from .measures import MeasureError, read_measure
from .rates import PARAM, PARAM_LOG, TheoryRate, theory_rate_family
from .solver import SolverError, dual_objective, solve_exact, verify_certificate

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_CERTIFICATE = 3
EXIT_COMBINATION = 4
EXIT_PROPERTY = 5

CERT_TOL = 1e-9


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="otlab",
        description="Exact discrete optimal transport and convergence-rate experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve transport between two measure files")
    p_solve.add_argument("mu", help="source measure file")
    p_solve.add_argument("nu", help="target measure file")
    p_solve.add_argument("--cost", default="sql2", help="cost string, e.g. l1, sql2, pow-euclid:3")
    p_solve.add_argument("--normalize", action="store_true",
                         help="rescale costs onto [0,1] before solving")

    p_bench = sub.add_parser("bench", help="run a convergence sweep and write CSV")
    p_bench.add_argument("--setting", required=True,
                         help="cube:d1:d2 | sphere:d1:d2 | semidiscrete:I:d:siteSeed")
    p_bench.add_argument("--cost", default="sql2")
    p_bench.add_argument("--estimator", default="two-sample",
                         help="one-sample-mu | one-sample-nu | two-sample")
    p_bench.add_argument("--n-grid", default="2^6..2^10",
                         help="comma list (64,128,...) or power range 2^a..2^b")
    p_bench.add_argument("--reps", type=int, default=200)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--oracle-m", type=int, default=None,
                         help="Monte Carlo samples for the population oracle")
    p_bench.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p_bench.add_argument("--out", required=True, help="output CSV path")

    p_rates = sub.add_parser("rates", help="print theoretical convergence rates")
    p_rates.add_argument("query", nargs="+",
                         help='family and parameters, e.g. "semiconcave d=10", '
                              '"general k=2", "hoelder a=0.5 d=4"')

    p_verify = sub.add_parser("verify", help="run randomized property suites")
    p_verify.add_argument("--suite", default="all",
                          help=f"one of {', '.join(verify.suite_names())}")
    p_verify.add_argument("--trials", type=int, default=200)
    p_verify.add_argument("--seed", type=int, default=0)
    return parser


def parse_n_grid(text: str) -> list[int]:
    """Parse "a,b,c" or "2^a..2^b" into an increasing list of sizes."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo = _parse_power(lo_s)
        hi = _parse_power(hi_s)
        if hi < lo:
            raise ValueError(f"empty grid range {text!r}")
        exps = range(lo.bit_length() - 1, hi.bit_length())
        grid = [1 << e for e in exps if lo <= (1 << e) <= hi]
        if not grid:
            raise ValueError(f"empty grid range {text!r}")
        return grid
    grid = [int(tok) for tok in text.split(",") if tok.strip()]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValueError(f"grid {text!r} must be increasing positive integers")
    return grid


def _parse_power(tok: str) -> int:
    tok = tok.strip()
    if tok.startswith("2^"):
        return 1 << int(tok[2:])
    return int(tok)


def _cmd_solve(args) -> int:
    try:
        mu = read_measure(args.mu)
        nu = read_measure(args.nu)
        spec = parse_cost(args.cost)
        C = cost_matrix(spec, mu.points, nu.points, normalize=args.normalize)
    except (MeasureError, CostError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        sol = solve_exact(mu, nu, C)
    except SolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATE
    report = verify_certificate(sol, mu, nu, C, CERT_TOL)
    gap = abs(dual_objective(sol.dual_f, sol.dual_g, mu, nu) - sol.cost)
    print(json.dumps({
        "cost": sol.cost,
        "duality_gap": gap,
        "plan_entries": [[i, j, w] for i, j, w in sol.plan.entries()],
        "dual_f": [float(v) for v in sol.dual_f],
        "dual_g": [float(v) for v in sol.dual_g],
    }, indent=2, sort_keys=True))
    if not report.passed:
        print(f"certificate failed: {report}", file=sys.stderr)
        return EXIT_CERTIFICATE
    return EXIT_OK


def _cmd_bench(args) -> int:
    try:
        config = parse_setting(args.setting)
        spec = parse_cost(args.cost)
        grid = parse_n_grid(args.n_grid)
    except (ValueError, CostError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    oracle = OracleParams(mc_samples=args.oracle_m, seed=args.seed)
    try:
        table = convergence.run_convergence(
            config, spec, args.estimator, grid, args.reps, args.seed,
            threads=max(1, args.threads), oracle=oracle,
        )
    except (convergence.CombinationError, CostError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_COMBINATION
    table.write_csv(args.out)
    try:
        fit = convergence.fit_rate(table, n_min=64)
    except ValueError:
        try:
            fit = convergence.fit_rate(table, n_min=0)
        except ValueError:
            fit = None
    if fit is None:
        print("rate fit skipped: fewer than 3 usable rows", file=sys.stderr)
    else:
        theory = convergence.theory_rate_for(config, spec)
        print(
            f"fitted slope {fit.slope:.4f} +/- {fit.slope_std_err:.4f} "
            f"(n in {list(fit.n_used)}); theory: {theory.label()} "
            f"[slope {theory.asymptotic_slope:g}]",
            file=sys.stderr,
        )
    return EXIT_OK


def _rate_line(family: str, params: dict[str, float]) -> str:
    if family == "general" or family == "lipschitz":
        k = params["k"]
        rate = theory_rate_family("lipschitz", k=k)
        return f"{family}(k={k:g}): {_render(rate)}  [log-log slope {rate.asymptotic_slope:g}]"
    if family == "semidiscrete":
        rate = theory_rate_family("semidiscrete")
        return f"semidiscrete: {_render(rate)}  [log-log slope {rate.asymptotic_slope:g}]"
    if family == "semiconcave":
        d = params["d"]
        rate = theory_rate_family("semiconcave", d=d)
        if rate.rate_class in (PARAM, PARAM_LOG):
            body = _render(rate)
        else:
            body = f"n^(-2/d) = n^(-{2 / d:g})"
        return f"semiconcave(d={d:g}): {body}  [log-log slope {rate.asymptotic_slope:g}]"
    if family in ("hoelder", "holder"):
        alpha = params["a"]
        d = params["d"]
        rate = theory_rate_family("hoelder", alpha=alpha, d=d)
        if rate.rate_class in (PARAM, PARAM_LOG):
            body = _render(rate)
        else:
            frac = Fraction(alpha).limit_denominator(10**6) / Fraction(int(d))
            body = f"n^(-{frac})"
        return (
            f"hoelder(alpha={alpha:g}, d={d:g}): {body}  "
            f"[log-log slope {rate.asymptotic_slope:g}]"
        )
    raise ValueError(f"unknown rate family {family!r}")


def _render(rate: TheoryRate) -> str:
    return rate.label()


def _cmd_rates(args) -> int:
    tokens: list[str] = []
    for chunk in args.query:
        tokens.extend(chunk.split())
    family = tokens[0].lower()
    params: dict[str, float] = {}
    try:
        for tok in tokens[1:]:
            if "=" not in tok:
                raise ValueError(f"expected name=value, got {tok!r}")
            key, val = tok.split("=", 1)
            key = key.lower()
            if key == "alpha":
                key = "a"
            params[key] = float(val)
        line = _rate_line(family, params)
    except (KeyError, ValueError) as exc:
        print(f"error: unrecognized rate query {' '.join(tokens)!r} ({exc})",
              file=sys.stderr)
        return EXIT_PARSE
    print(line)
    return EXIT_OK


def _cmd_verify(args) -> int:
    try:
        failures = verify.run_suite(args.suite, args.trials, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if failures:
        print(f"{len(failures)} counterexample(s):", file=sys.stderr)
        for rec in failures:
            print(f"  {rec}", file=sys.stderr)
        return EXIT_PROPERTY
    print(f"suite {args.suite}: all {args.trials} trials passed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else EXIT_OK
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "bench":
        return _cmd_bench(args)
    if args.command == "rates":
        return _cmd_rates(args)
    return _cmd_verify(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
