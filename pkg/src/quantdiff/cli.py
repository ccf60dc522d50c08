"""Command-line interface: ci, test, region, and simulate subcommands.

Exit codes: 0 on success, 2 on input or validation problems (bad flags,
unparseable files, out-of-domain parameters), 3 when the input is valid
but statistically too degenerate for the requested inference.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys
from typing import IO, Iterator

from . import __version__
from .baselines import donner_zou_ci, price_bonnet_ci
from .core import (
    ConfidenceInterval,
    Method,
    OrderedSample,
    QuantileSpec,
    TWO_SAMPLE_METHODS,
    read_sample_csv,
)
from .errors import EstimationError, ValidationError
from .region import acceptance_grid, conservative_ci, lr_test, write_acceptance_grid_csv
from .simulate import (
    ScenarioSpec,
    parse_distribution,
    run_coverage_study,
    write_coverage_csv,
)
from .two_step import two_step_ci


def _add_sample_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--control", required=True, help="control sample CSV, '-' for stdin")
    sub.add_argument("--treatment", required=True, help="treatment sample CSV")
    sub.add_argument("--header", action="store_true", help="skip the first line of each file")


def _add_quantile_args(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--q", type=float, required=True, help="target quantile in (0,1)")
    sub.add_argument("--alpha", type=float, default=0.05, help="significance level (default 0.05)")


def _add_mode_args(sub: argparse.ArgumentParser) -> None:
    mode = sub.add_mutually_exclusive_group()
    mode.add_argument(
        "--exact",
        action="store_true",
        help="force the exact binomial statistic (default: exact when max(N) <= 10000)",
    )
    mode.add_argument(
        "--asymptotic",
        action="store_true",
        help="force the asymptotic chi-square statistic",
    )


def _add_output_arg(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--output", default="-", help="output path, '-' for stdout (default)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quantdiff",
        description="Difference-in-quantile tests and confidence intervals.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ci = sub.add_parser("ci", help="confidence intervals for the quantile difference")
    _add_sample_args(p_ci)
    _add_quantile_args(p_ci)
    p_ci.add_argument(
        "--methods",
        default="all",
        help="comma-separated method tags or 'all' "
        f"(choices: {', '.join(m.value for m in TWO_SAMPLE_METHODS)})",
    )
    _add_mode_args(p_ci)
    p_ci.add_argument("--format", choices=("json", "csv"), default="json")
    _add_output_arg(p_ci)
    p_ci.set_defaults(func=cmd_ci)

    p_test = sub.add_parser("test", help="LR test of a hypothesized quantile difference")
    _add_sample_args(p_test)
    _add_quantile_args(p_test)
    p_test.add_argument("--d", type=float, required=True, help="hypothesized difference")
    _add_output_arg(p_test)
    p_test.set_defaults(func=cmd_test)

    p_region = sub.add_parser("region", help="export the acceptance-region grid as CSV")
    p_region.add_argument("--control", help="control sample CSV (sizes read from data)")
    p_region.add_argument("--treatment", help="treatment sample CSV")
    p_region.add_argument("--header", action="store_true", help="skip the first line of each file")
    p_region.add_argument("--n-c", type=int, help="control sample size (alternative to --control)")
    p_region.add_argument("--n-t", type=int, help="treatment sample size")
    _add_quantile_args(p_region)
    _add_mode_args(p_region)
    _add_output_arg(p_region)
    p_region.set_defaults(func=cmd_region)

    p_sim = sub.add_parser("simulate", help="run a seeded Monte Carlo coverage study")
    p_sim.add_argument("--dist-c", default="normal(0,1)", help="control distribution, e.g. lognormal(0,1)")
    p_sim.add_argument("--dist-t", default="normal(0,1)", help="treatment distribution")
    p_sim.add_argument("--n-c", type=int, default=500)
    p_sim.add_argument("--n-t", type=int, default=500)
    _add_quantile_args(p_sim)
    p_sim.add_argument("--replications", type=int, default=5000)
    p_sim.add_argument("--seed", type=int, default=0, help="master seed (unsigned 64-bit)")
    p_sim.add_argument("--methods", default="all")
    p_sim.add_argument("--jobs", type=int, default=1, help="worker processes (output is identical)")
    _add_output_arg(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    return parser


def _parse_methods(text: str) -> tuple[Method, ...]:
    if text.strip() == "all":
        return TWO_SAMPLE_METHODS
    chosen = set()
    for part in text.split(","):
        name = part.strip()
        try:
            method = Method(name)
        except ValueError:
            valid = ", ".join(m.value for m in TWO_SAMPLE_METHODS)
            raise ValidationError(f"unknown method {name!r}; valid: {valid}") from None
        if method not in TWO_SAMPLE_METHODS:
            raise ValidationError(f"method {name!r} is not a two-sample interval method")
        chosen.add(method)
    return tuple(m for m in TWO_SAMPLE_METHODS if m in chosen)


def _use_exact(args: argparse.Namespace) -> bool | None:
    if args.exact:
        return True
    if args.asymptotic:
        return False
    return None


@contextlib.contextmanager
def _open_output(path: str) -> Iterator[IO[str]]:
    if path == "-":
        yield sys.stdout
    else:
        # newline='' so the csv module's `\n` terminator is written verbatim
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _load_samples(args: argparse.Namespace) -> tuple[OrderedSample, OrderedSample]:
    control = read_sample_csv(args.control, skip_header=args.header)
    treatment = read_sample_csv(args.treatment, skip_header=args.header)
    return control, treatment


def _interval(
    method: Method,
    control: OrderedSample,
    treatment: OrderedSample,
    spec: QuantileSpec,
    use_exact: bool | None,
) -> ConfidenceInterval:
    if method is Method.LR_CONSERVATIVE:
        return conservative_ci(control, treatment, spec, use_exact)
    if method is Method.LR_TWO_STEP:
        return two_step_ci(control, treatment, spec)
    if method is Method.PRICE_BONNET:
        return price_bonnet_ci(control, treatment, spec)
    return donner_zou_ci(control, treatment, spec)


def cmd_ci(args: argparse.Namespace) -> int:
    control, treatment = _load_samples(args)
    spec = QuantileSpec(args.q, args.alpha)
    methods = _parse_methods(args.methods)
    use_exact = _use_exact(args)

    records = []
    for method in methods:
        try:
            ci = _interval(method, control, treatment, spec, use_exact)
        except EstimationError as exc:
            raise EstimationError(f"{method.value}: {exc}") from exc
        records.append(
            {
                "method": method.value,
                "lower": ci.lower,
                "upper": ci.upper,
                "alpha": spec.alpha,
                "q": spec.q,
                "n_c": control.n,
                "n_t": treatment.n,
                "flags": sorted(ci.flags),
            }
        )

    with _open_output(args.output) as out:
        if args.format == "json":
            for rec in records:
                print(json.dumps(rec), file=out)
        else:
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["method", "lower", "upper", "alpha", "q", "n_c", "n_t", "flags"])
            for rec in records:
                writer.writerow(
                    [
                        rec["method"],
                        rec["lower"],
                        rec["upper"],
                        rec["alpha"],
                        rec["q"],
                        rec["n_c"],
                        rec["n_t"],
                        ";".join(rec["flags"]),
                    ]
                )
    return 0


def cmd_test(args: argparse.Namespace) -> int:
    control, treatment = _load_samples(args)
    spec = QuantileSpec(args.q, args.alpha)
    result = lr_test(control, treatment, spec, args.d)
    record = {
        "d": result.d,
        "statistic": result.statistic,
        "p_value": result.p_value,
        "i_star": result.i_star,
        "j_star": result.j_star,
        "reject_at_alpha": result.rejects_at(spec.alpha),
    }
    with _open_output(args.output) as out:
        print(json.dumps(record), file=out)
    return 0


def cmd_region(args: argparse.Namespace) -> int:
    if args.control or args.treatment:
        if not (args.control and args.treatment):
            raise ValidationError("provide both --control and --treatment, or sizes")
        control, treatment = _load_samples(args)
        n_c, n_t = control.n, treatment.n
    elif args.n_c is not None and args.n_t is not None:
        n_c, n_t = args.n_c, args.n_t
    else:
        raise ValidationError("provide --control/--treatment files or --n-c/--n-t sizes")
    spec = QuantileSpec(args.q, args.alpha)
    grid = acceptance_grid(n_c, n_t, spec, _use_exact(args))
    with _open_output(args.output) as out:
        write_acceptance_grid_csv(grid, out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    scenario = ScenarioSpec(
        dist_c=parse_distribution(args.dist_c),
        dist_t=parse_distribution(args.dist_t),
        n_c=args.n_c,
        n_t=args.n_t,
        q=args.q,
        alpha=args.alpha,
        replications=args.replications,
        master_seed=args.seed,
    )
    methods = _parse_methods(args.methods)
    rows = run_coverage_study(scenario, methods, jobs=args.jobs)
    with _open_output(args.output) as out:
        write_coverage_csv(scenario, rows, out)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EstimationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
