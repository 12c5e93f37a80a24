"""Command-line front end.

Exit codes are a contract: 0 success, 2 verification failure (an allocation
with strong envy, a failed replay, a fruitless brute-force search), 3 bad
input or bad usage, 4 internal invariant breach.  Errors are emitted as one
JSON object on stderr so batch callers can parse failures.
"""

import argparse
import csv
import json
import sys
import time

from . import formats
from .efx_core import solve
from .envy_graph import build_graph, dump_graph
from .errors import InputError, InternalInvariantError, UsageError
from .generators import FAMILIES, generate
from .model import bundle_items, usw
from .verify import (
    VerificationReport,
    Violation,
    brute_force_efx,
    check_proposition_gap,
    efx_violation_by_enumeration,
    replay_trace,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad arguments; 2 is reserved for
    verification failures here, so remap to the input-error path."""

    def error(self, message):
        raise InputError(message)


def _print_report(report: VerificationReport) -> int:
    sys.stdout.write(formats.dumps_canonical(formats.report_to_dict(report)))
    return 0 if report.passed else 2


def _cmd_solve(args) -> int:
    instance = formats.load_instance(args.instance)
    result = solve(instance)
    if args.out:
        formats.save_allocation(instance, result.allocation, args.out)
    if args.trace:
        formats.save_trace(result.trace, args.trace)
    print(f"usw {usw(instance, result.allocation)}")
    for i, bundle in enumerate(result.allocation.bundles):
        value = instance.oracles[i].value(bundle)
        items = ",".join(str(x) for x in bundle_items(bundle)) or "-"
        print(f"agent {i} value {value} items {items}")
    if args.dump_graph:
        text = dump_graph(build_graph(instance, result.allocation))
        if text:
            print(text)
    return 0


def _cmd_verify(args) -> int:
    instance = formats.load_instance(args.instance)
    allocation = formats.load_allocation(instance, args.allocation)
    breach = efx_violation_by_enumeration(instance, allocation)
    if breach is not None:
        i, j, g = breach
        report = VerificationReport(
            False, (Violation("efx", agents=(i, j), items=(g,)),)
        )
    else:
        report = check_proposition_gap(instance, allocation)
    return _print_report(report)


def _cmd_brute(args) -> int:
    instance = formats.load_instance(args.instance)
    allocation = brute_force_efx(instance)
    if allocation is None:
        sys.stdout.write(formats.dumps_canonical({"found": False}))
        return 2
    sys.stdout.write(
        formats.dumps_canonical(formats.allocation_to_dict(instance, allocation))
    )
    return 0


def _cmd_gen(args) -> int:
    instance = generate(args.family, args.n, args.m, args.seed, k=args.k, cap=args.cap)
    formats.save_instance(instance, args.out)
    print(f"wrote {args.out}")
    return 0


def _cmd_replay(args) -> int:
    instance = formats.load_instance(args.instance)
    trace = formats.load_trace(args.trace)
    return _print_report(replay_trace(instance, trace))


def _cmd_bench(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(
        [
            "family",
            "n",
            "m",
            "seed",
            "u0",
            "u1",
            "cycle_eliminations",
            "updates",
            "usw",
            "elapsed_ms",
        ]
    )
    for seed in range(args.seed, args.seed + args.reps):
        instance = generate(args.family, args.n, args.m, seed, k=args.k, cap=args.cap)
        started = time.perf_counter()
        result = solve(instance)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        writer.writerow(
            [
                args.family,
                args.n,
                args.m,
                seed,
                result.u0_count,
                result.u1_count,
                result.elimination_count,
                result.update_count,
                usw(instance, result.allocation),
                f"{elapsed_ms:.3f}",
            ]
        )
    return 0


def _add_gen_params(sub) -> None:
    sub.add_argument("--family", required=True, help=f"one of: {', '.join(FAMILIES)}")
    sub.add_argument("--n", type=int, required=True, help="agent count")
    sub.add_argument("--m", type=int, required=True, help="item count")
    sub.add_argument("--seed", type=int, required=True, help="generator seed")
    sub.add_argument("--k", type=int, default=None, help="threshold parameter")
    sub.add_argument("--cap", type=int, default=None, help="cap parameter")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="efx-binary",
        description=(
            "Compute and verify complete EFX allocations for agents with "
            "binary marginal valuations."
        ),
    )
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub = subs.add_parser("solve", help="allocate every item of an instance")
    sub.add_argument("instance", help="instance JSON file")
    sub.add_argument("--out", default=None, help="write the allocation JSON here")
    sub.add_argument("--trace", default=None, help="write the event trace JSONL here")
    sub.add_argument(
        "--dump-graph",
        action="store_true",
        help="print the final envy graph, one edge per line",
    )
    sub.set_defaults(handler=_cmd_solve)

    sub = subs.add_parser("verify", help="check an allocation file for strong envy")
    sub.add_argument("instance", help="instance JSON file")
    sub.add_argument("allocation", help="allocation JSON file")
    sub.set_defaults(handler=_cmd_verify)

    sub = subs.add_parser("brute", help="exhaustive search for an EFX allocation")
    sub.add_argument("instance", help="instance JSON file")
    sub.set_defaults(handler=_cmd_brute)

    sub = subs.add_parser("gen", help="generate a seeded random instance")
    _add_gen_params(sub)
    sub.add_argument("--out", required=True, help="write the instance JSON here")
    sub.set_defaults(handler=_cmd_gen)

    sub = subs.add_parser("replay", help="re-simulate and audit a solver trace")
    sub.add_argument("instance", help="instance JSON file")
    sub.add_argument("trace", help="trace JSONL file")
    sub.set_defaults(handler=_cmd_replay)

    sub = subs.add_parser("bench", help="time repeated solves, CSV on stdout")
    _add_gen_params(sub)
    sub.add_argument("--reps", type=int, default=1, help="number of seeds to run")
    sub.set_defaults(handler=_cmd_bench)

    return parser


def _emit_error(code: int, exc: Exception) -> None:
    payload = {"error": {"code": code, "message": str(exc)}}
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return args.handler(args)
    except (InputError, UsageError) as exc:
        _emit_error(3, exc)
        return 3
    except InternalInvariantError as exc:
        _emit_error(4, exc)
        return 4
