#!/usr/bin/env python3
"""Timing sweep across valuation families and instance sizes.

Writes one CSV row per (family, n, m, seed) solve to stdout.  Meant for
eyeballing scaling trends and for spotting families that trigger unusually
many bundle replacements; it is not part of the test suite.

Example:
    python scripts/bench_sweep.py --sizes 5:20 10:50 20:100 --seeds 3
"""

import argparse
import csv
import sys
import time
from dataclasses import dataclass

from efx_binary import generate, solve, usw

SWEEP_FAMILIES = ("additive", "threshold", "capped", "matroid_rank", "mixed")


@dataclass(frozen=True)
class SweepConfig:
    families: tuple
    sizes: tuple  # (n, m) pairs
    seeds: int
    base_seed: int


def parse_size(text: str) -> tuple:
    try:
        n, m = text.split(":")
        return int(n), int(m)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n:m, got {text!r}")


def parse_args(argv) -> SweepConfig:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--families",
        nargs="+",
        default=list(SWEEP_FAMILIES),
        help="valuation families to sweep",
    )
    parser.add_argument(
        "--sizes",
        nargs="+",
        type=parse_size,
        default=[(3, 12), (6, 30), (12, 80), (25, 200)],
        help="instance sizes as n:m pairs",
    )
    parser.add_argument("--seeds", type=int, default=5, help="seeds per cell")
    parser.add_argument("--base-seed", type=int, default=0)
    args = parser.parse_args(argv)
    return SweepConfig(
        families=tuple(args.families),
        sizes=tuple(args.sizes),
        seeds=args.seeds,
        base_seed=args.base_seed,
    )


def run(config: SweepConfig) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(
        ["family", "n", "m", "seed", "u0", "u1", "cycle_eliminations", "usw", "ms"]
    )
    for family in config.families:
        for n, m in config.sizes:
            for offset in range(config.seeds):
                seed = config.base_seed + offset
                instance = generate(family, n, m, seed)
                started = time.perf_counter()
                result = solve(instance)
                elapsed_ms = (time.perf_counter() - started) * 1000.0
                writer.writerow(
                    [
                        family,
                        n,
                        m,
                        seed,
                        result.u0_count,
                        result.u1_count,
                        result.elimination_count,
                        usw(instance, result.allocation),
                        f"{elapsed_ms:.3f}",
                    ]
                )


if __name__ == "__main__":
    run(parse_args(sys.argv[1:]))
