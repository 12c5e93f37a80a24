"""Seeded random instance generation for tests, benchmarks, and the CLI.

All randomness flows through one random.Random(seed), consumed in a fixed
order (agent 0 first), so a (family, n, m, seed) tuple pins the instance
exactly.  The "paper_example" preset is deterministic: one threshold agent
who needs m-n+1 items against additive agents who like everything, the
configuration where handing one agent almost everything maximizes welfare
but fails the no-strong-envy test.
"""

import random

from .errors import InputError, InternalInvariantError
from .model import Instance
from .valuations import (
    TABLE_MAX_ITEMS,
    AdditiveBinary,
    CappedAdditive,
    MatroidRank,
    Table,
    Threshold,
    validate_binary,
)

FAMILIES = (
    "paper_example",
    "additive",
    "threshold",
    "capped",
    "matroid_rank",
    "table",
    "mixed",
)

_ALIASES = {"random_additive": "additive", "random_table": "table"}


def _random_subset(rng: random.Random, m: int) -> list:
    mask = rng.getrandbits(m) if m else 0
    return [i for i in range(m) if mask >> i & 1]


def _additive(rng, m, k, cap):
    return AdditiveBinary(_random_subset(rng, m))


def _threshold(rng, m, k, cap):
    targets = _random_subset(rng, m)
    if not targets and m:
        targets = [rng.randrange(m)]
    if k is None:
        k = rng.randint(1, len(targets)) if targets else 1
    return Threshold(targets, k)


def _capped(rng, m, k, cap):
    liked = _random_subset(rng, m)
    if cap is None:
        cap = rng.randint(1, len(liked)) if liked else 1
    return CappedAdditive(liked, cap)


def _matroid_rank(rng, m, k, cap):
    buckets = [[] for _ in range(3)]
    for item in range(m):
        buckets[rng.randrange(3)].append(item)
    parts = [part for part in buckets if part]
    caps = [rng.randint(1, len(part)) for part in parts]
    return MatroidRank(parts, caps)


def _table(rng, m, k, cap):
    if m > TABLE_MAX_ITEMS:
        raise InputError(f"family table requires m <= {TABLE_MAX_ITEMS}, got {m}")
    values = [0] * (1 << m)
    for mask in range(1, 1 << m):
        facets = [values[mask & ~(1 << b)] for b in range(m) if mask >> b & 1]
        # Facet values pairwise differ by at most 1, so this range is valid
        # and any choice keeps every marginal in {0, 1}.
        values[mask] = rng.randint(max(facets), min(facets) + 1)
    table = Table(values)
    violation = validate_binary(table, m)
    if violation is not None:
        raise InternalInvariantError(
            f"generated table is not binary: {violation.describe()}"
        )
    return table


_RANDOM_BUILDERS = {
    "additive": _additive,
    "threshold": _threshold,
    "capped": _capped,
    "matroid_rank": _matroid_rank,
    "table": _table,
}

_PARAM_USERS = {"threshold": ("k",), "capped": ("cap",), "mixed": ("k", "cap")}


def _threshold_vs_additive(n: int, m: int) -> Instance:
    if m < n:
        raise InputError(f"family paper_example requires m >= n, got n={n}, m={m}")
    everything = list(range(m))
    specs = [Threshold(everything, m - n + 1)]
    specs.extend(AdditiveBinary(everything) for _ in range(n - 1))
    return Instance(n, m, specs)


def generate(
    family: str,
    n: int,
    m: int,
    seed: int,
    *,
    k: "int | None" = None,
    cap: "int | None" = None,
) -> Instance:
    """Build a deterministic instance for (family, n, m, seed).

    Families: paper_example (threshold-vs-additive preset, no randomness),
    additive, threshold, capped, matroid_rank, table (m <= 16 only), and
    mixed (each agent draws one of the other random families).  k overrides
    the threshold parameter, cap the additive cap, where the family uses
    them; passing either to a family that cannot use it is an error.
    """
    family = _ALIASES.get(family, family)
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    if m < 0:
        raise InputError(f"m must be non-negative, got {m}")
    for name, value in (("k", k), ("cap", cap)):
        if value is None:
            continue
        if value < 1:
            raise InputError(f"{name} must be at least 1, got {value}")
        if name not in _PARAM_USERS.get(family, ()):
            raise InputError(f"{name} does not apply to family {family!r}")
    if family == "paper_example":
        return _threshold_vs_additive(n, m)
    rng = random.Random(seed)
    if family == "mixed":
        pool = ["additive", "threshold", "capped", "matroid_rank"]
        if m <= TABLE_MAX_ITEMS:
            pool.append("table")
        specs = [
            _RANDOM_BUILDERS[rng.choice(pool)](rng, m, k, cap) for _ in range(n)
        ]
    else:
        builder = _RANDOM_BUILDERS[family]
        specs = [builder(rng, m, k, cap) for _ in range(n)]
    return Instance(n, m, specs)
