"""Shared test utilities: slow set-based reference evaluators and strategies.

The slow evaluators restate each valuation family directly from its
definition over Python sets, so the bitmask fast paths in the package are
always checked against something that never touches a bitmask.
"""

import hypothesis.strategies as st

from efx_binary import (
    AdditiveBinary,
    CappedAdditive,
    Instance,
    MatroidRank,
    PartialAllocation,
    Table,
    Threshold,
    generate,
)

FIVE_FAMILIES = ("additive", "threshold", "capped", "matroid_rank", "table")

# filled by the acceptance suite, shown by conftest in the terminal summary
ACCEPTANCE_LINES: list = []


def slow_value(spec, items) -> int:
    """Evaluate a valuation spec on a set of items, definitionally."""
    items = set(items)
    if isinstance(spec, AdditiveBinary):
        return len(items & set(spec.liked))
    if isinstance(spec, Threshold):
        return 1 if len(items & set(spec.targets)) >= spec.k else 0
    if isinstance(spec, CappedAdditive):
        return min(len(items & set(spec.liked)), spec.cap)
    if isinstance(spec, MatroidRank):
        return sum(
            min(len(items & set(part)), cap)
            for part, cap in zip(spec.parts, spec.caps)
        )
    if isinstance(spec, Table):
        return spec.values[sum(1 << i for i in items)]
    raise TypeError(f"unknown spec {spec!r}")


def mask_to_set(mask: int) -> set:
    return {i for i in range(mask.bit_length()) if mask >> i & 1}


@st.composite
def instances(draw, max_n=4, max_m=6, families=FIVE_FAMILIES + ("mixed",), min_m=0):
    family = draw(st.sampled_from(families))
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(min_m, max_m))
    seed = draw(st.integers(0, 2**32 - 1))
    return generate(family, n, m, seed)


@st.composite
def instances_with_allocation(draw, max_n=4, max_m=6, allow_pool=True):
    """An instance plus an arbitrary partition of its items into bundles
    (and, optionally, the pool: digit n means the item stays unallocated)."""
    inst = draw(instances(max_n=max_n, max_m=max_m))
    top = inst.n if allow_pool else inst.n - 1
    digits = draw(
        st.lists(st.integers(0, top), min_size=inst.m, max_size=inst.m)
    )
    bundles = [0] * inst.n
    pool = 0
    for item, digit in enumerate(digits):
        if digit == inst.n:
            pool |= 1 << item
        else:
            bundles[digit] |= 1 << item
    return inst, PartialAllocation(tuple(bundles), pool)


def example_a_instance() -> Instance:
    """Two additive agents over four items; detailed states derived by hand."""
    return Instance(2, 4, [AdditiveBinary([1, 3]), AdditiveBinary([0, 1, 3])])


def example_a_midstate() -> PartialAllocation:
    # agent 0 holds {0,2}, agent 1 holds {1}, item 3 unallocated
    return PartialAllocation((0b0101, 0b0010), 0b1000)


def example_b_instance() -> Instance:
    return Instance(2, 4, [AdditiveBinary([2]), AdditiveBinary([0, 2, 3])])


def example_b_midstate() -> PartialAllocation:
    # agent 0 holds {0,1}, agent 1 holds {2}, item 3 unallocated
    return PartialAllocation((0b0011, 0b0100), 0b1000)
