"""Core domain types: instances, bitmask bundles, partial allocations, and
the envy predicates every other module builds on.

A bundle is a plain int bitmask (bit i set == item i present), which keeps
union/difference/subset tests single machine ops and makes item iteration
ascending by construction.
"""

from dataclasses import dataclass, field

from .errors import InputError, UsageError
from .valuations import ValuationOracle, ValuationSpec, compile_spec

Bundle = int

# Machine ints cover any realistic instance; the guard only rules out
# accidentally astronomical item counts from bad input.
MAX_ITEMS = 10**6


def bundle_of(items) -> Bundle:
    """Bundle mask from an iterable of item indices."""
    mask = 0
    for item in items:
        mask |= 1 << item
    return mask


def bundle_items(bundle: Bundle) -> tuple:
    """Items of a bundle in ascending index order."""
    items = []
    while bundle:
        low = bundle & -bundle
        items.append(low.bit_length() - 1)
        bundle ^= low
    return tuple(items)


def lowest_item(bundle: Bundle) -> int:
    if not bundle:
        raise UsageError("empty bundle has no items")
    return (bundle & -bundle).bit_length() - 1


def full_mask(m: int) -> Bundle:
    return (1 << m) - 1


@dataclass(frozen=True)
class Instance:
    """A fair-division instance: n agents, m items, one binary valuation each.

    Oracles are compiled eagerly, so constructing an Instance also validates
    every valuation spec (including exhaustive table checks).
    """

    n: int
    m: int
    valuations: tuple
    oracles: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"agent count must be a positive int, got {self.n!r}")
        if not isinstance(self.m, int) or not 0 <= self.m <= MAX_ITEMS:
            raise InputError(f"item count must be in [0, {MAX_ITEMS}], got {self.m!r}")
        specs = tuple(self.valuations)
        object.__setattr__(self, "valuations", specs)
        if len(specs) != self.n:
            raise InputError(f"expected {self.n} valuations, got {len(specs)}")
        oracles = []
        for agent, spec in enumerate(specs):
            try:
                oracles.append(compile_spec(spec, self.m))
            except InputError as exc:
                raise InputError(f"agent {agent}: {exc}") from None
        object.__setattr__(self, "oracles", tuple(oracles))


@dataclass(frozen=True)
class PartialAllocation:
    """Disjoint per-agent bundles plus the pool of unallocated items."""

    bundles: tuple
    pool: Bundle

    @staticmethod
    def empty(instance: Instance) -> "PartialAllocation":
        return PartialAllocation((0,) * instance.n, full_mask(instance.m))

    @property
    def complete(self) -> bool:
        return self.pool == 0


def partition_violation(instance: Instance, allocation: PartialAllocation) -> "str | None":
    """Describe how the allocation breaks the item partition, if it does."""
    if len(allocation.bundles) != instance.n:
        return f"expected {instance.n} bundles, got {len(allocation.bundles)}"
    union = allocation.pool
    total = allocation.pool.bit_count()
    for mask in allocation.bundles:
        union |= mask
        total += mask.bit_count()
    want = full_mask(instance.m)
    if union & ~want:
        return "item index out of range"
    if total > union.bit_count():
        return "bundles and pool overlap"
    if union != want:
        return "items missing from the allocation"
    return None


def _check_agent(instance: Instance, agent: int) -> None:
    if not 0 <= agent < instance.n:
        raise UsageError(f"agent index {agent} out of range for n={instance.n}")


def strong_envy_witness(value_fn, own_value: int, bundle: Bundle) -> "int | None":
    """Smallest item whose removal from `bundle` still leaves it worth more
    than `own_value`, or None if no such item exists.

    The two cheap exits lean on the binary-marginal property: dropping one
    item costs at most one point, so only a value gap of exactly one ever
    needs the per-item scan.
    """
    if not bundle:
        return None
    total = value_fn(bundle)
    if total <= own_value:
        return None
    if total > own_value + 1:
        return (bundle & -bundle).bit_length() - 1
    rest = bundle
    while rest:
        low = rest & -rest
        if value_fn(bundle ^ low) > own_value:
            return low.bit_length() - 1
        rest ^= low
    return None


def envies(instance: Instance, allocation: PartialAllocation, i: int, j: int) -> bool:
    """Does agent i strictly prefer j's bundle to her own?"""
    _check_agent(instance, i)
    _check_agent(instance, j)
    if i == j:
        return False
    value = instance.oracles[i].value
    return value(allocation.bundles[j]) > value(allocation.bundles[i])


def strongly_envies(
    instance: Instance, allocation: PartialAllocation, i: int, j: int
) -> "int | None":
    """Smallest witness item g in A_j with v_i(A_j - g) > v_i(A_i), or None."""
    _check_agent(instance, i)
    _check_agent(instance, j)
    value = instance.oracles[i].value
    return strong_envy_witness(value, value(allocation.bundles[i]), allocation.bundles[j])


def usw(instance: Instance, allocation: PartialAllocation) -> int:
    """Utilitarian social welfare: sum of own-bundle values."""
    return sum(o.value(b) for o, b in zip(instance.oracles, allocation.bundles))


def efx_violation(
    instance: Instance, allocation: PartialAllocation
) -> "tuple | None":
    """Lexicographically smallest strong-envy triple (i, j, witness), or None."""
    bundles = allocation.bundles
    for i in range(instance.n):
        value = instance.oracles[i].value
        own = value(bundles[i])
        for j in range(instance.n):
            if i == j:
                continue
            witness = strong_envy_witness(value, own, bundles[j])
            if witness is not None:
                return (i, j, witness)
    return None


def is_efx(instance: Instance, allocation: PartialAllocation) -> bool:
    """True iff no agent strongly envies another (pool items are exempt)."""
    return efx_violation(instance, allocation) is None
