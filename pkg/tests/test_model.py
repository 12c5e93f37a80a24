import pytest
from hypothesis import given
from hypothesis import strategies as st

from efx_binary import (
    AdditiveBinary,
    InputError,
    Instance,
    PartialAllocation,
    Threshold,
    UsageError,
    bundle_items,
    bundle_of,
    efx_violation,
    envies,
    full_mask,
    is_efx,
    lowest_item,
    partition_violation,
    strong_envy_witness,
    strongly_envies,
    usw,
    value,
)
from efx_binary.model import MAX_ITEMS
from efx_binary.verify import _strong_envy_raw, efx_violation_by_enumeration
from helpers import (
    example_a_instance,
    example_a_midstate,
    instances_with_allocation,
)


def test_bundle_helpers_round_trip():
    assert bundle_of([3, 0, 2]) == 0b1101
    assert bundle_items(0b1101) == (0, 2, 3)
    assert bundle_items(0) == ()
    assert full_mask(3) == 0b111
    assert full_mask(0) == 0


def test_lowest_item():
    assert lowest_item(0b1100) == 2
    with pytest.raises(UsageError):
        lowest_item(0)


@pytest.mark.parametrize(
    "n,m,specs",
    [
        (0, 2, []),
        (2, -1, [AdditiveBinary([]), AdditiveBinary([])]),
        (2, 2, [AdditiveBinary([])]),
        (1, MAX_ITEMS + 1, [AdditiveBinary([])]),
    ],
)
def test_instance_rejects_bad_shapes(n, m, specs):
    with pytest.raises(InputError):
        Instance(n, m, specs)


def test_instance_compiles_oracles():
    inst = example_a_instance()
    assert value(inst.oracles[0], 0b1010) == 2
    assert value(inst.oracles[1], 0b1010) == 2


def test_empty_allocation_and_completeness():
    alloc = PartialAllocation.empty(example_a_instance())
    assert alloc.bundles == (0, 0)
    assert alloc.pool == 0b1111
    assert not alloc.complete
    assert PartialAllocation((0b0011, 0b1100), 0).complete


def test_partition_violation_cases():
    inst = example_a_instance()
    assert partition_violation(inst, PartialAllocation((0b0011, 0b0100), 0b1000)) is None
    overlap = partition_violation(inst, PartialAllocation((0b0011, 0b0010), 0b1100))
    assert overlap == "bundles and pool overlap"
    missing = partition_violation(inst, PartialAllocation((0b0001, 0b0010), 0b1000))
    assert missing == "items missing from the allocation"
    stray = partition_violation(inst, PartialAllocation((0b0001, 0b10000), 0b1110))
    assert stray == "item index out of range"
    shape = partition_violation(inst, PartialAllocation((0b0001,), 0b1110))
    assert shape is not None


def test_envy_and_strong_envy_on_three_item_gap():
    # agent 0 likes {0,1,2}; own {2}, other holds {0,1,3}
    inst = Instance(
        2, 4, [AdditiveBinary([0, 1, 2]), AdditiveBinary([])]
    )
    alloc = PartialAllocation((0b0100, 0b1011), 0)
    assert envies(inst, alloc, 0, 1)
    assert strongly_envies(inst, alloc, 0, 1) == 3
    witness = strong_envy_witness(
        inst.oracles[0].value, 1, alloc.bundles[1]
    )
    assert witness == 3  # smallest item whose removal keeps the bundle better


def test_threshold_strong_envy_witness_is_smallest_item():
    inst = Instance(
        2, 4, [Threshold([0, 1, 2, 3], 3), AdditiveBinary([])]
    )
    alloc = PartialAllocation((0, 0b1111), 0)
    assert strongly_envies(inst, alloc, 0, 1) == 0
    assert strong_envy_witness(inst.oracles[0].value, 0, 0b1111) == 0


def test_singleton_advantage_is_not_strong_envy():
    inst = Instance(2, 2, [AdditiveBinary([0, 1]), AdditiveBinary([])])
    alloc = PartialAllocation((0b10, 0b01), 0)
    assert envies(inst, alloc, 0, 1) is False  # values tie at 1
    alloc = PartialAllocation((0, 0b01), 0b10)
    assert envies(inst, alloc, 0, 1)
    assert strongly_envies(inst, alloc, 0, 1) is None


def test_self_comparison_is_never_envy():
    inst = example_a_instance()
    alloc = PartialAllocation((0b1111, 0), 0)
    assert not envies(inst, alloc, 0, 0)
    assert strongly_envies(inst, alloc, 0, 0) is None


def test_usw_sums_own_bundle_values():
    inst = example_a_instance()
    assert usw(inst, example_a_midstate()) == 1
    assert usw(inst, PartialAllocation((0b1010, 0b0101), 0)) == 3


def test_efx_violation_is_lexicographically_smallest():
    inst = Instance(
        3,
        3,
        [AdditiveBinary([0, 1, 2]), AdditiveBinary([0, 1, 2]), AdditiveBinary([])],
    )
    alloc = PartialAllocation((0, 0, 0b111), 0)
    assert efx_violation(inst, alloc) == (0, 2, 0)
    assert not is_efx(inst, alloc)


def test_pool_is_exempt_from_efx():
    inst = example_a_instance()
    assert is_efx(inst, PartialAllocation((0, 0), 0b1111))


def test_nearly_everything_to_one_agent_fails_efx():
    # threshold agent wants m-n+1 items, additive agent wants all of them
    inst = Instance(
        2, 4, [Threshold([0, 1, 2, 3], 3), AdditiveBinary([0, 1, 2, 3])]
    )
    alloc = PartialAllocation((0b0111, 0b1000), 0)
    assert efx_violation(inst, alloc) == (1, 0, 0)
    fair = PartialAllocation((0b0101, 0b1010), 0)
    assert is_efx(inst, fair)


@given(instances_with_allocation())
def test_witness_matches_definitional_scan(case):
    inst, alloc = case
    for i in range(inst.n):
        own = value(inst.oracles[i], alloc.bundles[i])
        for j in range(inst.n):
            if i == j:
                continue
            fast = strong_envy_witness(
                inst.oracles[i].value, own, alloc.bundles[j]
            )
            slow = _strong_envy_raw(
                inst.oracles[i].value, own, alloc.bundles[j]
            )
            assert fast == slow


@given(instances_with_allocation())
def test_efx_violation_matches_enumeration(case):
    inst, alloc = case
    assert efx_violation(inst, alloc) == efx_violation_by_enumeration(inst, alloc)


@given(st.integers(0, 2**20 - 1))
def test_bundle_items_bit_equivalence(mask):
    assert bundle_of(bundle_items(mask)) == mask
