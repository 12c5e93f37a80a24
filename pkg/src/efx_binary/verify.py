"""Definition-level oracles: exhaustive fairness checks, brute-force search,
safe-bundle enumeration, and trace replay.

Nothing here reuses the solver's shortcuts.  Strong envy is decided by
literally removing each item; the brute-force searcher enumerates every
assignment; replay re-simulates a trace from the empty allocation and audits
each event against the definitions.  Agreement between this module and the
fast paths is what the test suite leans on.
"""

from dataclasses import dataclass

from .errors import InputError, InternalInvariantError, UsageError
from .model import (
    Bundle,
    Instance,
    PartialAllocation,
    bundle_items,
    bundle_of,
    partition_violation,
    usw,
)
from .efx_core import CYCLE_ELIM, U0, U1, TraceEvent


@dataclass(frozen=True)
class Violation:
    """One audit finding; unused coordinate tuples stay empty."""

    kind: str
    step: "int | None" = None
    agents: tuple = ()
    items: tuple = ()
    values: tuple = ()


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    violations: tuple

    def __post_init__(self):
        if self.passed != (not self.violations):
            raise InternalInvariantError(
                "report marked passed despite violations (or vice versa)"
            )


def _report(violations: list) -> VerificationReport:
    return VerificationReport(not violations, tuple(violations))


def _strong_envy_raw(value_fn, own_value: int, bundle: Bundle) -> "int | None":
    """Smallest item whose removal still leaves the bundle worth more than
    own_value.  Plain definitional scan, deliberately shortcut-free."""
    for item in bundle_items(bundle):
        if value_fn(bundle & ~(1 << item)) > own_value:
            return item
    return None


def efx_violation_by_enumeration(
    instance: Instance, allocation: PartialAllocation
) -> "tuple | None":
    """Lexicographically smallest (envier, envied, witness item) such that the
    envier values the envied bundle minus the witness above her own bundle, or
    None.  Independent re-implementation of the fast-path check."""
    n = instance.n
    bundles = allocation.bundles
    for i in range(n):
        value = instance.oracles[i].value
        own = value(bundles[i])
        for j in range(n):
            if j == i:
                continue
            witness = _strong_envy_raw(value, own, bundles[j])
            if witness is not None:
                return (i, j, witness)
    return None


def iter_assignments(instance: Instance):
    """Yield every complete allocation of the m items to the n agents,
    lexicographic in the item->agent digit string (item 0 most significant).
    """
    n, m = instance.n, instance.m
    digits = [0] * m
    while True:
        bundles = [0] * n
        for item, agent in enumerate(digits):
            bundles[agent] |= 1 << item
        yield PartialAllocation(tuple(bundles), 0)
        pos = m - 1
        while pos >= 0 and digits[pos] == n - 1:
            digits[pos] = 0
            pos -= 1
        if pos < 0:
            return
        digits[pos] += 1


BRUTE_FORCE_LIMIT = 10**7


def brute_force_efx(instance: Instance) -> "PartialAllocation | None":
    """First complete allocation (in enumeration order) with no strong envy,
    or None if the full search finds nothing."""
    if instance.n ** instance.m > BRUTE_FORCE_LIMIT:
        raise UsageError(
            f"{instance.n}^{instance.m} assignments exceed the search budget "
            f"of {BRUTE_FORCE_LIMIT}; use a smaller instance"
        )
    for allocation in iter_assignments(instance):
        if efx_violation_by_enumeration(instance, allocation) is None:
            return allocation
    return None


SAFE_BUNDLE_ENUM_LIMIT = 20


def brute_force_safe_bundles(
    instance: Instance, allocation: PartialAllocation, agent: int, item: int
) -> dict:
    """Every safe bundle inside A_agent plus the pool item, by enumeration.

    Returns {bundle mask: tuple of agents that envy it}.  A subset qualifies
    when someone envies it and nobody strongly envies it.  Preconditions
    mirror the fast path: no strong envy among assigned bundles, and someone
    strongly envies the augmented bundle.
    """
    if not 0 <= agent < instance.n:
        raise UsageError(f"agent index {agent} out of range for n={instance.n}")
    if not 0 <= item < instance.m or not allocation.pool >> item & 1:
        raise UsageError(f"item {item} is not in the pool")
    augmented = allocation.bundles[agent] | 1 << item
    width = augmented.bit_count()
    if width > SAFE_BUNDLE_ENUM_LIMIT:
        raise UsageError(
            f"augmented bundle has {width} items; enumeration is capped at "
            f"{SAFE_BUNDLE_ENUM_LIMIT}"
        )
    if efx_violation_by_enumeration(instance, allocation) is not None:
        raise UsageError("allocation already has strong envy among assigned bundles")
    n = instance.n
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]
    if all(
        _strong_envy_raw(instance.oracles[j].value, own_values[j], augmented) is None
        for j in range(n)
    ):
        raise UsageError(
            f"no agent strongly envies bundle of agent {agent} plus item {item}"
        )
    members = bundle_items(augmented)
    found = {}
    for picks in range(1 << width):
        subset = 0
        for pos in range(width):
            if picks >> pos & 1:
                subset |= 1 << members[pos]
        enviers = tuple(
            j
            for j in range(n)
            if instance.oracles[j].value(subset) > own_values[j]
        )
        if not enviers:
            continue
        if any(
            _strong_envy_raw(instance.oracles[j].value, own_values[j], subset)
            is not None
            for j in range(n)
        ):
            continue
        found[subset] = enviers
    return found


def _event_shape(ev: TraceEvent, index: int) -> None:
    """Reject traces whose events are structurally impossible to apply."""

    def fail(detail: str):
        raise InputError(f"event {index}: {detail}")

    if ev.kind == U0:
        if not isinstance(ev.item, int) or not isinstance(ev.agent, int):
            fail("direct placement needs an item and an agent")
    elif ev.kind == U1:
        if not isinstance(ev.item, int):
            fail("bundle replacement needs an item")
        if not ev.cycle:
            fail("bundle replacement needs a non-empty cycle")
        if ev.safe_bundle is None or ev.returned_items is None:
            fail("bundle replacement needs safe_bundle and returned_items")
    elif ev.kind == CYCLE_ELIM:
        if not ev.cycle:
            fail("cycle elimination needs a non-empty cycle")
    else:
        fail(f"unknown kind {ev.kind!r}")


def apply_event(
    instance: Instance, allocation: PartialAllocation, ev: TraceEvent, index: int = 0
) -> PartialAllocation:
    """Re-apply one traced event by its recorded mechanics alone.

    Raises UsageError when the event cannot legally act on this state (item
    not in the pool, agents out of range, returned items inconsistent with
    the recorded safe bundle), InputError when the event itself is malformed.
    """
    _event_shape(ev, index)
    n, m = instance.n, instance.m

    def check_agents(agents):
        if len(set(agents)) != len(agents):
            raise UsageError(f"cycle repeats an agent: {agents}")
        for a in agents:
            if not isinstance(a, int) or not 0 <= a < n:
                raise UsageError(f"agent index {a} out of range")

    if ev.kind == U0:
        if not 0 <= ev.item < m or not allocation.pool >> ev.item & 1:
            raise UsageError(f"item {ev.item} is not in the pool")
        if not 0 <= ev.agent < n:
            raise UsageError(f"agent index {ev.agent} out of range")
        bundles = list(allocation.bundles)
        bundles[ev.agent] |= 1 << ev.item
        return PartialAllocation(tuple(bundles), allocation.pool & ~(1 << ev.item))

    if ev.kind == U1:
        if not 0 <= ev.item < m or not allocation.pool >> ev.item & 1:
            raise UsageError(f"item {ev.item} is not in the pool")
        check_agents(ev.cycle)
        for x in ev.safe_bundle + ev.returned_items:
            if not isinstance(x, int) or not 0 <= x < m:
                raise UsageError(f"item index {x} out of range")
        source = ev.cycle[0]
        replacement = bundle_of(ev.safe_bundle)
        augmented = allocation.bundles[source] | 1 << ev.item
        if replacement & ~augmented:
            raise UsageError(
                "safe bundle is not contained in the source bundle plus the item"
            )
        if bundle_of(ev.returned_items) != augmented & ~replacement:
            raise UsageError(
                "returned items do not equal the augmented bundle minus the safe bundle"
            )
        post = list(allocation.bundles)
        post[source] = replacement
        rotated = list(post)
        k = len(ev.cycle)
        for pos, a in enumerate(ev.cycle):
            rotated[a] = post[ev.cycle[(pos + 1) % k]]
        pool = (allocation.pool & ~(1 << ev.item)) | (augmented & ~replacement)
        return PartialAllocation(tuple(rotated), pool)

    # cycle elimination: pure rotation
    check_agents(ev.cycle)
    bundles = allocation.bundles
    rotated = list(bundles)
    k = len(ev.cycle)
    for pos, a in enumerate(ev.cycle):
        rotated[a] = bundles[ev.cycle[(pos + 1) % k]]
    return PartialAllocation(tuple(rotated), allocation.pool)


def replay_states(instance: Instance, trace) -> "list[tuple]":
    """(state before event, event) pairs from re-simulating a trace.

    Strict: any event that cannot be applied raises.  Meant for auditing
    traces already believed good; replay_trace is the tolerant collector.
    """
    allocation = PartialAllocation.empty(instance)
    out = []
    for index, ev in enumerate(trace):
        out.append((allocation, ev))
        allocation = apply_event(instance, allocation, ev, index)
    return out


def replay_trace(instance: Instance, trace) -> VerificationReport:
    """Re-simulate a trace from the empty allocation and audit every event.

    Checks, per event: the step counter, the item-partition invariant, the
    absence of strong envy afterwards, welfare bookkeeping (recorded value
    matches recomputation, never decreases, strictly rises on replacement
    events); globally: replacement and update counts against their budgets
    and final completeness.  A state the mechanics cannot even reach aborts
    the audit with a partition violation; everything else keeps collecting.
    """
    violations = []
    allocation = PartialAllocation.empty(instance)
    n, m = instance.n, instance.m
    replacement_budget = m * n
    update_budget = m * m * n + m * n + m
    replacements = 0
    updates = 0
    prev_welfare = 0
    for index, ev in enumerate(trace):
        _event_shape(ev, index)
        if ev.step != index:
            violations.append(
                Violation("step", step=index, values=(ev.step,))
            )
        if ev.kind in (U0, U1):
            updates += 1
        if ev.kind == U1:
            replacements += 1
        try:
            allocation = apply_event(instance, allocation, ev, index)
        except UsageError as exc:
            violations.append(Violation("partition", step=index, values=(str(exc),)))
            return _report(violations)
        broken = partition_violation(instance, allocation)
        if broken is not None:
            violations.append(Violation("partition", step=index, values=(broken,)))
            return _report(violations)
        efx_breach = efx_violation_by_enumeration(instance, allocation)
        if efx_breach is not None:
            i, j, g = efx_breach
            violations.append(
                Violation("efx", step=index, agents=(i, j), items=(g,))
            )
        welfare = usw(instance, allocation)
        if ev.usw_after != welfare:
            violations.append(
                Violation("usw-mismatch", step=index, values=(ev.usw_after, welfare))
            )
        if ev.usw_after < prev_welfare:
            violations.append(
                Violation(
                    "usw-decrease", step=index, values=(prev_welfare, ev.usw_after)
                )
            )
        if ev.kind == U1 and ev.usw_after <= prev_welfare:
            violations.append(
                Violation(
                    "u1-no-progress", step=index, values=(prev_welfare, ev.usw_after)
                )
            )
        prev_welfare = ev.usw_after
    if replacements > replacement_budget:
        violations.append(
            Violation("u1-count", values=(replacements, replacement_budget))
        )
    if updates > update_budget:
        violations.append(Violation("update-count", values=(updates, update_budget)))
    if allocation.pool:
        violations.append(
            Violation("incomplete", items=bundle_items(allocation.pool))
        )
    return _report(violations)


def check_proposition_gap(
    instance: Instance, allocation: PartialAllocation
) -> VerificationReport:
    """On an allocation free of strong envy, every remaining envy pair must
    have a value gap of exactly one; binary marginals force it."""
    if efx_violation_by_enumeration(instance, allocation) is not None:
        raise UsageError("gap check requires an allocation with no strong envy")
    violations = []
    bundles = allocation.bundles
    for i in range(instance.n):
        value = instance.oracles[i].value
        own = value(bundles[i])
        for j in range(instance.n):
            if j == i:
                continue
            other = value(bundles[j])
            if other > own and other - own != 1:
                violations.append(
                    Violation("envy-gap", agents=(i, j), values=(own, other))
                )
    return _report(violations)
