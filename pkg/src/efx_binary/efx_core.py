"""Safe-bundle computation, the two item-update rules, and the solver loop.

An item update tries the direct rule first: hand the pool item to a source
agent nobody would strongly envy afterwards (trace kind "U0").  When every
source fails that test, the replacement rule fires (trace kind "U1"): shrink
one source's augmented bundle to a safe bundle, return the trimmings to the
pool, and rotate bundles along the cycle closed by the agent who covets that
safe bundle.  Replacement strictly raises social welfare, which is what
bounds the total number of updates.
"""

from dataclasses import dataclass

from .envy_graph import (
    SourceCycle,
    build_graph,
    eliminate_all_envy_cycles,
    sources,
    strong_envier_of_augmented,
    _source_cycle,
)
from .errors import InternalInvariantError, UsageError
from .model import (
    Bundle,
    Instance,
    PartialAllocation,
    bundle_items,
    efx_violation,
    lowest_item,
    strong_envy_witness,
    usw,
)

U0 = "U0"
U1 = "U1"
CYCLE_ELIM = "CycleElim"


@dataclass(frozen=True)
class SafeBundleResult:
    """Trimmed bundle plus the agent whose envy of it survived the trimming."""

    bundle: Bundle
    maximal_envious_agent: int


@dataclass(frozen=True)
class TraceEvent:
    """One solver step; fields not applicable to the kind are None.

    kind "U0": item, agent.  kind "U1": item, cycle (rotation order, the
    replaced source first), safe_bundle, returned_items.  kind "CycleElim":
    cycle only.  usw_after is always recorded.
    """

    step: int
    kind: str
    item: "int | None"
    agent: "int | None"
    cycle: "tuple | None"
    safe_bundle: "tuple | None"
    returned_items: "tuple | None"
    usw_after: int


def _check_agent_index(instance: Instance, agent: int) -> None:
    if not 0 <= agent < instance.n:
        raise UsageError(f"agent index {agent} out of range for n={instance.n}")


def _check_pool_item(instance: Instance, allocation: PartialAllocation, item: int) -> None:
    if not 0 <= item < instance.m or not allocation.pool >> item & 1:
        raise UsageError(f"item {item} is not in the pool")


def _safe_bundle(
    instance: Instance,
    allocation: PartialAllocation,
    agent: int,
    item: int,
    own_values: list,
) -> SafeBundleResult:
    """Core trimming loop; trusts preconditions, asserts its own invariants."""
    n = instance.n
    bundle = allocation.bundles[agent] | 1 << item

    def enviers(candidate: Bundle) -> list:
        return [
            j
            for j in range(n)
            if strong_envy_witness(instance.oracles[j].value, own_values[j], candidate)
            is not None
        ]

    envious = enviers(bundle)
    last_remover = None
    rounds = 0
    while envious:
        rounds += 1
        if rounds > n:
            raise InternalInvariantError(
                "safe-bundle trimming did not settle within one round per agent"
            )
        j = envious[0]
        value = instance.oracles[j].value
        own = own_values[j]
        removed = False
        while (witness := strong_envy_witness(value, own, bundle)) is not None:
            # Dropping the witness keeps j's value above her own bundle, so
            # her envy survives her own trimming.
            bundle &= ~(1 << witness)
            removed = True
        if not removed:
            raise InternalInvariantError(
                f"agent {j} was listed as a strong envier but removed nothing"
            )
        last_remover = j
        envious = enviers(bundle)
    if last_remover is None:
        raise InternalInvariantError("safe-bundle trimming saw no strong envier at all")
    if instance.oracles[last_remover].value(bundle) <= own_values[last_remover]:
        raise InternalInvariantError(
            f"agent {last_remover} trimmed the bundle but does not envy the result"
        )
    return SafeBundleResult(bundle, last_remover)


def safe_bundle(
    instance: Instance, allocation: PartialAllocation, agent: int, item: int
) -> SafeBundleResult:
    """Shrink A_agent plus a pool item until nobody strongly envies it.

    Preconditions: the allocation has no strong envy among assigned bundles,
    and at least one agent strongly envies the augmented bundle (otherwise
    there is nothing to trim and the direct placement rule applies instead).
    The result is envied by the returned agent and strongly envied by nobody.
    """
    _check_agent_index(instance, agent)
    _check_pool_item(instance, allocation, item)
    violation = efx_violation(instance, allocation)
    if violation is not None:
        raise UsageError(
            f"allocation has strong envy {violation} among assigned bundles"
        )
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]
    augmented = allocation.bundles[agent] | 1 << item
    if all(
        strong_envy_witness(instance.oracles[j].value, own_values[j], augmented) is None
        for j in range(instance.n)
    ):
        raise UsageError(
            f"no agent strongly envies bundle of agent {agent} plus item {item}"
        )
    return _safe_bundle(instance, allocation, agent, item, own_values)


def _u0_candidate(
    instance: Instance,
    allocation: PartialAllocation,
    graph,
    own_values: list,
    item: int,
) -> "int | None":
    srcs = sources(graph)
    if not srcs:
        raise InternalInvariantError(
            "no source agent: strict envy edges form a cycle, eliminate cycles first"
        )
    for s in srcs:
        if (
            strong_envier_of_augmented(instance, allocation, graph, own_values, s, item)
            is None
        ):
            return s
    return None


def u0_candidate(
    instance: Instance, allocation: PartialAllocation, item: int
) -> "int | None":
    """Smallest-index source that can take the pool item without anyone
    strongly envying the result, or None when every source fails."""
    _check_pool_item(instance, allocation, item)
    graph = build_graph(instance, allocation)
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]
    return _u0_candidate(instance, allocation, graph, own_values, item)


def apply_u0(
    instance: Instance, allocation: PartialAllocation, item: int, agent: int
) -> PartialAllocation:
    """Move one pool item into an agent's bundle."""
    _check_agent_index(instance, agent)
    _check_pool_item(instance, allocation, item)
    bit = 1 << item
    bundles = list(allocation.bundles)
    bundles[agent] |= bit
    return PartialAllocation(tuple(bundles), allocation.pool & ~bit)


def apply_u1(
    instance: Instance,
    allocation: PartialAllocation,
    item: int,
    cycle: SourceCycle,
) -> PartialAllocation:
    """Replace the closing source's bundle with its safe bundle and rotate.

    The cycle's first agent gives up her bundle for the safe one; every other
    agent on the cycle receives the next agent's post-replacement bundle; the
    trimmed-off items and possibly the pool item itself go back to the pool.
    Every consecutive edge is revalidated against the current allocation so a
    stale cycle is caught instead of silently corrupting the state.
    """
    _check_pool_item(instance, allocation, item)
    agents = cycle.agents
    if not agents:
        raise UsageError("cannot apply an empty cycle")
    for a in agents:
        _check_agent_index(instance, a)
    if len(set(agents)) != len(agents):
        raise InternalInvariantError(f"replacement cycle repeats an agent: {agents}")
    closing = cycle.closing_edge
    if closing.source != agents[0] or closing.envier != agents[-1]:
        raise InternalInvariantError(
            "closing edge does not run from the cycle's last agent to its first"
        )
    bit = 1 << item
    bundles = allocation.bundles
    augmented = bundles[agents[0]] | bit
    replacement = closing.safe_bundle
    if replacement & ~augmented:
        raise InternalInvariantError(
            "safe bundle is not contained in the source bundle plus the item"
        )
    edge_map = {(e.envier, e.source): e for e in cycle.maximal_edges}
    if len(edge_map) != len(cycle.maximal_edges):
        raise InternalInvariantError("duplicate maximal envy edges on one cycle")
    k = len(agents)
    for pos in range(k):
        u = agents[pos]
        w = agents[(pos + 1) % k]
        value = instance.oracles[u].value
        edge = edge_map.get((u, w))
        if pos == k - 1:
            if edge is None or edge != closing:
                raise InternalInvariantError(
                    "cycle does not close on its own maximal envy edge"
                )
            if value(replacement) <= value(bundles[u]):
                raise InternalInvariantError(
                    f"stale cycle: agent {u} no longer envies the safe bundle"
                )
        elif edge is not None:
            if value(bundles[w]) != value(bundles[u]):
                raise InternalInvariantError(
                    f"stale cycle: agents {u} and {w} no longer tie in value"
                )
        elif value(bundles[w]) <= value(bundles[u]):
            raise InternalInvariantError(
                f"stale cycle: agent {u} no longer envies agent {w}"
            )
    returned = augmented & ~replacement
    post = list(bundles)
    post[agents[0]] = replacement
    rotated = list(post)
    for pos, a in enumerate(agents):
        rotated[a] = post[agents[(pos + 1) % k]]
    pool = (allocation.pool & ~bit) | returned
    return PartialAllocation(tuple(rotated), pool)


def update(
    instance: Instance, allocation: PartialAllocation, item: int, step: int = 0
) -> tuple:
    """One item update: direct placement when a source admits the item,
    bundle replacement otherwise.  Returns (allocation, TraceEvent).

    The caller keeps the allocation free of strong envy with an acyclic
    strict-envy graph between calls; solve() maintains exactly that.
    """
    _check_pool_item(instance, allocation, item)
    graph = build_graph(instance, allocation)
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]
    target = _u0_candidate(instance, allocation, graph, own_values, item)
    if target is not None:
        after = apply_u0(instance, allocation, item, target)
        event = TraceEvent(
            step, U0, item, target, None, None, None, usw(instance, after)
        )
        return after, event
    cycle = _source_cycle(instance, allocation, graph, item)
    welfare_before = usw(instance, allocation)
    after = apply_u1(instance, allocation, item, cycle)
    welfare_after = usw(instance, after)
    if welfare_after <= welfare_before:
        raise InternalInvariantError(
            f"bundle replacement left welfare at {welfare_after}, "
            f"was {welfare_before}; it must strictly rise"
        )
    returned = (allocation.bundles[cycle.agents[0]] | 1 << item) & ~cycle.closing_edge.safe_bundle
    event = TraceEvent(
        step,
        U1,
        item,
        None,
        cycle.agents,
        bundle_items(cycle.closing_edge.safe_bundle),
        bundle_items(returned),
        welfare_after,
    )
    return after, event


@dataclass(frozen=True)
class SolveResult:
    """Complete allocation plus the full event trace that produced it."""

    allocation: PartialAllocation
    trace: tuple

    @property
    def u0_count(self) -> int:
        return sum(1 for ev in self.trace if ev.kind == U0)

    @property
    def u1_count(self) -> int:
        return sum(1 for ev in self.trace if ev.kind == U1)

    @property
    def elimination_count(self) -> int:
        return sum(1 for ev in self.trace if ev.kind == CYCLE_ELIM)

    @property
    def update_count(self) -> int:
        return self.u0_count + self.u1_count


def solve(instance: Instance) -> SolveResult:
    """Allocate every item, keeping the partial allocation free of strong
    envy after each event.

    Deterministic: items are drawn from the pool smallest-index first, and
    every tie inside the update rules breaks toward the smallest index, so
    identical instances yield identical traces.
    """
    allocation = PartialAllocation.empty(instance)
    trace = []
    m, n = instance.m, instance.n
    replacement_budget = m * n
    update_budget = m * m * n + m * n + m
    replacements = 0
    updates = 0
    while allocation.pool:
        item = lowest_item(allocation.pool)
        allocation, event = update(instance, allocation, item, step=len(trace))
        trace.append(event)
        updates += 1
        if event.kind == U1:
            replacements += 1
            if replacements > replacement_budget:
                raise InternalInvariantError(
                    f"more than {replacement_budget} bundle replacements; "
                    "welfare can no longer be rising"
                )
        if updates > update_budget:
            raise InternalInvariantError(
                f"more than {update_budget} item updates; the solver is not converging"
            )
        allocation, eliminations = eliminate_all_envy_cycles(instance, allocation)
        for cyc, welfare in eliminations:
            trace.append(
                TraceEvent(len(trace), CYCLE_ELIM, None, None, cyc.agents, None, None, welfare)
            )
    if not allocation.complete:
        raise InternalInvariantError("solver stopped with a non-empty pool")
    violation = efx_violation(instance, allocation)
    if violation is not None:
        raise InternalInvariantError(
            f"final allocation still carries strong envy: {violation}"
        )
    return SolveResult(allocation, tuple(trace))
