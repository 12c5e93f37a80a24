"""Envy-graph construction and the cycle machinery.

Three edge classes appear here.  Strict envy edges (i -> j when i values
j's bundle above her own) form the graph proper; equality edges record
ties, where one more item would tip the owner into envy; and transient
per-item edges link a maximal envious agent to the source whose augmented
bundle she covets.  Sources are always computed on strict edges only.

The graph is rebuilt from scratch after every allocation change.  At the
target scales a rebuild is n^2 oracle calls, which is cheaper than getting
incremental maintenance wrong.
"""

from collections import deque
from dataclasses import dataclass

from .errors import InternalInvariantError, UsageError
from .model import (
    Bundle,
    Instance,
    PartialAllocation,
    bundle_items,
    strong_envy_witness,
    usw,
)


@dataclass(frozen=True)
class MaximalEnvyEdge:
    """Edge c -> s: agent c strongly envies source s's bundle plus the
    pending item, and `safe_bundle` is the replacement computed for s."""

    envier: int
    source: int
    safe_bundle: Bundle


@dataclass(frozen=True)
class Cycle:
    """Agents in rotation order; consecutive agents are joined by edges and
    the last agent wraps around to the first."""

    agents: tuple


@dataclass(frozen=True)
class SourceCycle:
    """Cycle of strict-envy paths stitched together by maximal envy edges.

    `agents` is the forward rotation order.  agents[0] is the source whose
    bundle gets replaced and agents[-1] is the agent owed the safe bundle;
    the two coincide for a self-loop.
    """

    agents: tuple
    maximal_edges: tuple

    @property
    def closing_source(self) -> int:
        return self.agents[0]

    @property
    def closing_edge(self) -> MaximalEnvyEdge:
        return self.maximal_edges[-1]


@dataclass(frozen=True)
class EnvyGraph:
    """Adjacency of strict envy (E) and equal-value (E') edges.

    Out-neighbour tuples are ascending, so any iteration over them is
    deterministic.  `maximal_edges` is only populated on graphs produced
    while an item update is in flight.
    """

    n: int
    envy_out: tuple
    pre_out: tuple
    pre_in: tuple
    envy_in_degree: tuple
    maximal_edges: tuple = ()


def build_graph(instance: Instance, allocation: PartialAllocation) -> EnvyGraph:
    """Evaluate all agent pairs and classify edges. Pure: same inputs, same graph."""
    n = instance.n
    bundles = allocation.bundles
    envy_out = []
    pre_out = []
    pre_in = [[] for _ in range(n)]
    indeg = [0] * n
    for i in range(n):
        value = instance.oracles[i].value
        own = value(bundles[i])
        strict = []
        equal = []
        for j in range(n):
            if j == i:
                continue
            other = value(bundles[j])
            if other > own:
                strict.append(j)
                indeg[j] += 1
            elif other == own:
                equal.append(j)
                pre_in[j].append(i)
        envy_out.append(tuple(strict))
        pre_out.append(tuple(equal))
    return EnvyGraph(
        n,
        tuple(envy_out),
        tuple(pre_out),
        tuple(tuple(ins) for ins in pre_in),
        tuple(indeg),
    )


def sources(graph: EnvyGraph) -> tuple:
    """Agents with no incoming strict-envy edge, ascending."""
    return tuple(i for i in range(graph.n) if graph.envy_in_degree[i] == 0)


def find_envy_cycle(graph: EnvyGraph) -> "Cycle | None":
    """First strict-envy cycle under a deterministic DFS, or None.

    The search starts from the smallest agent index, explores out-neighbours
    in ascending order, and returns the cycle closed by the first back edge.
    """
    color = [0] * graph.n  # 0 new, 1 on stack, 2 done
    for root in range(graph.n):
        if color[root]:
            continue
        color[root] = 1
        path = [root]
        frames = [(root, 0)]
        while frames:
            vertex, idx = frames[-1]
            out = graph.envy_out[vertex]
            if idx < len(out):
                frames[-1] = (vertex, idx + 1)
                nxt = out[idx]
                if color[nxt] == 1:
                    return Cycle(tuple(path[path.index(nxt):]))
                if color[nxt] == 0:
                    color[nxt] = 1
                    path.append(nxt)
                    frames.append((nxt, 0))
            else:
                frames.pop()
                path.pop()
                color[vertex] = 2
    return None


def _rotate(bundles: tuple, agents: tuple) -> list:
    """Each agent receives the bundle of its successor in the cycle."""
    out = list(bundles)
    k = len(agents)
    for pos, agent in enumerate(agents):
        out[agent] = bundles[agents[(pos + 1) % k]]
    return out


def eliminate_cycle(
    instance: Instance, allocation: PartialAllocation, cycle: Cycle
) -> PartialAllocation:
    """Rotate bundles along a cycle of envy or equal-value edges.

    Every consecutive pair must still hold at the current allocation; a
    vanished edge means the caller rotated against a stale graph.  A
    single-agent cycle is the identity rotation.
    """
    agents = cycle.agents
    if not agents:
        raise UsageError("cannot eliminate an empty cycle")
    for agent in agents:
        if not 0 <= agent < instance.n:
            raise UsageError(f"cycle references agent {agent}, n={instance.n}")
    if len(set(agents)) != len(agents):
        raise InternalInvariantError(f"cycle repeats an agent: {agents}")
    if len(agents) == 1:
        return allocation
    bundles = allocation.bundles
    for pos, agent in enumerate(agents):
        nxt = agents[(pos + 1) % len(agents)]
        value = instance.oracles[agent].value
        if value(bundles[nxt]) < value(bundles[agent]):
            raise InternalInvariantError(
                f"stale cycle: agent {agent} no longer weakly envies agent {nxt}"
            )
    return PartialAllocation(tuple(_rotate(bundles, agents)), allocation.pool)


def eliminate_all_envy_cycles(
    instance: Instance, allocation: PartialAllocation
) -> tuple:
    """Rotate away strict-envy cycles until the graph is acyclic.

    Returns (allocation, eliminations) where eliminations is a tuple of
    (Cycle, usw_after) pairs in the order performed.  Each rotation strictly
    raises welfare, which caps the loop at m*n iterations.
    """
    eliminations = []
    budget = instance.m * instance.n
    while True:
        graph = build_graph(instance, allocation)
        cycle = find_envy_cycle(graph)
        if cycle is None:
            return allocation, tuple(eliminations)
        if len(eliminations) >= budget:
            raise InternalInvariantError(
                f"cycle elimination exceeded {budget} iterations; welfare is not rising"
            )
        allocation = eliminate_cycle(instance, allocation, cycle)
        eliminations.append((cycle, usw(instance, allocation)))


def strong_envier_of_augmented(
    instance: Instance,
    allocation: PartialAllocation,
    graph: EnvyGraph,
    own_values: list,
    source: int,
    item: int,
) -> "int | None":
    """Smallest-index agent who strongly envies A_source plus `item`, or None.

    Only the source herself and her equal-value enviers can qualify: nobody
    envies a source, so for anyone else the augmented bundle is worth at most
    their own value plus one with the gap already open, never enough to
    survive removing an item.
    """
    augmented = allocation.bundles[source] | (1 << item)
    candidates = graph.pre_in[source]
    merged = []
    placed = False
    for j in candidates:
        if not placed and source < j:
            merged.append(source)
            placed = True
        merged.append(j)
    if not placed:
        merged.append(source)
    for j in merged:
        witness = strong_envy_witness(
            instance.oracles[j].value, own_values[j], augmented
        )
        if witness is not None:
            return j
    return None


def _source_regions(graph: EnvyGraph, srcs: tuple) -> tuple:
    """Assign every reachable vertex to the smallest source that reaches it.

    Sources are processed ascending; each runs a BFS that claims unclaimed
    vertices and records BFS-tree parents, so the parent chain from any
    vertex is a real strict-envy path back to its owning source.
    """
    owner = [-1] * graph.n
    parent = [-1] * graph.n
    for s in srcs:
        if owner[s] != -1:
            continue
        owner[s] = s
        queue = deque((s,))
        while queue:
            vertex = queue.popleft()
            for nxt in graph.envy_out[vertex]:
                if owner[nxt] == -1:
                    owner[nxt] = s
                    parent[nxt] = vertex
                    queue.append(nxt)
    return owner, parent


def _tree_path(parent: list, source: int, target: int) -> list:
    """Vertices of the BFS-tree path source -> ... -> target, inclusive."""
    path = [target]
    while path[-1] != source:
        prev = parent[path[-1]]
        if prev == -1:
            raise InternalInvariantError(
                f"no recorded path from source {source} to agent {target}"
            )
        path.append(prev)
    path.reverse()
    return path


def _source_cycle(
    instance: Instance,
    allocation: PartialAllocation,
    graph: EnvyGraph,
    item: int,
) -> SourceCycle:
    """Backward traversal alternating maximal-envy edges and envy paths.

    From the smallest source, compute its safe bundle and maximal envious
    agent c, hop to the smallest source that reaches c, and repeat until a
    source repeats.  The closed portion of that walk is the cycle; distinct
    source regions guarantee it never revisits an agent.
    """
    from .efx_core import _safe_bundle  # deferred: efx_core imports this module

    srcs = sources(graph)
    if not srcs:
        raise InternalInvariantError("no sources: strict envy edges form a cycle")
    src_set = set(srcs)
    owner, parent = _source_regions(graph, srcs)
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]

    annotations = {}
    order = []
    position = {}
    s = srcs[0]
    while s not in position:
        position[s] = len(order)
        order.append(s)
        result = _safe_bundle(instance, allocation, s, item, own_values)
        c = result.maximal_envious_agent
        # The maximal envious agent always ties with the source she targets.
        if c != s and own_values[c] != instance.oracles[c].value(allocation.bundles[s]):
            raise InternalInvariantError(
                f"maximal envious agent {c} does not tie with source {s}"
            )
        annotations[s] = result
        if owner[c] == -1:
            raise InternalInvariantError(f"agent {c} is unreachable from any source")
        s = owner[c]

    loop = order[position[s]:]
    agents = []
    edges = []
    r = len(loop)
    for idx in range(r - 1, -1, -1):
        src = loop[idx]
        result = annotations[src]
        entry = loop[(idx + 1) % r]
        agents.extend(_tree_path(parent, entry, result.maximal_envious_agent))
        edges.append(
            MaximalEnvyEdge(result.maximal_envious_agent, src, result.bundle)
        )
    if len(set(agents)) != len(agents):
        raise InternalInvariantError(f"source cycle revisits an agent: {agents}")
    if agents[0] != loop[0] or edges[-1].source != loop[0]:
        raise InternalInvariantError("source cycle is not anchored at its closing source")
    return SourceCycle(tuple(agents), tuple(edges))


def find_source_cycle(
    instance: Instance, allocation: PartialAllocation, item: int
) -> SourceCycle:
    """Cycle used by the bundle-replacement update for a pool item nobody can
    safely take.

    Precondition: every source's bundle plus `item` is strongly envied by
    someone (otherwise the plain update applies and this call is a mistake).
    """
    if not 0 <= item < instance.m or not allocation.pool & (1 << item):
        raise UsageError(f"item {item} is not in the pool")
    graph = build_graph(instance, allocation)
    own_values = [o.value(b) for o, b in zip(instance.oracles, allocation.bundles)]
    for s in sources(graph):
        if strong_envier_of_augmented(instance, allocation, graph, own_values, s, item) is None:
            raise UsageError(
                f"source agent {s} can take item {item} without causing strong envy"
            )
    return _source_cycle(instance, allocation, graph, item)


def dump_graph(graph: EnvyGraph) -> str:
    """Plain-text edge listing, one line per edge, class-tagged E / E' / Eg."""
    lines = []
    for i, outs in enumerate(graph.envy_out):
        for j in outs:
            lines.append(f"E {i} -> {j}")
    for i, outs in enumerate(graph.pre_out):
        for j in outs:
            lines.append(f"E' {i} -> {j}")
    for edge in graph.maximal_edges:
        safe = ",".join(str(x) for x in bundle_items(edge.safe_bundle))
        lines.append(f"Eg {edge.envier} -> {edge.source} safe={safe}")
    return "\n".join(lines)
