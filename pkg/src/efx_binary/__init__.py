"""Complete EFX allocations under binary marginal valuations.

A solver that places every indivisible item while no agent ever strongly
envies another (values someone's bundle minus any single item above her
own), together with definition-level brute-force oracles for checking it.
"""

from .efx_core import (
    CYCLE_ELIM,
    U0,
    U1,
    SafeBundleResult,
    SolveResult,
    TraceEvent,
    apply_u0,
    apply_u1,
    safe_bundle,
    solve,
    u0_candidate,
    update,
)
from .envy_graph import (
    Cycle,
    EnvyGraph,
    MaximalEnvyEdge,
    SourceCycle,
    build_graph,
    dump_graph,
    eliminate_all_envy_cycles,
    eliminate_cycle,
    find_envy_cycle,
    find_source_cycle,
    sources,
)
from .errors import InputError, InternalInvariantError, UsageError
from .formats import (
    allocation_from_dict,
    allocation_to_dict,
    dump_trace,
    dumps_canonical,
    event_to_dict,
    instance_from_dict,
    instance_to_dict,
    load_allocation,
    load_instance,
    load_trace,
    parse_trace,
    report_to_dict,
    save_allocation,
    save_instance,
    save_trace,
)
from .generators import FAMILIES, generate
from .model import (
    Instance,
    PartialAllocation,
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
)
from .valuations import (
    AdditiveBinary,
    CappedAdditive,
    MatroidRank,
    Table,
    Threshold,
    ValuationOracle,
    compile_spec,
    marginal,
    validate_binary,
    value,
)
from .verify import (
    VerificationReport,
    Violation,
    apply_event,
    brute_force_efx,
    brute_force_safe_bundles,
    check_proposition_gap,
    efx_violation_by_enumeration,
    iter_assignments,
    replay_states,
    replay_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AdditiveBinary",
    "allocation_from_dict",
    "allocation_to_dict",
    "apply_event",
    "apply_u0",
    "apply_u1",
    "brute_force_efx",
    "brute_force_safe_bundles",
    "build_graph",
    "bundle_items",
    "bundle_of",
    "CappedAdditive",
    "check_proposition_gap",
    "compile_spec",
    "Cycle",
    "CYCLE_ELIM",
    "dump_graph",
    "dump_trace",
    "dumps_canonical",
    "efx_violation",
    "efx_violation_by_enumeration",
    "eliminate_all_envy_cycles",
    "eliminate_cycle",
    "envies",
    "EnvyGraph",
    "event_to_dict",
    "FAMILIES",
    "find_envy_cycle",
    "find_source_cycle",
    "full_mask",
    "generate",
    "InputError",
    "Instance",
    "instance_from_dict",
    "instance_to_dict",
    "InternalInvariantError",
    "is_efx",
    "iter_assignments",
    "load_allocation",
    "load_instance",
    "load_trace",
    "lowest_item",
    "marginal",
    "MatroidRank",
    "MaximalEnvyEdge",
    "parse_trace",
    "PartialAllocation",
    "partition_violation",
    "replay_states",
    "replay_trace",
    "report_to_dict",
    "safe_bundle",
    "SafeBundleResult",
    "save_allocation",
    "save_instance",
    "save_trace",
    "solve",
    "SolveResult",
    "SourceCycle",
    "sources",
    "strong_envy_witness",
    "strongly_envies",
    "Table",
    "Threshold",
    "TraceEvent",
    "U0",
    "u0_candidate",
    "U1",
    "update",
    "UsageError",
    "usw",
    "validate_binary",
    "ValuationOracle",
    "value",
    "VerificationReport",
    "Violation",
]
