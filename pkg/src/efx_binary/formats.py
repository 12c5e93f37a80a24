"""JSON file formats: instances, allocations, traces, reports.

Writers are canonical (sorted keys, sorted item lists, two-space indent,
UTF-8, LF) so identical values produce identical bytes and canonical files
survive a load/save round trip unchanged.  Traces are JSONL: one compact
object per line, every field present on every line, nulls where a field
does not apply to the event kind.  Parsers are strict; anything malformed
raises InputError with the offending location in the message.
"""

import json

from .efx_core import CYCLE_ELIM, U0, U1, TraceEvent
from .errors import InputError
from .model import (
    Instance,
    PartialAllocation,
    bundle_items,
    bundle_of,
    is_efx,
    partition_violation,
    usw,
)
from .valuations import (
    AdditiveBinary,
    CappedAdditive,
    MatroidRank,
    Table,
    Threshold,
)

INSTANCE_VERSION = 1

TRACE_KEYS = (
    "step",
    "kind",
    "item",
    "agent",
    "cycle",
    "safe_bundle",
    "returned_items",
    "usw_after",
)


def dumps_canonical(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write_text(path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _parse_json(text: str, where: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{where}: invalid JSON: {exc}") from exc


def _expect_object(value, where: str, keys: tuple) -> dict:
    if not isinstance(value, dict):
        raise InputError(f"{where}: expected a JSON object")
    got = set(value)
    want = set(keys)
    if got != want:
        missing = sorted(want - got)
        extra = sorted(got - want)
        detail = []
        if missing:
            detail.append(f"missing {missing}")
        if extra:
            detail.append(f"unexpected {extra}")
        raise InputError(f"{where}: {', '.join(detail)}")
    return value


def _int(value, where: str, minimum: "int | None" = None) -> int:
    # bool is an int subclass; JSON true/false must not pass as numbers
    if not isinstance(value, int) or isinstance(value, bool):
        raise InputError(f"{where}: expected an integer")
    if minimum is not None and value < minimum:
        raise InputError(f"{where}: must be >= {minimum}")
    return value


def _item_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise InputError(f"{where}: expected a list of item indices")
    items = [_int(x, f"{where}[{pos}]", minimum=0) for pos, x in enumerate(value)]
    if len(set(items)) != len(items):
        raise InputError(f"{where}: duplicate item indices")
    return items


# ---------------------------------------------------------------- instances


def _spec_to_dict(spec) -> dict:
    if isinstance(spec, AdditiveBinary):
        return {"family": "additive", "liked": sorted(spec.liked)}
    if isinstance(spec, Threshold):
        return {"family": "threshold", "set": sorted(spec.targets), "k": spec.k}
    if isinstance(spec, CappedAdditive):
        return {"family": "capped", "liked": sorted(spec.liked), "cap": spec.cap}
    if isinstance(spec, MatroidRank):
        return {
            "family": "matroid_rank",
            "parts": [sorted(part) for part in spec.parts],
            "caps": list(spec.caps),
        }
    if isinstance(spec, Table):
        return {
            "family": "table",
            "values": {str(mask): v for mask, v in enumerate(spec.values)},
        }
    raise InputError(f"unknown valuation spec type {type(spec).__name__}")


def _spec_from_dict(entry, where: str):
    if not isinstance(entry, dict) or "family" not in entry:
        raise InputError(f"{where}: expected an object with a 'family' field")
    family = entry["family"]
    if family == "additive":
        _expect_object(entry, where, ("family", "liked"))
        return AdditiveBinary(_item_list(entry["liked"], f"{where}.liked"))
    if family == "threshold":
        _expect_object(entry, where, ("family", "set", "k"))
        return Threshold(
            _item_list(entry["set"], f"{where}.set"),
            _int(entry["k"], f"{where}.k", minimum=1),
        )
    if family == "capped":
        _expect_object(entry, where, ("family", "liked", "cap"))
        return CappedAdditive(
            _item_list(entry["liked"], f"{where}.liked"),
            _int(entry["cap"], f"{where}.cap", minimum=1),
        )
    if family == "matroid_rank":
        _expect_object(entry, where, ("family", "parts", "caps"))
        if not isinstance(entry["parts"], list):
            raise InputError(f"{where}.parts: expected a list of item lists")
        parts = [
            _item_list(part, f"{where}.parts[{pos}]")
            for pos, part in enumerate(entry["parts"])
        ]
        if not isinstance(entry["caps"], list):
            raise InputError(f"{where}.caps: expected a list of integers")
        caps = [
            _int(cap, f"{where}.caps[{pos}]", minimum=1)
            for pos, cap in enumerate(entry["caps"])
        ]
        if len(parts) != len(caps):
            raise InputError(f"{where}: parts and caps differ in length")
        return MatroidRank(parts, caps)
    if family == "table":
        _expect_object(entry, where, ("family", "values"))
        raw = entry["values"]
        if not isinstance(raw, dict):
            raise InputError(f"{where}.values: expected an object keyed by bitmasks")
        size = len(raw)
        values = [None] * size
        for key, val in raw.items():
            if not isinstance(key, str) or not key.isdigit() or str(int(key)) != key:
                raise InputError(f"{where}.values: key {key!r} is not a decimal bitmask")
            mask = int(key)
            if mask >= size:
                raise InputError(
                    f"{where}.values: key {key} out of range for {size} entries"
                )
            values[mask] = _int(val, f"{where}.values[{key}]", minimum=0)
        if any(v is None for v in values):
            raise InputError(f"{where}.values: bitmask keys are not contiguous from 0")
        return Table(values)
    raise InputError(f"{where}: unknown family {family!r}")


def instance_to_dict(instance: Instance) -> dict:
    return {
        "version": INSTANCE_VERSION,
        "n": instance.n,
        "m": instance.m,
        "agents": [_spec_to_dict(spec) for spec in instance.valuations],
    }


def instance_from_dict(data) -> Instance:
    _expect_object(data, "instance", ("version", "n", "m", "agents"))
    version = _int(data["version"], "instance.version")
    if version != INSTANCE_VERSION:
        raise InputError(f"instance.version: expected {INSTANCE_VERSION}, got {version}")
    n = _int(data["n"], "instance.n", minimum=1)
    m = _int(data["m"], "instance.m", minimum=0)
    agents = data["agents"]
    if not isinstance(agents, list):
        raise InputError("instance.agents: expected a list")
    if len(agents) != n:
        raise InputError(f"instance.agents: expected {n} entries, got {len(agents)}")
    specs = [
        _spec_from_dict(entry, f"instance.agents[{pos}]")
        for pos, entry in enumerate(agents)
    ]
    return Instance(n, m, specs)


def load_instance(path) -> Instance:
    return instance_from_dict(_parse_json(_read_text(path), str(path)))


def save_instance(instance: Instance, path) -> None:
    _write_text(path, dumps_canonical(instance_to_dict(instance)))


# -------------------------------------------------------------- allocations


def allocation_to_dict(instance: Instance, allocation: PartialAllocation) -> dict:
    return {
        "bundles": [list(bundle_items(b)) for b in allocation.bundles],
        "pool": list(bundle_items(allocation.pool)),
        "usw": usw(instance, allocation),
        "efx": is_efx(instance, allocation),
    }


def allocation_from_dict(instance: Instance, data) -> PartialAllocation:
    _expect_object(data, "allocation", ("bundles", "pool", "usw", "efx"))
    raw = data["bundles"]
    if not isinstance(raw, list):
        raise InputError("allocation.bundles: expected a list of item lists")
    if len(raw) != instance.n:
        raise InputError(
            f"allocation.bundles: expected {instance.n} bundles, got {len(raw)}"
        )
    bundles = tuple(
        bundle_of(_item_list(entry, f"allocation.bundles[{pos}]"))
        for pos, entry in enumerate(raw)
    )
    pool = bundle_of(_item_list(data["pool"], "allocation.pool"))
    allocation = PartialAllocation(bundles, pool)
    broken = partition_violation(instance, allocation)
    if broken is not None:
        raise InputError(f"allocation: {broken}")
    recorded_usw = _int(data["usw"], "allocation.usw", minimum=0)
    actual_usw = usw(instance, allocation)
    if recorded_usw != actual_usw:
        raise InputError(
            f"allocation.usw: recorded {recorded_usw}, recomputed {actual_usw}"
        )
    if not isinstance(data["efx"], bool):
        raise InputError("allocation.efx: expected a boolean")
    actual_efx = is_efx(instance, allocation)
    if data["efx"] != actual_efx:
        raise InputError(
            f"allocation.efx: recorded {data['efx']}, recomputed {actual_efx}"
        )
    return allocation


def load_allocation(instance: Instance, path) -> PartialAllocation:
    return allocation_from_dict(instance, _parse_json(_read_text(path), str(path)))


def save_allocation(instance: Instance, allocation: PartialAllocation, path) -> None:
    _write_text(path, dumps_canonical(allocation_to_dict(instance, allocation)))


# ------------------------------------------------------------------- traces


def event_to_dict(ev: TraceEvent) -> dict:
    return {
        "step": ev.step,
        "kind": ev.kind,
        "item": ev.item,
        "agent": ev.agent,
        "cycle": None if ev.cycle is None else list(ev.cycle),
        "safe_bundle": None if ev.safe_bundle is None else list(ev.safe_bundle),
        "returned_items": None
        if ev.returned_items is None
        else list(ev.returned_items),
        "usw_after": ev.usw_after,
    }


def _event_line(ev: TraceEvent) -> str:
    return json.dumps(event_to_dict(ev), sort_keys=True, separators=(",", ":"))


def dump_trace(trace) -> str:
    return "".join(_event_line(ev) + "\n" for ev in trace)


def _ascending_items(value, where: str) -> tuple:
    items = _item_list(value, where)
    if items != sorted(items):
        raise InputError(f"{where}: item indices must be ascending")
    return tuple(items)


def _null_fields(entry: dict, where: str, fields: tuple) -> None:
    for name in fields:
        if entry[name] is not None:
            raise InputError(f"{where}.{name}: must be null for kind {entry['kind']}")


def event_from_dict(entry, where: str) -> TraceEvent:
    _expect_object(entry, where, TRACE_KEYS)
    step = _int(entry["step"], f"{where}.step", minimum=0)
    kind = entry["kind"]
    usw_after = _int(entry["usw_after"], f"{where}.usw_after", minimum=0)
    item = agent = cycle = safe = returned = None
    if kind == U0:
        item = _int(entry["item"], f"{where}.item", minimum=0)
        agent = _int(entry["agent"], f"{where}.agent", minimum=0)
        _null_fields(entry, where, ("cycle", "safe_bundle", "returned_items"))
    elif kind == U1:
        item = _int(entry["item"], f"{where}.item", minimum=0)
        _null_fields(entry, where, ("agent",))
        if not isinstance(entry["cycle"], list) or not entry["cycle"]:
            raise InputError(f"{where}.cycle: expected a non-empty agent list")
        cycle = tuple(
            _int(a, f"{where}.cycle[{pos}]", minimum=0)
            for pos, a in enumerate(entry["cycle"])
        )
        if len(set(cycle)) != len(cycle):
            raise InputError(f"{where}.cycle: duplicate agents")
        safe = _ascending_items(entry["safe_bundle"], f"{where}.safe_bundle")
        returned = _ascending_items(entry["returned_items"], f"{where}.returned_items")
    elif kind == CYCLE_ELIM:
        _null_fields(
            entry, where, ("item", "agent", "safe_bundle", "returned_items")
        )
        if not isinstance(entry["cycle"], list) or not entry["cycle"]:
            raise InputError(f"{where}.cycle: expected a non-empty agent list")
        cycle = tuple(
            _int(a, f"{where}.cycle[{pos}]", minimum=0)
            for pos, a in enumerate(entry["cycle"])
        )
        if len(set(cycle)) != len(cycle):
            raise InputError(f"{where}.cycle: duplicate agents")
    else:
        raise InputError(f"{where}.kind: unknown kind {kind!r}")
    return TraceEvent(step, kind, item, agent, cycle, safe, returned, usw_after)


def parse_trace(text: str) -> tuple:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    events = []
    for pos, line in enumerate(lines):
        where = f"trace line {pos + 1}"
        if not line.strip():
            raise InputError(f"{where}: blank line")
        events.append(event_from_dict(_parse_json(line, where), where))
    return tuple(events)


def load_trace(path) -> tuple:
    return parse_trace(_read_text(path))


def save_trace(trace, path) -> None:
    _write_text(path, dump_trace(trace))


# ------------------------------------------------------------------ reports


def report_to_dict(report) -> dict:
    return {
        "passed": report.passed,
        "violations": [
            {
                "kind": v.kind,
                "step": v.step,
                "agents": list(v.agents),
                "items": list(v.items),
                "values": list(v.values),
            }
            for v in report.violations
        ],
    }
