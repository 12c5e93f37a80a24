"""Binary valuation families and their compiled oracles.

Every family here is normalized (the empty bundle is worth 0), monotone,
and gains exactly 0 or 1 of value per added item.  The four structured
families guarantee this by construction; explicit tables are checked
exhaustively before they may be used.

Bundles are int bitmasks throughout: bit i set means item i is present.
"""

from dataclasses import dataclass
from typing import Callable, Union

from .errors import InputError, InternalInvariantError, UsageError

# Explicit tables store all 2^m values, so they stay desk-scale only.
TABLE_MAX_ITEMS = 16


@dataclass(frozen=True)
class AdditiveBinary:
    """One point per liked item held."""

    liked: frozenset

    def __post_init__(self):
        object.__setattr__(self, "liked", frozenset(self.liked))


@dataclass(frozen=True)
class Threshold:
    """A single point once at least k of the target items are held, else 0."""

    targets: frozenset
    k: int

    def __post_init__(self):
        object.__setattr__(self, "targets", frozenset(self.targets))


@dataclass(frozen=True)
class CappedAdditive:
    """One point per liked item, clipped at a fixed cap."""

    liked: frozenset
    cap: int

    def __post_init__(self):
        object.__setattr__(self, "liked", frozenset(self.liked))


@dataclass(frozen=True)
class MatroidRank:
    """Partition-matroid rank: per-part item counts, each clipped at its cap."""

    parts: tuple
    caps: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(frozenset(p) for p in self.parts))
        object.__setattr__(self, "caps", tuple(self.caps))


@dataclass(frozen=True)
class Table:
    """Explicit values for all 2^m bundles, indexed by bundle bitmask."""

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(self.values))


ValuationSpec = Union[AdditiveBinary, Threshold, CappedAdditive, MatroidRank, Table]


@dataclass(frozen=True)
class BinaryViolation:
    """First point where a table fails to be a normalized binary valuation.

    `subset` is the offending bundle as a bitmask; `item` is the added item
    for marginal violations and None when the empty set itself is off.
    """

    subset: int
    item: "int | None"
    reason: str  # "not-normalized" | "negative-marginal" | "marginal-above-one"

    def describe(self) -> str:
        items = []
        mask = self.subset
        while mask:
            low = mask & -mask
            items.append(str(low.bit_length() - 1))
            mask ^= low
        subset = "{" + ",".join(items) + "}"
        if self.reason == "not-normalized":
            return "value of the empty bundle is not 0"
        return f"{self.reason} adding item {self.item} to subset {subset}"


def validate_binary(table: Table, m: int) -> "BinaryViolation | None":
    """Exhaustively check a table for normalization and 0/1 marginals.

    Scans subsets in ascending bitmask order and items in ascending index
    order, reporting the first violation found.
    """
    values = table.values
    if len(values) != 1 << m:
        raise UsageError(f"table for m={m} needs {1 << m} entries, got {len(values)}")
    if values[0] != 0:
        return BinaryViolation(0, None, "not-normalized")
    for subset in range(1 << m):
        base = values[subset]
        for item in range(m):
            bit = 1 << item
            if subset & bit:
                continue
            gain = values[subset | bit] - base
            if gain < 0:
                return BinaryViolation(subset, item, "negative-marginal")
            if gain > 1:
                return BinaryViolation(subset, item, "marginal-above-one")
    return None


class ValuationOracle:
    """Compiled evaluator for one agent's valuation on bitmask bundles.

    `value` is a plain function stored as an instance attribute rather than
    a method, so hot loops pay one attribute load and a direct call.
    """

    __slots__ = ("spec", "value")

    def __init__(self, spec: ValuationSpec, value_fn: Callable):
        self.spec = spec
        self.value = value_fn

    def __repr__(self):
        return f"ValuationOracle({self.spec!r})"


def _mask(items) -> int:
    mask = 0
    for item in items:
        mask |= 1 << item
    return mask


def _check_items(items, m: int, what: str) -> None:
    for item in items:
        if not isinstance(item, int) or isinstance(item, bool):
            raise InputError(f"{what} contains a non-integer item: {item!r}")
        if not 0 <= item < m:
            raise InputError(f"{what} references item {item}, valid range is [0, {m})")


def check_spec(spec: ValuationSpec, m: int) -> None:
    """Structural validation; for tables this includes the binary check."""
    if isinstance(spec, AdditiveBinary):
        _check_items(spec.liked, m, "liked set")
    elif isinstance(spec, Threshold):
        _check_items(spec.targets, m, "target set")
        if spec.k < 1:
            raise InputError(f"threshold k must be positive, got {spec.k}")
    elif isinstance(spec, CappedAdditive):
        _check_items(spec.liked, m, "liked set")
        if spec.cap < 1:
            raise InputError(f"cap must be positive, got {spec.cap}")
    elif isinstance(spec, MatroidRank):
        if len(spec.parts) != len(spec.caps):
            raise InputError(
                f"matroid has {len(spec.parts)} parts but {len(spec.caps)} caps"
            )
        seen = 0
        for part in spec.parts:
            _check_items(part, m, "matroid part")
            pmask = _mask(part)
            if seen & pmask:
                raise InputError("matroid parts must be disjoint")
            seen |= pmask
        for cap in spec.caps:
            if cap < 1:
                raise InputError(f"matroid caps must be positive, got {cap}")
    elif isinstance(spec, Table):
        if m > TABLE_MAX_ITEMS:
            raise InputError(
                f"table valuations are limited to m <= {TABLE_MAX_ITEMS}, got m={m}"
            )
        if len(spec.values) != 1 << m:
            raise InputError(
                f"table for m={m} needs {1 << m} entries, got {len(spec.values)}"
            )
        for value in spec.values:
            if not isinstance(value, int) or isinstance(value, bool):
                raise InputError(f"table contains a non-integer value: {value!r}")
        violation = validate_binary(spec, m)
        if violation is not None:
            raise InputError(f"table is not a binary valuation: {violation.describe()}")
    else:
        raise InputError(f"unknown valuation spec type {type(spec).__name__}")


def compile_spec(spec: ValuationSpec, m: int) -> ValuationOracle:
    """Validate a spec and compile it to a constant-time-ish evaluator."""
    check_spec(spec, m)
    if isinstance(spec, AdditiveBinary):
        liked = _mask(spec.liked)

        def fn(bundle, _liked=liked):
            return (bundle & _liked).bit_count()

    elif isinstance(spec, Threshold):
        targets = _mask(spec.targets)
        k = spec.k

        def fn(bundle, _targets=targets, _k=k):
            return 1 if (bundle & _targets).bit_count() >= _k else 0

    elif isinstance(spec, CappedAdditive):
        liked = _mask(spec.liked)
        cap = spec.cap

        def fn(bundle, _liked=liked, _cap=cap):
            count = (bundle & _liked).bit_count()
            return count if count < _cap else _cap

    elif isinstance(spec, MatroidRank):
        pairs = tuple((_mask(p), c) for p, c in zip(spec.parts, spec.caps))

        def fn(bundle, _pairs=pairs):
            return sum(min((bundle & pm).bit_count(), cap) for pm, cap in _pairs)

    else:  # Table, already validated
        fn = spec.values.__getitem__

    return ValuationOracle(spec, fn)


def value(oracle: ValuationOracle, bundle: int) -> int:
    """Evaluate a bundle under a compiled oracle."""
    return oracle.value(bundle)


def marginal(oracle: ValuationOracle, bundle: int, item: int) -> int:
    """Gain from adding `item` to `bundle`; always 0 or 1 for valid oracles."""
    bit = 1 << item
    if bundle & bit:
        raise UsageError(f"item {item} is already in the bundle")
    gain = oracle.value(bundle | bit) - oracle.value(bundle)
    if gain not in (0, 1):
        raise InternalInvariantError(
            f"non-binary marginal {gain} for item {item}; oracle bypassed validation"
        )
    return gain
