"""End-to-end acceptance gate.

Each test exercises one shipping criterion and prints a single
``ACCEPTANCE <name>: PASS|FAIL`` line (visible under ``pytest -s``).
The corpora are seeded and fixed, so every run checks the same ground.
"""

import time

import pytest

from efx_binary import (
    PartialAllocation,
    brute_force_efx,
    brute_force_safe_bundles,
    bundle_of,
    check_proposition_gap,
    dump_trace,
    dumps_canonical,
    efx_violation,
    efx_violation_by_enumeration,
    full_mask,
    generate,
    allocation_to_dict,
    is_efx,
    iter_assignments,
    replay_states,
    replay_trace,
    solve,
    usw,
)
from efx_binary.cli import main as cli_main
from efx_binary.efx_core import U1
from helpers import ACCEPTANCE_LINES, FIVE_FAMILIES

SOLVE_BUDGET_SECONDS = 10.0


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    suffix = f" ({detail})" if detail else ""
    line = f"ACCEPTANCE {name}: {status}{suffix}"
    ACCEPTANCE_LINES.append(line)
    print(line, flush=True)  # immediate under -s; summary shows it regardless
    assert ok, f"{name} failed: {detail}"


@pytest.fixture(scope="module")
def corpus():
    """1000 seeded instances across all five concrete families."""
    runs = []
    solve_seconds = 0.0
    for i in range(1000):
        family = FIVE_FAMILIES[i % 5]
        n = i % 6 + 1
        m = i % 10 + 1
        instance = generate(family, n, m, seed=i)
        started = time.perf_counter()
        result = solve(instance)
        solve_seconds += time.perf_counter() - started
        runs.append((family, instance, result))
    return runs, solve_seconds


@pytest.fixture(scope="module")
def table_corpus():
    """200 seeded table instances small enough for exhaustive search."""
    out = []
    for i in range(200):
        instance = generate("table", i % 3 + 1, i % 4 + 1, seed=1000 + i)
        out.append(instance)
    return out


def test_complete_efx_on_seeded_corpus(corpus):
    runs, solve_seconds = corpus
    families = {family for family, _, _ in runs}
    bad = [
        (family, inst.n, inst.m)
        for family, inst, result in runs
        if not (result.allocation.complete and is_efx(inst, result.allocation))
    ]
    ok = not bad and families == set(FIVE_FAMILIES) and solve_seconds < SOLVE_BUDGET_SECONDS
    _report(
        "complete-efx-corpus",
        ok,
        f"1000 instances, 5 families, solves took {solve_seconds:.2f}s"
        if ok
        else f"failures={bad[:3]} time={solve_seconds:.2f}s",
    )


def test_solver_agrees_with_exhaustive_search(table_corpus):
    checked_assignments = 0
    for instance in table_corpus:
        found = brute_force_efx(instance)
        assert found is not None, "exhaustive search found no fair allocation"
        assert found.complete and is_efx(instance, found)
        for allocation in iter_assignments(instance):
            checked_assignments += 1
            fast = efx_violation(instance, allocation)
            slow = efx_violation_by_enumeration(instance, allocation)
            assert fast == slow, (instance, allocation)
    _report(
        "exhaustive-agreement",
        True,
        f"200 table instances, {checked_assignments} assignments cross-checked",
    )


def test_replacements_choose_enumerable_safe_bundles(corpus):
    runs, _ = corpus
    checked = 0
    for _family, instance, result in runs:
        if result.u1_count == 0:
            continue
        for state, ev in replay_states(instance, result.trace):
            if ev.kind != U1:
                continue
            source = ev.cycle[0]
            bundle = bundle_of(ev.safe_bundle)
            enumerated = brute_force_safe_bundles(instance, state, source, ev.item)
            assert bundle in enumerated, (instance, ev)
            assert ev.cycle[-1] in enumerated[bundle], (instance, ev)
            checked += 1
    _report(
        "safe-bundle-enumeration",
        checked > 0,
        f"{checked} replacement events validated",
    )


def test_every_trace_replays_clean(corpus):
    runs, _ = corpus
    for _family, instance, result in runs:
        report = replay_trace(instance, result.trace)
        assert report.passed, (instance, report.violations)
    _report("trace-replay", True, "1000 traces re-simulated")


def test_budgets_and_welfare_monotonicity(corpus):
    runs, _ = corpus
    max_u1_seen = 0
    for _family, instance, result in runs:
        n, m = instance.n, instance.m
        assert result.u1_count <= m * n, (instance, result.u1_count)
        assert result.update_count <= m * m * n + m * n + m
        prev = 0
        for ev in result.trace:
            assert ev.usw_after >= prev, (instance, ev)
            if ev.kind == U1:
                assert ev.usw_after > prev, (instance, ev)
            prev = ev.usw_after
        max_u1_seen = max(max_u1_seen, result.u1_count)
    _report(
        "budgets-and-monotone-welfare",
        True,
        f"max replacements in one run: {max_u1_seen}",
    )


def test_threshold_against_additive_sizes():
    for m in (4, 6, 8):
        instance = generate("paper_example", 2, m, seed=0)
        lopsided = PartialAllocation(
            (full_mask(m) & ~(1 << (m - 1)), 1 << (m - 1)), 0
        )
        breach = efx_violation(instance, lopsided)
        assert breach is not None, f"m={m}: lopsided split should fail"
        envier, owner, witness = breach
        assert envier != owner and 0 <= witness < m
        result = solve(instance)
        assert result.allocation.complete
        assert is_efx(instance, result.allocation)
        assert usw(instance, result.allocation) >= usw(instance, lopsided)
    _report("threshold-vs-additive", True, "m in {4, 6, 8}")


def test_envy_gap_is_at_most_one_everywhere(corpus):
    runs, _ = corpus
    for _family, instance, result in runs:
        report = check_proposition_gap(instance, result.allocation)
        assert report.passed, (instance, report.violations)
    _report("unit-envy-gap", True, "1000 final allocations")


def test_reruns_are_byte_identical(corpus):
    runs, _ = corpus
    for _family, instance, result in runs:
        again = solve(instance)
        assert dump_trace(again.trace) == dump_trace(result.trace)
        assert dumps_canonical(
            allocation_to_dict(instance, again.allocation)
        ) == dumps_canonical(allocation_to_dict(instance, result.allocation))
    _report("deterministic-reruns", True, "1000 instances solved twice")


def test_large_instance_within_budget(capsys):
    instance = generate("additive", 50, 1000, seed=20260816)
    started = time.perf_counter()
    result = solve(instance)
    elapsed = time.perf_counter() - started
    ok = (
        elapsed < SOLVE_BUDGET_SECONDS
        and result.allocation.complete
        and is_efx(instance, result.allocation)
    )

    code = cli_main(
        [
            "bench",
            "--family",
            "additive",
            "--n",
            "6",
            "--m",
            "40",
            "--seed",
            "2",
            "--reps",
            "2",
        ]
    )
    rows = capsys.readouterr().out.splitlines()
    header = rows[0].split(",")
    u0_col, u1_col = header.index("u0"), header.index("u1")
    counters_ok = code == 0 and len(rows) == 3
    for row in rows[1:]:
        cells = row.split(",")
        counters_ok = counters_ok and int(cells[u0_col]) >= 0 and int(cells[u1_col]) >= 0
    _report(
        "large-instance-and-bench",
        ok and counters_ok,
        f"n=50 m=1000 solved in {elapsed:.2f}s; bench reports update kinds",
    )
