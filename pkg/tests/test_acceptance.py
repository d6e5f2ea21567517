"""Acceptance gate. Each test prints one PASS/FAIL line for its criterion."""
import json
import random
import time

import numpy as np
import pytest

from helpers import (
    DynInstance,
    brute_force_solutions,
    edge_invariant_violations,
    label_predicates,
    mutate_snapshot,
    random_constraint_changes,
    random_series,
    random_snapshot,
    random_stg,
    random_template,
)
from stgminer import serialize as sio
from stgminer.bench import bench_values, inversions, run_bench
from stgminer.evolution import classify_changes
from stgminer.fixtures import scripted_events_as_nodes, urban_growth
from stgminer.graph import construct_stg
from stgminer.identify import dyn_solve, init_state, is_solution, solve_static
from stgminer.matching import anchors_for, brute_force_match, modelize_csp, resolve_csp
from stgminer.patterns import catalog, catalog_by_name
from stgminer.relations import Region, relation


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
    return emit


def test_1_matcher_equals_oracle(report):
    from stgminer.synth import generate_stg
    start = time.perf_counter()
    checked = discrepancies = 0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        sizes = [int(x) for x in rng.integers(2, 41, size=3)]
        g = generate_stg(sizes, mean_degree=float(rng.uniform(1, 6)), seed=seed)
        for p in catalog():
            for a in anchors_for(g, p):
                checked += 1
                if set(resolve_csp(modelize_csp(g, p, a), g)) != set(brute_force_match(g, p, a)):
                    discrepancies += 1
    elapsed = time.perf_counter() - start
    ok = discrepancies == 0 and elapsed < 60
    report(1, ok, f"{checked} (graph, pattern, anchor) cases, {discrepancies} discrepancies, {elapsed:.1f}s")
    assert ok


def dynamic_runs(count=200):
    """Yield (instance, state, result) for the first ``count`` seeds whose first snapshot is satisfiable."""
    seed = 0
    produced = 0
    while produced < count:
        rng = random.Random(seed)
        seed += 1
        template = random_template(rng)
        first = random_snapshot(rng, "t0")
        state = init_state(template, first)
        if state is None:
            continue
        second = mutate_snapshot(rng, first, "t1")
        added, removed = random_constraint_changes(rng, template, state.active_constraints())
        inst = DynInstance(template, first, second, added, removed)
        result = dyn_solve(state, inst.delta(state))
        produced += 1
        yield inst, state, result


@pytest.fixture(scope="module")
def dynamic_outcomes():
    start = time.perf_counter()
    rows = []
    for inst, state, result in dynamic_runs():
        active = state.active_constraints()
        sols = brute_force_solutions(inst.template.part_names, active, state.regions)
        rows.append((inst, active, result, list(state.recorded), sols, state.regions))
    return rows, time.perf_counter() - start


def test_2_dynamic_agrees_with_static(report, dynamic_outcomes):
    rows, elapsed = dynamic_outcomes
    disagree = bad = sat = 0
    for inst, active, result, _, _, regions in rows:
        reference = solve_static(inst.template, inst.second, active)
        disagree += (result is None) != (reference is None)
        if result is not None:
            sat += 1
            bad += not is_solution(result, active, regions)
    ok = disagree == 0 and bad == 0 and elapsed < 30
    report(2, ok, f"{len(rows)} instances ({sat} sat), {disagree} verdict mismatches, "
                  f"{bad} failed re-checks, {elapsed:.1f}s")
    assert ok


def test_3_nogoods_sound(report, dynamic_outcomes):
    rows, _ = dynamic_outcomes
    total = unsound = 0
    for _, _, _, recorded, sols, _ in rows:
        for ng in recorded:
            total += 1
            unsound += any(ng.excludes(s) for s in sols)
    report(3, unsound == 0, f"{total} recorded nogoods, {unsound} exclude a solution")
    assert unsound == 0


def test_4_urban_growth_events(report):
    scenario = urban_growth()
    g = scenario.build()
    got = {(e.kind, e.anchor, e.nodes) for e in classify_changes(g)}
    expected = scripted_events_as_nodes(scenario, g)
    hits = len(got & expected)
    precision = hits / len(got) if got else 0.0
    recall = hits / len(expected) if expected else 0.0
    ok = precision == recall == 1.0
    report(4, ok, f"{len(expected)} scripted events, precision {precision:.0%}, recall {recall:.0%}")
    assert ok


def test_5_scaling_shape(report):
    pattern = catalog_by_name()["spatial-triangle"]
    start = time.perf_counter()
    nodes = run_bench("nodes", bench_values(50, 500, 50), pattern, reps=5)
    edges = run_bench("edges", bench_values(400, 2000, 200), pattern, reps=5)
    elapsed = time.perf_counter() - start
    inv_n = inversions([r.time_ms for r in nodes])
    inv_e = inversions([r.time_ms for r in edges])
    ok = inv_n <= 1 and inv_e <= 1 and elapsed < 300
    report(5, ok, f"nodes sweep {inv_n} inversions, edges sweep {inv_e} inversions, {elapsed:.1f}s")
    assert ok


def test_6_invariant_suites(report):
    rng = random.Random(6)
    construction = 0
    for _ in range(1000):
        snaps, tracking = random_series(rng)
        g = construct_stg(snaps, tracking)
        construction += len(g.validate()) + len(edge_invariant_violations(g))

    round_trip = 0
    for i in range(1000):
        kind = i % 3
        if kind == 0:
            g = random_stg(rng, max_nodes=12)
            round_trip += sio.stg_from_dict(json.loads(sio.dumps(sio.stg_to_dict(g)))) != g
        elif kind == 1:
            s = random_snapshot(rng, "t0")
            back = sio.snapshot_from_dict(json.loads(sio.dumps(sio.snapshot_to_dict(s))))
            round_trip += sio.snapshot_to_dict(back) != sio.snapshot_to_dict(s)
        else:
            t = random_template(rng)
            round_trip += sio.template_from_dict(json.loads(sio.dumps(sio.template_to_dict(t)))) != t

    partition = 0
    for _ in range(10_000):
        cells = []
        for _ in range(2):
            n = rng.randint(1, 20)
            cells.append(frozenset((rng.randrange(8), rng.randrange(8)) for _ in range(n)))
        a, b = Region(1, "x", cells[0]), Region(2, "x", cells[1])
        truth = label_predicates(a, b)
        partition += sum(truth.values()) != 1 or not truth[relation(a, b)]

    ok = construction == round_trip == partition == 0
    report(6, ok, f"construction violations {construction}, round-trip failures {round_trip}, "
                  f"partition failures {partition}")
    assert ok
