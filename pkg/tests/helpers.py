"""Random instance generators and brute-force oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from stgminer.graph import CONTINUATION, DERIVATION, Spatial, SpatioTemporal, STGraph
from stgminer.identify import (
    AttrPredicate,
    Constraint,
    Delta,
    ObjectTemplate,
    PartVar,
    RelationRule,
    delta_from_snapshot,
    relation_constraint,
)
from stgminer.relations import Near, Rel, Region, Snapshot

CLASSES = ("building", "road", "garden", "land")


def random_stg(rng: random.Random, layers: int = 3, max_nodes: int = 40,
               density: float | None = None) -> STGraph:
    """STG built only through add_node/add_edge, with mixed relation labels."""
    density = rng.uniform(0.02, 0.25) if density is None else density
    g = STGraph(f"t{t}" for t in range(layers))
    counter = itertools.count()
    prev: list[int] = []
    for t in range(layers):
        n = rng.randint(1, max_nodes)
        carried = rng.sample(prev, k=min(len(prev), rng.randint(0, n)))
        ids = []
        for src in carried:
            old = g.node(src)
            ids.append(g.add_node(old.object_id, t, old.class_label,
                                  {"area": float(rng.randint(1, 20))}))
        while len(ids) < n:
            ids.append(g.add_node(f"o{next(counter)}", t, rng.choice(CLASSES),
                                  {"area": float(rng.randint(1, 20))}))
        for a, b in itertools.combinations(ids, 2):
            if rng.random() < density:
                label = rng.choice([*Rel, Near(1), Near(2)]) if rng.random() < 0.4 else Rel.MEETS
                g.add_edge(a, b, Spatial(label))
        if prev:
            for dst in ids:
                obj = g.node(dst).object_id
                for src in prev:
                    same = g.node(src).object_id == obj
                    if same and rng.random() < 0.9:
                        g.add_edge(src, dst, CONTINUATION)
                    elif not same and rng.random() < 2.0 / len(prev):
                        g.add_edge(src, dst, DERIVATION)
                    if rng.random() < 0.05 or (same and rng.random() < 0.5):
                        g.add_edge(src, dst, SpatioTemporal(rng.choice(list(Rel))))
        prev = ids
    return g


# -- identification instances -------------------------------------------

GRID = 6


def random_snapshot(rng: random.Random, time: str, max_regions: int = 12,
                    first_id: int = 1) -> Snapshot:
    """Regions from a random labelling of a small grid (cells are disjoint by construction)."""
    k = rng.randint(2, max_regions)
    owner = {}
    for r in range(GRID):
        for c in range(GRID):
            if rng.random() < 0.8:
                owner[(r, c)] = rng.randrange(k)
    cells: dict[int, set] = {}
    for cell, i in owner.items():
        cells.setdefault(i, set()).add(cell)
    regions = [Region(first_id + i, rng.choice(CLASSES[:3]), frozenset(cs))
               for i, cs in sorted(cells.items())]
    return Snapshot(time, regions)


def mutate_snapshot(rng: random.Random, snap: Snapshot, time: str, max_regions: int = 12) -> Snapshot:
    """Next snapshot: some regions vanish, some gain or lose cells, some appear."""
    regions = {r.region_id: r for r in snap.regions}
    free = {(r, c) for r in range(GRID) for c in range(GRID)}
    for reg in regions.values():
        free -= reg.cells
    out: dict[int, Region] = {}
    for rid, reg in sorted(regions.items()):
        roll = rng.random()
        if roll < 0.15:
            free |= reg.cells
            continue
        cells = set(reg.cells)
        if roll < 0.45:
            grab = [c for c in sorted(free) if rng.random() < 0.3]
            cells |= set(grab)
            free -= set(grab)
            for c in sorted(cells):
                if len(cells) > 1 and rng.random() < 0.2:
                    cells.discard(c)
                    free.add(c)
        cls = reg.class_label if rng.random() < 0.9 else rng.choice(CLASSES[:3])
        out[rid] = Region(rid, cls, frozenset(cells))
    next_id = max(regions, default=0) + 1
    while len(out) < max_regions and free and rng.random() < 0.5:
        cells = frozenset(c for c in sorted(free) if rng.random() < 0.3) or frozenset([min(free)])
        free -= cells
        out[next_id] = Region(next_id, rng.choice(CLASSES[:3]), cells)
        next_id += 1
    return Snapshot(time, list(out.values()))


def random_template(rng: random.Random, max_parts: int = 6) -> ObjectTemplate:
    n = rng.randint(1, max_parts)
    parts = []
    for i in range(n):
        cls = rng.choice([*CLASSES[:3], None])
        preds = (AttrPredicate("area", rng.choice([">=", "<="]), rng.randint(1, 6)),) \
            if rng.random() < 0.3 else ()
        parts.append(PartVar(f"p{i}", cls, preds))
    rels = []
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < 0.35:
            allowed = rng.choice([{Rel.MEETS}, {Rel.DISJOINT}, {Rel.MEETS, Rel.DISJOINT}, {Near(1)}])
            rels.append(RelationRule(f"p{a}", f"p{b}", frozenset(allowed)))
    return ObjectTemplate("random", parts, rels)


def random_constraint_changes(rng: random.Random, template: ObjectTemplate,
                              active: list[Constraint]) -> tuple[list[Constraint], list[str]]:
    names = template.part_names
    added = []
    if rng.random() < 0.4:
        p = rng.choice(names)
        pred = AttrPredicate("area", rng.choice([">=", "<="]), rng.randint(1, 6))
        added.append(Constraint(f"attr:{p}:{pred}", "attr", (p,), pred))
    if len(names) >= 2 and rng.random() < 0.4:
        a, b = sorted(rng.sample(names, 2))
        added.append(relation_constraint(a, b, rng.choice([{Rel.MEETS}, {Rel.DISJOINT}])))
    removable = [c.cid for c in active if c.kind != "diff"]
    removed = rng.sample(removable, k=min(len(removable), rng.randint(0, 2))) if rng.random() < 0.4 else []
    added = [c for c in added if c.cid not in {x.cid for x in active}]
    return added, sorted(removed)


@dataclass
class DynInstance:
    template: ObjectTemplate
    first: Snapshot
    second: Snapshot
    added: list[Constraint]
    removed: list[str]

    def delta(self, state) -> Delta:
        d = delta_from_snapshot(state, self.second)
        d.added_constraints = list(self.added)
        d.removed_constraints = list(self.removed)
        return d


def brute_force_solutions(parts: list[str], constraints, regions: dict[int, Region]) -> list[dict[str, int]]:
    """Every complete assignment satisfying ``constraints`` (unary filters applied to pools first)."""
    pools = []
    for p in parts:
        unary = [c for c in constraints if c.scope == (p,)]
        pools.append([rid for rid in sorted(regions)
                      if all(c.check({p: rid}, regions) for c in unary)])
    binary = [c for c in constraints if len(c.scope) == 2]
    out = []
    for combo in itertools.product(*pools):
        a = dict(zip(parts, combo))
        if all(c.check(a, regions) for c in binary):
            out.append(a)
    return out


def random_series(rng: random.Random, layers: int = 3) -> tuple[list[Snapshot], list[dict[str, int]]]:
    """Snapshot series with tracking maps; a region keeps its object id while its id persists,
    except for occasional renames, and some regions stay unidentified."""
    snaps = [random_snapshot(rng, "t0")]
    for t in range(1, layers):
        snaps.append(mutate_snapshot(rng, snaps[-1], f"t{t}"))
    tracking = []
    renamed: dict[int, str] = {}
    for snap in snaps:
        assign = {}
        for r in snap.regions:
            if rng.random() < 0.1:
                continue
            if rng.random() < 0.1:
                renamed[r.region_id] = f"x{r.region_id}-{len(tracking)}"
            assign[renamed.get(r.region_id, f"r{r.region_id}")] = r.region_id
        tracking.append(assign)
    return snaps, tracking


def edge_invariant_violations(g: STGraph) -> list[str]:
    """Independent scan of the edge invariants, written against the public accessors."""
    out = []
    seen = set()
    for e in g.edges:
        a, b = g.node(e.src), g.node(e.dst)
        key = (min(e.src, e.dst), max(e.src, e.dst), "spatial") if isinstance(e.kind, Spatial) \
            else (e.src, e.dst, type(e.kind).__name__, getattr(e.kind, "mode", None))
        if key in seen:
            out.append(f"duplicate {e}")
        seen.add(key)
        if isinstance(e.kind, Spatial):
            if a.time != b.time or e.src == e.dst:
                out.append(f"spatial layer {e}")
        else:
            if b.time != a.time + 1:
                out.append(f"temporal gap {e}")
            if isinstance(e.kind, SpatioTemporal) and not isinstance(e.kind.relation, Rel):
                out.append(f"complex spatiotemporal {e}")
            if e.kind == CONTINUATION and a.object_id != b.object_id:
                out.append(f"continuation identity {e}")
            if e.kind == DERIVATION and a.object_id == b.object_id:
                out.append(f"derivation identity {e}")
    ids = [(n.object_id, n.time) for n in g.nodes]
    if len(set(ids)) != len(ids):
        out.append("duplicate (object, time)")
    return out


def label_predicates(a, b):
    """Each simple label decided on its own from set algebra, not through relation()."""
    A, B = a.cells, b.cells
    shared = bool(A & B)
    adjacent = any(abs(r1 - r2) + abs(c1 - c2) == 1 for r1, c1 in A for r2, c2 in B)
    return {
        Rel.EQUALS: A == B,
        Rel.INSIDE: A < B,
        Rel.CONTAINS: A > B,
        Rel.OVERLAPS: shared and not A <= B and not B <= A,
        Rel.MEETS: not shared and adjacent,
        Rel.DISJOINT: not shared and not adjacent,
    }
