"""Evolution knowledge from an STG: pattern frequencies and change events."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable

from .graph import CONTINUATION, Filiation, STEdge, STGraph
from .matching import Anchor, match_all_anchors
from .patterns import Pattern

CHANGE_KINDS = ("appearance", "disappearance", "continuation", "split", "merge",
                "growth", "shrinkage")


@dataclass(frozen=True)
class FrequencyRow:
    pattern: str
    anchor: Anchor
    match_count: int
    support: float


@dataclass
class FrequencyTable:
    rows: list[FrequencyRow]

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def lookup(self, pattern: str, anchor: Anchor) -> FrequencyRow | None:
        for row in self.rows:
            if row.pattern == pattern and row.anchor == tuple(anchor):
                return row
        return None


def anchor_node_count(stg: STGraph, anchor: Anchor) -> int:
    return sum(len(stg.node_ids_at(t)) for t in anchor)


def mine_frequent(stg: STGraph, patterns: Iterable[Pattern], min_support: float = 0.0,
                  threads: int = 1) -> FrequencyTable:
    """Match counts per pattern and anchor, keeping rows with support >= min_support.

    Support is the match count divided by the number of nodes on the
    anchor's layer(s).
    """
    if min_support < 0:
        raise ValueError("min_support must be >= 0")
    rows = []
    for p in patterns:
        for anchor, found in match_all_anchors(stg, p, threads=threads).items():
            n = anchor_node_count(stg, anchor)
            support = len(found) / n if n else 0.0
            if support >= min_support:
                rows.append(FrequencyRow(p.name, anchor, len(found), support))
    return FrequencyTable(rows)


@dataclass(frozen=True)
class ChangeEvent:
    """``nodes`` order: continuation/growth/shrinkage (before, after);
    split (parent, children...); merge (parents..., child); appearance and
    disappearance a single node."""

    kind: str
    nodes: tuple[int, ...]
    anchor: Anchor


@dataclass
class Classification:
    events: list[ChangeEvent]
    # filiation edge (src, dst, mode) -> "continuation" | "split" | "merge"
    edge_pass: dict[tuple[int, int, str], str]

    def of_kind(self, kind: str) -> list[ChangeEvent]:
        return [e for e in self.events if e.kind == kind]


def _edge_id(e: STEdge) -> tuple[int, int, str]:
    return (e.src, e.dst, e.kind.mode.value)


def classify(stg: STGraph) -> Classification:
    """Change events plus the classification pass each filiation edge went through.

    Every filiation edge is handled by exactly one pass: the merge pass
    takes edges into a child with two or more incoming filiation edges, the
    continuation pass the remaining continuation edges, and the split pass
    the remaining derivation edges. Split events are only emitted for
    parents with at least two such derivation edges.
    """
    events: list[ChangeEvent] = []
    edge_pass: dict[tuple[int, int, str], str] = {}
    m = stg.layer_count
    for t in range(m - 1):
        anchor = (t, t + 1)
        before = stg.nodes_at(t)
        after = stg.nodes_at(t + 1)

        for n in after:
            if not any(isinstance(e.kind, Filiation) for e in stg.in_edges(n.node_id)):
                events.append(ChangeEvent("appearance", (n.node_id,), anchor))
        for n in before:
            if not any(isinstance(e.kind, Filiation) for e in stg.out_edges(n.node_id)):
                events.append(ChangeEvent("disappearance", (n.node_id,), anchor))

        incoming = defaultdict(list)
        for n in after:
            for e in stg.in_edges(n.node_id):
                if isinstance(e.kind, Filiation):
                    incoming[n.node_id].append(e)

        splits = defaultdict(list)
        for child in sorted(incoming):
            links = sorted(incoming[child], key=STEdge.sort_key)
            if len(links) >= 2:
                parents = tuple(sorted(e.src for e in links))
                events.append(ChangeEvent("merge", parents + (child,), anchor))
                for e in links:
                    edge_pass[_edge_id(e)] = "merge"
                continue
            e = links[0]
            if e.kind == CONTINUATION:
                edge_pass[_edge_id(e)] = "continuation"
                events.append(ChangeEvent("continuation", (e.src, e.dst), anchor))
            else:
                edge_pass[_edge_id(e)] = "split"
                splits[e.src].append(e.dst)
        for parent in sorted(splits):
            children = sorted(splits[parent])
            if len(children) >= 2:
                events.append(ChangeEvent("split", (parent, *children), anchor))

        for n in before:
            for e in stg.out_edges(n.node_id):
                if e.kind != CONTINUATION:
                    continue
                a0 = stg.node(e.src).attrs.get("area")
                a1 = stg.node(e.dst).attrs.get("area")
                if a0 is None or a1 is None:
                    continue
                if a1 > a0:
                    events.append(ChangeEvent("growth", (e.src, e.dst), anchor))
                elif a1 < a0:
                    events.append(ChangeEvent("shrinkage", (e.src, e.dst), anchor))

    events.sort(key=lambda ev: (ev.anchor, CHANGE_KINDS.index(ev.kind), ev.nodes))
    return Classification(events, edge_pass)


def classify_changes(stg: STGraph) -> list[ChangeEvent]:
    """Appearance, disappearance, continuation, split, merge, growth and shrinkage events."""
    return classify(stg).events


def filiation_edges(stg: STGraph) -> list[STEdge]:
    return [e for e in stg.edges if isinstance(e.kind, Filiation)]

