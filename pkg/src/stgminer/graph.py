"""Time-layered spatiotemporal graph (STG).

Nodes are (object, time) pairs. Three edge families connect them:

* ``Spatial``        intra-layer relation between two objects (undirected)
* ``SpatioTemporal`` relation between footprints at t and t+1 (directed)
* ``Filiation``      identity lineage from t to t+1, either a
                     ``CONTINUATION`` of the same object or a
                     ``DERIVATION`` of a new object from a parent
"""

from __future__ import annotations

import enum
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import (
    BadLayer,
    DuplicateEdge,
    DuplicateIdentity,
    EmptySeries,
    IdentityViolation,
    LayerViolation,
    UnknownNode,
)
from .relations import Near, Rel, RelationLabel, Snapshot, containment_ratio, near, relation

logger = logging.getLogger(__name__)


class FiliationMode(str, enum.Enum):
    CONTINUATION = "continuation"
    DERIVATION = "derivation"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Spatial:
    relation: RelationLabel


@dataclass(frozen=True)
class SpatioTemporal:
    relation: Rel

    def __post_init__(self):
        if not isinstance(self.relation, Rel):
            raise ValueError("spatiotemporal edges carry simple relations only")


@dataclass(frozen=True)
class Filiation:
    mode: FiliationMode


EdgeKind = Union[Spatial, SpatioTemporal, Filiation]

CONTINUATION = Filiation(FiliationMode.CONTINUATION)
DERIVATION = Filiation(FiliationMode.DERIVATION)


def kind_name(kind: EdgeKind) -> str:
    """Short family name used in stats and file formats."""
    if isinstance(kind, Spatial):
        return "spatial"
    if isinstance(kind, SpatioTemporal):
        return "spatiotemporal"
    return kind.mode.value


_KIND_RANK = {"spatial": 0, "spatiotemporal": 1, "continuation": 2, "derivation": 3}


@dataclass(frozen=True)
class TimeStamp:
    index: int
    label: str


@dataclass(frozen=True)
class STNode:
    node_id: int
    object_id: str
    time: int
    class_label: str
    attrs: dict[str, float] = field(default_factory=dict, hash=False)


@dataclass(frozen=True)
class STEdge:
    src: int
    dst: int
    kind: EdgeKind

    def sort_key(self):
        return (self.src, self.dst, _KIND_RANK[kind_name(self.kind)])


def _edge_key(src: int, dst: int, kind: EdgeKind):
    # spatial edges are symmetric: at most one per unordered pair
    if isinstance(kind, Spatial):
        return ("spatial", min(src, dst), max(src, dst))
    return (kind_name(kind), src, dst)


class STGraph:
    """Mutable while being built, then treated as read-only.

    Iteration over nodes and edges is always in ascending id order.
    """

    def __init__(self, timestamps: Iterable[TimeStamp | str]):
        stamps = []
        for i, ts in enumerate(timestamps):
            if isinstance(ts, TimeStamp):
                if ts.index != i:
                    raise ValueError(f"timestamp indices must be 0..m-1, got {ts.index} at {i}")
                stamps.append(ts)
            else:
                stamps.append(TimeStamp(i, str(ts)))
        labels = [t.label for t in stamps]
        if len(set(labels)) != len(labels):
            raise ValueError(f"timestamp labels must be unique: {labels}")
        self.timestamps: list[TimeStamp] = stamps
        self._nodes: dict[int, STNode] = {}
        self._identity: dict[tuple[str, int], int] = {}
        self._layers: list[list[int]] = [[] for _ in stamps]
        self._edges: dict[tuple, STEdge] = {}
        self._out: dict[int, list[STEdge]] = {}
        self._in: dict[int, list[STEdge]] = {}
        self._next_id = 0

    # -- construction -----------------------------------------------------

    @property
    def layer_count(self) -> int:
        return len(self.timestamps)

    def _check_layer(self, time: int) -> None:
        if not 0 <= time < len(self.timestamps):
            raise BadLayer(f"layer {time} outside 0..{len(self.timestamps) - 1}")

    def add_node(self, object_id: str, time: int, class_label: str,
                 attrs: dict[str, float] | None = None, node_id: int | None = None) -> int:
        self._check_layer(time)
        if (object_id, time) in self._identity:
            raise DuplicateIdentity(f"object {object_id!r} already present at layer {time}")
        if node_id is None:
            node_id = self._next_id
        elif node_id in self._nodes:
            raise DuplicateIdentity(f"node id {node_id} already used")
        node = STNode(node_id, object_id, time, class_label, dict(attrs or {}))
        self._nodes[node_id] = node
        self._identity[(object_id, time)] = node_id
        self._layers[time].append(node_id)
        self._layers[time].sort()
        self._next_id = max(self._next_id, node_id + 1)
        return node_id

    def add_edge(self, src: int, dst: int, kind: EdgeKind) -> None:
        problem = self._edge_problem(src, dst, kind)
        if problem is not None:
            raise problem
        self._insert(STEdge(src, dst, kind))

    def _insert(self, edge: STEdge) -> None:
        self._edges[_edge_key(edge.src, edge.dst, edge.kind)] = edge
        self._out.setdefault(edge.src, []).append(edge)
        self._in.setdefault(edge.dst, []).append(edge)

    def _edge_problem(self, src: int, dst: int, kind: EdgeKind):
        for n in (src, dst):
            if n not in self._nodes:
                return UnknownNode(f"node {n} does not exist")
        a, b = self._nodes[src], self._nodes[dst]
        if isinstance(kind, Spatial):
            if src == dst:
                return LayerViolation(f"spatial self-loop on node {src}")
            if a.time != b.time:
                return LayerViolation(
                    f"spatial edge {src}->{dst} spans layers {a.time} and {b.time}")
        elif isinstance(kind, (SpatioTemporal, Filiation)):
            if b.time != a.time + 1:
                return LayerViolation(
                    f"{kind_name(kind)} edge {src}->{dst} goes from layer {a.time} to {b.time}")
            if isinstance(kind, SpatioTemporal) and not isinstance(kind.relation, Rel):
                return LayerViolation(f"spatiotemporal edge {src}->{dst} carries a complex relation")
            if kind == CONTINUATION and a.object_id != b.object_id:
                return IdentityViolation(
                    f"continuation {src}->{dst} links objects {a.object_id!r} and {b.object_id!r}")
            if kind == DERIVATION and a.object_id == b.object_id:
                return IdentityViolation(
                    f"derivation {src}->{dst} links object {a.object_id!r} to itself")
        else:
            raise TypeError(f"not an edge kind: {kind!r}")
        if _edge_key(src, dst, kind) in self._edges:
            return DuplicateEdge(f"{kind_name(kind)} edge {src}->{dst} already present")
        return None

    # -- queries ----------------------------------------------------------

    def node(self, node_id: int) -> STNode:
        try:
            return self._nodes[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} does not exist") from None

    def node_of(self, object_id: str, time: int) -> int | None:
        return self._identity.get((object_id, time))

    @property
    def nodes(self) -> list[STNode]:
        return [self._nodes[i] for i in sorted(self._nodes)]

    @property
    def edges(self) -> list[STEdge]:
        return sorted(self._edges.values(), key=STEdge.sort_key)

    def nodes_at(self, time: int) -> list[STNode]:
        self._check_layer(time)
        return [self._nodes[i] for i in self._layers[time]]

    def node_ids_at(self, time: int) -> list[int]:
        self._check_layer(time)
        return list(self._layers[time])

    def out_edges(self, node_id: int) -> list[STEdge]:
        return list(self._out.get(node_id, ()))

    def in_edges(self, node_id: int) -> list[STEdge]:
        return list(self._in.get(node_id, ()))

    def neighbors(self, node_id: int, kind_filter: str | None = None,
                  direction: str = "out") -> list[STNode]:
        """Adjacent nodes, ascending by id.

        ``kind_filter`` is one of ``spatial``, ``spatiotemporal``, ``filiation``,
        ``continuation``, ``derivation`` or None for all. Spatial edges are
        followed both ways; temporal ones follow ``direction`` (out, in, both).
        """
        self.node(node_id)
        if direction not in ("out", "in", "both"):
            raise ValueError(f"bad direction {direction!r}")
        found = set()
        for e in self._out.get(node_id, ()):
            if _accepts(kind_filter, e.kind) and (isinstance(e.kind, Spatial) or direction != "in"):
                found.add(e.dst)
        for e in self._in.get(node_id, ()):
            if _accepts(kind_filter, e.kind) and (isinstance(e.kind, Spatial) or direction != "out"):
                found.add(e.src)
        return [self._nodes[i] for i in sorted(found)]

    def edge_between(self, src: int, dst: int, family: str) -> STEdge | None:
        """The edge of ``family`` from src to dst; spatial lookups ignore direction."""
        if family == "spatial":
            return self._edges.get(("spatial", min(src, dst), max(src, dst)))
        return self._edges.get((family, src, dst))

    def stats(self) -> dict[str, int]:
        counts = Counter(kind_name(e.kind) for e in self._edges.values())
        out = {"nodes": len(self._nodes), "layers": len(self.timestamps)}
        for name in _KIND_RANK:
            out[name] = counts.get(name, 0)
        out["edges"] = len(self._edges)
        return out

    def validate(self) -> list[str]:
        """Full re-scan of every node and edge invariant; returns violation messages."""
        problems = []
        seen_ids = set()
        for (obj, t), nid in self._identity.items():
            if nid in seen_ids:
                problems.append(f"DuplicateIdentity: node {nid} registered twice")
            seen_ids.add(nid)
        for node in self._nodes.values():
            if not 0 <= node.time < len(self.timestamps):
                problems.append(f"BadLayer: node {node.node_id} at layer {node.time}")
        for key, edge in list(self._edges.items()):
            if key != _edge_key(edge.src, edge.dst, edge.kind):
                problems.append(f"DuplicateEdge: {key}")
            del self._edges[key]
            try:
                err = self._edge_problem(edge.src, edge.dst, edge.kind)
            finally:
                self._edges[key] = edge
            if err is not None:
                problems.append(f"{type(err).__name__}: {err}")
        return problems

    def __eq__(self, other):
        if not isinstance(other, STGraph):
            return NotImplemented
        return (self.timestamps == other.timestamps and self.nodes == other.nodes
                and self.edges == other.edges)

    def __repr__(self):
        s = self.stats()
        return f"STGraph(layers={s['layers']}, nodes={s['nodes']}, edges={s['edges']})"


def _accepts(kind_filter: str | None, kind: EdgeKind) -> bool:
    if kind_filter is None:
        return True
    if kind_filter == "filiation":
        return isinstance(kind, Filiation)
    return kind_name(kind) == kind_filter


@dataclass
class ConstructionConfig:
    """Thresholds for filiation edges; defaults, not ground truth.

    Ratios are shared cells over the smaller footprint.
    """

    continuation_threshold: float = 0.5
    derivation_threshold: float = 0.3
    near_distance: int | None = None


def construct_stg(snapshots: Sequence[Snapshot], assignments: Sequence[dict[str, int]],
                  config: ConstructionConfig | None = None) -> STGraph:
    """Build the STG from identified regions.

    ``assignments[t]`` maps object ids (template part names, or any tracking
    label) to region ids of ``snapshots[t]``.
    """
    config = config or ConstructionConfig()
    if len(snapshots) < 1:
        raise EmptySeries("construct_stg needs at least one snapshot")
    if len(assignments) != len(snapshots):
        raise ValueError(f"{len(snapshots)} snapshots but {len(assignments)} assignments")

    graph = STGraph(s.time for s in snapshots)
    footprints: dict[int, object] = {}
    for t, (snap, assign) in enumerate(zip(snapshots, assignments)):
        regions = snap.region_map()
        for object_id in sorted(assign):
            rid = assign[object_id]
            if rid not in regions:
                raise ValueError(f"object {object_id!r} at {snap.time} names missing region {rid}")
            reg = regions[rid]
            attrs = dict(reg.attrs)
            attrs.update(area=float(reg.area), centroid_row=reg.centroid[0],
                         centroid_col=reg.centroid[1], region_id=float(rid))
            nid = graph.add_node(object_id, t, reg.class_label, attrs)
            footprints[nid] = reg

    for t in range(graph.layer_count):
        layer = graph.node_ids_at(t)
        for i, a in enumerate(layer):
            for b in layer[i + 1:]:
                rel = relation(footprints[a], footprints[b])
                if rel is not Rel.DISJOINT:
                    graph.add_edge(a, b, Spatial(rel))
                elif config.near_distance is not None and near(
                        footprints[a], footprints[b], config.near_distance):
                    graph.add_edge(a, b, Spatial(Near(config.near_distance)))

    for t in range(graph.layer_count - 1):
        parents = graph.nodes_at(t)
        children = graph.nodes_at(t + 1)
        for p in parents:
            for c in children:
                if footprints[p.node_id].cells & footprints[c.node_id].cells:
                    graph.add_edge(p.node_id, c.node_id,
                                   SpatioTemporal(relation(footprints[p.node_id], footprints[c.node_id])))
        continued = set()
        for c in children:
            pid = graph.node_of(c.object_id, t)
            if pid is None:
                continue
            p = graph.node(pid)
            ratio = containment_ratio(footprints[pid], footprints[c.node_id])
            if p.class_label == c.class_label and ratio >= config.continuation_threshold:
                graph.add_edge(pid, c.node_id, CONTINUATION)
                continued.add(c.node_id)
        for c in children:
            if c.node_id in continued:
                continue
            for p in parents:
                if p.object_id == c.object_id:
                    continue
                ratio = containment_ratio(footprints[p.node_id], footprints[c.node_id])
                if ratio >= config.derivation_threshold:
                    graph.add_edge(p.node_id, c.node_id, DERIVATION)
    logger.info("constructed %r", graph)
    return graph
