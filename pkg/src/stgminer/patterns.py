"""Subgraph patterns to look for in an STG.

A pattern's vertices live on relative layers 0 and 1, so one temporal
pattern can be instantiated at every consecutive layer pair. Patterns
whose vertices are all on layer 0 are spatial.

Edge kinds: ``spatial`` (same layer, undirected), ``spatiotemporal``,
``continuation``, ``derivation`` and ``filiation`` (either mode); the last
four always run from layer 0 to layer 1.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field

from .errors import ParseError, ValidationError
from .identify import OPS, AttrPredicate
from .relations import Near, Rel, parse_relation

SCHEMA_VERSION = 1

EDGE_KINDS = ("spatial", "spatiotemporal", "continuation", "derivation", "filiation")
TEMPORAL_KINDS = EDGE_KINDS[1:]


@dataclass(frozen=True)
class PatternVertex:
    name: str
    layer: int = 0
    class_label: str | None = None
    predicates: tuple[AttrPredicate, ...] = ()


@dataclass(frozen=True)
class PatternEdge:
    """``labels`` restricts spatial/spatiotemporal relations; empty means any."""

    u: str
    v: str
    kind: str
    labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class Comparison:
    """Attribute comparison between two matched vertices, e.g. area(b) > area(a)."""

    left: str
    attr: str
    op: str
    right: str


@dataclass(frozen=True)
class Pattern:
    name: str
    vertices: tuple[PatternVertex, ...]
    edges: tuple[PatternEdge, ...] = ()
    comparisons: tuple[Comparison, ...] = ()

    @property
    def is_spatial(self) -> bool:
        return all(v.layer == 0 for v in self.vertices)

    @property
    def var_names(self) -> list[str]:
        return [v.name for v in self.vertices]

    def vertex(self, name: str) -> PatternVertex:
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class PatternIssue:
    code: str
    message: str

    def __str__(self):
        return f"{self.code}: {self.message}"


def validate_pattern(p: Pattern) -> list[PatternIssue]:
    """Every invariant violation of ``p``; an empty list means valid."""
    issues = []
    layers = {}
    for v in p.vertices:
        if v.name in layers:
            issues.append(PatternIssue("DuplicateName", f"vertex {v.name!r} declared twice"))
            continue
        if v.layer not in (0, 1):
            issues.append(PatternIssue("BadLayer", f"vertex {v.name!r} on layer {v.layer}"))
        for pred in v.predicates:
            if pred.op not in OPS:
                issues.append(PatternIssue("BadPredicate", f"{v.name!r}: operator {pred.op!r}"))
        layers[v.name] = v.layer
    for e in p.edges:
        tag = f"{e.kind} edge {e.u}->{e.v}"
        if e.kind not in EDGE_KINDS:
            issues.append(PatternIssue("BadKind", f"{tag}: unknown kind"))
            continue
        missing = [x for x in (e.u, e.v) if x not in layers]
        for x in missing:
            issues.append(PatternIssue("UnknownVertex", f"{tag}: no vertex {x!r}"))
        if missing:
            continue
        if e.u == e.v:
            issues.append(PatternIssue("SelfLoop", f"{tag}: endpoints coincide"))
        if e.kind == "spatial" and layers[e.u] != layers[e.v]:
            issues.append(PatternIssue("LayerViolation", f"{tag}: spatial edge across layers"))
        if e.kind in TEMPORAL_KINDS and (layers[e.u], layers[e.v]) != (0, 1):
            issues.append(PatternIssue("LayerViolation", f"{tag}: must run from layer 0 to layer 1"))
        if e.labels and e.kind not in ("spatial", "spatiotemporal"):
            issues.append(PatternIssue("BadLabel", f"{tag}: filiation edges take no relation labels"))
        for label in e.labels:
            try:
                rel = parse_relation(label)
            except ValueError:
                issues.append(PatternIssue("UnknownRelation", f"{tag}: label {label!r}"))
                continue
            if e.kind == "spatiotemporal" and isinstance(rel, Near):
                issues.append(PatternIssue("UnknownRelation",
                                           f"{tag}: complex label {label!r} on spatiotemporal edge"))
    for c in p.comparisons:
        for x in (c.left, c.right):
            if x not in layers:
                issues.append(PatternIssue("UnknownVertex", f"comparison names no vertex {x!r}"))
        if c.op not in OPS:
            issues.append(PatternIssue("BadPredicate", f"comparison operator {c.op!r}"))
    return issues


def is_connected(p: Pattern) -> bool:
    if not p.vertices:
        return True
    adj = {v.name: set() for v in p.vertices}
    for e in p.edges:
        adj[e.u].add(e.v)
        adj[e.v].add(e.u)
    start = p.vertices[0].name
    seen = {start}
    queue = deque([start])
    while queue:
        for n in adj[queue.popleft()]:
            if n not in seen:
                seen.add(n)
                queue.append(n)
    return len(seen) == len(adj)


def catalog() -> list[Pattern]:
    """Built-in patterns, in a fixed order."""
    meets = (Rel.MEETS.value,)
    return [
        Pattern("spatial-edge",
                (PatternVertex("a"), PatternVertex("b")),
                (PatternEdge("a", "b", "spatial", meets),)),
        Pattern("spatial-triangle",
                (PatternVertex("a"), PatternVertex("b"), PatternVertex("c")),
                (PatternEdge("a", "b", "spatial", meets),
                 PatternEdge("b", "c", "spatial", meets),
                 PatternEdge("a", "c", "spatial", meets))),
        Pattern("continuation-edge",
                (PatternVertex("a", 0), PatternVertex("b", 1)),
                (PatternEdge("a", "b", "continuation"),)),
        Pattern("derivation-fan",
                (PatternVertex("parent", 0), PatternVertex("child1", 1), PatternVertex("child2", 1)),
                (PatternEdge("parent", "child1", "derivation"),
                 PatternEdge("parent", "child2", "derivation"))),
        Pattern("merge",
                (PatternVertex("parent1", 0), PatternVertex("parent2", 0), PatternVertex("child", 1)),
                (PatternEdge("parent1", "child", "filiation"),
                 PatternEdge("parent2", "child", "filiation"))),
        Pattern("growth",
                (PatternVertex("before", 0), PatternVertex("after", 1)),
                (PatternEdge("before", "after", "continuation"),),
                (Comparison("after", "area", ">", "before"),)),
    ]


def catalog_by_name() -> dict[str, Pattern]:
    return {p.name: p for p in catalog()}


# -- JSON ---------------------------------------------------------------


def pattern_to_dict(p: Pattern) -> dict:
    def vertex(v: PatternVertex) -> dict:
        d = {"name": v.name, "layer": v.layer}
        if v.class_label is not None:
            d["class_label"] = v.class_label
        if v.predicates:
            d["predicates"] = [{"attr": q.attr, "op": q.op, "value": q.value} for q in v.predicates]
        return d

    out = {
        "schema_version": SCHEMA_VERSION,
        "name": p.name,
        "vertices": [vertex(v) for v in p.vertices],
        "edges": [{"u": e.u, "v": e.v, "kind": e.kind, "labels": list(e.labels)} for e in p.edges],
    }
    if p.comparisons:
        out["comparisons"] = [{"left": c.left, "attr": c.attr, "op": c.op, "right": c.right}
                              for c in p.comparisons]
    return out


def serialize_pattern(p: Pattern) -> str:
    return json.dumps(pattern_to_dict(p), indent=2, sort_keys=True) + "\n"


def _fields(obj, required: set[str], optional: set[str], where: str, path) -> None:
    if not isinstance(obj, dict):
        raise ParseError(path, None, f"{where}: expected an object")
    unknown = set(obj) - required - optional
    if unknown:
        raise ParseError(path, None, f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ParseError(path, None, f"{where}: missing field(s) {sorted(missing)}")


def pattern_from_dict(data, path=None) -> Pattern:
    from .serialize import check_version

    check_version(data, path)
    _fields(data, {"schema_version", "vertices", "edges"}, {"name", "comparisons"}, "pattern", path)
    vertices = []
    for i, v in enumerate(data["vertices"]):
        where = f"vertices[{i}]"
        _fields(v, {"name"}, {"layer", "class_label", "predicates"}, where, path)
        preds = []
        for j, q in enumerate(v.get("predicates", [])):
            _fields(q, {"attr", "op", "value"}, set(), f"{where}.predicates[{j}]", path)
            try:
                preds.append(AttrPredicate(str(q["attr"]), str(q["op"]), float(q["value"])))
            except (TypeError, ValueError) as exc:
                raise ParseError(path, None, f"{where}.predicates[{j}]: {exc}") from None
        layer = v.get("layer", 0)
        if not isinstance(layer, int):
            raise ParseError(path, None, f"{where}.layer: expected an integer")
        vertices.append(PatternVertex(str(v["name"]), layer, v.get("class_label"), tuple(preds)))
    edges = []
    for i, e in enumerate(data["edges"]):
        _fields(e, {"u", "v", "kind"}, {"labels"}, f"edges[{i}]", path)
        edges.append(PatternEdge(str(e["u"]), str(e["v"]), str(e["kind"]),
                                 tuple(str(x) for x in e.get("labels", []))))
    comps = []
    for i, c in enumerate(data.get("comparisons", [])):
        _fields(c, {"left", "attr", "op", "right"}, set(), f"comparisons[{i}]", path)
        comps.append(Comparison(str(c["left"]), str(c["attr"]), str(c["op"]), str(c["right"])))
    p = Pattern(str(data.get("name", "pattern")), tuple(vertices), tuple(edges), tuple(comps))
    issues = validate_pattern(p)
    if issues:
        raise ValidationError(issues)
    return p


def parse_pattern(text: str, path=None) -> Pattern:
    """Decode and validate a pattern from its JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    return pattern_from_dict(data, path)
