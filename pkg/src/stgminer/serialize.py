"""Reading and writing every stgminer data set.

Structured data is JSON with ``"schema_version": 1`` and sorted keys, so
identical inputs give byte-identical files. Flat tables are CSV.

Top-level JSON keys::

    snapshot     {schema_version, time, regions[]}
    series       {schema_version, snapshots[]}            (or a directory of snapshots)
    stg          {schema_version, timestamps[], nodes[], edges[]}
    pattern      {schema_version, name, vertices[], edges[], comparisons[]}
    matches      {schema_version, pattern, anchor, assignments[]}
    all anchors  {schema_version, pattern, results[{anchor, assignments[]}]}
    template     {schema_version, name, parts[], relations[]}
    assignments  {schema_version, template, layers[{time, assignment{}}]}
    events       {schema_version, events[{kind, anchor, nodes[]}]}
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import (
    BadLayer,
    DuplicateIdentity,
    ParseError,
    SchemaVersionError,
    STGError,
    UnknownNode,
    ValidationError,
)
from .evolution import ChangeEvent, FrequencyRow, FrequencyTable
from .graph import (
    CONTINUATION,
    DERIVATION,
    Spatial,
    SpatioTemporal,
    STEdge,
    STGraph,
    TimeStamp,
    kind_name,
)
from .identify import AttrPredicate, ObjectTemplate, PartVar, RelationRule
from .matching import Anchor, Match
from .patterns import Pattern, parse_pattern, pattern_to_dict
from .relations import Region, Snapshot, parse_relation

SCHEMA_VERSION = 1

FREQUENCY_COLUMNS = ["pattern", "anchor", "match_count", "support"]
BENCH_COLUMNS = ["nodes", "edges", "pattern", "anchor_count", "match_count", "time_ms"]


def check_version(data, path=None) -> None:
    if not isinstance(data, dict):
        raise ParseError(path, None, "top level must be a JSON object")
    version = data.get("schema_version")
    if version is None:
        raise SchemaVersionError(path, None, "missing schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(path, None, f"unsupported schema_version {version!r}")


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _read_json(path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, None, f"cannot read: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None


def _get(obj, key, where, path, kind=None):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(path, None, f"{where}: missing field {key!r}")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(path, None, f"{where}.{key}: expected {getattr(kind, '__name__', kind)}")
    return value


# -- snapshots ----------------------------------------------------------


def snapshot_to_dict(snap: Snapshot) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "time": snap.time,
        "regions": [
            {
                "region_id": r.region_id,
                "class_label": r.class_label,
                "cells": [list(c) for c in sorted(r.cells)],
                "attrs": dict(r.attrs),
            }
            for r in sorted(snap.regions, key=lambda r: r.region_id)
        ],
    }


def snapshot_from_dict(data, path=None, versioned: bool = True) -> Snapshot:
    if versioned:
        check_version(data, path)
    time = str(_get(data, "time", "snapshot", path))
    regions = []
    for i, r in enumerate(_get(data, "regions", "snapshot", path, list)):
        where = f"regions[{i}]"
        try:
            cells = [(int(c[0]), int(c[1])) for c in _get(r, "cells", where, path, list)]
            attrs = {str(k): float(v) for k, v in r.get("attrs", {}).items()}
            regions.append(Region(int(_get(r, "region_id", where, path)),
                                  str(_get(r, "class_label", where, path)), frozenset(cells), attrs))
        except (TypeError, ValueError, IndexError, AttributeError) as exc:
            raise ParseError(path, None, f"{where}: {exc}") from None
    snap = Snapshot(time, regions)
    problems = snap.problems()
    if problems:
        raise ParseError(path, None, "; ".join(problems))
    return snap


def save_snapshot(snap: Snapshot, path) -> None:
    _write(path, dumps(snapshot_to_dict(snap)))


def load_snapshot(path) -> Snapshot:
    return snapshot_from_dict(_read_json(path), path)


def save_snapshot_series(snapshots: Sequence[Snapshot], path) -> None:
    """Write a directory with one ``NN_<time>.json`` file per snapshot."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    for i, snap in enumerate(snapshots):
        save_snapshot(snap, root / f"{i:03d}_{snap.time}.json")


def load_snapshot_series(path) -> list[Snapshot]:
    """Snapshots from a directory (files sorted by name) or a single series file."""
    root = Path(path)
    if root.is_dir():
        files = sorted(root.glob("*.json"))
        if not files:
            raise ParseError(path, None, "no snapshot files (*.json) in directory")
        series = [load_snapshot(f) for f in files]
    else:
        data = _read_json(root)
        check_version(data, path)
        if "snapshots" in data:
            series = [snapshot_from_dict(s, path, versioned=False)
                      for s in _get(data, "snapshots", "series", path, list)]
        else:
            series = [snapshot_from_dict(data, path)]
    labels = [s.time for s in series]
    if len(set(labels)) != len(labels):
        raise ParseError(path, None, f"duplicate time labels {labels}")
    return series


# -- STG ----------------------------------------------------------------


def edge_to_dict(e: STEdge) -> dict:
    d = {"src": e.src, "dst": e.dst, "kind": kind_name(e.kind)}
    if isinstance(e.kind, (Spatial, SpatioTemporal)):
        d["relation"] = str(e.kind.relation)
    return d


def stg_to_dict(g: STGraph) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "timestamps": [{"index": t.index, "label": t.label} for t in g.timestamps],
        "nodes": [
            {"node_id": n.node_id, "object_id": n.object_id, "time": n.time,
             "class_label": n.class_label, "attrs": dict(n.attrs)}
            for n in g.nodes
        ],
        "edges": [edge_to_dict(e) for e in g.edges],
    }


def _edge_kind(d, where, path):
    kind = _get(d, "kind", where, path, str)
    if kind == "continuation":
        return CONTINUATION
    if kind == "derivation":
        return DERIVATION
    if kind in ("spatial", "spatiotemporal"):
        try:
            rel = parse_relation(_get(d, "relation", where, path, str))
            return Spatial(rel) if kind == "spatial" else SpatioTemporal(rel)
        except ValueError as exc:
            raise ParseError(path, None, f"{where}: {exc}") from None
    raise ParseError(path, None, f"{where}: unknown edge kind {kind!r}")


def stg_from_dict(data, path=None, check: bool = True) -> STGraph:
    """Decode an STG.

    With ``check`` every edge goes through the invariant checks and the
    first violation raises ValidationError; without it the edges are taken
    as written so that :meth:`STGraph.validate` can report them.
    """
    check_version(data, path)
    stamps = []
    for i, t in enumerate(_get(data, "timestamps", "stg", path, list)):
        stamps.append(TimeStamp(int(_get(t, "index", f"timestamps[{i}]", path)),
                                str(_get(t, "label", f"timestamps[{i}]", path))))
    try:
        g = STGraph(stamps)
    except ValueError as exc:
        raise ParseError(path, None, str(exc)) from None
    for i, n in enumerate(_get(data, "nodes", "stg", path, list)):
        where = f"nodes[{i}]"
        try:
            g.add_node(str(_get(n, "object_id", where, path)), int(_get(n, "time", where, path)),
                       str(_get(n, "class_label", where, path)),
                       {str(k): float(v) for k, v in n.get("attrs", {}).items()},
                       node_id=int(_get(n, "node_id", where, path)))
        except (BadLayer, DuplicateIdentity) as exc:
            raise ValidationError([f"{type(exc).__name__}: {where}: {exc}"]) from None
        except (TypeError, ValueError, AttributeError) as exc:
            raise ParseError(path, None, f"{where}: {exc}") from None
    for i, e in enumerate(_get(data, "edges", "stg", path, list)):
        where = f"edges[{i}]"
        kind = _edge_kind(e, where, path)
        src = int(_get(e, "src", where, path))
        dst = int(_get(e, "dst", where, path))
        if check:
            try:
                g.add_edge(src, dst, kind)
            except STGError as exc:
                raise ValidationError([f"{type(exc).__name__}: {where}: {exc}"]) from None
        else:
            for nid in (src, dst):
                try:
                    g.node(nid)
                except UnknownNode:
                    raise ParseError(path, None, f"{where}: unknown node {nid}") from None
            g._insert(STEdge(src, dst, kind))
    return g


def save_stg(g: STGraph, path) -> None:
    _write(path, dumps(stg_to_dict(g)))


def load_stg(path, check: bool = True) -> STGraph:
    return stg_from_dict(_read_json(path), path, check)


# -- patterns -----------------------------------------------------------


def save_pattern(p: Pattern, path) -> None:
    _write(path, dumps(pattern_to_dict(p)))


def load_pattern(path) -> Pattern:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, None, f"cannot read: {exc.strerror or exc}") from None
    return parse_pattern(text, path)


# -- templates and assignments -----------------------------------------


def template_to_dict(t: ObjectTemplate) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": t.name,
        "parts": [
            {"name": p.name, "class_label": p.class_label,
             "predicates": [{"attr": q.attr, "op": q.op, "value": q.value} for q in p.predicates]}
            for p in t.parts
        ],
        "relations": [
            {"a": r.part_a, "b": r.part_b, "allowed": sorted(str(x) for x in r.allowed)}
            for r in t.relations
        ],
    }


def template_from_dict(data, path=None) -> ObjectTemplate:
    check_version(data, path)
    try:
        parts = []
        for i, p in enumerate(_get(data, "parts", "template", path, list)):
            preds = tuple(AttrPredicate(str(q["attr"]), str(q["op"]), float(q["value"]))
                          for q in p.get("predicates", []))
            parts.append(PartVar(str(_get(p, "name", f"parts[{i}]", path)), p.get("class_label"), preds))
        rules = []
        for i, r in enumerate(data.get("relations", [])):
            where = f"relations[{i}]"
            allowed = frozenset(parse_relation(x) for x in _get(r, "allowed", where, path, list))
            rules.append(RelationRule(str(_get(r, "a", where, path)), str(_get(r, "b", where, path)), allowed))
        return ObjectTemplate(str(data.get("name", "template")), parts, rules)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(path, None, f"template: {exc}") from None


def save_template(t: ObjectTemplate, path) -> None:
    _write(path, dumps(template_to_dict(t)))


def load_template(path) -> ObjectTemplate:
    return template_from_dict(_read_json(path), path)


def assignments_to_dict(times: Sequence[str], assignments: Sequence[dict[str, int]],
                        template: str | None = None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "template": template,
        "layers": [{"time": t, "assignment": dict(a)} for t, a in zip(times, assignments)],
    }


def save_assignments(times, assignments, path, template: str | None = None) -> None:
    _write(path, dumps(assignments_to_dict(times, assignments, template)))


def load_assignments(path) -> tuple[list[str], list[dict[str, int]]]:
    data = _read_json(path)
    check_version(data, path)
    times, out = [], []
    for i, layer in enumerate(_get(data, "layers", "assignments", path, list)):
        where = f"layers[{i}]"
        times.append(str(_get(layer, "time", where, path)))
        try:
            out.append({str(k): int(v) for k, v in _get(layer, "assignment", where, path, dict).items()})
        except (TypeError, ValueError) as exc:
            raise ParseError(path, None, f"{where}: {exc}") from None
    return times, out


# -- matches ------------------------------------------------------------


def _matches_payload(matches: Iterable[Match]) -> list[dict]:
    return [m.as_dict() for m in matches]


def save_matches(pattern_name: str, results: dict[Anchor, list[Match]] | list[Match], path,
                 anchor: Anchor | None = None) -> None:
    """Single anchor: pass the match list and ``anchor``; all anchors: pass a dict."""
    if isinstance(results, dict):
        data = {
            "schema_version": SCHEMA_VERSION,
            "pattern": pattern_name,
            "results": [{"anchor": list(a), "assignments": _matches_payload(ms)}
                        for a, ms in sorted(results.items())],
        }
    else:
        if anchor is None:
            raise ValueError("anchor is required for a single match list")
        data = {
            "schema_version": SCHEMA_VERSION,
            "pattern": pattern_name,
            "anchor": list(anchor),
            "assignments": _matches_payload(results),
        }
    _write(path, dumps(data))


def load_matches(path, var_order: Sequence[str] | None = None) -> tuple[str, dict[Anchor, list[Match]]]:
    """Read a match file; always returns ``(pattern, {anchor: matches})``.

    JSON objects lose key order, so ``var_order`` restores the pattern's
    declaration order (sorted names otherwise).
    """
    data = _read_json(path)
    check_version(data, path)
    name = str(_get(data, "pattern", "matches", path))

    def decode(items) -> list[Match]:
        out = []
        for a in items:
            keys = list(var_order) if var_order is not None else sorted(a)
            out.append(Match(tuple((k, int(a[k])) for k in keys)))
        return out

    if "results" in data:
        return name, {tuple(r["anchor"]): decode(r["assignments"]) for r in data["results"]}
    return name, {tuple(_get(data, "anchor", "matches", path, list)):
                  decode(_get(data, "assignments", "matches", path, list))}


# -- events -------------------------------------------------------------


def save_events(events: Sequence[ChangeEvent], path) -> None:
    _write(path, dumps({
        "schema_version": SCHEMA_VERSION,
        "events": [{"kind": e.kind, "anchor": list(e.anchor), "nodes": list(e.nodes)} for e in events],
    }))


def load_events(path) -> list[ChangeEvent]:
    data = _read_json(path)
    check_version(data, path)
    return [ChangeEvent(str(e["kind"]), tuple(int(x) for x in e["nodes"]), tuple(e["anchor"]))
            for e in _get(data, "events", "events", path, list)]


# -- CSV ----------------------------------------------------------------


def anchor_text(anchor: Anchor) -> str:
    return "-".join(str(t) for t in anchor)


def _csv_text(columns: list[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def frequency_csv(table: FrequencyTable) -> str:
    return _csv_text(FREQUENCY_COLUMNS, (
        (r.pattern, anchor_text(r.anchor), r.match_count, repr(float(r.support))) for r in table.rows))


def save_frequency_csv(table: FrequencyTable, path) -> None:
    _write(path, frequency_csv(table))


def _read_csv(path, columns: list[str]) -> list[dict[str, str]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(path, None, f"cannot read: {exc.strerror or exc}") from None
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != columns:
        raise ParseError(path, 1, f"expected columns {columns}, got {reader.fieldnames}")
    return list(reader)


def load_frequency_csv(path) -> FrequencyTable:
    rows = []
    for i, r in enumerate(_read_csv(path, FREQUENCY_COLUMNS), start=2):
        try:
            rows.append(FrequencyRow(r["pattern"], tuple(int(x) for x in r["anchor"].split("-")),
                                     int(r["match_count"]), float(r["support"])))
        except ValueError as exc:
            raise ParseError(path, i, str(exc)) from None
    return FrequencyTable(rows)


def save_bench_csv(rows, path) -> None:
    _write(path, _csv_text(BENCH_COLUMNS, (
        (r.node_count, r.edge_count, r.pattern, r.anchor_count, r.match_count, repr(float(r.time_ms)))
        for r in rows)))


def load_bench_csv(path):
    from .bench import BenchRow

    rows = []
    for i, r in enumerate(_read_csv(path, BENCH_COLUMNS), start=2):
        try:
            rows.append(BenchRow(int(r["nodes"]), int(r["edges"]), r["pattern"], int(r["anchor_count"]),
                                 int(r["match_count"]), float(r["time_ms"])))
        except ValueError as exc:
            raise ParseError(path, i, str(exc)) from None
    return rows
