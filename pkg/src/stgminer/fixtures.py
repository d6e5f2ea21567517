"""Small hand-made scenes used by the CLI demo and the test-suite.

``demo_*``
    Three snapshots (2015, 2017, 2019) of an 8x8 urban block with an
    urban-block template whose identification is unique at every date.

``urban_growth``
    A scripted scenario on a grid of parcels. Each object follows a script
    (persist, grow, shrink, split, merge, appear, vanish), and the scenario
    records the change events the script implies, independently of the
    classifier.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import STGraph, construct_stg
from .identify import AttrPredicate, ObjectTemplate, PartVar, RelationRule
from .relations import Rel, Region, Snapshot

DEMO_TIMES = ("2015", "2017", "2019")


def rect(r0: int, c0: int, h: int, w: int) -> frozenset[tuple[int, int]]:
    return frozenset((r, c) for r in range(r0, r0 + h) for c in range(c0, c0 + w))


def _region(rid, label, cells) -> Region:
    return Region(rid, label, frozenset(cells))


def demo_snapshots() -> list[Snapshot]:
    road = rect(3, 0, 1, 8)
    house_a = rect(1, 0, 2, 2)
    house_b = rect(1, 3, 2, 3)
    garden = rect(1, 2, 2, 1)
    land = rect(5, 0, 3, 4)
    house_c = rect(4, 5, 2, 2)
    s2015 = Snapshot("2015", [
        _region(1, "road", road),
        _region(2, "building", house_a),
        _region(3, "building", house_b),
        _region(4, "garden", garden),
        _region(5, "land", land),
        _region(6, "building", house_c),
    ])
    s2017 = Snapshot("2017", [
        _region(1, "road", road),
        _region(2, "building", rect(0, 0, 3, 2)),
        _region(3, "building", house_b),
        _region(4, "garden", garden),
        _region(6, "building", house_c),
        _region(7, "land", rect(5, 0, 3, 2)),
        _region(8, "land", rect(5, 2, 3, 2)),
    ])
    s2019 = Snapshot("2019", [
        _region(1, "road", road),
        _region(3, "building", house_b),
        _region(7, "land", rect(5, 0, 3, 2)),
        _region(9, "building", rect(0, 0, 3, 2) | garden),
        _region(10, "garden", rect(1, 6, 2, 1)),
    ])
    return [s2015, s2017, s2019]


def demo_template() -> ObjectTemplate:
    """House (building, area >= 5) on a street with a garden touching both."""
    meets = frozenset({Rel.MEETS})
    return ObjectTemplate(
        "urban-block",
        [
            PartVar("house", "building", (AttrPredicate("area", ">=", 5),)),
            PartVar("street", "road"),
            PartVar("green", "garden"),
        ],
        [
            RelationRule("house", "street", meets),
            RelationRule("green", "house", meets),
            RelationRule("green", "street", meets),
        ],
    )


# identify pipeline result: static solve in 2015, dynamic re-solve after
# (2017 admits a second solution with house = 2; the previous one is kept)
DEMO_IDENTIFICATION = (
    {"house": 3, "street": 1, "green": 4},
    {"house": 3, "street": 1, "green": 4},
    {"house": 3, "street": 1, "green": 10},
)

# object tracking over every region of the demo scene
DEMO_TRACKING = (
    {"road": 1, "house-a": 2, "house-b": 3, "garden": 4, "land": 5, "house-c": 6},
    {"road": 1, "house-a": 2, "house-b": 3, "garden": 4, "house-c": 6, "land-west": 7, "land-east": 8},
    {"road": 1, "house-b": 3, "land-west": 7, "house-ab": 9, "garden-new": 10},
)


def demo_stg() -> STGraph:
    return construct_stg(demo_snapshots(), [dict(a) for a in DEMO_TRACKING])


# -- scripted urban growth ----------------------------------------------

# each parcel is a 6x6 area; parcels sit on a stride-8 grid so objects in
# different parcels never touch
_STRIDE = 8


@dataclass(frozen=True)
class ScriptedEvent:
    """Ground-truth event in object terms: ``objects`` are (object_id, layer) pairs."""

    kind: str
    objects: tuple[tuple[str, int], ...]
    anchor: tuple[int, int]


@dataclass
class Scenario:
    snapshots: list[Snapshot]
    tracking: list[dict[str, int]]
    events: list[ScriptedEvent]

    def build(self) -> STGraph:
        return construct_stg(self.snapshots, [dict(a) for a in self.tracking])


def _parcel(index: int, r0: int, c0: int, h: int, w: int) -> frozenset[tuple[int, int]]:
    pr, pc = divmod(index, 4)
    return rect(pr * _STRIDE + r0, pc * _STRIDE + c0, h, w)


# object -> per-layer (parcel, r0, c0, h, w, class) or None when absent
_SCRIPT: dict[str, list] = {
    # persists unchanged
    "road-1": [(0, 0, 0, 1, 6, "road"), (0, 0, 0, 1, 6, "road"), (0, 0, 0, 1, 6, "road")],
    # grows twice
    "bldg-grow": [(1, 0, 0, 2, 2, "building"), (1, 0, 0, 3, 3, "building"), (1, 0, 0, 4, 4, "building")],
    # shrinks, then persists
    "bldg-shrink": [(2, 0, 0, 4, 4, "building"), (2, 0, 0, 3, 3, "building"), (2, 0, 0, 3, 3, "building")],
    # splits at t0 -> t1
    "land-split": [(3, 0, 0, 4, 6, "land"), None, None],
    "land-split-w": [None, (3, 0, 0, 4, 3, "land"), (3, 0, 0, 4, 3, "land")],
    "land-split-e": [None, (3, 0, 3, 4, 3, "land"), (3, 0, 3, 4, 3, "land")],
    # merge at t1 -> t2
    "house-w": [(4, 0, 0, 4, 2, "building"), (4, 0, 0, 4, 2, "building"), None],
    "house-e": [(4, 0, 3, 4, 2, "building"), (4, 0, 3, 4, 2, "building"), None],
    "house-merged": [None, None, (4, 0, 0, 4, 5, "building")],
    # appears at t1, grows at t2
    "bldg-new": [None, (5, 1, 1, 2, 2, "building"), (5, 1, 1, 2, 3, "building")],
    # disappears after t0
    "shed": [(6, 2, 2, 2, 2, "building"), None, None],
    # persists, disappears after t1
    "kiosk": [(7, 0, 0, 1, 1, "building"), (7, 0, 0, 1, 1, "building"), None],
    # appears at t2
    "garden-2019": [None, None, (8, 0, 0, 3, 3, "garden")],
    # split into three at t1 -> t2
    "field": [None, (9, 0, 0, 2, 6, "land"), None],
    "field-a": [None, None, (9, 0, 0, 2, 2, "land")],
    "field-b": [None, None, (9, 0, 2, 2, 2, "land")],
    "field-c": [None, None, (9, 0, 4, 2, 2, "land")],
}

_STORY = [
    # (kind, [(object, layer)...], anchor) in script terms
    ("continuation", [("road-1", 0), ("road-1", 1)], (0, 1)),
    ("continuation", [("road-1", 1), ("road-1", 2)], (1, 2)),
    ("continuation", [("bldg-grow", 0), ("bldg-grow", 1)], (0, 1)),
    ("growth", [("bldg-grow", 0), ("bldg-grow", 1)], (0, 1)),
    ("continuation", [("bldg-grow", 1), ("bldg-grow", 2)], (1, 2)),
    ("growth", [("bldg-grow", 1), ("bldg-grow", 2)], (1, 2)),
    ("continuation", [("bldg-shrink", 0), ("bldg-shrink", 1)], (0, 1)),
    ("shrinkage", [("bldg-shrink", 0), ("bldg-shrink", 1)], (0, 1)),
    ("continuation", [("bldg-shrink", 1), ("bldg-shrink", 2)], (1, 2)),
    ("split", [("land-split", 0), ("land-split-e", 1), ("land-split-w", 1)], (0, 1)),
    ("continuation", [("land-split-w", 1), ("land-split-w", 2)], (1, 2)),
    ("continuation", [("land-split-e", 1), ("land-split-e", 2)], (1, 2)),
    ("continuation", [("house-w", 0), ("house-w", 1)], (0, 1)),
    ("continuation", [("house-e", 0), ("house-e", 1)], (0, 1)),
    ("merge", [("house-e", 1), ("house-w", 1), ("house-merged", 2)], (1, 2)),
    ("appearance", [("bldg-new", 1)], (0, 1)),
    ("continuation", [("bldg-new", 1), ("bldg-new", 2)], (1, 2)),
    ("growth", [("bldg-new", 1), ("bldg-new", 2)], (1, 2)),
    ("disappearance", [("shed", 0)], (0, 1)),
    ("continuation", [("kiosk", 0), ("kiosk", 1)], (0, 1)),
    ("disappearance", [("kiosk", 1)], (1, 2)),
    ("appearance", [("garden-2019", 2)], (1, 2)),
    ("appearance", [("field", 1)], (0, 1)),
    ("split", [("field", 1), ("field-a", 2), ("field-b", 2), ("field-c", 2)], (1, 2)),
]


def urban_growth() -> Scenario:
    """Three-layer scripted scenario with its ground-truth event list."""
    snapshots = []
    tracking = []
    for t, label in enumerate(DEMO_TIMES):
        regions = []
        assign = {}
        for rid, obj in enumerate(sorted(_SCRIPT), start=1):
            spec = _SCRIPT[obj][t]
            if spec is None:
                continue
            parcel, r0, c0, h, w, cls = spec
            regions.append(Region(rid, cls, _parcel(parcel, r0, c0, h, w)))
            assign[obj] = rid
        snapshots.append(Snapshot(label, regions))
        tracking.append(assign)
    events = [ScriptedEvent(kind, tuple(objs), anchor) for kind, objs, anchor in _STORY]
    return Scenario(snapshots, tracking, events)


def scripted_events_as_nodes(scenario: Scenario, stg: STGraph) -> set[tuple[str, tuple[int, int], tuple[int, ...]]]:
    """Ground-truth events translated to node ids of ``stg``, in ChangeEvent node order."""
    out = set()
    for ev in scenario.events:
        ids = [stg.node_of(obj, t) for obj, t in ev.objects]
        if any(i is None for i in ids):
            raise ValueError(f"scripted event {ev} names an object missing from the graph")
        if ev.kind == "split":
            nodes = (ids[0], *sorted(ids[1:]))
        elif ev.kind == "merge":
            nodes = (*sorted(ids[:-1]), ids[-1])
        else:
            nodes = tuple(ids)
        out.add((ev.kind, ev.anchor, nodes))
    return out
