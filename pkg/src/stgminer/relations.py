"""Topological relations between labeled grid regions.

Regions are finite sets of (row, col) cells. Six simple labels partition
every pair of regions:

    equals    identical cell sets
    inside    a is a proper subset of b
    contains  b is a proper subset of a
    overlaps  shared cells, neither a subset of the other
    meets     no shared cells, but some pair of cells is 4-adjacent
    disjoint  everything else

``near(d)`` is the one complex relation: the minimum Chebyshev distance
between any two cells is at most ``d``.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

Cell = tuple[int, int]


class Rel(str, enum.Enum):
    EQUALS = "equals"
    INSIDE = "inside"
    CONTAINS = "contains"
    OVERLAPS = "overlaps"
    MEETS = "meets"
    DISJOINT = "disjoint"

    def __str__(self) -> str:
        return self.value

    def inverse(self) -> "Rel":
        if self is Rel.INSIDE:
            return Rel.CONTAINS
        if self is Rel.CONTAINS:
            return Rel.INSIDE
        return self


@dataclass(frozen=True)
class Near:
    """Complex relation: cells of the two regions come within ``d`` (Chebyshev)."""

    d: int

    def __post_init__(self):
        if self.d < 0:
            raise ValueError(f"near distance must be >= 0, got {self.d}")

    def __str__(self) -> str:
        return f"near({self.d})"

    def inverse(self) -> "Near":
        return self


RelationLabel = Union[Rel, Near]

SIMPLE_LABELS = tuple(Rel)
_NEAR_RE = re.compile(r"^near\((\d+)\)$")


def parse_relation(text: str) -> RelationLabel:
    """Decode ``"meets"`` or ``"near(3)"``; raises ValueError otherwise."""
    text = text.strip()
    try:
        return Rel(text)
    except ValueError:
        pass
    m = _NEAR_RE.match(text)
    if m:
        return Near(int(m.group(1)))
    raise ValueError(f"unknown relation label {text!r}")


@dataclass(frozen=True, eq=False)
class Region:
    """A labeled set of grid cells.

    Derived quantities (area, bbox, centroid) are computed from ``cells`` on
    demand and never stored separately.
    """

    region_id: int
    class_label: str
    cells: frozenset[Cell]
    attrs: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        cells = frozenset((int(r), int(c)) for r, c in self.cells)
        if not cells:
            raise ValueError(f"region {self.region_id} has no cells")
        if any(r < 0 or c < 0 for r, c in cells):
            raise ValueError(f"region {self.region_id} has negative coordinates")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        return (
            self.region_id == other.region_id
            and self.class_label == other.class_label
            and self.cells == other.cells
            and self.attrs == other.attrs
        )

    @property
    def area(self) -> int:
        return len(self.cells)

    @cached_property
    def bbox(self) -> tuple[int, int, int, int]:
        """(min_row, min_col, max_row, max_col), inclusive."""
        rows = [r for r, _ in self.cells]
        cols = [c for _, c in self.cells]
        return min(rows), min(cols), max(rows), max(cols)

    @cached_property
    def centroid(self) -> tuple[float, float]:
        n = len(self.cells)
        return (
            sum(r for r, _ in self.cells) / n,
            sum(c for _, c in self.cells) / n,
        )

    def attribute(self, name: str) -> float:
        """Look up a numeric attribute, falling back to derived geometry."""
        if name == "area":
            return float(self.area)
        if name == "centroid_row":
            return self.centroid[0]
        if name == "centroid_col":
            return self.centroid[1]
        return self.attrs[name]


def _touches(a: frozenset[Cell], b: frozenset[Cell]) -> bool:
    small, big = (a, b) if len(a) <= len(b) else (b, a)
    for r, c in small:
        if (r + 1, c) in big or (r - 1, c) in big or (r, c + 1) in big or (r, c - 1) in big:
            return True
    return False


def relation(a: Region, b: Region) -> Rel:
    """The unique simple label relating ``a`` to ``b``."""
    ca, cb = a.cells, b.cells
    if ca == cb:
        return Rel.EQUALS
    common = ca & cb
    if common:
        if len(common) == len(ca):
            return Rel.INSIDE
        if len(common) == len(cb):
            return Rel.CONTAINS
        return Rel.OVERLAPS
    if _touches(ca, cb):
        return Rel.MEETS
    return Rel.DISJOINT


def overlap_ratio(a: Region, b: Region) -> float:
    """Fraction of ``a``'s cells that also belong to ``b``."""
    return len(a.cells & b.cells) / len(a.cells)


def containment_ratio(a: Region, b: Region) -> float:
    """Shared cells over the smaller area; symmetric, 1.0 when one holds the other."""
    return len(a.cells & b.cells) / min(len(a.cells), len(b.cells))


def chebyshev_gap(a: Region, b: Region) -> int:
    """Minimum Chebyshev distance over all cell pairs (0 when cells are shared)."""
    if a.cells & b.cells:
        return 0
    pa = np.fromiter((v for cell in a.cells for v in cell), dtype=np.int64).reshape(-1, 2)
    pb = np.fromiter((v for cell in b.cells for v in cell), dtype=np.int64).reshape(-1, 2)
    diff = np.abs(pa[:, None, :] - pb[None, :, :]).max(axis=2)
    return int(diff.min())


def near(a: Region, b: Region, d: int) -> bool:
    if d < 0:
        raise ValueError(f"near distance must be >= 0, got {d}")
    # bbox gap is a lower bound on the cell distance
    ar0, ac0, ar1, ac1 = a.bbox
    br0, bc0, br1, bc1 = b.bbox
    gap = max(br0 - ar1, ar0 - br1, bc0 - ac1, ac0 - bc1, 0)
    if gap > d:
        return False
    return chebyshev_gap(a, b) <= d


def holds(label: RelationLabel, a: Region, b: Region) -> bool:
    """True iff ``label`` relates ``a`` to ``b``."""
    if isinstance(label, Near):
        return near(a, b, label.d)
    return relation(a, b) is label


@dataclass
class Snapshot:
    """Labeled regions observed at one time label."""

    time: str
    regions: list[Region]

    def region_map(self) -> dict[int, Region]:
        return {r.region_id: r for r in self.regions}

    def problems(self) -> list[str]:
        """Invariant violations: duplicate region ids and cells shared by two regions."""
        out = []
        seen: dict[int, Region] = {}
        owner: dict[Cell, int] = {}
        for r in self.regions:
            if r.region_id in seen:
                out.append(f"duplicate region_id {r.region_id}")
                continue
            seen[r.region_id] = r
            clashes = set()
            for cell in r.cells:
                other = owner.setdefault(cell, r.region_id)
                if other != r.region_id:
                    clashes.add(other)
            for other in sorted(clashes):
                out.append(f"regions {other} and {r.region_id} share cells")
        return out
