"""Matching-time benchmark over synthetic STGs of growing size."""

from __future__ import annotations

import logging
import statistics
import time
from dataclasses import dataclass

from .matching import match_all_anchors
from .patterns import Pattern
from .synth import SynthConfig, generate_stg, split_evenly, temporal_edge_count

logger = logging.getLogger(__name__)

LAYERS = 3


@dataclass(frozen=True)
class BenchRow:
    node_count: int
    edge_count: int
    pattern: str
    anchor_count: int
    match_count: int
    time_ms: float

    def __post_init__(self):
        if self.time_ms < 0:
            raise ValueError("elapsed time cannot be negative")


def bench_values(lo: int, hi: int, step: int) -> list[int]:
    if step <= 0:
        raise ValueError("step must be > 0")
    if lo > hi:
        raise ValueError(f"min {lo} exceeds max {hi}")
    if lo < 0:
        raise ValueError("min must be >= 0")
    return list(range(lo, hi + 1, step))


def bench_graph(vary: str, value: int, seed: int, fixed_nodes: int = 300,
                mean_degree: float = 4.0, config: SynthConfig | None = None):
    """Synthetic STG for one benchmark point.

    ``vary="nodes"``: ``value`` nodes in total, spatial density fixed by
    ``mean_degree``. ``vary="edges"``: ``fixed_nodes`` nodes and ``value``
    edges in total (spatial edges fill whatever the temporal ones leave).
    """
    if vary == "nodes":
        return generate_stg(split_evenly(value, LAYERS), mean_degree=mean_degree, seed=seed, config=config)
    if vary == "edges":
        sizes = split_evenly(fixed_nodes, LAYERS)
        temporal = temporal_edge_count(sizes, seed=seed, config=config)
        spatial = split_evenly(max(value - temporal, 0), LAYERS)
        return generate_stg(sizes, spatial_edges=spatial, seed=seed, config=config)
    raise ValueError(f"vary must be 'nodes' or 'edges', not {vary!r}")


def run_bench(vary: str, values: list[int], pattern: Pattern, reps: int = 5, seed: int = 0,
              fixed_nodes: int = 300, mean_degree: float = 4.0,
              config: SynthConfig | None = None) -> list[BenchRow]:
    """One row per value: median wall time of matching ``pattern`` at every anchor."""
    if reps < 3:
        raise ValueError("reps must be >= 3")
    rows = []
    for value in values:
        g = bench_graph(vary, value, seed, fixed_nodes, mean_degree, config)
        timings = []
        found = {}
        for _ in range(reps):
            start = time.perf_counter()
            found = match_all_anchors(g, pattern)
            timings.append((time.perf_counter() - start) * 1000.0)
        stats = g.stats()
        row = BenchRow(stats["nodes"], stats["edges"], pattern.name, len(found),
                       sum(len(v) for v in found.values()), statistics.median(timings))
        logger.info("bench %s=%d: %s", vary, value, row)
        rows.append(row)
    return rows


def inversions(series: list[float]) -> int:
    """Number of adjacent decreases in ``series``."""
    return sum(1 for a, b in zip(series, series[1:]) if b < a)
