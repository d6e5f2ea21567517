"""Seeded synthetic STG generator for benchmarks and randomized tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import CONTINUATION, DERIVATION, Spatial, SpatioTemporal, STGraph
from .relations import Rel


@dataclass
class SynthConfig:
    """Generator knobs. Defaults keep the catalog patterns non-trivially frequent."""

    layers: int = 3
    classes: dict[str, float] = field(default_factory=lambda: {
        "building": 0.4, "road": 0.2, "garden": 0.2, "land": 0.2})
    continuation_rate: float = 0.8
    derivation_rate: float = 0.05
    derivation_fanout: int = 2
    merge_rate: float = 0.02
    jitter: float = 0.02


def split_evenly(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _closest_pairs(points: np.ndarray, count: int) -> list[tuple[int, int]]:
    """The ``count`` closest point pairs (ties broken by index)."""
    n = len(points)
    if n < 2 or count <= 0:
        return []
    iu, ju = np.triu_indices(n, k=1)
    d = np.linalg.norm(points[iu] - points[ju], axis=1)
    order = np.lexsort((ju, iu, d))[:count]
    return [(int(iu[k]), int(ju[k])) for k in order]


@dataclass
class _Layer:
    objects: list[str]
    classes: list[str]
    points: np.ndarray
    areas: list[float]


def generate_stg(layer_sizes: list[int], spatial_edges: list[int] | None = None,
                 mean_degree: float = 4.0, seed: int = 0,
                 config: SynthConfig | None = None) -> STGraph:
    """Random STG with ``layer_sizes[t]`` nodes on layer t.

    Spatial meets-edges join the closest node pairs of each layer (random
    geometric adjacency); their number per layer is ``spatial_edges[t]`` or
    ``mean_degree * n / 2``. Between layers, ``continuation_rate`` of the
    nodes persist, ``derivation_rate`` of them spawn ``derivation_fanout``
    new objects, and ``merge_rate`` pairs of nodes share a derived child.
    """
    config = config or SynthConfig()
    if len(layer_sizes) != config.layers:
        config = SynthConfig(**{**config.__dict__, "layers": len(layer_sizes)})
    rng = np.random.default_rng(seed)
    class_names = list(config.classes)
    weights = np.array([config.classes[c] for c in class_names], dtype=float)
    weights /= weights.sum()
    counter = iter(range(10**9))

    def fresh(n: int):
        objs = [f"o{next(counter)}" for _ in range(n)]
        cls = [class_names[i] for i in rng.choice(len(class_names), size=n, p=weights)]
        pts = rng.random((n, 2))
        areas = [float(a) for a in rng.integers(1, 21, size=n)]
        return objs, cls, pts, areas

    layers: list[_Layer] = []
    links: list[list[tuple[int, int, str]]] = []  # per transition: (parent idx, child idx, mode)
    objs, cls, pts, areas = fresh(layer_sizes[0])
    layers.append(_Layer(objs, cls, pts, areas))

    for t in range(1, len(layer_sizes)):
        prev = layers[-1]
        n_prev, target = len(prev.objects), layer_sizes[t]
        cont = min(int(round(config.continuation_rate * n_prev)), target)
        room = target - cont
        n_deriv = min(int(round(config.derivation_rate * n_prev)), room // max(config.derivation_fanout, 1))
        room -= n_deriv * config.derivation_fanout
        n_merge = min(int(round(config.merge_rate * n_prev)) if n_prev >= 2 else 0, room)
        room -= n_merge

        objs, cls, pts_list, areas, trans = [], [], [], [], []
        for i in sorted(rng.choice(n_prev, size=cont, replace=False).tolist()):
            objs.append(prev.objects[i])
            cls.append(prev.classes[i])
            pts_list.append(prev.points[i] + rng.normal(0, config.jitter, 2))
            areas.append(float(max(1, round(prev.areas[i] * rng.uniform(0.7, 1.4)))))
            trans.append((i, len(objs) - 1, "continuation"))
        for i in sorted(rng.choice(n_prev, size=n_deriv, replace=False).tolist()):
            for _ in range(config.derivation_fanout):
                objs.append(f"o{next(counter)}")
                cls.append(prev.classes[i])
                pts_list.append(prev.points[i] + rng.normal(0, config.jitter, 2))
                areas.append(float(max(1, round(prev.areas[i] / config.derivation_fanout))))
                trans.append((i, len(objs) - 1, "derivation"))
        for _ in range(n_merge):
            a, b = sorted(rng.choice(n_prev, size=2, replace=False).tolist())
            objs.append(f"o{next(counter)}")
            cls.append(prev.classes[a])
            pts_list.append((prev.points[a] + prev.points[b]) / 2)
            areas.append(prev.areas[a] + prev.areas[b])
            trans.append((a, len(objs) - 1, "derivation"))
            trans.append((b, len(objs) - 1, "derivation"))
        n_objs, n_cls, n_pts, n_areas = fresh(room)
        objs += n_objs
        cls += n_cls
        pts_list += list(n_pts)
        areas += n_areas
        points = np.array(pts_list, dtype=float).reshape(-1, 2)
        layers.append(_Layer(objs, cls, points, areas))
        links.append(trans)

    g = STGraph(str(t) for t in range(len(layer_sizes)))
    ids: list[list[int]] = []
    for t, layer in enumerate(layers):
        row = []
        for k in range(len(layer.objects)):
            x, y = layer.points[k]
            row.append(g.add_node(layer.objects[k], t, layer.classes[k],
                                  {"area": layer.areas[k], "x": float(x), "y": float(y)}))
        ids.append(row)
    for t, layer in enumerate(layers):
        n = len(layer.objects)
        count = spatial_edges[t] if spatial_edges is not None else int(round(mean_degree * n / 2))
        for i, j in _closest_pairs(layer.points, min(count, n * (n - 1) // 2)):
            g.add_edge(ids[t][i], ids[t][j], Spatial(Rel.MEETS))
    for t, trans in enumerate(links):
        for i, k, mode in trans:
            src, dst = ids[t][i], ids[t + 1][k]
            g.add_edge(src, dst, CONTINUATION if mode == "continuation" else DERIVATION)
            rel = Rel.EQUALS if layers[t].areas[i] == layers[t + 1].areas[k] else Rel.OVERLAPS
            g.add_edge(src, dst, SpatioTemporal(rel))
    return g


def temporal_edge_count(layer_sizes: list[int], seed: int = 0, config: SynthConfig | None = None) -> int:
    """Number of non-spatial edges :func:`generate_stg` produces for these sizes."""
    g = generate_stg(layer_sizes, spatial_edges=[0] * len(layer_sizes), seed=seed, config=config)
    return g.stats()["edges"]
