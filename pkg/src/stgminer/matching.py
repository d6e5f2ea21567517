"""Pattern detection in an STG as a constraint network.

For a pattern and an anchor (a layer, or a consecutive layer pair), the
network has one variable per pattern vertex, whose domain is the set of
STG nodes compatible with it; one support constraint per pattern edge
(the corresponding STG edge must exist with an allowed label); and an
all-different constraint making the vertex-to-node map injective.

:func:`resolve_csp` enumerates every solution by depth-first search.
:func:`brute_force_match` is an independent enumeration used as an oracle.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import BadAnchor, TooLarge
from .graph import Filiation, Spatial, STGraph, STNode, SpatioTemporal, kind_name
from .identify import OPS
from .patterns import Comparison, Pattern, PatternEdge, PatternVertex

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 10**6

Anchor = tuple[int, ...]


@dataclass(frozen=True)
class Match:
    """Pattern vertex -> STG node id, in pattern declaration order."""

    pairs: tuple[tuple[str, int], ...]

    def __getitem__(self, var: str) -> int:
        for k, v in self.pairs:
            if k == var:
                return v
        raise KeyError(var)

    def as_dict(self) -> dict[str, int]:
        return dict(self.pairs)

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.pairs)


@dataclass(frozen=True)
class SupportConstraint:
    """Binary constraint between two pattern variables (an edge or a comparison)."""

    xi: str
    xj: str
    edge: PatternEdge | None = None
    comparison: Comparison | None = None

    def check(self, stg: STGraph, a: int, b: int) -> bool:
        """``a`` and ``b`` are the nodes bound to ``xi`` and ``xj``."""
        if self.edge is not None:
            return edge_supported(stg, self.edge, a, b)
        c = self.comparison
        try:
            return OPS[c.op](stg.node(a).attrs[c.attr], stg.node(b).attrs[c.attr])
        except KeyError:
            return False


def edge_supported(stg: STGraph, edge: PatternEdge, a: int, b: int) -> bool:
    kinds = ("continuation", "derivation") if edge.kind == "filiation" else (edge.kind,)
    for family in kinds:
        found = stg.edge_between(a, b, family)
        if found is None:
            continue
        if not edge.labels:
            return True
        rel = found.kind.relation
        if isinstance(found.kind, Spatial) and found.src != a:
            rel = rel.inverse()
        if str(rel) in edge.labels:
            return True
    return False


def vertex_compatible(node: STNode, vertex: PatternVertex, anchor: Anchor) -> bool:
    if node.time != anchor[vertex.layer]:
        return False
    if vertex.class_label is not None and node.class_label != vertex.class_label:
        return False
    for pred in vertex.predicates:
        value = node.attrs.get(pred.attr)
        if value is None or not pred.test(value):
            return False
    return True


@dataclass
class MatchNetwork:
    pattern: Pattern
    anchor: Anchor
    vars: list[str]
    domains: dict[str, list[int]]
    constraints: list[SupportConstraint]
    alldiff: bool = True

    @property
    def inconsistent(self) -> bool:
        """True when some domain is empty, so no match can exist."""
        return any(not d for d in self.domains.values())


@dataclass
class MatchTree:
    """Consistent partial assignments explored by the search.

    ``nodes[i]`` is ``(parent_index, var, node_id)``; index 0 is the empty root.
    """

    nodes: list[tuple[int, str | None, int | None]] = field(default_factory=lambda: [(-1, None, None)])

    def add(self, parent: int, var: str, value: int) -> int:
        self.nodes.append((parent, var, value))
        return len(self.nodes) - 1

    def assignment(self, index: int) -> dict[str, int]:
        out = {}
        while index > 0:
            parent, var, value = self.nodes[index]
            out[var] = value
            index = parent
        return out

    def depth(self, index: int) -> int:
        d = 0
        while index > 0:
            index = self.nodes[index][0]
            d += 1
        return d


def anchors_for(stg: STGraph, pattern: Pattern) -> list[Anchor]:
    m = stg.layer_count
    if pattern.is_spatial:
        return [(t,) for t in range(m)]
    return [(t, t + 1) for t in range(m - 1)]


def normalize_anchor(stg: STGraph, pattern: Pattern, anchor) -> Anchor:
    if isinstance(anchor, int):
        anchor = (anchor,) if pattern.is_spatial else (anchor, anchor + 1)
    anchor = tuple(int(x) for x in anchor)
    if anchor not in anchors_for(stg, pattern):
        kind = "spatial" if pattern.is_spatial else "temporal"
        raise BadAnchor(f"anchor {anchor} invalid for {kind} pattern on {stg.layer_count} layers")
    return anchor


def modelize_csp(stg: STGraph, pattern: Pattern, anchor) -> MatchNetwork:
    """Variables, pre-filtered domains and support constraints for one anchor."""
    anchor = normalize_anchor(stg, pattern, anchor)
    domains = {}
    for v in pattern.vertices:
        layer_nodes = stg.nodes_at(anchor[v.layer])
        domains[v.name] = [n.node_id for n in layer_nodes if vertex_compatible(n, v, anchor)]
    constraints = [SupportConstraint(e.u, e.v, edge=e) for e in pattern.edges]
    constraints += [SupportConstraint(c.left, c.right, comparison=c) for c in pattern.comparisons]
    return MatchNetwork(pattern, anchor, pattern.var_names, domains, constraints)


def resolve_csp(network: MatchNetwork, stg: STGraph, max_matches: int | None = None,
                order: Sequence[str] | Callable[[MatchNetwork], Sequence[str]] | None = None,
                with_tree: bool = False):
    """All matches of the network, in search order.

    Each candidate value for the current variable passes three filters:
    vertex compatibility, support constraints towards already-bound
    variables, and injectivity. Failing candidates are dropped from the
    local domain copy; an empty local domain backtracks. ``order`` overrides
    the variable order (declaration order by default). With ``with_tree``
    the explored MatchTree is returned as well.
    """
    if callable(order):
        order = order(network)
    order = list(order) if order is not None else list(network.vars)
    if sorted(order) != sorted(network.vars):
        raise ValueError("variable order must be a permutation of the network variables")

    vertices = {v.name: v for v in network.pattern.vertices}
    position = {var: i for i, var in enumerate(order)}
    # constraints checked when their later variable (in search order) is bound
    backward: dict[str, list[SupportConstraint]] = {var: [] for var in order}
    for c in network.constraints:
        later = c.xi if position[c.xi] > position[c.xj] else c.xj
        backward[later].append(c)

    tree = MatchTree() if with_tree else None
    matches: list[Match] = []
    bound: dict[str, int] = {}
    used: set[int] = set()
    declared = network.vars

    def coherent(var: str, value: int) -> bool:
        if not vertex_compatible(stg.node(value), vertices[var], network.anchor):
            return False
        for c in backward[var]:
            a = value if c.xi == var else bound[c.xi]
            b = value if c.xj == var else bound[c.xj]
            if not c.check(stg, a, b):
                return False
        return not (network.alldiff and value in used)

    def search(depth: int, tree_index: int) -> bool:
        if depth == len(order):
            matches.append(Match(tuple((v, bound[v]) for v in declared)))
            return max_matches is not None and len(matches) >= max_matches
        var = order[depth]
        local = [value for value in network.domains[var] if coherent(var, value)]
        for value in local:
            bound[var] = value
            used.add(value)
            child = tree.add(tree_index, var, value) if tree is not None else 0
            stop = search(depth + 1, child)
            used.discard(value)
            del bound[var]
            if stop:
                return True
        return False

    search(0, 0)
    if with_tree:
        return matches, tree
    return matches


def brute_force_match(stg: STGraph, pattern: Pattern, anchor) -> list[Match]:
    """Enumerate every injective map over compatible nodes and keep the valid ones.

    Independent of :func:`resolve_csp`: edges are looked up in a fact set
    built from a full edge scan, not through the graph indexes.
    """
    anchor = normalize_anchor(stg, pattern, anchor)
    pools = []
    for v in pattern.vertices:
        pools.append([n.node_id for n in stg.nodes if vertex_compatible(n, v, anchor)])
    size = 1
    for pool in pools:
        size *= len(pool)
    if size > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{size} candidate maps exceed the brute-force limit")

    facts = set()
    for e in stg.edges:
        family = kind_name(e.kind)
        if isinstance(e.kind, Spatial):
            facts.add((e.src, e.dst, "spatial", str(e.kind.relation)))
            facts.add((e.dst, e.src, "spatial", str(e.kind.relation.inverse())))
        elif isinstance(e.kind, SpatioTemporal):
            facts.add((e.src, e.dst, "spatiotemporal", str(e.kind.relation)))
        elif isinstance(e.kind, Filiation):
            facts.add((e.src, e.dst, family, ""))
            facts.add((e.src, e.dst, "filiation", ""))
    pairs = {(a, b, fam) for a, b, fam, _ in facts}

    def edge_ok(e: PatternEdge, a: int, b: int) -> bool:
        if e.kind in ("spatial", "spatiotemporal") and e.labels:
            return any((a, b, e.kind, label) in facts for label in e.labels)
        return (a, b, e.kind) in pairs

    def comparison_ok(c: Comparison, a: int, b: int) -> bool:
        left, right = stg.node(a).attrs.get(c.attr), stg.node(b).attrs.get(c.attr)
        return left is not None and right is not None and OPS[c.op](left, right)

    names = pattern.var_names
    if any(not pool for pool in pools):
        return []
    if not pools:
        return [Match(())]
    # whole cartesian product at once, in itertools.product order; each
    # binary check becomes a lookup in a table over the two pools
    grids = np.meshgrid(*[np.arange(len(pool)) for pool in pools], indexing="ij")
    idx = np.stack([g.ravel() for g in grids], axis=1)
    values = [np.asarray(pool) for pool in pools]
    keep = np.ones(len(idx), dtype=bool)
    for i in range(len(pools)):
        for j in range(i + 1, len(pools)):
            keep &= values[i][idx[:, i]] != values[j][idx[:, j]]
    index = {name: i for i, name in enumerate(names)}
    checks = [(index[e.u], index[e.v], e, edge_ok) for e in pattern.edges]
    checks += [(index[c.left], index[c.right], c, comparison_ok) for c in pattern.comparisons]
    for i, j, item, test in checks:
        table = np.array([[test(item, a, b) for b in pools[j]] for a in pools[i]], dtype=bool)
        keep &= table[idx[:, i], idx[:, j]]
    out = []
    for row in idx[keep]:
        out.append(Match(tuple((name, pools[k][row[k]]) for k, name in enumerate(names))))
    return out


def match_all_anchors(stg: STGraph, pattern: Pattern, max_matches: int | None = None,
                      threads: int = 1) -> dict[Anchor, list[Match]]:
    """Matches at every layer (spatial) or consecutive layer pair (temporal)."""
    anchors = anchors_for(stg, pattern)

    def run(anchor: Anchor) -> list[Match]:
        return resolve_csp(modelize_csp(stg, pattern, anchor), stg, max_matches=max_matches)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, anchors))
    else:
        results = [run(a) for a in anchors]
    return dict(zip(anchors, results))
