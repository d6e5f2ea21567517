"""Complex-object identification as a (dynamic) CSP.

Variables are template parts, domains are the region ids of a snapshot, and
constraints come from the template: a class per part, attribute predicates,
pairwise spatial relations, and pairwise distinctness (injectivity).

The first snapshot is solved from scratch with :func:`solve_static`. Each
later snapshot is turned into a :class:`Delta` and re-solved by
:func:`dyn_solve`, which starts from the previous complete assignment,
re-checks only the constraints the delta may have broken, and repairs
violations with recorded nogoods::

    (X1 = v1) and ... and (Xk = vk)  =>  X != v

Parts are ordered by name. A nogood always puts the last part of its scope
on the right-hand side, so its left-hand side only mentions earlier parts.
When every value of a part is forbidden, the nogoods responsible are
resolved into a new one aimed at the latest part they mention; an empty
resolvent proves the problem unsatisfiable.
"""

from __future__ import annotations

import logging
import operator
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .relations import Near, Region, RelationLabel, Snapshot, holds, relation

logger = logging.getLogger(__name__)

OPS = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
    "==": operator.eq,
    "!=": operator.ne,
}


@dataclass(frozen=True)
class AttrPredicate:
    attr: str
    op: str
    value: float

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"unknown comparison {self.op!r}")

    def __str__(self):
        return f"{self.attr}{self.op}{self.value:g}"

    def test(self, x: float) -> bool:
        return OPS[self.op](x, self.value)


@dataclass(frozen=True)
class PartVar:
    name: str
    class_label: str | None = None
    predicates: tuple[AttrPredicate, ...] = ()


@dataclass(frozen=True)
class RelationRule:
    """``part_a`` must stand in one of ``allowed`` to ``part_b``."""

    part_a: str
    part_b: str
    allowed: frozenset[RelationLabel]


@dataclass
class ObjectTemplate:
    name: str
    parts: list[PartVar]
    relations: list[RelationRule] = field(default_factory=list)

    def __post_init__(self):
        names = [p.name for p in self.parts]
        if len(set(names)) != len(names):
            raise ValueError(f"template {self.name!r}: duplicate part names")
        for rule in self.relations:
            for p in (rule.part_a, rule.part_b):
                if p not in names:
                    raise ValueError(f"template {self.name!r}: relation names unknown part {p!r}")
            if rule.part_a == rule.part_b:
                raise ValueError(f"template {self.name!r}: relation of {rule.part_a!r} with itself")

    @property
    def part_names(self) -> list[str]:
        return [p.name for p in self.parts]


@dataclass(frozen=True)
class Constraint:
    """One crisp constraint of the identification CSP.

    ``kind`` is ``class``, ``attr``, ``relation`` or ``diff``; ``arg`` holds
    the class label, the AttrPredicate, or the allowed label set.
    """

    cid: str
    kind: str
    scope: tuple[str, ...]
    arg: object = None

    def check(self, assignment: dict[str, int], regions: dict[int, Region]) -> bool:
        if self.kind == "diff":
            a, b = self.scope
            return assignment[a] != assignment[b]
        found = [regions.get(assignment[p]) for p in self.scope]
        if any(r is None for r in found):
            return False
        if self.kind == "class":
            return found[0].class_label == self.arg
        if self.kind == "attr":
            try:
                return self.arg.test(found[0].attribute(self.arg.attr))
            except KeyError:
                return False
        if self.kind == "relation":
            return any(holds(label, found[0], found[1]) for label in self.arg)
        raise ValueError(f"unknown constraint kind {self.kind!r}")


def relation_constraint(part_a: str, part_b: str, allowed: Iterable[RelationLabel]) -> Constraint:
    allowed = frozenset(allowed)
    tag = "|".join(sorted(str(x) for x in allowed))
    return Constraint(f"rel:{part_a}:{part_b}:{tag}", "relation", (part_a, part_b), allowed)


def template_constraints(template: ObjectTemplate) -> list[Constraint]:
    out = []
    for p in template.parts:
        if p.class_label is not None:
            out.append(Constraint(f"class:{p.name}", "class", (p.name,), p.class_label))
        for pred in p.predicates:
            out.append(Constraint(f"attr:{p.name}:{pred}", "attr", (p.name,), pred))
    for rule in template.relations:
        out.append(relation_constraint(rule.part_a, rule.part_b, rule.allowed))
    for a, b in combinations(template.part_names, 2):
        out.append(Constraint(f"diff:{a}:{b}", "diff", (a, b)))
    return out


def is_solution(assignment: dict[str, int], constraints: Iterable[Constraint],
                regions: dict[int, Region]) -> bool:
    return all(c.check(assignment, regions) for c in constraints)


# -- static solving -----------------------------------------------------


def _backtrack(parts: Sequence[str], constraints: Sequence[Constraint],
               regions: dict[int, Region]) -> dict[str, int] | None:
    """Chronological backtracking with forward checking, values ascending."""
    unary: dict[str, list[Constraint]] = {p: [] for p in parts}
    binary: dict[str, list[Constraint]] = {p: [] for p in parts}
    for c in constraints:
        if len(c.scope) == 1:
            unary[c.scope[0]].append(c)
        else:
            for p in c.scope:
                binary[p].append(c)

    domains = {}
    for p in parts:
        domains[p] = [rid for rid in sorted(regions)
                      if all(c.check({p: rid}, regions) for c in unary[p])]
        if not domains[p]:
            return None

    assignment: dict[str, int] = {}

    def extend(i: int, doms: dict[str, list[int]]) -> bool:
        if i == len(parts):
            return True
        var = parts[i]
        for value in doms[var]:
            assignment[var] = value
            pruned = dict(doms)
            ok = True
            for c in binary[var]:
                other = c.scope[1] if c.scope[0] == var else c.scope[0]
                if other in assignment:
                    continue
                trial = dict(assignment)
                kept = []
                for w in pruned[other]:
                    trial[other] = w
                    if c.check(trial, regions):
                        kept.append(w)
                pruned[other] = kept
                if not kept:
                    ok = False
                    break
            if ok and extend(i + 1, pruned):
                return True
            del assignment[var]
        return False

    if extend(0, domains):
        return dict(assignment)
    return None


def solve_static(template: ObjectTemplate, snapshot: Snapshot,
                 constraints: Sequence[Constraint] | None = None) -> dict[str, int] | None:
    """First assignment satisfying every constraint, or None when unsatisfiable.

    ``constraints`` overrides the template-derived set (used to solve an
    updated problem from scratch).
    """
    if constraints is None:
        constraints = template_constraints(template)
    return _backtrack(template.part_names, list(constraints), snapshot.region_map())


# -- nogoods ------------------------------------------------------------


@dataclass(frozen=True)
class Nogood:
    """``lhs`` pairs jointly forbid ``rhs_part = rhs_forbidden``.

    ``justification`` lists the constraint ids the nogood was derived from;
    ``resolved`` marks nogoods obtained by resolution, which also depend on
    the domain they were derived under.
    """

    lhs: tuple[tuple[str, int], ...]
    rhs_part: str
    rhs_forbidden: int
    justification: tuple[str, ...]
    resolved: bool = False

    def __post_init__(self):
        if any(p == self.rhs_part for p, _ in self.lhs):
            raise ValueError(f"nogood rhs part {self.rhs_part!r} also appears in lhs")

    def matches(self, assignment: dict[str, int]) -> bool:
        return all(assignment.get(p) == v for p, v in self.lhs)

    def excludes(self, assignment: dict[str, int]) -> bool:
        """True iff this nogood rules out the complete ``assignment``."""
        return assignment.get(self.rhs_part) == self.rhs_forbidden and self.matches(assignment)

    def __str__(self):
        lhs = " & ".join(f"{p}={v}" for p, v in self.lhs) or "true"
        return f"{lhs} => {self.rhs_part}!={self.rhs_forbidden}"


def create_nogood(constraint: Constraint, assignment: dict[str, int]) -> Nogood:
    """Nogood for a constraint violated under ``assignment``.

    The conflict variable is the lexicographically last part in scope.
    """
    rhs = max(constraint.scope)
    lhs = tuple(sorted((p, assignment[p]) for p in constraint.scope if p != rhs))
    return Nogood(lhs, rhs, assignment[rhs], (constraint.cid,))


# -- dynamic solving ----------------------------------------------------


@dataclass
class Delta:
    """Difference between the problem of one snapshot and the next."""

    snapshot: Snapshot
    removed_regions: list[int] = field(default_factory=list)
    added_regions: list[int] = field(default_factory=list)
    modified_regions: list[int] = field(default_factory=list)
    relation_changes: list[tuple[int, int, RelationLabel, RelationLabel]] = field(default_factory=list)
    added_constraints: list[Constraint] = field(default_factory=list)
    removed_constraints: list[str] = field(default_factory=list)

    def is_empty(self) -> bool:
        return not (self.removed_regions or self.added_regions or self.modified_regions
                    or self.relation_changes or self.added_constraints
                    or self.removed_constraints)


@dataclass
class DynCspState:
    template: ObjectTemplate
    regions: dict[int, Region]
    assignment: dict[str, int]
    constraints: dict[str, Constraint]
    nogoods: list[Nogood] = field(default_factory=list)
    pending: list[str] = field(default_factory=list)
    verified: set[str] = field(default_factory=set)
    unsat: bool = False
    reassignments: int = 0
    # nogoods added during the most recent dyn_solve call
    recorded: list[Nogood] = field(default_factory=list)
    _nogood_index: set[Nogood] = field(default_factory=set, repr=False)

    @property
    def parts(self) -> list[str]:
        return sorted(self.template.part_names)

    def domain(self, part: str) -> list[int]:
        return sorted(self.regions)

    def active_constraints(self) -> list[Constraint]:
        return [self.constraints[k] for k in sorted(self.constraints)]

    def add_nogood(self, ng: Nogood) -> bool:
        if ng in self._nogood_index:
            return False
        self._nogood_index.add(ng)
        self.nogoods.append(ng)
        self.recorded.append(ng)
        return True

    def _set_nogoods(self, kept: list[Nogood]) -> None:
        self.nogoods = list(kept)
        self._nogood_index = set(kept)

    def blockers(self, part: str, value: int) -> list[Nogood]:
        """Live nogoods that forbid ``part = value`` under the current assignment."""
        return [ng for ng in self.nogoods
                if ng.rhs_part == part and ng.rhs_forbidden == value
                and ng.matches(self.assignment)]

    def forbidden(self, part: str, value: int) -> bool:
        return any(ng.rhs_part == part and ng.rhs_forbidden == value
                   and ng.matches(self.assignment) for ng in self.nogoods)

    def stale(self, part: str) -> bool:
        value = self.assignment.get(part)
        return value not in self.regions or self.forbidden(part, value)

    def assign(self, part: str, value: int) -> None:
        if self.assignment.get(part) == value:
            return
        self.assignment[part] = value
        self.reassignments += 1
        for cid, c in self.constraints.items():
            if part in c.scope and cid in self.verified:
                self.verified.discard(cid)
                self.pending.append(cid)


def init_state(template: ObjectTemplate, snapshot: Snapshot,
               assignment: dict[str, int] | None = None) -> DynCspState | None:
    """State for the first snapshot; solves it statically unless given a solution.

    Returns None when the first snapshot is unsatisfiable.
    """
    if assignment is None:
        assignment = solve_static(template, snapshot)
        if assignment is None:
            return None
    constraints = {c.cid: c for c in template_constraints(template)}
    regions = snapshot.region_map()
    if not is_solution(assignment, constraints.values(), regions):
        raise ValueError("initial assignment violates the template")
    return DynCspState(template, regions, dict(assignment), constraints,
                       verified=set(constraints))


def delta_from_snapshot(state: DynCspState, next_snapshot: Snapshot) -> Delta:
    """Domain and relation-fact changes between the state's regions and ``next_snapshot``."""
    old = state.regions
    new = next_snapshot.region_map()
    removed = sorted(set(old) - set(new))
    added = sorted(set(new) - set(old))
    modified = sorted(rid for rid in set(old) & set(new) if old[rid] != new[rid])
    changes = []
    survivors = sorted(set(old) & set(new))
    mod = set(modified)
    for i, a in enumerate(survivors):
        for b in survivors[i + 1:]:
            if a not in mod and b not in mod:
                continue
            before = relation(old[a], old[b])
            after = relation(new[a], new[b])
            if before is not after:
                changes.append((a, b, before, after))
    return Delta(next_snapshot, removed, added, modified, changes)


def _apply_delta(state: DynCspState, delta: Delta) -> None:
    for cid in delta.removed_constraints:
        state.constraints.pop(cid, None)
        state.verified.discard(cid)
    state.pending = [cid for cid in state.pending if cid in state.constraints]
    for c in delta.added_constraints:
        state.constraints[c.cid] = c
        state.verified.discard(c.cid)
        if c.cid not in state.pending:
            state.pending.append(c.cid)

    state.regions = delta.snapshot.region_map()
    touched = set(delta.removed_regions) | set(delta.modified_regions)
    for a, b, _, _ in delta.relation_changes:
        touched.update((a, b))
    for cid in sorted(state.verified):
        c = state.constraints[cid]
        if c.kind != "diff" and any(state.assignment[p] in touched for p in c.scope):
            state.verified.discard(cid)
            state.pending.append(cid)

    if delta.is_empty():
        return
    # resolvents depend on the old domains; single-constraint nogoods survive
    # only while their constraint is active and still violated by their tuple
    kept = []
    for ng in state.nogoods:
        if ng.resolved:
            continue
        c = state.constraints.get(ng.justification[0])
        if c is None:
            continue
        tup = dict(ng.lhs)
        tup[ng.rhs_part] = ng.rhs_forbidden
        if any(v not in state.regions for v in tup.values()) and c.kind != "diff":
            continue
        if not c.check(tup, state.regions):
            kept.append(ng)
    state._set_nogoods(kept)


def _resolve(state: DynCspState, part: str) -> Nogood | None:
    """Resolvent for ``part`` whose every value is forbidden; None if it is empty."""
    context: dict[str, int] = {}
    reasons: set[str] = set()
    for value in state.domain(part):
        ng = state.blockers(part, value)[0]
        context.update(ng.lhs)
        reasons.update(ng.justification)
    if not context:
        return None
    culprit = max(context)
    lhs = tuple(sorted((p, v) for p, v in context.items() if p != culprit))
    return Nogood(lhs, culprit, context[culprit], tuple(sorted(reasons)), resolved=True)


def _first_allowed(state: DynCspState, part: str) -> int | None:
    for value in state.domain(part):
        if not state.forbidden(part, value):
            return value
    return None


def _settle(state: DynCspState, below: str | None = None, depth: int = 0) -> bool:
    """Repair every stale part (ascending), optionally only parts before ``below``."""
    for p in state.parts:
        if below is not None and p >= below:
            break
        if state.stale(p) and not repair_sol(state, p, depth):
            return False
    return True


def repair_sol(state: DynCspState, part: str, depth: int = 0) -> bool:
    """Give ``part`` its first value not forbidden by a live nogood.

    When every value is forbidden, the blocking nogoods are resolved into a
    new nogood on an earlier part, which is repaired recursively. Returns
    False (and sets ``state.unsat``) when the resolvent is empty.
    """
    if depth > len(state.parts):
        # unreachable while lhs parts precede rhs parts; kept as a hard stop
        state.unsat = True
        return False
    while True:
        value = _first_allowed(state, part)
        if value is not None:
            state.assign(part, value)
            return True
        if not _settle(state, below=part, depth=depth + 1):
            return False
        value = _first_allowed(state, part)
        if value is not None:
            state.assign(part, value)
            return True
        resolvent = _resolve(state, part)
        if resolvent is None:
            state.unsat = True
            return False
        state.add_nogood(resolvent)
        logger.debug("resolved %s", resolvent)
        if not repair_sol(state, resolvent.rhs_part, depth + 1):
            return False


def dyn_solve(state: DynCspState, delta: Delta | None = None) -> dict[str, int] | None:
    """Re-solve after ``delta`` starting from the state's current assignment.

    Pending constraints are checked one at a time: satisfied ones move to
    the verified set, violated ones produce a nogood and a repair of the
    conflict variable. Returns the new assignment, or None when unsatisfiable.
    """
    state.recorded = []
    state.unsat = False
    if delta is not None:
        _apply_delta(state, delta)
    while not state.unsat:
        if not _settle(state):
            break
        if not state.pending:
            break
        cid = state.pending.pop(0)
        c = state.constraints[cid]
        if c.check(state.assignment, state.regions):
            state.verified.add(cid)
            continue
        ng = create_nogood(c, state.assignment)
        state.add_nogood(ng)
        logger.debug("violated %s -> %s", cid, ng)
        state.pending.append(cid)
        if not repair_sol(state, ng.rhs_part):
            break
    if state.unsat:
        return None
    return dict(state.assignment)
