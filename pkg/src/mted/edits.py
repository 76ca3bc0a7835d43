"""Edit operations on weighted trees, edit paths, and mappings.

A mapping certifies an edit path between two trees by listing coupled
edges, deleted edges and ghosted vertices on both sides.  Its cost equals
the cost of any edit path it parametrizes: deletions and insertions are
charged the weight of the edge, shrinks the absolute weight change, and
ghostings/splittings are free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .trees import (
    EQ_TOL,
    TreeStructure,
    WeightedTree,
    ghost_vertex,
    split_edge,
)


class CouplingOrderError(ValueError):
    """The couple set violates injectivity or the order isomorphism."""


@dataclass(frozen=True)
class Shrink:
    edge: int
    new_weight: float


@dataclass(frozen=True)
class Delete:
    edge: int


@dataclass(frozen=True)
class Insert:
    """Insert an edge below ``parent``, adopting a subset of its children."""

    parent: int
    adopt: tuple[int, ...]
    weight: float


@dataclass(frozen=True)
class Ghost:
    vertex: int


@dataclass(frozen=True)
class Split:
    edge: int
    lower_weight: float


Edit = Shrink | Delete | Insert | Ghost | Split


@dataclass(frozen=True)
class EditPath:
    """Ordered sequence of edits applied to a start tree.

    Vertex ids in each edit refer to the intermediate tree it applies to;
    removals compact ids (survivors keep their relative order) and
    insertions/splits append the next free id.
    """

    edits: tuple[Edit, ...]

    def __len__(self) -> int:
        return len(self.edits)


def apply_edit(tree: WeightedTree, edit: Edit) -> WeightedTree:
    """Apply one edit and return the resulting tree."""
    s = tree.structure
    if isinstance(edit, Shrink):
        if edit.edge == s.root or not (0 <= edit.edge < s.n_vertices):
            raise ValueError(f"invalid edge {edit.edge}")
        if edit.new_weight <= EQ_TOL:
            raise ValueError("shrink target weight must be positive")
        return tree.replace_weight(edit.edge, edit.new_weight)
    if isinstance(edit, Delete):
        v = edit.edge
        if v == s.root or not (0 <= v < s.n_vertices):
            raise ValueError(f"invalid edge {v}")
        parent = {u: s.parent[u] for u in s.vertices() if u != v}
        for c in s.children[v]:
            parent[c] = s.parent[v]
        weights = {u: tree.weights[u] for u in parent}
        return _compact(parent, weights)
    if isinstance(edit, Insert):
        if not (0 <= edit.parent < s.n_vertices):
            raise ValueError(f"invalid parent {edit.parent}")
        if edit.weight <= EQ_TOL:
            raise ValueError("inserted weight must be positive")
        kids = set(s.children[edit.parent])
        if not set(edit.adopt) <= kids:
            raise ValueError("can only adopt children of the insertion vertex")
        new = s.n_vertices
        parent_list = list(s.parent) + [edit.parent]
        for c in edit.adopt:
            parent_list[c] = new
        weights = list(tree.weights) + [edit.weight]
        return WeightedTree(TreeStructure(tuple(parent_list)), tuple(weights))
    if isinstance(edit, Ghost):
        return ghost_vertex(tree, edit.vertex)
    if isinstance(edit, Split):
        return split_edge(tree, edit.edge, edit.lower_weight)
    raise TypeError(f"unknown edit {edit!r}")


def _compact(parent: dict[int, Optional[int]], weights: dict[int, float]) -> WeightedTree:
    ids = sorted(parent)
    new_id = {old: i for i, old in enumerate(ids)}
    new_parent = tuple(
        new_id[parent[v]] if parent[v] is not None else None for v in ids
    )
    ww = tuple(weights[v] for v in ids)
    return WeightedTree(TreeStructure(new_parent), ww)


def edit_cost(edit: Edit, context: WeightedTree) -> float:
    """Cost of ``edit`` on the tree it applies to."""
    if isinstance(edit, Shrink):
        return abs(context.weights[edit.edge] - edit.new_weight)
    if isinstance(edit, Delete):
        return context.weights[edit.edge]
    if isinstance(edit, Insert):
        return edit.weight
    if isinstance(edit, (Ghost, Split)):
        return 0.0
    raise TypeError(f"unknown edit {edit!r}")


def apply_path(path: EditPath, start: WeightedTree) -> WeightedTree:
    tree = start
    for e in path.edits:
        tree = apply_edit(tree, e)
    return tree


def path_cost(path: EditPath, start: WeightedTree, order: float = 1.0) -> float:
    """Cost of an edit path: the sum of edit costs.

    ``order`` > 1 returns the p-norm of the cost vector instead; that
    variant exists only to demonstrate that it degenerates (splitting an
    edge drives the p-cost of removing it to zero), not as a metric.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    tree = start
    costs = []
    for e in path.edits:
        costs.append(edit_cost(e, tree))
        tree = apply_edit(tree, e)
    if order == 1:
        return float(sum(costs))
    return float(sum(c**order for c in costs) ** (1.0 / order))


# ---------------------------------------------------------------------------
# mappings


@dataclass(frozen=True)
class Mapping:
    """Couples, deletions and ghostings relating the edges of two trees."""

    couples: frozenset[tuple[int, int]]
    delete_left: frozenset[int] = frozenset()
    delete_right: frozenset[int] = frozenset()
    ghost_left: frozenset[int] = frozenset()
    ghost_right: frozenset[int] = frozenset()

    @staticmethod
    def build(couples: Iterable[tuple[int, int]], delete_left=(), delete_right=(),
              ghost_left=(), ghost_right=()) -> "Mapping":
        return Mapping(
            frozenset((a, b) for a, b in couples),
            frozenset(delete_left),
            frozenset(delete_right),
            frozenset(ghost_left),
            frozenset(ghost_right),
        )

    def transpose(self) -> "Mapping":
        return Mapping(
            frozenset((b, a) for a, b in self.couples),
            self.delete_right,
            self.delete_left,
            self.ghost_right,
            self.ghost_left,
        )

    def to_dict(self) -> dict:
        return {
            "couples": sorted([a, b] for a, b in self.couples),
            "delete_left": sorted(self.delete_left),
            "delete_right": sorted(self.delete_right),
            "ghost_left": sorted(self.ghost_left),
            "ghost_right": sorted(self.ghost_right),
        }

    @staticmethod
    def from_dict(d: dict) -> "Mapping":
        return Mapping.build(
            [tuple(c) for c in d["couples"]],
            d.get("delete_left", ()),
            d.get("delete_right", ()),
            d.get("ghost_left", ()),
            d.get("ghost_right", ()),
        )


def _relation(s: TreeStructure, a: int, b: int) -> int:
    """-1 if a below b, +1 if a above b, 0 if incomparable (a != b)."""
    if s.is_strict_ancestor(b, a):
        return -1
    if s.is_strict_ancestor(a, b):
        return 1
    return 0


def check_couples(left: TreeStructure, right: TreeStructure,
                  couples: Iterable[tuple[int, int]]) -> Optional[str]:
    """First M2/M3 violation among the couples, or None."""
    pairs = list(couples)
    seen_a, seen_b = set(), set()
    for a, b in pairs:
        if a == left.root or b == right.root:
            return f"couple ({a},{b}) uses a root"
        if a in seen_a or b in seen_b:
            return f"couple ({a},{b}) breaks injectivity (M2)"
        seen_a.add(a)
        seen_b.add(b)
    for i, (a, b) in enumerate(pairs):
        for c, d in pairs[:i]:
            if _relation(left, a, c) != _relation(right, b, d):
                return f"couples ({a},{b}) and ({c},{d}) break the order (M3)"
    return None


def validate_mapping(left: WeightedTree, right: WeightedTree, m: Mapping) -> list[str]:
    """All violated mapping axioms, with witnesses; empty when valid."""
    violations: list[str] = []
    ls, rs = left.structure, right.structure
    coupled_l = {a for a, _ in m.couples}
    coupled_r = {b for _, b in m.couples}

    for name, s, coupled, deleted, ghosted in (
        ("left", ls, coupled_l, m.delete_left, m.ghost_left),
        ("right", rs, coupled_r, m.delete_right, m.ghost_right),
    ):
        edges = set(s.edges())
        used = [coupled, deleted, ghosted]
        for v in edges:
            hits = sum(v in group for group in used)
            if hits == 0:
                violations.append(f"M1: {name} edge {v} unreached")
            elif hits > 1:
                violations.append(f"M2: {name} edge {v} edited more than once")
        for group in used:
            for v in group:
                if v not in edges:
                    violations.append(f"{name} entry {v} is not an edge")

    err = check_couples(ls, rs, m.couples)
    if err:
        violations.append(err)

    violations.extend(_check_ghostings(ls, coupled_l, m.delete_left, m.ghost_left, "left"))
    violations.extend(_check_ghostings(rs, coupled_r, m.delete_right, m.ghost_right, "right"))
    return violations


def _check_ghostings(s: TreeStructure, coupled: set[int], deleted: frozenset[int],
                     ghosted: frozenset[int], name: str) -> list[str]:
    """M4: each ghosted vertex is order 2 after the deletions, with a unique
    maximal coupled vertex below it."""
    out = []
    for v in ghosted:
        surviving = [
            c
            for c in s.children[v]
            if not all(x in deleted for x in s.subtree_vertices(c))
        ]
        if len(surviving) != 1:
            out.append(
                f"M4: {name} ghost {v} has {len(surviving)} surviving branches"
            )
            continue
        below = [x for x in s.subtree_vertices(surviving[0]) if x in coupled]
        maximal = [
            x
            for x in below
            if not any(y != x and s.is_strict_ancestor(y, x) for y in below)
        ]
        if len(maximal) != 1:
            out.append(
                f"M4: {name} ghost {v} has {len(maximal)} maximal coupled "
                "vertices below"
            )
    return out


def _nearest_surviving_ancestor(s: TreeStructure, deleted: frozenset[int], v: int):
    u = s.parent[v]
    while u is not None and u in deleted:
        u = s.parent[u]
    return u


def chain_weight(tree: WeightedTree, deleted: frozenset[int],
                 ghosted: frozenset[int], v: int) -> float:
    """Weight of the maximal merged edge whose bottom is the coupled vertex
    ``v`` once deletions and ghostings are applied."""
    s = tree.structure
    total = tree.weights[v]
    u = _nearest_surviving_ancestor(s, deleted, v)
    while u is not None and u in ghosted:
        total += tree.weights[u]
        u = _nearest_surviving_ancestor(s, deleted, u)
    return total


def mapping_cost(left: WeightedTree, right: WeightedTree, m: Mapping,
                 check: bool = True) -> float:
    """Cost of the edit paths parametrized by ``m``."""
    if check:
        violations = validate_mapping(left, right, m)
        if violations:
            raise ValueError("invalid mapping: " + "; ".join(violations))
    cost = sum(left.weights[v] for v in m.delete_left)
    cost += sum(right.weights[v] for v in m.delete_right)
    for a, b in m.couples:
        wa = chain_weight(left, m.delete_left, m.ghost_left, a)
        wb = chain_weight(right, m.delete_right, m.ghost_right, b)
        cost += abs(wa - wb)
    return cost


def complete_side(s: TreeStructure, coupled: set[int]):
    """Deletions and ghostings induced on one tree by its coupled vertices,
    with maximal ghostings and minimal deletions.

    Bottom-up, an uncoupled vertex is ghosted when exactly one branch below
    it survives the deletions, and deleted otherwise.
    """
    deleted: set[int] = set()
    ghosted: set[int] = set()
    alive: dict[int, int] = {}
    for v in reversed(s.topological_order()):
        k = sum(alive[c] for c in s.children[v])
        if v == s.root:
            continue
        if v in coupled:
            alive[v] = 1
        elif k == 1:
            ghosted.add(v)
            alive[v] = 1
        else:
            deleted.add(v)
            alive[v] = k
    return frozenset(deleted), frozenset(ghosted)


def is_m2(left: WeightedTree, right: WeightedTree, m: Mapping) -> bool:
    """Whether ``m`` has maximal ghostings and minimal deletions, i.e. is
    the unique completion of its own couple set."""
    dl, gl = complete_side(left.structure, {a for a, _ in m.couples})
    dr, gr = complete_side(right.structure, {b for _, b in m.couples})
    return (
        m.delete_left == dl
        and m.ghost_left == gl
        and m.delete_right == dr
        and m.ghost_right == gr
    )


def mapping_from_coupling(left: WeightedTree, right: WeightedTree,
                          couples: Iterable[tuple[int, int]]) -> Optional[Mapping]:
    """The unique maximal-ghostings / minimal-deletions completion of a
    couple set, or None when the completion breaks an axiom.

    Raises :class:`CouplingOrderError` when the couples themselves violate
    injectivity or the order isomorphism.
    """
    pairs = frozenset((a, b) for a, b in couples)
    err = check_couples(left.structure, right.structure, pairs)
    if err:
        raise CouplingOrderError(err)
    dl, gl = complete_side(left.structure, {a for a, _ in pairs})
    dr, gr = complete_side(right.structure, {b for _, b in pairs})
    m = Mapping(pairs, dl, dr, gl, gr)
    if validate_mapping(left, right, m):
        return None
    return m


def realize_path(left: WeightedTree, right: WeightedTree, m: Mapping,
                 check: bool = True) -> EditPath:
    """An edit path realizing ``m``: deletions, ghostings, shrinks, then
    splittings and insertions rebuilding the right tree exactly."""
    if check:
        violations = validate_mapping(left, right, m)
        if violations:
            raise ValueError("invalid mapping: " + "; ".join(violations))
    ls, rs = left.structure, right.structure
    edits: list[Edit] = []
    # current id of each surviving left vertex, updated as removals compact
    cur = {v: v for v in ls.vertices()}

    def remove(v_cur: int):
        for k in list(cur):
            if cur[k] is None:
                continue
            if cur[k] > v_cur:
                cur[k] -= 1
            elif cur[k] == v_cur:
                cur[k] = None

    for v in sorted(m.delete_left, key=lambda v: -ls.depth[v]):
        edits.append(Delete(cur[v]))
        remove(cur[v])
    for v in sorted(m.ghost_left, key=lambda v: -ls.depth[v]):
        edits.append(Ghost(cur[v]))
        remove(cur[v])

    partner = {b: a for a, b in m.couples}
    for b in sorted(partner):
        a = partner[b]
        target = chain_weight(right, m.delete_right, m.ghost_right, b)
        edits.append(Shrink(cur[a], target))

    # rebuild the right tree's ghosted chains by splitting the coupled edges
    # bottom-up: each split pins the weight of one chain member, the final
    # remainder is the top member
    n_now = ls.n_vertices - len(m.delete_left) - len(m.ghost_left)
    rcur: dict[int, int] = {rs.root: cur[ls.root]}
    for b in sorted(partner):
        rcur[b] = cur[partner[b]]
    for b in sorted(partner):
        chain = _chain_above(rs, m.delete_right, m.ghost_right, b)
        if not chain:
            continue
        edits.append(Split(rcur[b], right.weights[b]))
        remainder = n_now
        n_now += 1
        for u in chain[:-1]:
            edits.append(Split(remainder, right.weights[u]))
            rcur[u] = remainder
            remainder = n_now
            n_now += 1
        rcur[chain[-1]] = remainder

    # reinsert right deletions top-down
    alive_r = set(rcur)
    for x in sorted(m.delete_right, key=lambda v: rs.depth[v]):
        fx = _nearest_alive_ancestor(rs, alive_r, x)
        adopt = tuple(
            sorted(
                rcur[y]
                for y in alive_r
                if _first_alive_strict_ancestor(rs, alive_r | {x}, y) == x
            )
        )
        edits.append(Insert(rcur[fx], adopt, right.weights[x]))
        rcur[x] = n_now
        alive_r.add(x)
        n_now += 1
    return EditPath(tuple(edits))


def _chain_above(s: TreeStructure, deleted: frozenset[int], ghosted: frozenset[int],
                 b: int) -> list[int]:
    """Ghosted vertices merged above the coupled vertex ``b``, bottom-up."""
    chain = []
    u = _nearest_surviving_ancestor(s, deleted, b)
    while u is not None and u in ghosted:
        chain.append(u)
        u = _nearest_surviving_ancestor(s, deleted, u)
    return chain


def _nearest_alive_ancestor(s: TreeStructure, alive: set[int], v: int) -> int:
    u = s.parent[v]
    while u is not None and u not in alive:
        u = s.parent[u]
    if u is None:
        raise AssertionError("walked past the root")
    return u


def _first_alive_strict_ancestor(s: TreeStructure, alive: set[int], v: int):
    u = s.parent[v]
    while u is not None and u not in alive:
        u = s.parent[u]
    return u
