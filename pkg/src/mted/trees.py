"""Rooted tree value types: tree structures, merge trees, weighted trees.

Vertices are dense integers ``0..n-1``.  An edge is identified with its lower
vertex, so the edge set is exactly the set of non-root vertices.  All types
are immutable; every operation returns a new value.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

#: Absolute tolerance under which two weights/heights are considered equal.
EQ_TOL = 1e-9


def close(a: float, b: float, tol: float = EQ_TOL) -> bool:
    return abs(a - b) <= tol


@dataclass(frozen=True)
class TreeStructure:
    """Connected rooted acyclic graph encoded by a parent table.

    ``parent[v]`` is the father of ``v``, or ``None`` for the root.
    """

    parent: tuple[Optional[int], ...]

    def __post_init__(self):
        n = len(self.parent)
        roots = [v for v, p in enumerate(self.parent) if p is None]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        for v, p in enumerate(self.parent):
            if p is not None and not (0 <= p < n and p != v):
                raise ValueError(f"vertex {v} has invalid parent {p}")

    @property
    def n_vertices(self) -> int:
        return len(self.parent)

    @cached_property
    def root(self) -> int:
        return next(v for v, p in enumerate(self.parent) if p is None)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in self.vertices() if not self.children[v])

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * self.n_vertices
        for v in self.topological_order():
            p = self.parent[v]
            if p is not None:
                d[v] = d[p] + 1
        return tuple(d)

    def vertices(self) -> range:
        return range(self.n_vertices)

    def edges(self) -> tuple[int, ...]:
        """Edges as their lower vertices (every vertex except the root)."""
        return tuple(v for v in self.vertices() if v != self.root)

    @property
    def dim(self) -> int:
        """Number of edges."""
        return self.n_vertices - 1

    def order(self, v: int) -> int:
        """Number of edges incident to ``v`` within the stored tree."""
        deg = len(self.children[v])
        if self.parent[v] is not None:
            deg += 1
        return deg

    def topological_order(self) -> tuple[int, ...]:
        """Vertices parents-first (pre-order)."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(self.children[v])
        return tuple(out)

    def subtree_vertices(self, v: int) -> tuple[int, ...]:
        out: list[int] = []
        stack = [v]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(self.children[u])
        return tuple(out)

    def is_strict_ancestor(self, a: int, v: int) -> bool:
        """True iff ``a`` lies strictly above ``v`` on its path to the root."""
        u = self.parent[v]
        while u is not None:
            if u == a:
                return True
            u = self.parent[u]
        return False

    def has_cycle_or_disconnect(self) -> bool:
        seen = set(self.topological_order())
        return len(seen) != self.n_vertices


@dataclass(frozen=True)
class WeightedTree:
    """Tree structure with strictly positive weights on its edges.

    ``weights[v]`` is the weight of the edge between ``v`` and its father;
    the root slot is unused and kept at 0.
    """

    structure: TreeStructure
    weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.weights) != self.structure.n_vertices:
            raise ValueError("weights length must match vertex count")

    @property
    def root(self) -> int:
        return self.structure.root

    @property
    def dim(self) -> int:
        return self.structure.dim

    def weight(self, v: int) -> float:
        return self.weights[v]

    def replace_weight(self, v: int, w: float) -> "WeightedTree":
        ww = list(self.weights)
        ww[v] = w
        return WeightedTree(self.structure, tuple(ww))


@dataclass(frozen=True)
class MergeTree:
    """Tree structure with finite heights, monotone along parent chains.

    The infinite root of the underlying merge tree is implicit: only finite
    vertices are stored and the stored root is the highest vertex.
    """

    structure: TreeStructure
    heights: tuple[float, ...]

    def __post_init__(self):
        if len(self.heights) != self.structure.n_vertices:
            raise ValueError("heights length must match vertex count")

    @property
    def root(self) -> int:
        return self.structure.root

    @property
    def max_height(self) -> float:
        return self.heights[self.structure.root]

    def height(self, v: int) -> float:
        return self.heights[v]


Tree = WeightedTree | MergeTree


# ---------------------------------------------------------------------------
# construction helpers


def weighted_tree(parent: Sequence[Optional[int]], weights) -> WeightedTree:
    """Build a weighted tree from a parent table and an edge-weight table.

    ``weights`` may be a sequence aligned with ``parent`` (root slot ignored)
    or a mapping ``vertex -> weight`` for non-root vertices.
    """
    structure = TreeStructure(tuple(parent))
    ww = [0.0] * structure.n_vertices
    if isinstance(weights, dict):
        items = weights.items()
    else:
        items = ((v, w) for v, w in enumerate(weights) if v != structure.root)
    for v, w in items:
        ww[v] = float(w)
    ww[structure.root] = 0.0
    return WeightedTree(structure, tuple(ww))


def merge_tree(parent: Sequence[Optional[int]], heights: Sequence[float]) -> MergeTree:
    return MergeTree(TreeStructure(tuple(parent)), tuple(float(h) for h in heights))


def single_vertex_tree() -> WeightedTree:
    """The tree ``*`` with one vertex and no edges."""
    return WeightedTree(TreeStructure((None,)), (0.0,))


# ---------------------------------------------------------------------------
# validation


def validate(tree: Tree) -> list[str]:
    """All invariant violations of ``tree``; empty when the tree is valid."""
    violations: list[str] = []
    s = tree.structure
    if s.has_cycle_or_disconnect():
        violations.append("structure has a cycle or is disconnected")
        return violations
    if isinstance(tree, WeightedTree):
        for v in s.edges():
            if tree.weights[v] <= EQ_TOL:
                violations.append(f"non-positive weight {tree.weights[v]!r} on edge {v}")
    else:
        for v in s.edges():
            p = s.parent[v]
            if tree.heights[v] >= tree.heights[p] - EQ_TOL:
                violations.append(
                    f"non-monotone heights: h({v})={tree.heights[v]!r} "
                    f">= h({p})={tree.heights[p]!r}"
                )
    return violations


# ---------------------------------------------------------------------------
# order-2 calculus


def _rebuild(parent: dict[int, Optional[int]], payload: dict[int, float]):
    """Compact arbitrary ids to dense 0..n-1, preserving relative order."""
    ids = sorted(parent)
    new_id = {old: i for i, old in enumerate(ids)}
    new_parent = tuple(new_id[parent[v]] if parent[v] is not None else None for v in ids)
    new_payload = tuple(payload[v] for v in ids)
    return new_parent, new_payload, new_id


def ghost_vertex(tree: WeightedTree, v: int) -> WeightedTree:
    """Remove the order-2 vertex ``v``, merging its two edges.

    The merged edge carries the sum of the two weights, so the total weight
    of the tree is unchanged.
    """
    s = tree.structure
    if v == s.root:
        raise ValueError("cannot ghost the root")
    if len(s.children[v]) != 1:
        raise ValueError(f"vertex {v} is not of order 2")
    child = s.children[v][0]
    parent = {u: s.parent[u] for u in s.vertices() if u != v}
    parent[child] = s.parent[v]
    weights = {u: tree.weights[u] for u in parent}
    weights[child] = tree.weights[child] + tree.weights[v]
    new_parent, new_weights, _ = _rebuild(parent, weights)
    return WeightedTree(TreeStructure(new_parent), new_weights)


def split_edge(tree: WeightedTree, e: int, lower_weight: float) -> WeightedTree:
    """Insert an order-2 vertex on edge ``e``; inverse of :func:`ghost_vertex`.

    ``lower_weight`` becomes the weight of the lower of the two new edges and
    must lie strictly inside ``(0, w(e))``.
    """
    s = tree.structure
    if e == s.root:
        raise ValueError("the root identifies no edge")
    w = tree.weights[e]
    if not (EQ_TOL < lower_weight < w - EQ_TOL):
        raise ValueError(f"lower_weight {lower_weight!r} outside (0, {w!r})")
    new = s.n_vertices
    parent = list(tree.structure.parent) + [s.parent[e]]
    parent[e] = new
    weights = list(tree.weights) + [w - lower_weight]
    weights[e] = lower_weight
    return WeightedTree(TreeStructure(tuple(parent)), tuple(weights))


def _ghost_merge_vertex(tree: MergeTree, v: int) -> MergeTree:
    s = tree.structure
    child = s.children[v][0]
    parent = {u: s.parent[u] for u in s.vertices() if u != v}
    parent[child] = s.parent[v]
    heights = {u: tree.heights[u] for u in parent}
    new_parent, new_heights, _ = _rebuild(parent, heights)
    return MergeTree(TreeStructure(new_parent), new_heights)


def canonical_form(tree: Tree) -> Tree:
    """The representative of ``tree`` without order-2 vertices.

    For merge trees every stored vertex with a single child is removable,
    the top vertex included: its parent is the implicit infinite root, so a
    single child makes it order 2 in the full tree.
    """
    current = tree
    while True:
        s = current.structure
        if isinstance(current, WeightedTree):
            target = next(
                (v for v in s.vertices() if v != s.root and len(s.children[v]) == 1),
                None,
            )
            if target is None:
                return current
            current = ghost_vertex(current, target)
        else:
            target = next(
                (v for v in s.vertices() if len(s.children[v]) == 1),
                None,
            )
            if target is None:
                return current
            if target == s.root:
                # dropping a single-child top vertex re-roots at its child
                current = MergeTree(
                    TreeStructure(_drop_root_parent(s, target)),
                    _drop_height(current, target),
                )
            else:
                current = _ghost_merge_vertex(current, target)


def _drop_root_parent(s: TreeStructure, top: int) -> tuple[Optional[int], ...]:
    child = s.children[top][0]
    parent = {u: s.parent[u] for u in s.vertices() if u != top}
    parent[child] = None
    ids = sorted(parent)
    new_id = {old: i for i, old in enumerate(ids)}
    return tuple(new_id[parent[v]] if parent[v] is not None else None for v in ids)


def _drop_height(tree: MergeTree, top: int) -> tuple[float, ...]:
    return tuple(h for v, h in enumerate(tree.heights) if v != top)


def norm(tree: WeightedTree) -> float:
    """Total weight: the edit cost of deleting every edge."""
    return sum(tree.weights[v] for v in tree.structure.edges())


# ---------------------------------------------------------------------------
# canonical encodings and isomorphism


def _label(x: float) -> float:
    # 1e-9 equality tolerance: quantize so that drift from ghost/split
    # round-trips cannot separate equal trees
    return round(x, 9) + 0.0  # normalize -0.0


def _encode_weighted(tree: WeightedTree, v: int) -> tuple:
    s = tree.structure
    kids = tuple(sorted(_encode_weighted(tree, c) for c in s.children[v]))
    own = None if v == s.root else _label(tree.weights[v])
    return (own, kids)


def _encode_merge(tree: MergeTree, v: int) -> tuple:
    s = tree.structure
    kids = tuple(sorted(_encode_merge(tree, c) for c in s.children[v]))
    return (_label(tree.heights[v]), kids)


def encode(tree: Tree) -> tuple:
    """Canonical AHU-style encoding of the canonical form of ``tree``.

    Two trees are equal up to order-2 vertices iff their encodings match.
    """
    canon = canonical_form(tree)
    if isinstance(canon, WeightedTree):
        return ("w", _encode_weighted(canon, canon.root))
    return ("m", _encode_merge(canon, canon.root))


def _match(a: Tree, b: Tree, va: int, vb: int, enc_a, enc_b, out: dict[int, int]):
    out[va] = vb
    kids_a = sorted(a.structure.children[va], key=lambda c: enc_a[c])
    kids_b = sorted(b.structure.children[vb], key=lambda c: enc_b[c])
    for ca, cb in zip(kids_a, kids_b):
        _match(a, b, ca, cb, enc_a, enc_b, out)


def equal_up_to_order2(a: Tree, b: Tree):
    """Whether two trees of the same kind coincide after removing order-2
    vertices.

    Returns ``(True, iso)`` with ``iso`` a vertex bijection between the two
    canonical forms, or ``(False, None)``.
    """
    if isinstance(a, WeightedTree) != isinstance(b, WeightedTree):
        raise TypeError("trees must be of the same kind")
    ca, cb = canonical_form(a), canonical_form(b)
    if encode(ca) != encode(cb):
        return False, None
    if isinstance(ca, WeightedTree):
        enc_a = {v: _encode_weighted(ca, v) for v in ca.structure.vertices()}
        enc_b = {v: _encode_weighted(cb, v) for v in cb.structure.vertices()}
    else:
        enc_a = {v: _encode_merge(ca, v) for v in ca.structure.vertices()}
        enc_b = {v: _encode_merge(cb, v) for v in cb.structure.vertices()}
    iso: dict[int, int] = {}
    _match(ca, cb, ca.structure.root, cb.structure.root, enc_a, enc_b, iso)
    return True, iso


def raw_encode(tree: Tree) -> tuple:
    """AHU encoding of ``tree`` as stored, order-2 vertices included."""
    if isinstance(tree, WeightedTree):
        return ("w", _encode_weighted(tree, tree.structure.root))
    return ("m", _encode_merge(tree, tree.structure.root))


def isomorphic(a: Tree, b: Tree) -> bool:
    """Exact structural isomorphism with weights/heights equal up to 1e-9."""
    return raw_encode(a) == raw_encode(b)


def subtree(tree: WeightedTree, v: int) -> WeightedTree:
    """The weighted tree hanging below ``v`` (rooted at ``v``, whose own edge
    is excluded)."""
    s = tree.structure
    keep = s.subtree_vertices(v)
    parent = {u: (s.parent[u] if u != v else None) for u in keep}
    weights = {u: tree.weights[u] for u in keep}
    weights[v] = 0.0
    new_parent, new_weights, _ = _rebuild(parent, weights)
    return WeightedTree(TreeStructure(new_parent), new_weights)


def scale(tree: WeightedTree, factor: float) -> WeightedTree:
    """The tree with every edge weight multiplied by ``factor > 0``."""
    if factor <= 0:
        raise ValueError("scaling factor must be positive")
    ww = tuple(
        w * factor if v != tree.structure.root else 0.0
        for v, w in enumerate(tree.weights)
    )
    return WeightedTree(tree.structure, ww)
