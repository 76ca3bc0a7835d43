"""Geodesics, local geometry and Frechet-mean approximation.

A minimizing mapping turns into a constant-speed geodesic by interpolating
its edit path.  Around trees whose local separation constant is positive,
mappings decompose into a pair of weight-indexed vectors that identify a
neighbourhood of the tree with a ball in (R^E, ||.||_1); Frechet means are
approximated by descending in that chart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .distance import DEFAULT_CONFIG, SolverConfig, edit_distance, truncate, untruncate
from .edits import (
    Delete,
    EditPath,
    Insert,
    Mapping,
    Shrink,
    apply_edit,
    chain_weight,
    edit_cost,
    is_m2,
    realize_path,
    validate_mapping,
)
from .trees import (
    EQ_TOL,
    MergeTree,
    TreeStructure,
    WeightedTree,
    canonical_form,
    subtree,
)


# ---------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class Geodesic:
    """Constant-speed curve realizing a minimizing mapping.

    ``breakpoints[j]`` is the fraction of the total cost spent after the
    first ``j`` edits of the underlying path.
    """

    start: WeightedTree
    end: WeightedTree
    mapping: Mapping
    path: EditPath
    length: float
    breakpoints: tuple[float, ...]


def geodesic(start: WeightedTree, end: WeightedTree,
             mapping: Optional[Mapping] = None,
             config: SolverConfig = DEFAULT_CONFIG) -> Geodesic:
    """Geodesic from ``start`` to ``end``; computes a minimizing mapping
    when none is supplied."""
    if mapping is None:
        mapping = edit_distance(start, end, config).witness
    path = realize_path(start, end, mapping)
    costs = []
    tree = start
    for e in path.edits:
        costs.append(edit_cost(e, tree))
        tree = apply_edit(tree, e)
    total = float(sum(costs))
    if total > 0:
        acc, points = 0.0, [0.0]
        for c in costs:
            acc += c
            points.append(acc / total)
        points[-1] = 1.0
    else:
        points = [0.0] + [0.0] * len(costs)
    return Geodesic(start, end, mapping, path, total, tuple(points))


def geodesic_eval(g: Geodesic, t: float) -> WeightedTree:
    """Tree at parameter ``t``: edits before ``t`` applied fully, the edit
    spanning ``t`` applied proportionally.

    Deletions shrink their edge to zero before it vanishes, insertions grow
    from zero, ghostings and splittings are instantaneous.
    """
    if not (0.0 <= t <= 1.0):
        raise ValueError(f"t={t!r} outside [0, 1]")
    if g.length == 0.0:
        return g.start
    target = t * g.length
    tree = g.start
    spent = 0.0
    for e in g.path.edits:
        c = edit_cost(e, tree)
        if spent + c <= target + 1e-12:
            tree = apply_edit(tree, e)
            spent += c
            continue
        frac = (target - spent) / c
        if isinstance(e, Shrink):
            w0 = tree.weights[e.edge]
            return tree.replace_weight(e.edge, w0 + frac * (e.new_weight - w0))
        if isinstance(e, Delete):
            w0 = tree.weights[e.edge]
            return tree.replace_weight(e.edge, w0 * (1.0 - frac))
        if isinstance(e, Insert):
            grown = e.weight * frac
            if grown <= EQ_TOL:
                return tree
            return apply_edit(tree, Insert(e.parent, e.adopt, grown))
        raise AssertionError("zero-cost edit cannot span a positive interval")
    return tree


# ---------------------------------------------------------------------------
# local constants


@dataclass(frozen=True)
class LocalConstants:
    """Separation constants governing uniqueness of minimizing mappings."""

    min_weight: float             # smallest edge weight
    internal_separation: float    # smallest distance between internal subtrees
    kappa: float                  # min of the two above
    sibling_leaf_gap: float       # smallest weight gap between sibling leaves
    radius: float                 # min(kappa, sibling_leaf_gap)


def local_constants(tree: WeightedTree,
                    config: SolverConfig = DEFAULT_CONFIG) -> LocalConstants:
    """Local constants of ``tree``; pairwise internal-subtree distances are
    computed exactly.  Conventions: +inf when a minimum runs over an empty
    set."""
    s = tree.structure
    edges = s.edges()
    m = min((tree.weights[v] for v in edges), default=math.inf)
    internal = [v for v in s.vertices() if s.children[v]]
    k = math.inf
    for i, v in enumerate(internal):
        for w in internal[i + 1:]:
            d = edit_distance(subtree(tree, v), subtree(tree, w), config).value
            k = min(k, d)
    gap = math.inf
    for v in internal:
        leaf_kids = [c for c in s.children[v] if not s.children[c]]
        for i, a in enumerate(leaf_kids):
            for b in leaf_kids[i + 1:]:
                gap = min(gap, abs(tree.weights[a] - tree.weights[b]))
    kappa = min(m, k)
    return LocalConstants(m, k, kappa, gap, min(kappa, gap))


# ---------------------------------------------------------------------------
# canonical representation and decomposition


def _delete_vertices(tree: WeightedTree, dels: frozenset[int]):
    """Tree with ``dels`` removed (children reattached), plus the id map."""
    s = tree.structure
    keep = [v for v in s.vertices() if v not in dels]
    parent = {}
    for v in keep:
        u = s.parent[v]
        while u is not None and u in dels:
            u = s.parent[u]
        parent[v] = u
    new_id = {old: i for i, old in enumerate(sorted(keep))}
    new_parent = tuple(
        new_id[parent[v]] if parent[v] is not None else None for v in sorted(keep)
    )
    ww = tuple(tree.weights[v] for v in sorted(keep))
    return WeightedTree(TreeStructure(new_parent), ww), new_id


def _chains(tree: WeightedTree, m_del: frozenset[int], m_ghost: frozenset[int],
            coupled: Sequence[int]):
    """For each coupled vertex, its merged chain bottom-up (itself first)."""
    s = tree.structure
    out = {}
    for a in coupled:
        chain = [a]
        u = s.parent[a]
        while u is not None and u in m_del:
            u = s.parent[u]
        while u is not None and u in m_ghost:
            chain.append(u)
            nxt = s.parent[u]
            while nxt is not None and nxt in m_del:
                nxt = s.parent[nxt]
            u = nxt
        out[a] = chain
    return out


@dataclass(frozen=True)
class CanonicalRepresentation:
    """Mapping in common-refinement form: the deletion-reduced left tree
    coupled edge-by-edge with a proportionally split right tree.

    ``mapping`` couples every edge of ``left`` with an edge of ``right``;
    deletions of the original mapping are carried separately so that the
    total cost is preserved.
    """

    left: WeightedTree
    right: WeightedTree
    mapping: Mapping
    delete_left_cost: float
    delete_right_cost: float

    @property
    def cost(self) -> float:
        shrink = 0.0
        for a, b in self.mapping.couples:
            shrink += abs(self.left.weights[a] - self.right.weights[b])
        return shrink + self.delete_left_cost + self.delete_right_cost


def canonical_representation(left: WeightedTree, right: WeightedTree,
                             m: Mapping) -> CanonicalRepresentation:
    """Extend the couples of ``m`` over the whole deletion-reduced left
    tree by splitting each right chain at the left chain's fractions.

    Every left chain member is coupled with the proportional segment of its
    partner chain, so each segment pair costs its share of ``|W_a - W_b|``
    and the total cost equals ``cost(m)``.
    """
    violations = validate_mapping(left, right, m)
    if violations:
        raise ValueError("invalid mapping: " + "; ".join(violations))
    if not is_m2(left, right, m):
        raise ValueError("mapping lacks maximal ghostings / minimal deletions")
    ls = left.structure
    left_d, lmap = _delete_vertices(left, m.delete_left)
    chains_l = _chains(left, m.delete_left, m.ghost_left, [a for a, _ in m.couples])
    w_right = {
        b: chain_weight(right, m.delete_right, m.ghost_right, b)
        for _, b in m.couples
    }

    # assemble the refined right tree: one chain per couple, proportional
    # segment weights, glued along the reduced left structure
    parent: dict[int, Optional[int]] = {}
    weights: dict[int, float] = {}
    couples = []
    next_id = 0

    bottom_of: dict[int, int] = {}  # left chain bottom -> right chain bottom id
    top_of: dict[int, int] = {}     # left chain bottom -> right chain top id
    order = sorted((a for a, _ in m.couples), key=lambda a: (-ls.depth[a], a))
    partner = {a: b for a, b in m.couples}
    for a in order:
        chain = chains_l[a]
        wa = sum(left.weights[u] for u in chain)
        wb = w_right[partner[a]]
        ids = []
        for u in chain:
            weights[next_id] = left.weights[u] * (wb / wa)
            couples.append((lmap[u], next_id))
            ids.append(next_id)
            next_id += 1
        for low, high in zip(ids, ids[1:]):
            parent[low] = high
        bottom_of[a] = ids[0]
        top_of[a] = ids[-1]

    root_id = next_id
    parent[root_id] = None
    weights[root_id] = 0.0
    # glue chains: the parent of a chain top is the chain holding the next
    # coupled vertex above, or the root
    for a in order:
        s = left.structure
        u = s.parent[chains_l[a][-1]]
        while u is not None and (u in m.delete_left or u in m.ghost_left):
            u = s.parent[u]
        if u is None or u == ls.root:
            parent[top_of[a]] = root_id
        else:
            parent[top_of[a]] = bottom_of[u]

    refined = WeightedTree(
        TreeStructure(tuple(parent[i] for i in range(next_id + 1))),
        tuple(weights[i] for i in range(next_id + 1)),
    )
    mapping = Mapping.build(couples)
    del_left_cost = sum(left.weights[v] for v in m.delete_left)
    del_right_cost = sum(right.weights[v] for v in m.delete_right)
    return CanonicalRepresentation(left_d, refined, mapping, del_left_cost, del_right_cost)


@dataclass(frozen=True)
class TangentVector:
    """Element of R^E(base): one coordinate per edge of the base tree."""

    base: WeightedTree
    coords: tuple[float, ...]

    def norm1(self) -> float:
        return sum(abs(c) for c in self.coords)

    def add_to_base(self) -> tuple[float, ...]:
        return tuple(w + c for w, c in zip(self.base.weights, self.coords))


def decompose(left: WeightedTree, right: WeightedTree, m: Mapping):
    """Tangent pair of a mapping: the right-pointing vector on the left
    tree's edges and the left-pointing vector on the right tree's edges.

    Deleted left edges get ``-w``, chain members their proportional weight
    change; deleted right edges get ``+w``, everything else zero.  The two
    1-norms add up to the mapping's cost, and the left tree moved by the
    vector coincides with the deletion-reduced right tree up to order-2
    vertices.
    """
    violations = validate_mapping(left, right, m)
    if violations:
        raise ValueError("invalid mapping: " + "; ".join(violations))
    if not is_m2(left, right, m):
        raise ValueError("mapping lacks maximal ghostings / minimal deletions")
    ls = left.structure
    coords_l = [0.0] * ls.n_vertices
    for v in m.delete_left:
        coords_l[v] = -left.weights[v]
    chains_l = _chains(left, m.delete_left, m.ghost_left, [a for a, _ in m.couples])
    for a, b in m.couples:
        chain = chains_l[a]
        wa = sum(left.weights[u] for u in chain)
        wb = chain_weight(right, m.delete_right, m.ghost_right, b)
        for u in chain:
            coords_l[u] = left.weights[u] * (wb / wa) - left.weights[u]
    rs = right.structure
    coords_r = [0.0] * rs.n_vertices
    for w in m.delete_right:
        coords_r[w] = right.weights[w]
    return TangentVector(left, tuple(coords_l)), TangentVector(right, tuple(coords_r))


def log_map(base: WeightedTree, target: WeightedTree,
            mapping: Optional[Mapping] = None,
            config: SolverConfig = DEFAULT_CONFIG) -> TangentVector:
    """Chart coordinates of ``target`` seen from ``base``."""
    if mapping is None:
        mapping = edit_distance(base, target, config).witness
    vec, _ = decompose(base, target, mapping)
    return vec


def exp_map(base: WeightedTree, vec: TangentVector):
    """Tree addressed by chart coordinates ``vec``, with the induced
    mapping; zero coordinates delete their edges."""
    if vec.base.structure.parent != base.structure.parent or vec.base.weights != base.weights:
        raise ValueError("vector is not based at this tree")
    s = base.structure
    new_w = vec.add_to_base()
    for v in s.edges():
        if new_w[v] < -EQ_TOL:
            raise ValueError(f"coordinate on edge {v} drops below -w")
    dels = frozenset(v for v in s.edges() if new_w[v] <= EQ_TOL)
    keep_tree, new_id = _delete_vertices(base, dels)
    ww = list(keep_tree.weights)
    for v in s.edges():
        if v not in dels:
            ww[new_id[v]] = new_w[v]
    tree = WeightedTree(keep_tree.structure, tuple(ww))
    couples = [(v, new_id[v]) for v in s.edges() if v not in dels]
    mapping = Mapping.build(couples, delete_left=dels)
    return tree, mapping


# ---------------------------------------------------------------------------
# Frechet means


def _as_weighted(trees: Sequence[WeightedTree] | Sequence[MergeTree]):
    """Common representation for mean computations; merge trees are hung at
    one height above the family maximum."""
    if all(isinstance(t, MergeTree) for t in trees):
        K = max(t.max_height for t in trees) + 1.0
        return [truncate(t, K) for t in trees], K
    if all(isinstance(t, WeightedTree) for t in trees):
        return list(trees), None
    raise ValueError("all trees must be of the same kind")


def frechet_objective(center, data, p: float = 1.0,
                      config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Sum of p-th powers of distances from ``center`` to the data."""
    if p < 1:
        raise ValueError("p must be >= 1")
    trees, K = _as_weighted(list(data) + [center])
    center_w = trees[-1]
    return sum(edit_distance(center_w, t, config).value ** p for t in trees[:-1])


@dataclass(frozen=True)
class FrechetResult:
    mean: WeightedTree | MergeTree
    objective: float
    trace: tuple[float, ...]
    iterations: int


def _tangent_objective(v, vecs, consts, p):
    total = 0.0
    for vi, ci in zip(vecs, consts):
        total += (sum(abs(a - b) for a, b in zip(v, vi)) + ci) ** p
    return total


def _median_clipped(vecs, lower):
    import numpy as np

    arr = np.array(vecs, dtype=float)
    med = np.median(arr, axis=0)
    return tuple(float(max(m, lo)) for m, lo in zip(med, lower))


def _subgradient_descent(vecs, consts, lower, p, iters=300, rel_stop=1e-8):
    import numpy as np

    arr = np.array(vecs, dtype=float)
    lo = np.array(lower, dtype=float)
    x = np.clip(np.median(arr, axis=0), lo, None)
    best_x, best_f = x.copy(), _tangent_objective(x, vecs, consts, p)
    scale = float(np.abs(arr).max()) + 1.0
    stall = 0
    for k in range(1, iters + 1):
        diffs = x[None, :] - arr
        norms = np.abs(diffs).sum(axis=1) + np.array(consts)
        grad = (p * norms ** (p - 1))[:, None] * np.sign(diffs)
        g = grad.sum(axis=0)
        gn = float(np.abs(g).max())
        if gn == 0.0:
            break
        x = np.clip(x - (scale / k) * g / gn, lo, None)
        f = _tangent_objective(x, vecs, consts, p)
        if f < best_f * (1 - rel_stop):
            best_f, best_x = f, x.copy()
            stall = 0
        else:
            stall += 1
            if stall >= 40:
                break
    return tuple(float(c) for c in best_x)


def frechet_mean(data, p: float = 1.0, max_iters: int = 50, tol: float = 1e-6,
                 config: SolverConfig = DEFAULT_CONFIG) -> FrechetResult:
    """Iterative Frechet-mean approximation.

    Each round computes minimizing mappings from the current tree to the
    data, decomposes them into tangent vectors, minimizes the chart
    surrogate (the coordinate-wise median for p=1, projected subgradient
    descent for p>1), and re-bases at the resulting tree.  The surrogate
    bounds the true objective from above, so the objective trace never
    increases.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    data = list(data)
    if not data:
        raise ValueError("data must be nonempty")
    trees, K = _as_weighted(data)

    def true_objective(t):
        return sum(edit_distance(t, d, config).value ** p for d in trees)

    # start from the datum with the smallest objective
    objectives = [true_objective(t) for t in trees]
    idx = min(range(len(trees)), key=lambda i: objectives[i])
    current = canonical_form(trees[idx])
    f_curr = true_objective(current)
    trace = [f_curr]

    for it in range(max_iters):
        edges = current.structure.edges()
        vecs, consts = [], []
        for t in trees:
            m = edit_distance(current, t, config).witness
            rvec, lvec = decompose(current, t, m)
            vecs.append(tuple(rvec.coords[v] for v in edges))
            consts.append(lvec.norm1())
        lower = tuple(-current.weights[v] for v in edges)
        if edges:
            if p == 1:
                v_star = _median_clipped(vecs, lower)
            else:
                v_star = _subgradient_descent(vecs, consts, lower, p)
            zero = tuple(0.0 for _ in edges)
            if _tangent_objective(v_star, vecs, consts, p) >= _tangent_objective(
                zero, vecs, consts, p
            ):
                v_star = zero
        else:
            v_star = ()
        coords = [0.0] * current.structure.n_vertices
        for e, c in zip(edges, v_star):
            coords[e] = c
        nxt, _ = exp_map(current, TangentVector(current, tuple(coords)))
        nxt = canonical_form(nxt)
        f_next = true_objective(nxt)
        if f_next > f_curr - max(tol * max(abs(f_curr), 1.0), 0.0):
            if f_next <= f_curr:
                current, f_curr = nxt, f_next
                trace.append(f_curr)
            break
        current, f_curr = nxt, f_next
        trace.append(f_curr)

    mean = untruncate(current, K) if K is not None else current
    return FrechetResult(mean, f_curr, tuple(trace), len(trace) - 1)
