"""Exact edit distance for weighted trees and the K-independent merge-tree
distance.

Two exact solvers are provided: a plain exhaustive enumeration of couple
sets (the oracle, for cross-validation on small trees) and a branch-and-bound
over the same search space with subtree-distance memoization, symmetry
reduction between identical sibling subtrees, and admissible lower bounds.
Both minimize over mappings with maximal ghostings and minimal deletions,
which suffices for the minimum.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

from .edits import (
    Mapping,
    chain_weight,
    complete_side,
    mapping_cost,
    mapping_from_coupling,
)
from .trees import (
    EQ_TOL,
    MergeTree,
    TreeStructure,
    WeightedTree,
    norm,
    raw_encode,
    subtree,
)

_PRUNE_EPS = 1e-12


class BudgetExceeded(RuntimeError):
    """The branch-and-bound ran out of its node budget."""


class OracleCapExceeded(ValueError):
    """An input exceeds the exhaustive oracle's size cap."""


@dataclass(frozen=True)
class SolverConfig:
    node_budget: int = 5_000_000
    oracle_cap: int = 6


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class DistanceResult:
    value: float
    witness: Mapping
    nodes_explored: int


# ---------------------------------------------------------------------------
# truncation


def truncate(tree: MergeTree, K: float) -> WeightedTree:
    """Cut the implicit infinite root edge at height ``K``.

    Every edge carries the height difference of its endpoints; the top
    vertex gains an edge of weight ``K - max h``.  When ``K`` equals the top
    height that edge is omitted so that no zero-weight edge appears.
    """
    s = tree.structure
    top = s.root
    if K < tree.heights[top] - EQ_TOL:
        raise ValueError(f"K={K!r} is below the top height {tree.heights[top]!r}")
    weights = [0.0] * s.n_vertices
    for v in s.edges():
        weights[v] = tree.heights[s.parent[v]] - tree.heights[v]
    if abs(K - tree.heights[top]) <= EQ_TOL:
        return WeightedTree(s, tuple(weights))
    new_root = s.n_vertices
    parent = [p if p is not None else new_root for p in s.parent] + [None]
    weights[top] = K - tree.heights[top]
    weights.append(0.0)
    return WeightedTree(TreeStructure(tuple(parent)), tuple(weights))


def untruncate(tree: WeightedTree, K: float) -> MergeTree:
    """Hang a weighted tree at height ``K``; inverse of :func:`truncate`.

    The vertex placed at ``K`` is dropped when it has a single child, since
    it would be an order-2 vertex of the resulting merge tree.
    """
    s = tree.structure
    heights = [0.0] * s.n_vertices
    for v in s.topological_order():
        p = s.parent[v]
        heights[v] = K if p is None else heights[p] - tree.weights[v]
    if len(s.children[s.root]) == 1:
        top = s.children[s.root][0]
        keep = [v for v in s.vertices() if v != s.root]
        new_id = {old: i for i, old in enumerate(sorted(keep))}
        parent = tuple(
            new_id[s.parent[v]] if s.parent[v] != s.root else None
            for v in sorted(keep)
        )
        hh = tuple(heights[v] for v in sorted(keep))
        return MergeTree(TreeStructure(parent), hh)
    return MergeTree(s, tuple(heights))


# ---------------------------------------------------------------------------
# exhaustive oracle


def _compatible(rel_a, rel_b, couples: list[tuple[int, int]], v: int, w: int) -> bool:
    for a, b in couples:
        if rel_a[v][a] != rel_b[w][b]:
            return False
    return True


def _relation_table(s: TreeStructure):
    n = s.n_vertices
    rel = [[0] * n for _ in range(n)]
    for v in s.vertices():
        u = s.parent[v]
        while u is not None:
            rel[v][u] = -1
            rel[u][v] = 1
            u = s.parent[u]
    return rel


def enumerate_couplings(left: WeightedTree, right: WeightedTree) -> Iterator[list[tuple[int, int]]]:
    """All couple sets between the edge posets satisfying injectivity and
    the order isomorphism."""
    ls, rs = left.structure, right.structure
    rel_a, rel_b = _relation_table(ls), _relation_table(rs)
    edges_a = list(ls.edges())
    edges_b = list(rs.edges())

    couples: list[tuple[int, int]] = []
    used = [False] * rs.n_vertices

    def rec(i: int) -> Iterator[list[tuple[int, int]]]:
        if i == len(edges_a):
            yield list(couples)
            return
        v = edges_a[i]
        yield from rec(i + 1)
        for w in edges_b:
            if used[w] or not _compatible(rel_a, rel_b, couples, v, w):
                continue
            couples.append((v, w))
            used[w] = True
            yield from rec(i + 1)
            couples.pop()
            used[w] = False

    yield from rec(0)


def minimizing_mappings(left: WeightedTree, right: WeightedTree,
                        cap: int = DEFAULT_CONFIG.oracle_cap,
                        tol: float = EQ_TOL):
    """Exhaustive minimum over couple sets: ``(value, all minimizing
    mappings, couplings examined)``.

    Collects every mapping whose cost is within ``tol`` of the minimum.
    """
    if left.dim > cap or right.dim > cap:
        raise OracleCapExceeded(
            f"oracle cap is {cap} edges per side, got {left.dim} and {right.dim}"
        )
    best = float("inf")
    winners: list[Mapping] = []
    examined = 0
    for couples in enumerate_couplings(left, right):
        examined += 1
        m = mapping_from_coupling(left, right, couples)
        if m is None:
            continue
        c = mapping_cost(left, right, m, check=False)
        if c < best - tol:
            best = c
            winners = [m]
        elif c <= best + tol:
            winners.append(m)
            best = min(best, c)
    return best, winners, examined


def edit_distance_oracle(left: WeightedTree, right: WeightedTree,
                         cap: int = DEFAULT_CONFIG.oracle_cap) -> DistanceResult:
    """Exhaustive-enumeration distance; exact but exponential, for
    cross-validating the branch-and-bound on small instances."""
    best, winners, examined = minimizing_mappings(left, right, cap=cap, tol=0.0)
    return DistanceResult(best, winners[0], examined)


# ---------------------------------------------------------------------------
# branch and bound


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int):
        self.left = n

    def spend(self):
        self.left -= 1
        if self.left < 0:
            raise BudgetExceeded("node budget exhausted")


_subtree_cache: dict[tuple, float] = {}


def clear_cache():
    _subtree_cache.clear()


def _solve(left: WeightedTree, right: WeightedTree, budget: _Budget,
           want_witness: bool):
    """Exact minimum mapping cost between two weighted trees.

    Returns ``(value, witness couples or None)``.
    """
    ls, rs = left.structure, right.structure
    if ls.dim == 0 or rs.dim == 0:
        return norm(left) + norm(right), [] if want_witness else None

    key = (raw_encode(left), raw_encode(right))
    if not want_witness and key in _subtree_cache:
        return _subtree_cache[key], None

    rel_a, rel_b = _relation_table(ls), _relation_table(rs)
    edges_b = list(rs.edges())

    # exact subtree-pair distances, used for ordering and pruning
    sub_a = {v: subtree(left, v) for v in ls.edges()}
    sub_b = {w: subtree(right, w) for w in edges_b}
    D: dict[tuple[int, int], float] = {}
    for v in ls.edges():
        for w in edges_b:
            ka = raw_encode(sub_a[v])
            kb = raw_encode(sub_b[w])
            if (ka, kb) in _subtree_cache:
                D[v, w] = _subtree_cache[ka, kb]
            else:
                val, _ = _solve(sub_a[v], sub_b[w], budget, False)
                D[v, w] = val

    norm_a, norm_b = norm(left), norm(right)
    sub_norm_a = {v: norm(sub_a[v]) for v in ls.edges()}
    sub_norm_b = {w: norm(sub_b[w]) for w in edges_b}

    # pre-order with heavier subtrees first
    order: list[int] = []
    stack = [ls.root]
    while stack:
        v = stack.pop()
        if v != ls.root:
            order.append(v)
        kids = sorted(
            ls.children[v], key=lambda c: sub_norm_a[c] + left.weights[c]
        )
        stack.extend(kids)

    # position of each vertex in the processing order
    pos = {v: i for i, v in enumerate(order)}

    # twin classes: identical sibling subtrees carrying equal edge weights
    def twin_key(tree, v):
        return (
            tree.structure.parent[v],
            round(tree.weights[v], 9),
            raw_encode(subtree(tree, v)),
        )

    twins_b: dict[tuple, list[int]] = {}
    for w in edges_b:
        twins_b.setdefault(twin_key(right, w), []).append(w)
    twin_class_b = {w: tuple(group) for group in twins_b.values() for w in group}
    twin_prev_a: dict[int, list[int]] = {v: [] for v in ls.edges()}
    twins_a: dict[tuple, list[int]] = {}
    for v in ls.edges():
        twins_a.setdefault(twin_key(left, v), []).append(v)
    for group in twins_a.values():
        by_pos = sorted(group, key=lambda v: pos[v])
        for i, v in enumerate(by_pos):
            twin_prev_a[v] = by_pos[:i]

    sub_vertices_a = {v: set(ls.subtree_vertices(v)) for v in ls.edges()}
    sub_vertices_b = {w: set(rs.subtree_vertices(w)) for w in edges_b}

    m = len(order)
    used_b: set[int] = set()
    couples: list[tuple[int, int]] = []
    coupled_a: set[int] = set()
    uncoupled_a: set[int] = set()
    cnt_sub: list[int] = [0] * ls.n_vertices  # committed couples in sub(v)
    branch_hits: list[int] = [0] * ls.n_vertices
    sure_deleted: set[int] = set()
    minimal: set[tuple[int, int]] = set()
    state = {"sure_w": 0.0, "pair_lb": 0.0, "free_del": 0.0}

    best = norm_a + norm_b
    best_couples: Optional[list[tuple[int, int]]] = [] if want_witness else None

    def has_coupled_ancestor(v: int) -> bool:
        u = ls.parent[v]
        while u is not None:
            if u in coupled_a:
                return True
            u = ls.parent[u]
        return False

    def leaf_cost() -> float:
        dl, gl = complete_side(ls, coupled_a)
        dr, gr = complete_side(rs, {b for _, b in couples})
        c = sum(left.weights[v] for v in dl)
        c += sum(right.weights[w] for w in dr)
        for a, b in couples:
            wa = chain_weight(left, dl, gl, a)
            wb = chain_weight(right, dr, gr, b)
            c += abs(wa - wb)
        return c

    def lower_bound() -> float:
        cap_a = norm_a - state["sure_w"]
        lb1 = norm_a + norm_b - 2.0 * min(cap_a, norm_b)
        lb2 = state["pair_lb"] + state["free_del"]
        return max(lb1, lb2, abs(norm_a - norm_b))

    def add_couple(v: int, w: int):
        log = []
        couples.append((v, w))
        coupled_a.add(v)
        used_b.add(w)
        cnt_sub[v] += 1
        child = v
        u = ls.parent[v]
        while u is not None:
            first = cnt_sub[child] == 1  # branch through child went 0 -> 1
            cnt_sub[u] += 1
            if first:
                branch_hits[u] += 1
                log.append(("hit", u))
                if (
                    u in uncoupled_a
                    and u not in sure_deleted
                    and branch_hits[u] >= 2
                ):
                    sure_deleted.add(u)
                    state["sure_w"] += left.weights[u]
                    log.append(("sure", u))
                    if not has_coupled_ancestor(u):
                        state["free_del"] += left.weights[u]
                        log.append(("free", u))
            child = u
            u = ls.parent[u]
        minimal.add((v, w))
        state["pair_lb"] += D[v, w]
        log.append(("pair", D[v, w]))
        for a, b in list(minimal):
            if (a, b) != (v, w) and rel_a[v][a] == -1:
                # the new couple sits below (a, b), which stops being minimal
                minimal.discard((a, b))
                state["pair_lb"] -= D[a, b]
                log.append(("unmin", (a, b), D[a, b]))
        return log

    def undo_couple(v: int, w: int, log):
        couples.pop()
        coupled_a.discard(v)
        used_b.discard(w)
        minimal.discard((v, w))
        cnt_sub[v] -= 1
        u = ls.parent[v]
        while u is not None:
            cnt_sub[u] -= 1
            u = ls.parent[u]
        for entry in reversed(log):
            tag = entry[0]
            if tag == "pair":
                state["pair_lb"] -= entry[1]
            elif tag == "hit":
                branch_hits[entry[1]] -= 1
            elif tag == "sure":
                sure_deleted.discard(entry[1])
                state["sure_w"] -= left.weights[entry[1]]
            elif tag == "free":
                state["free_del"] -= left.weights[entry[1]]
            elif tag == "unmin":
                minimal.add(entry[1])
                state["pair_lb"] += entry[2]

    def decide_uncoupled(v: int):
        log = []
        uncoupled_a.add(v)
        if not ls.children[v] or branch_hits[v] >= 2:
            sure_deleted.add(v)
            state["sure_w"] += left.weights[v]
            log.append(("sure", v))
            if not has_coupled_ancestor(v):
                state["free_del"] += left.weights[v]
                log.append(("free", v))
        return log

    def undo_uncoupled(v: int, log):
        uncoupled_a.discard(v)
        for entry in reversed(log):
            if entry[0] == "sure":
                sure_deleted.discard(entry[1])
                state["sure_w"] -= left.weights[entry[1]]
            else:
                state["free_del"] -= left.weights[entry[1]]

    def rec(i: int):
        nonlocal best, best_couples
        budget.spend()
        if i == m:
            c = leaf_cost()
            if c < best - _PRUNE_EPS:
                best = c
                if want_witness:
                    best_couples = list(couples)
            return
        v = order[i]

        force_uncoupled = any(
            t not in coupled_a and cnt_sub[t] == 0 for t in twin_prev_a[v]
        )

        branches: list[tuple[float, Optional[int]]] = [(left.weights[v], None)]
        if not force_uncoupled:
            for w in edges_b:
                if w in used_b:
                    continue
                if not _compatible(rel_a, rel_b, couples, v, w):
                    continue
                group = twin_class_b[w]
                if len(group) > 1:
                    untouched = not (sub_vertices_b[w] & used_b)
                    if untouched:
                        first_untouched = next(
                            g
                            for g in group
                            if g not in used_b and not (sub_vertices_b[g] & used_b)
                        )
                        if w != first_untouched:
                            continue
                score = D[v, w] + abs(left.weights[v] - right.weights[w])
                branches.append((score, w))
        branches.sort(key=lambda t: t[0])

        for _score, w in branches:
            if w is None:
                log = decide_uncoupled(v)
                if lower_bound() < best - _PRUNE_EPS:
                    rec(i + 1)
                undo_uncoupled(v, log)
            else:
                if D[v, w] >= best - _PRUNE_EPS:
                    continue
                log = add_couple(v, w)
                if lower_bound() < best - _PRUNE_EPS:
                    rec(i + 1)
                undo_couple(v, w, log)

    rec(0)
    if not want_witness:
        _subtree_cache[key] = best
    return best, best_couples if want_witness else None


def edit_distance(left: WeightedTree, right: WeightedTree,
                  config: SolverConfig = DEFAULT_CONFIG) -> DistanceResult:
    """Exact edit distance with an optimal mapping as witness.

    Raises :class:`BudgetExceeded` when the search would need more than
    ``config.node_budget`` nodes; no approximate value is ever returned.
    """
    key_l = (left.dim, raw_encode(left))
    key_r = (right.dim, raw_encode(right))
    if key_r < key_l:
        res = edit_distance(right, left, config)
        return DistanceResult(res.value, res.witness.transpose(), res.nodes_explored)
    budget = _Budget(config.node_budget)
    value, couples = _solve(left, right, budget, True)
    spent = config.node_budget - budget.left
    witness = mapping_from_coupling(left, right, couples)
    if witness is None:
        raise AssertionError("optimal coupling completed to an invalid mapping")
    return DistanceResult(value, witness, spent)


def merge_tree_distance(left: MergeTree, right: MergeTree,
                        config: SolverConfig = DEFAULT_CONFIG) -> DistanceResult:
    """Edit distance between merge trees via truncation.

    The truncation height is one above the taller tree; the theorem that
    the value does not depend on this choice is property-tested.  The
    witness refers to the truncated weighted trees.
    """
    K = max(left.max_height, right.max_height) + 1.0
    return edit_distance(truncate(left, K), truncate(right, K), config)


# ---------------------------------------------------------------------------
# distance matrices


@dataclass(frozen=True)
class DistanceMatrixResult:
    values: tuple[tuple[float, ...], ...]
    errors: dict[tuple[int, int], str]


def _pair_job(args):
    i, j, a, b, config = args
    try:
        if isinstance(a, MergeTree):
            res = merge_tree_distance(a, b, config)
        else:
            res = edit_distance(a, b, config)
        return i, j, res.value, None
    except BudgetExceeded as exc:
        return i, j, float("nan"), str(exc)


def distance_matrix(trees: Sequence[MergeTree] | Sequence[WeightedTree],
                    config: SolverConfig = DEFAULT_CONFIG,
                    workers: int = 1) -> DistanceMatrixResult:
    """Symmetric pairwise distance matrix; each unordered pair solved once.

    Pairwise jobs run across ``workers`` processes when ``workers > 1``.
    Failures are recorded per cell as NaN plus an error message.
    """
    kinds = {type(t) for t in trees}
    if len(kinds) > 1:
        raise ValueError("all trees must be of the same kind")
    n = len(trees)
    values = [[0.0] * n for _ in range(n)]
    errors: dict[tuple[int, int], str] = {}
    jobs = [(i, j, trees[i], trees[j], config) for i in range(n) for j in range(i + 1, n)]
    if workers > 1 and len(jobs) > 1:
        import concurrent.futures as cf

        with cf.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pair_job, jobs))
    else:
        results = [_pair_job(job) for job in jobs]
    for i, j, value, err in results:
        values[i][j] = values[j][i] = value
        if err is not None:
            errors[(i, j)] = err
    return DistanceMatrixResult(tuple(tuple(row) for row in values), errors)
