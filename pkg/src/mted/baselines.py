"""Persistence-diagram distances, coupling-based interleaving bounds and the
naive triplet metric that the edit distance is compared against.

Diagrams are compared under the sup-norm ground metric.  The 1-Wasserstein
cost uses the symmetric-displacement convention: a matched pair is charged
once per diagram (twice its sup-distance), an unmatched point half its
persistence.  With that convention a height shift by ``h`` costs exactly
``h`` per persistence class of each diagram.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from .distance import DEFAULT_CONFIG, DistanceResult, SolverConfig, edit_distance, truncate
from .filtration import PersistenceDiagram
from .trees import MergeTree, TreeStructure

INF = math.inf


def _inf_norm(p, q) -> float:
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def _essential_gaps(d1: PersistenceDiagram, d2: PersistenceDiagram):
    if len(d1.essential_births) != len(d2.essential_births):
        return None
    return [
        abs(a - b)
        for a, b in zip(sorted(d1.essential_births), sorted(d2.essential_births))
    ]


def _kuhn_perfect_matching(adj: list[list[int]], n_right: int) -> bool:
    """Whether the bipartite graph has a perfect matching (Kuhn's algorithm)."""
    match_r = [-1] * n_right

    def try_augment(u: int, seen: list[bool]) -> bool:
        for v in adj[u]:
            if not seen[v]:
                seen[v] = True
                if match_r[v] == -1 or try_augment(match_r[v], seen):
                    match_r[v] = u
                    return True
        return False

    for u in range(len(adj)):
        if not try_augment(u, [False] * n_right):
            return False
    return True


def bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Bottleneck distance: the smallest radius admitting a partial matching
    (diagonal allowed) that displaces no point further, in sup norm.

    Essential classes must agree in number (otherwise +inf) and are matched
    in sorted order.
    """
    gaps = _essential_gaps(d1, d2)
    if gaps is None:
        return INF
    floor = max(gaps, default=0.0)
    p1, p2 = list(d1.finite_pairs), list(d2.finite_pairs)
    n, m = len(p1), len(p2)
    if n == 0 and m == 0:
        return floor
    diag1 = [(d - b) / 2 for b, d in p1]
    diag2 = [(d - b) / 2 for b, d in p2]
    cross = [[_inf_norm(x, y) for y in p2] for x in p1]
    candidates = sorted(
        set(diag1) | set(diag2) | {c for row in cross for c in row} | {floor}
    )
    candidates = [c for c in candidates if c >= floor - 1e-15]

    def feasible(r: float) -> bool:
        tol = 1e-12
        # left: points of d1 then m diagonal slots; right: points of d2
        # then n diagonal slots; diagonal slots pair freely with each other
        adj: list[list[int]] = []
        for i in range(n):
            row = [j for j in range(m) if cross[i][j] <= r + tol]
            if diag1[i] <= r + tol:
                row.extend(range(m, m + n))
            adj.append(row)
        for k in range(m):
            row = list(range(m, m + n))
            if diag2[k] <= r + tol:
                row.extend(j for j in range(m) if j == k)
            adj.append(row)
        return _kuhn_perfect_matching(adj, m + n)

    lo, hi = 0, len(candidates) - 1
    if not feasible(candidates[hi]):
        return INF
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible(candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return candidates[lo]


def wasserstein1(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Symmetric-displacement 1-Wasserstein cost via an exact assignment on
    the diagonal-augmented matrix."""
    gaps = _essential_gaps(d1, d2)
    if gaps is None:
        return INF
    total = 2.0 * sum(gaps)
    p1, p2 = list(d1.finite_pairs), list(d2.finite_pairs)
    n, m = len(p1), len(p2)
    if n == 0 and m == 0:
        return total
    big = 2.0 * (
        sum(_inf_norm(x, y) for x in p1 for y in p2)
        + sum(d - b for b, d in p1 + p2)
        + 1.0
    )
    cost = np.full((n + m, m + n), big)
    for i, x in enumerate(p1):
        for j, y in enumerate(p2):
            cost[i, j] = 2.0 * _inf_norm(x, y)
        cost[i, m + i] = (x[1] - x[0]) / 2
    for k, y in enumerate(p2):
        cost[n + k, k] = (y[1] - y[0]) / 2
    cost[n:, m:] = 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(total + cost[rows, cols].sum())


# ---------------------------------------------------------------------------
# couplings and the interleaving upper bound


@dataclass(frozen=True)
class Coupling:
    """Order-preserving partial matching between the vertices of two merge
    trees in rootless form (all stored vertices are eligible)."""

    pairs: frozenset[tuple[int, int]]


def validate_coupling(left: MergeTree, right: MergeTree, c: Coupling) -> list[str]:
    """All violated coupling axioms: unique maximal couple, injectivity,
    order isomorphism, and no coupled vertex with exactly one maximal
    coupled vertex below it."""
    violations = []
    pairs = sorted(c.pairs)
    if not pairs:
        violations.append("C1: empty coupling")
        return violations
    ls, rs = left.structure, right.structure
    seen_a, seen_b = set(), set()
    for a, b in pairs:
        if a in seen_a or b in seen_b:
            violations.append(f"C2: ({a},{b}) breaks injectivity")
        seen_a.add(a)
        seen_b.add(b)
    for i, (a, b) in enumerate(pairs):
        for a2, b2 in pairs[:i]:
            rel_l = _rel(ls, a, a2)
            rel_r = _rel(rs, b, b2)
            if rel_l != rel_r:
                violations.append(f"C3: ({a},{b}) vs ({a2},{b2})")
    for s, proj, name in ((ls, seen_a, "left"), (rs, seen_b, "right")):
        maxima = [v for v in proj if not any(s.is_strict_ancestor(u, v) for u in proj)]
        if len(maxima) != 1:
            violations.append(f"C1: {name} side has {len(maxima)} maximal couples")
        for v in proj:
            if _lambda_count(s, proj, v) == 1:
                violations.append(f"C4: coupled {name} vertex {v} has one maximal couple below")
    return violations


def _rel(s: TreeStructure, a: int, b: int) -> int:
    if s.is_strict_ancestor(b, a):
        return -1
    if s.is_strict_ancestor(a, b):
        return 1
    return 0


def _lambda_set(s: TreeStructure, coupled: set[int], v: int) -> list[int]:
    below = [u for u in coupled if s.is_strict_ancestor(v, u)]
    return [u for u in below if not any(x != u and s.is_strict_ancestor(x, u) for x in below)]


def _lambda_count(s: TreeStructure, coupled: set[int], v: int) -> int:
    return len(_lambda_set(s, coupled, v))


def _side_costs(tree: MergeTree, other: MergeTree, pairs, flip: bool):
    """Per-vertex coupling costs for one side; None when a case formula has
    no witness (such couplings give no usable bound)."""
    s, os = tree.structure, other.structure
    mine = {(a if not flip else b): (b if not flip else a) for a, b in pairs}
    coupled = set(mine)
    h, oh = tree.heights, other.heights
    costs = {}
    for x in s.vertices():
        if x in mine:
            costs[x] = abs(h[x] - oh[mine[x]])
            continue
        lam = _lambda_count(s, coupled, x)
        if lam == 1:
            costs[x] = 0.0
        elif lam == 0:
            phi = _first_ancestor_with_couples_below(s, coupled, x)
            if phi is None:
                return None
            below = [
                mine[v]
                for v in coupled
                if v == phi or s.is_strict_ancestor(phi, v)
            ]
            eta = min(below, key=lambda w: (oh[w], w))
            costs[x] = max((h[phi] - h[x]) / 2, oh[eta] - h[x])
        else:
            delta = _nearest_coupled_weak_ancestor(s, coupled, x)
            if delta is None:
                return None
            costs[x] = abs(h[x] - oh[mine[delta]])
    return costs


def _first_ancestor_with_couples_below(s: TreeStructure, coupled: set[int], x: int):
    """First strict ancestor of ``x`` with coupled content at or below it;
    a coupled ancestor itself qualifies."""
    u = s.parent[x]
    while u is not None:
        if u in coupled or any(s.is_strict_ancestor(u, v) for v in coupled):
            return u
        u = s.parent[u]
    return None


def _nearest_coupled_weak_ancestor(s: TreeStructure, coupled: set[int], x: int):
    u = x
    while u is not None:
        if u in coupled:
            return u
        u = s.parent[u]
    return None


def coupling_cost(left: MergeTree, right: MergeTree, c: Coupling):
    """Per-vertex costs of a coupling on both sides and their supremum."""
    violations = validate_coupling(left, right, c)
    if violations:
        raise ValueError("invalid coupling: " + "; ".join(violations))
    cl = _side_costs(left, right, c.pairs, flip=False)
    cr = _side_costs(right, left, c.pairs, flip=True)
    if cl is None or cr is None:
        return None, None, INF
    sup = max(
        max(cl.values(), default=0.0), max(cr.values(), default=0.0)
    )
    return cl, cr, sup


def _enumerate_vertex_couplings(left: MergeTree, right: MergeTree) -> Iterator[frozenset]:
    ls, rs = left.structure, right.structure
    va, vb = list(ls.vertices()), list(rs.vertices())
    pairs: list[tuple[int, int]] = []
    used = [False] * rs.n_vertices

    def rec(i: int):
        if i == len(va):
            if pairs:
                yield frozenset(pairs)
            return
        v = va[i]
        yield from rec(i + 1)
        for w in vb:
            if used[w]:
                continue
            ok = all(_rel(ls, v, a) == _rel(rs, w, b) for a, b in pairs)
            if not ok:
                continue
            pairs.append((v, w))
            used[w] = True
            yield from rec(i + 1)
            pairs.pop()
            used[w] = False

    yield from rec(0)


def interleaving_upper(left: MergeTree, right: MergeTree,
                       cap: int = DEFAULT_CONFIG.oracle_cap + 1) -> float:
    """Upper bound for the interleaving distance: the minimum sup-cost over
    all valid couplings (exhaustive; small trees only)."""
    if left.structure.n_vertices > cap or right.structure.n_vertices > cap:
        raise ValueError(
            f"coupling enumeration capped at {cap} vertices per side"
        )
    best = INF
    for pairs in _enumerate_vertex_couplings(left, right):
        c = Coupling(pairs)
        if validate_coupling(left, right, c):
            continue
        _, _, sup = coupling_cost(left, right, c)
        best = min(best, sup)
    return best


def naive_triplet_distance(left: MergeTree, right: MergeTree,
                           config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Top-height gap plus the edit distance of the top-edge-removed
    weighted trees.

    Kept as a contrast baseline: it double-counts variability near the top
    vertex and is not metric-grade.
    """
    wl = truncate(left, left.max_height)
    wr = truncate(right, right.max_height)
    return abs(left.max_height - right.max_height) + edit_distance(wl, wr, config).value
