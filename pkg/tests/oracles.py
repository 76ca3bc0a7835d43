"""Independent brute-force oracles the implementation is checked against."""

import itertools
import math

from mted import PersistenceDiagram, PLFunction


def sweep_persistence(f: PLFunction, samples: int = 4000) -> PersistenceDiagram:
    """0-dimensional sublevel persistence of a sampled time series by a
    direct union-find sweep, independent of the merge-tree pipeline.

    Sampling includes every breakpoint, so for a PL function the result is
    exact.
    """
    xs = sorted(
        {x for x, _ in f.breakpoints}
        | {
            f.breakpoints[0][0]
            + (f.breakpoints[-1][0] - f.breakpoints[0][0]) * i / samples
            for i in range(samples + 1)
        }
    )
    ys = [f(x) for x in xs]
    n = len(ys)
    order = sorted(range(n), key=lambda i: (ys[i], i))
    parent = list(range(n))
    birth = [math.inf] * n  # birth value of each component root
    alive = [False] * n
    pairs = []

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in order:
        alive[i] = True
        birth[i] = ys[i]
        for j in (i - 1, i + 1):
            if 0 <= j < n and alive[j]:
                ri, rj = find(i), find(j)
                if ri == rj:
                    continue
                # elder rule: the younger component dies now
                if (birth[ri], ri) < (birth[rj], rj):
                    ri, rj = rj, ri
                # ri is younger and dies at ys[i]
                if ys[i] > birth[ri]:
                    pairs.append((birth[ri], ys[i]))
                parent[ri] = rj
    essential = min(ys)
    return PersistenceDiagram(tuple(sorted(pairs)), (essential,))


def _inf_norm(p, q):
    return max(abs(p[0] - q[0]), abs(p[1] - q[1]))


def brute_bottleneck(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exhaustive bottleneck over all partial matchings (tiny diagrams)."""
    if len(d1.essential_births) != len(d2.essential_births):
        return math.inf
    ess = max(
        (
            abs(a - b)
            for a, b in zip(sorted(d1.essential_births), sorted(d2.essential_births))
        ),
        default=0.0,
    )
    p1, p2 = list(d1.finite_pairs), list(d2.finite_pairs)
    best = math.inf
    n1, n2 = len(p1), len(p2)
    for k in range(0, min(n1, n2) + 1):
        for idx1 in itertools.combinations(range(n1), k):
            for idx2 in itertools.permutations(range(n2), k):
                cost = ess
                for i, j in zip(idx1, idx2):
                    cost = max(cost, _inf_norm(p1[i], p2[j]))
                for i in range(n1):
                    if i not in idx1:
                        cost = max(cost, (p1[i][1] - p1[i][0]) / 2)
                for j in range(n2):
                    if j not in idx2:
                        cost = max(cost, (p2[j][1] - p2[j][0]) / 2)
                best = min(best, cost)
    return best


def brute_wasserstein1(d1: PersistenceDiagram, d2: PersistenceDiagram) -> float:
    """Exhaustive symmetric-displacement 1-Wasserstein cost: matched pairs
    count their sup-distance once per diagram, unmatched points half their
    persistence."""
    if len(d1.essential_births) != len(d2.essential_births):
        return math.inf
    ess = sum(
        2.0 * abs(a - b)
        for a, b in zip(sorted(d1.essential_births), sorted(d2.essential_births))
    )
    p1, p2 = list(d1.finite_pairs), list(d2.finite_pairs)
    best = math.inf
    n1, n2 = len(p1), len(p2)
    for k in range(0, min(n1, n2) + 1):
        for idx1 in itertools.combinations(range(n1), k):
            for idx2 in itertools.permutations(range(n2), k):
                cost = ess
                for i, j in zip(idx1, idx2):
                    cost += 2.0 * _inf_norm(p1[i], p2[j])
                for i in range(n1):
                    if i not in idx1:
                        cost += (p1[i][1] - p1[i][0]) / 2
                for j in range(n2):
                    if j not in idx2:
                        cost += (p2[j][1] - p2[j][0]) / 2
                best = min(best, cost)
    return best
