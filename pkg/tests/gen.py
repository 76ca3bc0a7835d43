"""Seeded random generators for trees and PL functions used across tests."""

import random

from mted import MergeTree, PLFunction, WeightedTree, canonical_form, untruncate, weighted_tree


def random_weighted_tree(rng: random.Random, n_edges: int,
                         w_lo: float = 0.1, w_hi: float = 2.0) -> WeightedTree:
    """Random recursive tree with ``n_edges`` edges, weights uniform."""
    parent = [None]
    for v in range(1, n_edges + 1):
        parent.append(rng.randrange(v))
    weights = [0.0] + [rng.uniform(w_lo, w_hi) for _ in range(n_edges)]
    return weighted_tree(parent, weights)


def random_canonical_tree(rng: random.Random, n_edges: int,
                          w_lo: float = 0.1, w_hi: float = 2.0) -> WeightedTree:
    """Random tree without order-2 vertices (dimension may shrink)."""
    t = canonical_form(random_weighted_tree(rng, n_edges, w_lo, w_hi))
    assert isinstance(t, WeightedTree)
    return t


def random_merge_tree(rng: random.Random, n_edges: int,
                      base: float = 0.0) -> MergeTree:
    w = random_weighted_tree(rng, n_edges)
    return untruncate(w, base + rng.uniform(3.0, 8.0) + n_edges * 2.0)


def random_pl_function(rng: random.Random, n_minima: int = 4,
                       min_persistence: float = 0.0) -> PLFunction:
    """Zig-zag PL function with ``n_minima`` local minima.

    ``min_persistence`` forces every separating peak to clear both adjacent
    minima by at least that much, bounding every finite persistence from
    below.
    """
    minima = [rng.uniform(0.0, 2.0) for _ in range(n_minima)]
    pts = [(0.0, minima[0] + min_persistence + rng.uniform(1.0, 3.0))]
    x = 1.0
    for i, m in enumerate(minima):
        pts.append((x, m))
        x += 1.0
        if i + 1 < n_minima:
            peak = max(m, minima[i + 1]) + min_persistence + rng.uniform(0.5, 2.5)
            pts.append((x, peak))
            x += 1.0
    pts.append((x, minima[-1] + min_persistence + rng.uniform(1.0, 3.0)))
    return PLFunction(tuple(pts))
