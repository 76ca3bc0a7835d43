import random

import pytest

from mted import (
    PLFunction,
    diagrams_equal,
    merge_tree_from_pl,
    persistence_diagram,
    validate,
)
from gen import random_pl_function
from oracles import sweep_persistence


class TestMergeTreeFromPL:
    def test_v_shape_single_leaf(self):
        f = PLFunction(((0.0, 2.0), (1.0, 0.0), (2.0, 2.0)))
        t = merge_tree_from_pl(f)
        assert t.structure.n_vertices == 1
        assert t.heights[0] == 0.0

    def test_w_shape(self):
        f = PLFunction(((0.0, 2.0), (1.0, 0.0), (2.0, 1.0), (3.0, 0.0), (4.0, 2.0)))
        t = merge_tree_from_pl(f)
        assert len(t.structure.leaves) == 2
        assert sorted(t.heights[v] for v in t.structure.leaves) == [0.0, 0.0]
        assert t.heights[t.root] == 1.0
        assert validate(t) == []

    def test_plateau_counts_once(self):
        f = PLFunction(
            ((0.0, 2.0), (1.0, 0.0), (2.0, 0.0), (3.0, 1.0), (4.0, 0.0), (5.0, 2.0))
        )
        t = merge_tree_from_pl(f)
        assert len(t.structure.leaves) == 2

    def test_simultaneous_merges_multichild(self):
        # three minima separated by two peaks of identical height merge at
        # one vertex of order > 3
        f = PLFunction(
            (
                (0.0, 3.0),
                (1.0, 0.0),
                (2.0, 1.0),
                (3.0, 0.5),
                (4.0, 1.0),
                (5.0, 0.2),
                (6.0, 3.0),
            )
        )
        t = merge_tree_from_pl(f)
        assert len(t.structure.leaves) == 3
        assert len(t.structure.children[t.root]) == 3

    def test_output_is_canonical(self):
        rng = random.Random(3)
        for _ in range(25):
            f = random_pl_function(rng, rng.randint(1, 6))
            t = merge_tree_from_pl(f)
            assert validate(t) == []
            for v in t.structure.vertices():
                assert len(t.structure.children[v]) != 1

    def test_monotone_function(self):
        f = PLFunction(((0.0, 0.0), (1.0, 5.0)))
        t = merge_tree_from_pl(f)
        assert t.structure.n_vertices == 1
        assert t.heights[0] == 0.0


class TestPersistenceDiagram:
    def test_single_leaf(self):
        f = PLFunction(((0.0, 2.0), (1.0, 0.5), (2.0, 2.0)))
        pd = persistence_diagram(merge_tree_from_pl(f))
        assert pd.finite_pairs == ()
        assert pd.essential_births == (0.5,)

    def test_elder_rule_by_hand(self):
        from mted import merge_tree

        t = merge_tree([2, 2, None], [0.0, 0.5, 2.0])
        pd = persistence_diagram(t)
        assert pd.finite_pairs == ((0.5, 2.0),)
        assert pd.essential_births == (0.0,)

    def test_rank_counts_leaves(self):
        rng = random.Random(5)
        for _ in range(25):
            f = random_pl_function(rng, rng.randint(1, 7))
            t = merge_tree_from_pl(f)
            pd = persistence_diagram(t)
            assert pd.rank == len(t.structure.leaves)
            # dim bound used in the stability corollary
            assert t.structure.n_vertices <= 2 * len(t.structure.leaves)

    def test_matches_sweep_oracle(self):
        rng = random.Random(9)
        for _ in range(30):
            f = random_pl_function(rng, rng.randint(1, 7))
            pd = persistence_diagram(merge_tree_from_pl(f))
            oracle = sweep_persistence(f, samples=800)
            assert diagrams_equal(pd, oracle, tol=1e-9)

    def test_shift_shifts_diagram(self):
        rng = random.Random(13)
        f = random_pl_function(rng, 4)
        g = f.shift(1.5)
        pa = persistence_diagram(merge_tree_from_pl(f))
        pb = persistence_diagram(merge_tree_from_pl(g))
        for (b1, d1), (b2, d2) in zip(pa.sorted_pairs(), pb.sorted_pairs()):
            assert b2 - b1 == pytest.approx(1.5)
            assert d2 - d1 == pytest.approx(1.5)
