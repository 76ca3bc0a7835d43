import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mted import (
    MergeTree,
    canonical_form,
    equal_up_to_order2,
    ghost_vertex,
    isomorphic,
    merge_tree,
    norm,
    scale,
    single_vertex_tree,
    split_edge,
    validate,
    weighted_tree,
)
from gen import random_weighted_tree


def path_tree(*weights):
    """Chain 0 <- 1 <- ... with given weights bottom-up: vertex 0 is the leaf."""
    n = len(weights) + 1
    parent = [1 + i if i < n - 1 else None for i in range(n)]
    return weighted_tree(parent, {i: w for i, w in enumerate(weights)})


class TestValidate:
    def test_single_vertex_ok(self):
        assert validate(single_vertex_tree()) == []

    def test_zero_weight_flagged(self):
        t = weighted_tree([None, 0], {1: 0.0})
        assert any("non-positive weight" in v for v in validate(t))

    def test_non_monotone_heights_flagged(self):
        t = merge_tree([1, 2, None], [1.0, 0.0, 2.0])
        assert any("non-monotone" in v for v in validate(t))

    def test_valid_merge_tree(self):
        t = merge_tree([2, 2, None], [0.0, 0.5, 2.0])
        assert validate(t) == []


class TestGhostSplit:
    def test_ghost_merges_weights(self):
        t = path_tree(2.0, 3.0)
        out = ghost_vertex(t, 1)
        assert out.dim == 1
        assert norm(out) == pytest.approx(5.0)

    def test_ghost_then_split_restores(self):
        t = path_tree(2.0, 3.0)
        merged = ghost_vertex(t, 1)
        edge = merged.structure.edges()[0]
        back = split_edge(merged, edge, 2.0)
        assert isomorphic(back, t)

    def test_ghost_leaf_errors(self):
        t = path_tree(2.0, 3.0)
        with pytest.raises(ValueError):
            ghost_vertex(t, 0)

    def test_ghost_root_errors(self):
        t = path_tree(1.0)
        with pytest.raises(ValueError):
            ghost_vertex(t, t.root)

    def test_split_half(self):
        t = path_tree(1.0)
        out = split_edge(t, 0, 0.5)
        assert sorted(out.weights[v] for v in out.structure.edges()) == [0.5, 0.5]

    def test_split_at_boundary_errors(self):
        t = path_tree(1.0)
        with pytest.raises(ValueError):
            split_edge(t, 0, 1.0)

    def test_split_then_ghost_identity(self):
        t = weighted_tree([2, 2, None], {0: 1.0, 1: 0.7})
        split = split_edge(t, 0, 0.25)
        order2 = [
            v
            for v in split.structure.vertices()
            if v != split.root and len(split.structure.children[v]) == 1
        ]
        assert len(order2) == 1
        assert isomorphic(ghost_vertex(split, order2[0]), t)

    @given(st.integers(1, 6), st.integers(0, 10_000))
    @settings(max_examples=60, deadline=None)
    def test_norm_invariant_and_inverse(self, n_edges, seed):
        rng = random.Random(seed)
        t = random_weighted_tree(rng, n_edges)
        base = norm(t)
        edge = rng.choice(t.structure.edges())
        w = t.weights[edge]
        if w <= 0.02:
            return
        split = split_edge(t, edge, w * 0.5)
        assert norm(split) == pytest.approx(base, abs=1e-9)
        eq, _ = equal_up_to_order2(split, t)
        assert eq


class TestCanonicalForm:
    def test_chain_of_splits_collapses(self):
        t = path_tree(1.0)
        t = split_edge(t, 0, 0.5)
        t = split_edge(t, 0, 0.25)
        low = min(
            v for v in t.structure.edges() if not t.structure.children[v]
        )
        t = split_edge(t, low, 0.1)
        out = canonical_form(t)
        assert out.dim == 1
        assert norm(out) == pytest.approx(1.0)

    def test_fixed_point(self):
        t = weighted_tree([2, 2, None], {0: 1.0, 1: 2.0})
        assert canonical_form(t) is not None
        assert isomorphic(canonical_form(t), t)

    def test_idempotent_on_random_trees(self):
        rng = random.Random(7)
        for _ in range(100):
            t = random_weighted_tree(rng, rng.randint(1, 8))
            c1 = canonical_form(t)
            c2 = canonical_form(c1)
            assert isomorphic(c1, c2)
            assert norm(c1) == pytest.approx(norm(t), abs=1e-9)

    def test_merge_tree_single_child_top_dropped(self):
        # a top vertex with one child is order 2 against the implicit root
        t = merge_tree([1, None], [0.0, 5.0])
        out = canonical_form(t)
        assert out.structure.n_vertices == 1
        assert out.heights[0] == 0.0

    def test_merge_tree_interior_order2(self):
        t = merge_tree([1, 3, 3, None], [0.0, 1.0, 0.2, 2.0])
        # vertex 1 has one child and a stored parent
        out = canonical_form(t)
        assert out.structure.n_vertices == 3
        assert validate(out) == []


class TestEqualUpToOrder2:
    def test_split_is_invisible(self):
        t = weighted_tree([2, 2, None], {0: 1.0, 1: 2.0})
        eq, iso = equal_up_to_order2(t, split_edge(t, 1, 0.5))
        assert eq and iso is not None

    def test_different_norms_differ(self):
        a = path_tree(1.0)
        b = path_tree(2.0)
        eq, iso = equal_up_to_order2(a, b)
        assert not eq and iso is None

    def test_kind_mismatch_raises(self):
        with pytest.raises(TypeError):
            equal_up_to_order2(path_tree(1.0), merge_tree([None], [0.0]))

    def test_equivalence_relation(self):
        rng = random.Random(11)
        for _ in range(30):
            t = random_weighted_tree(rng, rng.randint(1, 5))
            e = rng.choice(t.structure.edges())
            a = split_edge(t, e, t.weights[e] * 0.3)
            b = canonical_form(t)
            # reflexive, symmetric, transitive on the triple (t, a, b)
            assert equal_up_to_order2(t, t)[0]
            ta, at_ = equal_up_to_order2(t, a)[0], equal_up_to_order2(a, t)[0]
            assert ta == at_
            if ta and equal_up_to_order2(a, b)[0]:
                assert equal_up_to_order2(t, b)[0]

    def test_witness_is_valid_bijection(self):
        t = weighted_tree([2, 2, None], {0: 1.0, 1: 2.0})
        other = split_edge(t, 1, 0.5)
        eq, iso = equal_up_to_order2(t, other)
        assert eq
        ct, co = canonical_form(t), canonical_form(other)
        assert sorted(iso) == list(ct.structure.vertices())
        assert sorted(iso.values()) == list(co.structure.vertices())
        for v, w in iso.items():
            if v != ct.root:
                assert ct.weights[v] == pytest.approx(co.weights[w])


class TestNormScale:
    def test_star_norm(self):
        t = weighted_tree([3, 3, 3, None], {0: 1.0, 1: 2.0, 2: 3.0})
        assert norm(t) == pytest.approx(6.0)

    def test_single_vertex_norm(self):
        assert norm(single_vertex_tree()) == 0.0

    def test_scale(self):
        t = weighted_tree([3, 3, 3, None], {0: 1.0, 1: 2.0, 2: 3.0})
        assert norm(scale(t, 2.0)) == pytest.approx(12.0)
        with pytest.raises(ValueError):
            scale(t, 0.0)
