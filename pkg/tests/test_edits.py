import random

import pytest

from mted import (
    Delete,
    Ghost,
    Insert,
    Mapping,
    Shrink,
    Split,
    apply_edit,
    apply_path,
    edit_cost,
    equal_up_to_order2,
    isomorphic,
    mapping_cost,
    mapping_from_coupling,
    norm,
    path_cost,
    realize_path,
    validate_mapping,
    weighted_tree,
)
from mted.edits import CouplingOrderError, EditPath
from mted.distance import enumerate_couplings
from gen import random_weighted_tree


def cherry():
    # two leaves 0, 1 under vertex 2, root 3
    return weighted_tree([2, 2, 3, None], {0: 1.0, 1: 2.0, 2: 0.5})


class TestApplyEdit:
    def test_delete_reattaches_children(self):
        t = cherry()
        out = apply_edit(t, Delete(2))
        assert out.dim == 2
        assert len(out.structure.children[out.root]) == 2
        assert sorted(out.weights[v] for v in out.structure.edges()) == [1.0, 2.0]

    def test_shrink_same_weight_is_identity(self):
        t = cherry()
        out = apply_edit(t, Shrink(0, 1.0))
        assert isomorphic(out, t)

    def test_insert_then_delete_roundtrip(self):
        t = cherry()
        grown = apply_edit(t, Insert(parent=3, adopt=(2,), weight=0.25))
        assert grown.dim == 4
        back = apply_edit(grown, Delete(grown.dim))
        assert isomorphic(back, t)

    def test_insert_adopt_non_child_errors(self):
        t = cherry()
        with pytest.raises(ValueError):
            apply_edit(t, Insert(parent=3, adopt=(0,), weight=0.5))

    def test_delete_root_errors(self):
        t = cherry()
        with pytest.raises(ValueError):
            apply_edit(t, Delete(t.root))


class TestEditCost:
    def test_shrink_cost(self):
        t = cherry()
        assert edit_cost(Shrink(1, 5.0), t) == pytest.approx(3.0)

    def test_ghost_is_free(self):
        t = weighted_tree([1, 2, None], {0: 2.0, 1: 3.0})
        assert edit_cost(Ghost(1), t) == 0.0
        assert edit_cost(Split(0, 1.0), t) == 0.0

    def test_delete_cost_is_weight(self):
        t = weighted_tree([None, 0], {1: 0.7})
        assert edit_cost(Delete(1), t) == pytest.approx(0.7)


class TestPathCost:
    def test_empty_path(self):
        assert path_cost(EditPath(()), cherry()) == 0.0

    def test_additivity(self):
        t = cherry()
        path = EditPath((Delete(2), Shrink(0, 3.0)))
        assert path_cost(path, t) == pytest.approx(0.5 + 2.0)

    @pytest.mark.parametrize("k,expected", [(1, 1.0), (4, 0.5), (16, 0.25)])
    def test_p2_degenerates_under_splitting(self, k, expected):
        # split a unit edge into k equal pieces, then remove all pieces:
        # at p=2 the cost is k**-0.5, at p=1 it stays exactly 1
        t = weighted_tree([None, 0], {1: 1.0})
        edits = []
        low = 1
        for i in range(k - 1):
            edits.append(Split(low, 1.0 / k))
            low = t.structure.n_vertices + i  # each split appends a vertex
        start = apply_path(EditPath(tuple(edits)), t)
        removal = tuple(Delete(e) for e in sorted(start.structure.edges(), reverse=True))
        full = EditPath(tuple(edits) + removal)
        assert path_cost(full, t, order=2) == pytest.approx(expected, abs=1e-12)
        assert path_cost(full, t, order=1) == pytest.approx(1.0, abs=1e-12)

    def test_invalid_order(self):
        with pytest.raises(ValueError):
            path_cost(EditPath(()), cherry(), order=0.5)


class TestValidateMapping:
    def test_identity_ok(self):
        t = cherry()
        m = Mapping.build([(0, 0), (1, 1), (2, 2)])
        assert validate_mapping(t, t, m) == []

    def test_shared_left_vertex_m2(self):
        t = cherry()
        m = Mapping.build([(0, 0), (0, 1)], delete_left=[1, 2], delete_right=[2])
        out = validate_mapping(t, t, m)
        assert any("M2" in v for v in out)

    def test_order_violation_m3(self):
        t = cherry()
        # 0 and 2 are comparable on the left, 0 and 1 are not on the right
        m = Mapping.build([(0, 0), (2, 1)], delete_left=[1], delete_right=[2])
        out = validate_mapping(t, t, m)
        assert any("M3" in v for v in out)

    def test_unreached_edge_m1(self):
        t = cherry()
        m = Mapping.build([(0, 0), (1, 1)], delete_left=[2], delete_right=[2])
        assert validate_mapping(t, t, m) == []
        m_missing = Mapping.build([(0, 0), (1, 1)], delete_right=[2])
        assert any("M1" in v for v in validate_mapping(t, t, m_missing))

    def test_bad_ghost_m4(self):
        t = cherry()
        # ghosting 2 without deleting a branch leaves it of order 3
        m = Mapping.build([(0, 0), (1, 1)], ghost_left=[2], delete_right=[2])
        assert any("M4" in v for v in validate_mapping(t, t, m))


class TestMappingCost:
    def test_identity_zero(self):
        t = cherry()
        m = Mapping.build([(0, 0), (1, 1), (2, 2)])
        assert mapping_cost(t, t, m) == 0.0

    def test_non_uniqueness_pair_both_cost_eps(self):
        # attach two equal branches of length eps/2 to the leaf of a segment
        eps = 0.4
        base = weighted_tree([None, 0], {1: 3.0})
        grown = weighted_tree(
            [None, 0, 1, 1], {1: 3.0, 2: eps / 2, 3: eps / 2}
        )
        m_delete = Mapping.build([(1, 1)], delete_right=[2, 3])
        # couple the left edge with one new branch, ghosting its father
        m_swap = Mapping.build([(1, 3)], delete_right=[2], ghost_right=[1])
        assert validate_mapping(base, grown, m_delete) == []
        assert validate_mapping(base, grown, m_swap) == []
        cost_d = mapping_cost(base, grown, m_delete)
        cost_s = mapping_cost(base, grown, m_swap)
        assert cost_d == pytest.approx(eps)
        assert cost_s == pytest.approx(eps)

    def test_chain_weights_through_ghostings(self):
        left = weighted_tree([None, 0], {1: 5.0})
        right = weighted_tree([None, 0, 1], {1: 2.0, 2: 1.5})
        m = Mapping.build([(1, 2)], ghost_right=[1])
        assert validate_mapping(left, right, m) == []
        assert mapping_cost(left, right, m) == pytest.approx(abs(5.0 - 3.5))

    def test_transpose_preserves_cost(self):
        rng = random.Random(21)
        for _ in range(40):
            a = random_weighted_tree(rng, rng.randint(1, 4))
            b = random_weighted_tree(rng, rng.randint(1, 4))
            couplings = list(enumerate_couplings(a, b))
            c = rng.choice(couplings)
            m = mapping_from_coupling(a, b, c)
            if m is None:
                continue
            assert mapping_cost(b, a, m.transpose()) == pytest.approx(
                mapping_cost(a, b, m)
            )


class TestMappingFromCoupling:
    def test_full_bijection_no_edits(self):
        t = cherry()
        m = mapping_from_coupling(t, t, [(0, 0), (1, 1), (2, 2)])
        assert m is not None
        assert not m.delete_left and not m.ghost_left
        assert not m.delete_right and not m.ghost_right

    def test_empty_coupling_deletes_everything(self):
        t = cherry()
        m = mapping_from_coupling(t, t, [])
        assert m is not None
        assert m.delete_left == frozenset(t.structure.edges())
        assert m.delete_right == frozenset(t.structure.edges())
        assert not m.ghost_left and not m.ghost_right

    def test_partial_coupling_ghosts_chains(self):
        t = cherry()
        # keeping only leaf 0 coupled forces deleting leaf 1 and ghosting 2
        m = mapping_from_coupling(t, t, [(0, 0), (2, 2)])
        assert m is not None
        assert m.delete_left == frozenset({1})
        assert m.ghost_left == frozenset()
        m2 = mapping_from_coupling(t, t, [(0, 0)])
        assert m2 is not None
        assert m2.ghost_left == frozenset({2})
        assert m2.delete_left == frozenset({1})

    def test_order_violation_raises(self):
        t = cherry()
        with pytest.raises(CouplingOrderError):
            mapping_from_coupling(t, t, [(0, 2), (2, 0)])
        with pytest.raises(CouplingOrderError):
            mapping_from_coupling(t, t, [(0, 0), (1, 0)])

    def test_completion_cost_never_exceeds_explicit_mapping(self):
        # maximal ghostings / minimal deletions never increase the cost
        rng = random.Random(33)
        for _ in range(60):
            a = random_weighted_tree(rng, rng.randint(1, 4))
            b = random_weighted_tree(rng, rng.randint(1, 4))
            for couples in enumerate_couplings(a, b):
                m = mapping_from_coupling(a, b, couples)
                if m is None:
                    continue
                # turning a ghosting into a deletion gives another mapping
                for g in list(m.ghost_left):
                    worse = Mapping(
                        m.couples,
                        m.delete_left | {g},
                        m.delete_right,
                        m.ghost_left - {g},
                        m.ghost_right,
                    )
                    if validate_mapping(a, b, worse):
                        continue
                    assert mapping_cost(a, b, m) <= mapping_cost(a, b, worse) + 1e-9


class TestRealizePath:
    def test_identity_mapping_zero_effect(self):
        t = cherry()
        m = Mapping.build([(0, 0), (1, 1), (2, 2)])
        path = realize_path(t, t, m)
        assert path_cost(path, t) == 0.0
        assert isomorphic(apply_path(path, t), t)

    def test_edit_kind_ordering(self):
        left = weighted_tree([None, 0, 1, 1], {1: 3.0, 2: 1.0, 3: 1.0})
        right = weighted_tree([None, 0, 1], {1: 2.0, 2: 1.5})
        m = mapping_from_coupling(left, right, [(2, 2)])
        path = realize_path(left, right, m)
        kinds = [type(e).__name__ for e in path.edits]
        rank = {"Delete": 0, "Ghost": 1, "Shrink": 2, "Split": 3, "Insert": 4}
        assert kinds == sorted(kinds, key=lambda k: rank[k])

    def test_random_mappings_reach_target_with_equal_cost(self):
        rng = random.Random(55)
        done = 0
        while done < 100:
            a = random_weighted_tree(rng, rng.randint(1, 5))
            b = random_weighted_tree(rng, rng.randint(1, 5))
            couplings = list(enumerate_couplings(a, b))
            m = mapping_from_coupling(a, b, rng.choice(couplings))
            if m is None:
                continue
            done += 1
            path = realize_path(a, b, m)
            end = apply_path(path, a)
            assert isomorphic(end, b), (a, b, m)
            assert path_cost(path, a) == pytest.approx(
                mapping_cost(a, b, m), abs=1e-9
            )
            eq, _ = equal_up_to_order2(end, b)
            assert eq

    def test_star_to_star(self):
        # deleting everything and inserting everything realizes d(T, *) + d(*, T')
        a = weighted_tree([1, None], {0: 2.0})
        b = weighted_tree([2, 2, None], {0: 1.0, 1: 1.0})
        m = mapping_from_coupling(a, b, [])
        path = realize_path(a, b, m)
        assert isomorphic(apply_path(path, a), b)
        assert path_cost(path, a) == pytest.approx(norm(a) + norm(b))
