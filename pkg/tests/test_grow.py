import numpy as np
import pytest
from helpers import random_stream, tree_as_dict
from hypothesis import given, settings
from hypothesis import strategies as st

from privhp.core import PrivHpConfig, PrivHpState
from privhp.domain import ROOT, SubdomainIndex
from privhp.evaluate import ExactHistogram, exact_prune_tree
from privhp.grow import (_consistency_level, apply_consistency,
                         consistency_error, enforce_consistency,
                         grow_from_counts, grow_partition,
                         tree_total_and_levels)
from privhp.tree import PartitionNode

finite_counts = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


class TestApplyConsistency:
    def test_worked_example(self):
        # parent 4.6 with children (3.5, 3.7): surplus 2.6 splits evenly
        a0, a1 = apply_consistency(4.6, 3.5, 3.7)
        assert a0 == pytest.approx(2.2, abs=1e-12)
        assert a1 == pytest.approx(2.4, abs=1e-12)
        assert a0 + a1 == pytest.approx(4.6, abs=1e-12)

    def test_negative_child_clamps_first(self):
        assert apply_consistency(1.0, -0.5, 0.1) == (0.45, 0.55)

    def test_overweight_child_takes_parent(self):
        # even split would push the small child negative
        assert apply_consistency(1.0, 3.0, 0.5) == (1.0, 0.0)
        assert apply_consistency(1.0, 0.5, 3.0) == (0.0, 1.0)

    def test_consistent_pair_unchanged(self):
        assert apply_consistency(6.0, 2.0, 4.0) == (2.0, 4.0)
        assert apply_consistency(0.0, 0.0, 0.0) == (0.0, 0.0)

    def test_zero_parent_zeroes_children(self):
        assert apply_consistency(0.0, 2.0, 2.0) == (0.0, 0.0)
        assert apply_consistency(0.0, 5.0, -1.0) == (0.0, 0.0)

    def test_negative_parent_is_contract_violation(self):
        with pytest.raises(ValueError):
            apply_consistency(-0.1, 1.0, 1.0)

    @settings(deadline=None, max_examples=300)
    @given(st.floats(0, 1e6), finite_counts, finite_counts)
    def test_postconditions(self, parent, c0, c1):
        a0, a1 = apply_consistency(parent, c0, c1)
        assert a0 >= 0.0 and a1 >= 0.0
        assert a0 + a1 == pytest.approx(parent, rel=1e-12, abs=1e-12)

    @settings(deadline=None, max_examples=300)
    @given(st.floats(0, 1e6), finite_counts, finite_counts)
    def test_scalar_matches_vectorized(self, parent, c0, c1):
        a0, a1 = apply_consistency(parent, c0, c1)
        v0, v1 = _consistency_level(np.array([parent]), np.array([c0]), np.array([c1]))
        assert (a0, a1) == (v0[0], v1[0])

    @settings(deadline=None, max_examples=300)
    @given(st.floats(0, 1000), st.floats(0, 1), st.floats(-50, 50), st.floats(-50, 50))
    def test_never_increases_l1_error(self, parent, frac, n0, n1):
        """Reconciliation moves the pair toward the true split, never away."""
        t0 = parent * frac
        t1 = parent - t0
        before = (t0 + n0, t1 + n1)
        a0, a1 = apply_consistency(parent, *before)
        err_before = abs(before[0] - t0) + abs(before[1] - t1)
        err_after = abs(a0 - t0) + abs(a1 - t1)
        assert err_after <= err_before + 1e-9 * max(1.0, parent)


def test_consistency_error_worked_example():
    # noise (-0.5, -0.3) and sketch overcounts (1, 2) on true split (3, 2):
    # observed children (3.5, 3.7); the residual after the even split is 0.6
    assert consistency_error(3.5, 3.7, 3.0, 2.0) == pytest.approx(0.6, abs=1e-12)


def test_consistency_error_is_split_invariant():
    # the even split shifts both children equally, leaving the residual fixed
    b0, b1, t0, t1 = 7.3, 2.1, 5.0, 3.0
    lam = (b0 + b1) - (t0 + t1)
    a0, a1 = b0 - lam / 2, b1 - lam / 2
    assert consistency_error(a0, a1, t0, t1) == pytest.approx(
        consistency_error(b0, b1, t0, t1), abs=1e-12)


def test_enforce_consistency_in_place():
    parent = PartitionNode(SubdomainIndex("0"), 4.6)
    parent.left = PartitionNode(SubdomainIndex("00"), 3.5)
    parent.right = PartitionNode(SubdomainIndex("01"), 3.7)
    enforce_consistency(parent)
    assert parent.left.count == pytest.approx(2.2, abs=1e-12)
    assert parent.right.count == pytest.approx(2.4, abs=1e-12)
    with pytest.raises(ValueError):
        enforce_consistency(parent.left)


# ---------------------------------------------------------------------------
# growth


def noiseless_state(pts, d, k, L_star, L, seed=0):
    cfg = PrivHpConfig(dimension=d, epsilon=1.0, k=k, L=L, L_star=L_star,
                       j=4, w_cells=8, seed=seed, noiseless=True)
    st_ = PrivHpState(cfg)
    st_.update_batch(pts)
    return st_


def test_single_point_grows_a_path():
    state = noiseless_state(np.array([[0.3]]), 1, 1, 2, 5)
    tree = state.finalize()
    path = {"", "0", "01", "010", "0100", "01001"}
    for node in tree.nodes():
        expected = 1.0 if node.index.bits in path else 0.0
        assert node.count == expected, node
    # exactly one branch survives per level past the counter region
    _, levels = tree_total_and_levels(tree)
    assert [len(levels[l]) for l in range(6)] == [1, 2, 4, 8, 2, 2]


def test_empty_stream_ties_break_lexicographically():
    state = noiseless_state(np.empty((0, 1)), 1, 2, 1, 4)
    tree = state.finalize()
    d = tree_as_dict(tree)
    assert set(d.values()) == {0.0}
    # all-zero candidates: the k lexicographically smallest branch
    assert "000" in d and "001" in d and "010" in d and "011" in d
    assert "100" not in d
    assert "0000" in d and "0011" in d and "0100" not in d


def test_growth_structure_counts(rng):
    for _ in range(10):
        d = int(rng.integers(1, 3))
        L = int(rng.integers(2, 8))
        L_star = int(rng.integers(0, L))
        k = int(rng.integers(1, 5))
        n = int(rng.integers(1, 2000))
        state = noiseless_state(random_stream(rng, n, d), d, k, L_star, L,
                                seed=int(rng.integers(1 << 30)))
        tree = state.finalize()
        _, levels = tree_total_and_levels(tree)
        for l in range(L_star + 1):
            assert len(levels[l]) == 1 << l
        for l in range(L_star + 1, L + 1):
            branched = sum(1 for node in tree.nodes()
                           if node.level == l and node.left is not None)
            attached = len(levels[l])
            if l == L:
                assert branched == 0
            else:
                assert branched == min(k, attached)


def test_growth_tree_is_consistent_everywhere(rng):
    for seed in range(5):
        cfg = PrivHpConfig(dimension=1, epsilon=0.5, k=3, L=9, L_star=4,
                           j=6, w_cells=6, seed=seed)
        state = PrivHpState(cfg)
        state.update_batch(random_stream(rng, 3000, 1))
        tree = state.finalize()
        assert tree.root.count >= 0.0
        for node in tree.nodes():
            if node.left is not None:
                s = node.left.count + node.right.count
                assert node.left.count >= 0.0 and node.right.count >= 0.0
                assert s == pytest.approx(node.count, rel=1e-9, abs=1e-9)


def test_levels_sum_to_root(rng):
    state = noiseless_state(random_stream(rng, 500, 2), 2, 2, 3, 6)
    tree = state.finalize()
    total, levels = tree_total_and_levels(tree)
    assert total == 500.0
    for l, entries in levels.items():
        mass = sum(c for _, c in entries)
        if l <= 4:
            # complete through the counter region plus the first grown level
            assert mass == pytest.approx(total, rel=1e-9)
        else:
            assert mass <= total + 1e-9
        assert [b for b, _ in entries] == sorted(b for b, _ in entries)


def test_full_tree_when_k_covers_every_branch(rng):
    pts = random_stream(rng, 200, 1)
    state = noiseless_state(pts, 1, 16, 0, 5)
    tree = state.finalize()
    assert tree.node_count() == 2**6 - 1
    hist = ExactHistogram(pts, 5, 1)
    for l in range(6):
        counts = dict(tree_total_and_levels(tree)[1][l])
        np.testing.assert_allclose(
            [counts[format(v, f"0{l}b") if l else ""] for v in range(1 << l)],
            hist.level_counts(l))


def test_exact_growth_matches_exact_pruning_oracle(rng):
    """Noiseless growth fed exact counts reproduces the exact-pruning tree."""
    for _ in range(25):
        d = int(rng.integers(1, 3))
        L = int(rng.integers(1, 8))
        L_star = int(rng.integers(0, L + 1))
        k = int(rng.choice([1, 2, 4]))
        n = int(rng.integers(1, 5000))
        pts = random_stream(rng, n, d)
        hist = ExactHistogram(pts, L, d)
        state = noiseless_state(pts, d, k, L_star, L)
        np.testing.assert_array_equal(state.tree_counts, hist.tree_counts(L_star))
        grown = grow_partition(state, count_source=hist.count_source)
        oracle = exact_prune_tree(hist, k, L_star, L)
        ga, oa = tree_as_dict(grown), tree_as_dict(oracle)
        assert ga.keys() == oa.keys()
        for bits in ga:
            assert ga[bits] == pytest.approx(oa[bits], abs=1e-9)


def test_grow_from_counts_validates_shape():
    with pytest.raises(ValueError):
        grow_from_counts(np.zeros(4), 1, 1, 2, 1, lambda l, t: np.zeros(len(t)))


def test_negative_root_clamps_to_zero():
    tree = grow_from_counts(np.array([-3.0]), 1, 0, 0, 1,
                            lambda l, t: np.zeros(len(t)))
    assert tree.root.count == 0.0
    assert tree.root.index == ROOT
