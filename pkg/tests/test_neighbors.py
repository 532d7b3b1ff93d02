import numpy as np
import pytest

from gpmal.neighbors import (
    build_neighbor_index,
    build_orderings,
    reorder_selected_lowdim,
    select_positions,
)

from conftest import make_dataset
from oracles import naive_select_count


class TestOrderings:
    def test_one_dimensional_points(self):
        ds = make_dataset([[0.0], [1.0], [3.0]])
        orderings, dists = build_orderings(ds)
        assert list(orderings[0]) == [1, 2]
        assert list(orderings[1]) == [0, 2]
        assert list(orderings[2]) == [1, 0]
        np.testing.assert_allclose(dists[0], [1.0, 3.0])

    def test_tie_breaks_by_lower_id(self):
        # instance 0 at origin, 1 and 2 both at distance 1
        ds = make_dataset([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        orderings, _ = build_orderings(ds)
        assert list(orderings[0]) == [1, 2]

    def test_seven_instances_have_six_neighbors(self):
        rng = np.random.default_rng(0)
        ds = make_dataset(rng.random((7, 2)))
        orderings, _ = build_orderings(ds)
        assert orderings.shape == (7, 6)
        for i in range(7):
            assert sorted(orderings[i]) == [j for j in range(7) if j != i]

    def test_self_excluded_even_with_duplicates(self):
        ds = make_dataset([[0.5], [0.5], [0.9]])
        orderings, _ = build_orderings(ds)
        for i in range(3):
            assert i not in orderings[i]

    def test_distances_non_decreasing(self):
        rng = np.random.default_rng(1)
        ds = make_dataset(rng.random((40, 5)), scaled=True)
        _, dists = build_orderings(ds)
        assert (np.diff(dists, axis=1) >= 0).all()

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        ds = make_dataset(rng.random((25, 3)))
        a = build_neighbor_index(ds, 4)
        b = build_neighbor_index(ds, 4)
        np.testing.assert_array_equal(a.orderings, b.orderings)
        np.testing.assert_array_equal(a.selected, b.selected)


class TestSelection:
    def test_blocks_of_six_with_k2(self):
        assert list(select_positions(6, 2)) == [0, 1, 2, 4]

    def test_small_ordering_taken_whole(self):
        assert list(select_positions(3, 5)) == [0, 1, 2]

    def test_first_block_taken_whole(self):
        pos = select_positions(500, 10)
        assert list(pos[:10]) == list(range(10))

    def test_count_matches_naive_construction(self):
        for length in [5, 17, 99, 250, 1024, 2599]:
            for k in [1, 2, 5, 10]:
                assert len(select_positions(length, k)) == naive_select_count(length, k)

    def test_count_in_log_band(self):
        # expected count is roughly k * log2(n/k + 1)
        for n in [100, 500, 2000, 2600]:
            eta = len(select_positions(n - 1, 10))
            predicted = 10 * np.log2(n / 10 + 1)
            assert abs(eta - predicted) <= 10
        assert 76 <= len(select_positions(2599, 10)) <= 85

    def test_selected_is_subsequence(self):
        rng = np.random.default_rng(3)
        ds = make_dataset(rng.random((60, 4)))
        nidx = build_neighbor_index(ds, 3)
        for i in range(ds.n):
            assert list(nidx.selected[i]) == [
                nidx.orderings[i][p] for p in nidx.positions
            ]

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            select_positions(10, 0)

    def test_rank_of_selected(self):
        rng = np.random.default_rng(4)
        ds = make_dataset(rng.random((20, 2)))
        nidx = build_neighbor_index(ds, 2)
        ranks = nidx.rank_of_selected(0)
        for r, nb in enumerate(nidx.selected[0]):
            assert ranks[int(nb)] == r


class TestLowDimReorder:
    def test_sorted_by_distance(self):
        # selected [P, Q, R] = ids [7, 3, 9]
        perm = reorder_selected_lowdim([0.2, 0.1, 0.3], [7, 3, 9])
        assert perm == [1, 0, 2]

    def test_all_ties_fall_back_to_id(self):
        perm = reorder_selected_lowdim([0.5, 0.5, 0.5], [9, 2, 4])
        assert perm == [1, 2, 0]

    def test_identity_when_distances_match_highdim(self):
        dists = [0.1, 0.2, 0.3, 0.4]
        perm = reorder_selected_lowdim(dists, [5, 6, 7, 8])
        assert perm == [0, 1, 2, 3]

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            reorder_selected_lowdim([0.1, float("nan")], [1, 2])
