from fractions import Fraction

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from prefrank import RankingProblem, ValidationError, components, derive
from prefrank.graph import problem_from_triplets


def dense_float(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)


matrices = st.integers(2, 7).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(0, 9), min_size=n, max_size=n), min_size=n, max_size=n
    ).map(lambda rows: _zero_diag(rows))
)


def _zero_diag(rows):
    a = np.array(rows, dtype=np.int64)
    np.fill_diagonal(a, 0)
    return a


class TestRankingProblem:
    def test_default_keys_and_exact_storage(self, five):
        assert five.objects == ("X1", "X2", "X3", "X4", "X5")
        assert five.exact
        assert five.entry("X3", "X5") == Fraction(7)

    def test_float_input_goes_sparse(self):
        p = RankingProblem(["a", "b"], [[0, 0.5], [1.5, 0]])
        assert not p.exact
        assert sp.issparse(p.matrix)

    def test_large_integer_input_is_float(self):
        p = RankingProblem(None, np.zeros((70, 70), dtype=int))
        assert not p.exact

    @pytest.mark.parametrize(
        "matrix",
        [[[0, -1], [1, 0]], [[1, 0], [0, 0]], [[0, 1, 2]], [[0, float("nan")], [0, 0]]],
    )
    def test_invalid_matrices(self, matrix):
        with pytest.raises(ValidationError):
            RankingProblem(None, matrix)

    def test_duplicate_keys_rejected(self):
        with pytest.raises(ValidationError, match="duplicate"):
            RankingProblem(["a", "a"], [[0, 1], [0, 0]])

    def test_immutable(self, five):
        with pytest.raises(ValueError):
            five.matrix[0, 1] = 3

    def test_sparse_input_is_copied(self):
        src = sp.csr_array(np.array([[0, 1.5], [0, 0]]))
        p = RankingProblem(None, src)
        src.data[0] = 9.0
        assert p.entry(0, 1) == 1.5

    def test_with_entries_and_reorder(self, five):
        q = five.with_entries({("X3", "X5"): 3})
        assert q.entry("X3", "X5") == 3 and five.entry("X3", "X5") == 7
        r = five.reorder(["X5", "X4", "X3", "X2", "X1"])
        assert r.entry("X5", "X3") == five.entry("X5", "X3")
        with pytest.raises(ValidationError):
            five.reorder(["X1", "X2"])

    def test_triplets_row_major(self, five):
        trip = list(five.triplets())
        assert trip[0] == ("X1", "X3", 6)
        assert len(trip) == 12

    def test_str_shows_dense_matrix(self, five):
        text = str(five)
        assert "X5" in text and "20" in text

    def test_from_triplets_sums_repeats(self):
        p = problem_from_triplets([("b", "a", 1), ("b", "a", 2), ("a", "c", Fraction(1, 2))])
        assert p.objects == ("a", "b", "c")
        assert p.entry("b", "a") == 3
        assert p.exact

    def test_from_triplets_unknown_object(self):
        with pytest.raises(ValidationError):
            problem_from_triplets([("a", "z", 1)], objects=["a", "b"])


class TestDerive:
    def test_five_object_results_and_matches(self, five):
        d = derive(five)
        A = np.array(five.to_dense(), dtype=object)
        assert np.all(d.results == A - A.T)
        assert np.all(d.matches == A + A.T)
        assert d.results[0, 2] == -6
        assert d.matches[2, 4] == 12
        assert list(d.degrees) == [36, 60, 72, 60, 12]

    def test_symmetric_has_zero_results(self):
        d = derive(RankingProblem(None, [[0, 2, 1], [2, 0, 0], [1, 0, 0]]))
        assert not np.any(d.results != 0)

    def test_single_entry(self):
        a = np.zeros((4, 4), dtype=int)
        a[0, 1] = 3
        d = derive(RankingProblem(None, a))
        assert d.results[0, 1] == 3 and d.results[1, 0] == -3
        assert d.matches[0, 1] == d.matches[1, 0] == 3
        assert list(d.degrees) == [3, 3, 0, 0]

    def test_float_and_exact_agree(self, medical):
        de, df = derive(medical), derive(medical.to_float())
        np.testing.assert_array_equal(np.array(de.laplacian, dtype=float), df.laplacian.toarray())
        np.testing.assert_array_equal(np.array(de.degrees, dtype=float), df.degrees)

    def test_degree_inverse_skips_isolated(self):
        d = derive(RankingProblem(None, [[0, 2, 0], [0, 0, 0], [0, 0, 0]]))
        assert list(d.degree_inverse()) == [Fraction(1, 2), Fraction(1, 2), 0]

    @settings(max_examples=60, deadline=None)
    @given(matrices, st.randoms(use_true_random=False))
    def test_permutation_equivariance(self, a, rnd):
        n = a.shape[0]
        perm = list(range(n))
        rnd.shuffle(perm)
        base = derive(RankingProblem(None, a.astype(float)))
        moved = derive(RankingProblem(None, a[np.ix_(perm, perm)].astype(float)))
        for name in ("results", "matches", "laplacian"):
            x = dense_float(getattr(base, name))
            y = dense_float(getattr(moved, name))
            np.testing.assert_array_equal(x[np.ix_(perm, perm)], y)
        np.testing.assert_array_equal(base.degrees[perm], moved.degrees)

    @settings(max_examples=60, deadline=None)
    @given(matrices)
    def test_laplacian_rank_is_n_minus_components(self, a):
        d = derive(RankingProblem(None, a))
        k = components(d).count
        lap = np.array(d.laplacian, dtype=float)
        assert np.linalg.matrix_rank(lap) == a.shape[0] - k
        np.testing.assert_array_equal(lap.sum(axis=1), 0)


class TestComponents:
    def test_five_object_example_is_connected(self, five):
        part = components(derive(five))
        assert part.count == 1
        assert list(part.sizes) == [5]

    def test_all_zero_gives_singletons(self):
        part = components(derive(RankingProblem(None, np.zeros((4, 4), dtype=int))))
        assert part.count == 4
        assert list(part.labels) == [0, 1, 2, 3]

    def test_two_blocks(self):
        a = np.zeros((4, 4), dtype=int)
        a[0, 2] = 1
        a[3, 1] = 2
        part = components(derive(RankingProblem(None, a)))
        assert part.count == 2
        assert [list(g) for g in part.groups()] == [[0, 2], [1, 3]]

    def test_direction_is_ignored(self):
        part = components(derive(RankingProblem(None, [[0, 1, 0], [0, 0, 0], [0, 1, 0]])))
        assert part.count == 1
