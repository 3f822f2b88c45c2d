from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import normal_equations_least_squares
from prefrank import (
    IsolatedObjectError,
    RankingProblem,
    SolverError,
    ValidationError,
    derive,
    least_squares,
    normalized_row_sum,
    rank,
    row_sum,
)
from prefrank.graph import ComponentPartition
from prefrank.scoring import ScoreVector, preference_counts, rank_problem, score

F = Fraction

weighted_matrices = st.integers(2, 8).flatmap(
    lambda n: st.lists(
        st.lists(st.integers(0, 12), min_size=n, max_size=n), min_size=n, max_size=n
    )
).map(lambda rows: _clean(rows))


def _clean(rows):
    a = np.array(rows, dtype=np.int64)
    np.fill_diagonal(a, 0)
    return a


class TestFiveObjectExample:
    def test_row_sum(self, five):
        assert list(row_sum(five).values) == [-12, -20, 18, 16, -2]

    def test_normalized_row_sum(self, five):
        p = normalized_row_sum(five).values
        assert list(p) == [F(-20, 60), F(-20, 60), F(15, 60), F(16, 60), F(-10, 60)]
        assert all(isinstance(v, Fraction) for v in p)

    def test_least_squares_exact(self, five):
        q = least_squares(five)
        assert q.exact
        assert list(q.values) == [F(-1, 6), F(-1, 6), F(1, 6), F(1, 6), F(0)]

    def test_least_squares_float_path(self, five):
        q = least_squares(five, exact=False)
        np.testing.assert_allclose(q.values, [-1 / 6, -1 / 6, 1 / 6, 1 / 6, 0], atol=1e-12)

    def test_least_squares_cg_path(self, five):
        q = least_squares(five.to_float(), direct_limit=0)
        np.testing.assert_allclose(q.values, [-1 / 6, -1 / 6, 1 / 6, 1 / 6, 0], atol=1e-9)

    def test_score_lookup_by_key(self, five):
        assert row_sum(five)["X3"] == 18


class TestEdgeCases:
    def test_symmetric_gives_zero_scores(self):
        p = RankingProblem(None, [[0, 3, 1], [3, 0, 2], [1, 2, 0]])
        for fn in (row_sum, normalized_row_sum, least_squares):
            assert all(v == 0 for v in fn(p).values)

    def test_only_wins_gives_one(self):
        p = RankingProblem(None, [[0, 2, 5], [0, 0, 1], [0, 3, 0]])
        assert normalized_row_sum(p)["X1"] == 1

    def test_isolated_object_rejected_by_normalization(self):
        p = RankingProblem(["a", "b", "c"], [[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        with pytest.raises(IsolatedObjectError, match="c"):
            normalized_row_sum(p)

    def test_isolated_object_scores_zero_elsewhere(self):
        p = RankingProblem(["a", "b", "c"], [[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        assert row_sum(p).isolated == ("c",)
        assert least_squares(p)["c"] == 0

    def test_unknown_method(self, five):
        with pytest.raises(ValidationError):
            score(five, "borda")

    def test_exact_needs_exact_problem(self, five):
        with pytest.raises(ValidationError):
            least_squares(five.to_float(), exact=True)

    def test_cg_budget_exhaustion_reports_residual(self, medical):
        with pytest.raises(SolverError) as info:
            least_squares(medical.to_float(), direct_limit=0, max_iter=1)
        assert info.value.residual > 0
        assert info.value.exit_code == 5

    def test_two_components_sum_to_zero_each(self):
        a = np.zeros((5, 5), dtype=int)
        a[0, 1], a[1, 2], a[3, 4] = 4, 1, 2
        q = least_squares(RankingProblem(None, a))
        assert q.partition.count == 2
        assert sum(q.values[:3]) == 0 and sum(q.values[3:]) == 0
        assert q.values[3] == F(1, 2)

    def test_large_component_exact_input_uses_float_solver(self):
        n = 20
        a = np.zeros((n, n), dtype=int)
        for i in range(n - 1):
            a[i, i + 1] = i + 1
        q = least_squares(RankingProblem(None, a))
        assert not q.exact
        np.testing.assert_allclose(q.values, normal_equations_least_squares(a), atol=1e-9)


class TestProperties:
    @settings(max_examples=80, deadline=None)
    @given(weighted_matrices)
    def test_row_sums_cancel_per_component(self, a):
        sv = row_sum(RankingProblem(None, a))
        for g in sv.partition.groups():
            assert sum(sv.values[g]) == 0

    @settings(max_examples=80, deadline=None)
    @given(weighted_matrices)
    def test_normalized_bounded(self, a):
        p = RankingProblem(None, a)
        if any(d == 0 for d in derive(p).degrees):
            return
        assert all(abs(v) <= 1 for v in normalized_row_sum(p).values)

    @settings(max_examples=80, deadline=None)
    @given(weighted_matrices)
    def test_least_squares_matches_oracle(self, a):
        q = least_squares(RankingProblem(None, a)).as_float()
        np.testing.assert_allclose(q, normal_equations_least_squares(a), atol=1e-8)

    @settings(max_examples=50, deadline=None)
    @given(weighted_matrices, st.integers(-5, 5))
    def test_translation_gauge(self, a, shift):
        # shifting a whole component leaves L q = s intact; the solver picks the zero-sum member
        p = RankingProblem(None, a)
        d = derive(p)
        q = least_squares(d)
        lap = np.array(d.laplacian, dtype=object)
        s = row_sum(d).values
        for g in q.partition.groups():
            moved = q.values.copy()
            moved[g] = moved[g] + shift
            assert np.all(lap.dot(moved) == s)
            assert sum(q.values[g]) == 0

    @settings(max_examples=50, deadline=None)
    @given(weighted_matrices, st.randoms(use_true_random=False))
    def test_scores_permute_with_objects(self, a, rnd):
        n = a.shape[0]
        perm = list(range(n))
        rnd.shuffle(perm)
        base = least_squares(RankingProblem(None, a)).values
        moved = least_squares(RankingProblem(None, a[np.ix_(perm, perm)])).values
        assert list(base[perm]) == list(moved)


def _sv(values, objects):
    n = len(objects)
    return ScoreVector("row_sum", tuple(objects), np.array(values, dtype=object),
                       ComponentPartition(np.zeros(n, dtype=np.intp), 1))


class TestRank:
    def test_tie_broken_by_count(self):
        table = rank(_sv([F(1), F(1)], ["a", "b"]), [5, 10])
        assert table.order == ("b", "a")

    def test_full_tie_lexicographic(self):
        table = rank(_sv([F(0)] * 3, ["c", "a", "b"]), {"a": 1, "b": 1, "c": 1})
        assert table.order == ("a", "b", "c")
        assert [r.rank for r in table.rows] == [1, 2, 3]

    def test_missing_counts(self):
        with pytest.raises(ValidationError):
            rank(_sv([F(0)] * 2, ["a", "b"]), {"a": 1})

    def test_float_noise_does_not_break_ties(self):
        sv = ScoreVector("least_squares", ("a", "b"), np.array([0.1 + 0.2, 0.3]),
                         ComponentPartition(np.zeros(2, dtype=np.intp), 1))
        assert rank(sv, [1, 2]).order == ("b", "a")

    def test_medical_row_sum_order(self, medical):
        table = rank_problem(medical, "row_sum")
        assert table.order[0] == "SE-AOK" and table.order[-1] == "PTE-AOK"
        assert table.rank_of("DE-AOK") == 6

    def test_reversed(self, five):
        t = rank_problem(five, "least_squares")
        r = t.reversed()
        assert r.order == tuple(reversed(t.order))
        assert r.rank_of(t.order[0]) == 5

    def test_preference_counts(self, medical):
        assert preference_counts(medical)[0] == 2939
