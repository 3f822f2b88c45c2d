import random

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_force_tau
from prefrank import RankingProblem, ValidationError, contradictions, kendall
from prefrank.metrics import kendall_table
from prefrank.scoring import RankingRow, RankingTable, rank_problem


def table(order, method="row_sum"):
    return RankingTable(method, tuple(RankingRow(i + 1, o, 0, 0, 0) for i, o in enumerate(order)))


class TestContradictions:
    def test_agreeing_ranking_has_none(self):
        p = RankingProblem(["a", "b", "c"], [[0, 2, 1], [0, 0, 3], [0, 0, 0]])
        rep = contradictions(p, table(["a", "b", "c"]))
        assert rep.count == 0 and rep.total == 6 and rep.ratio == 0

    def test_reverse_ranking_contradicts_all(self):
        p = RankingProblem(["a", "b", "c"], [[0, 2, 1], [0, 0, 3], [0, 0, 0]])
        assert contradictions(p, table(["c", "b", "a"])).count == 6

    def test_missing_object(self):
        p = RankingProblem(["a", "b"], [[0, 1], [0, 0]])
        with pytest.raises(ValidationError):
            contradictions(p, table(["a"]))

    def test_medical_counts(self, medical):
        rs = contradictions(medical, rank_problem(medical, "row_sum"))
        ls = contradictions(medical, rank_problem(medical, "least_squares"))
        assert (rs.count, ls.count) == (2195, 2253)
        assert rs.count < ls.count

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 7).flatmap(
        lambda n: st.tuples(
            st.lists(st.lists(st.integers(0, 9), min_size=n, max_size=n), min_size=n, max_size=n),
            st.permutations(range(n)),
        )))
    def test_relabel_invariant(self, data):
        rows, perm = data
        a = np.array(rows)
        np.fill_diagonal(a, 0)
        p = RankingProblem(None, a)
        ranking = rank_problem(p, "least_squares")
        rename = {f"X{i + 1}": f"Y{perm[i]}" for i in range(len(perm))}
        q = RankingProblem([rename[o] for o in p.objects], a)
        renamed = table([rename[o] for o in ranking.order])
        assert contradictions(p, ranking).count == contradictions(q, renamed).count


class TestKendall:
    def test_identity_and_reverse(self):
        t = table("abcde")
        assert kendall(t, t).tau == 1
        assert kendall(t, t.reversed()).tau == -1

    def test_one_adjacent_swap(self):
        rep = kendall(table("abcd"), table("abdc"))
        assert (rep.concordant, rep.discordant) == (5, 1)
        assert rep.tau == pytest.approx(2 / 3, abs=1e-15)
        assert brute_force_tau("abcd", "abdc") == (5, 1)

    def test_symmetric(self):
        a, b = table("abcdef"), table("fbdcae")
        assert kendall(a, b) == kendall(b, a)

    def test_object_mismatch(self):
        with pytest.raises(ValidationError):
            kendall(table("abc"), table("abd"))

    def test_single_object(self):
        assert kendall(table("a"), table("a")).tau == 1

    @settings(max_examples=100, deadline=None)
    @given(st.permutations(list("abcdefgh")), st.permutations(list("abcdefgh")))
    def test_matches_references(self, p1, p2):
        rep = kendall(table(p1), table(p2))
        assert (rep.concordant, rep.discordant) == brute_force_tau(p1, p2)
        objs = sorted(p1)
        ref = scipy.stats.kendalltau([p1.index(o) for o in objs], [p2.index(o) for o in objs]).statistic
        assert rep.tau == pytest.approx(ref, abs=1e-12)

    def test_table_upper_triangle(self):
        rankings = {"x": table("abc"), "y": table("acb"), "z": table("cba")}
        t = kendall_table(rankings)
        assert t[0][0] is None and t[1][0] is None
        assert t[0][2] == -1
        assert t[0][1] == pytest.approx(1 / 3)

    def test_medical_tau(self, medical):
        rs = rank_problem(medical, "row_sum")
        ls = rank_problem(medical, "least_squares")
        assert kendall(rs, ls).discordant == 2


def test_random_ties_are_strict():
    rng = random.Random(0)
    a = np.zeros((6, 6), dtype=int)
    for i in range(6):
        for j in range(6):
            if i != j and rng.random() < 0.3:
                a[i, j] = 1
    a = a + a.T
    t = rank_problem(RankingProblem(None, a), "row_sum")
    assert [r.rank for r in t.rows] == list(range(1, 7))
