"""Estimator-style wrappers around the functional API.

Scoring is transductive: scores exist only for the objects of the fitted
problem, so rankers expose ``fit``, ``fit_transform`` (scores) and
``fit_predict`` (ranks) like scikit-learn's clustering estimators.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from typing import Any

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_preference_matrix
from .graph import RankingProblem, derive
from .preferences import ApplicationRecord, Granularity, WeightingScheme, aggregate, student_lists
from .scoring import LEAST_SQUARES, NORMALIZED_ROW_SUM, ROW_SUM, least_squares, normalized_row_sum, rank, row_sum


class PreferenceAggregator(TransformerMixin, BaseEstimator):
    """Turn application records into a preference matrix.

    Parameters
    ----------
    scheme : str, default="unweighted"
        ``unweighted``, ``weighted`` or ``moderately_weighted``, optionally
        prefixed with ``adjusted_``.
    granularity : str, default="faculty"
    objects : sequence of str, optional
        Fixed object universe (roster). By default the observed keys.
    exact : bool or "auto", default="auto"
    drop_isolated : bool, default=True

    Attributes
    ----------
    problem_ : RankingProblem
    objects_ : tuple of str
    n_students_ : int
    """

    def __init__(
        self,
        scheme: str = "unweighted",
        granularity: str = "faculty",
        objects: Sequence[str] | None = None,
        exact: bool | str = "auto",
        drop_isolated: bool = True,
    ) -> None:
        self.scheme = scheme
        self.granularity = granularity
        self.objects = objects
        self.exact = exact
        self.drop_isolated = drop_isolated

    def _aggregate(
        self, X: Iterable[ApplicationRecord], objects: Sequence[str] | None, drop_isolated: bool
    ) -> RankingProblem:
        scheme = WeightingScheme.parse(self.scheme)
        lists = student_lists(X, scheme, Granularity(self.granularity))
        self._n_students = len(lists)
        return aggregate(lists, scheme, objects, exact=self.exact, drop_isolated=drop_isolated)

    def fit(self, X: Iterable[ApplicationRecord], y: Any = None) -> "PreferenceAggregator":
        self.problem_ = self._aggregate(list(X), self.objects, self.drop_isolated)
        self.objects_ = self.problem_.objects
        self.n_students_ = self._n_students
        return self

    def transform(self, X: Iterable[ApplicationRecord]) -> RankingProblem:
        """Aggregate new records over the fitted object universe (nothing is dropped)."""
        check_is_fitted(self, "objects_")
        return self._aggregate(list(X), self.objects_, drop_isolated=False)

    def fit_transform(self, X: Iterable[ApplicationRecord], y: Any = None, **fit_params: Any) -> RankingProblem:
        return self.fit(X, y).problem_


class _Ranker(BaseEstimator):
    """Common fit logic; subclasses define ``_score``."""

    method: str

    def fit(self, X: Any, y: Any = None, objects: Sequence[str] | None = None) -> "_Ranker":
        problem = check_preference_matrix(X, objects)
        derived = derive(problem)
        sv = self._score(derived)
        self.problem_ = problem
        self.objects_ = problem.objects
        self.scores_ = sv
        self.components_ = sv.partition
        self.ranking_ = rank(sv, derived.degrees)
        self.ranks_ = self.ranking_.ranks(problem.objects)
        return self

    def fit_transform(self, X: Any, y: Any = None, objects: Sequence[str] | None = None) -> np.ndarray:
        """Fit and return the score vector (Fractions for exact input)."""
        return self.fit(X, y, objects).scores_.values

    def fit_predict(self, X: Any, y: Any = None, objects: Sequence[str] | None = None) -> np.ndarray:
        """Fit and return 1-based strict ranks aligned with the objects."""
        return self.fit(X, y, objects).ranks_


class RowSumRanker(_Ranker):
    """Net preferences ``s = (A - A.T) e``."""

    method = ROW_SUM

    def _score(self, derived):
        return row_sum(derived)


class NormalizedRowSumRanker(_Ranker):
    """Net preferences divided by the number of comparisons."""

    method = NORMALIZED_ROW_SUM

    def _score(self, derived):
        return normalized_row_sum(derived)


class LeastSquaresRanker(_Ranker):
    """Least squares (potential) scores, zero-sum on every component.

    Parameters
    ----------
    tol : float, default=1e-10
        Relative residual tolerance.
    direct_limit : int, default=2000
        Largest component solved by direct factorisation.
    max_iter : int, optional
        Conjugate gradient budget per component (default ``10 * size``).
    exact : bool or "auto", default="auto"
    """

    method = LEAST_SQUARES

    def __init__(
        self,
        tol: float = 1e-10,
        direct_limit: int = 2000,
        max_iter: int | None = None,
        exact: bool | str = "auto",
    ) -> None:
        self.tol = tol
        self.direct_limit = direct_limit
        self.max_iter = max_iter
        self.exact = exact

    def _score(self, derived):
        return least_squares(
            derived, tol=self.tol, direct_limit=self.direct_limit, max_iter=self.max_iter, exact=self.exact
        )


RANKERS = {
    ROW_SUM: RowSumRanker,
    NORMALIZED_ROW_SUM: NormalizedRowSumRanker,
    LEAST_SQUARES: LeastSquaresRanker,
}
