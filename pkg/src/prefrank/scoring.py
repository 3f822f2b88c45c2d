"""Row sum, normalised row sum and least squares scores, and strict rankings."""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from ._linalg import conjugate_gradient, solve_reduced_dense, solve_reduced_exact
from .exceptions import IsolatedObjectError, SolverError, ValidationError
from .graph import ComponentPartition, DerivedMatrices, RankingProblem, derive

ROW_SUM = "row_sum"
NORMALIZED_ROW_SUM = "normalized_row_sum"
LEAST_SQUARES = "least_squares"
METHODS = (ROW_SUM, NORMALIZED_ROW_SUM, LEAST_SQUARES)

TIE_BREAK = "score desc, preference_count desc, object asc"

# components up to this size are solved over the rationals when the input is exact
EXACT_SOLVE_MAX = 16


@dataclass(frozen=True)
class ScoreVector:
    """Scores of one method, aligned with ``objects``.

    ``values`` holds Fractions when computed exactly and float64 otherwise.
    ``isolated`` lists objects without any comparison; they score 0.
    """

    method: str
    objects: tuple[str, ...]
    values: np.ndarray
    partition: ComponentPartition
    isolated: tuple[str, ...] = ()
    residual: float = 0.0

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def as_float(self) -> np.ndarray:
        return self.values.astype(np.float64)

    def __getitem__(self, obj: str) -> Any:
        return self.values[self.objects.index(obj)]

    def __len__(self) -> int:
        return len(self.objects)


def _derived(problem_or_derived: RankingProblem | DerivedMatrices) -> DerivedMatrices:
    if isinstance(problem_or_derived, DerivedMatrices):
        return problem_or_derived
    if isinstance(problem_or_derived, RankingProblem):
        return derive(problem_or_derived)
    raise TypeError(f"expected RankingProblem or DerivedMatrices, got {type(problem_or_derived).__name__}")


def _isolated(derived: DerivedMatrices) -> tuple[str, ...]:
    return tuple(o for o, d in zip(derived.problem.objects, derived.degrees) if d == 0)


def _row_sums(derived: DerivedMatrices) -> np.ndarray:
    return derived.row_sums


def row_sum(derived: RankingProblem | DerivedMatrices, partition: ComponentPartition | None = None) -> ScoreVector:
    """Net preferences ``s = R e``."""
    derived = _derived(derived)
    partition = partition or derived.partition
    return ScoreVector(ROW_SUM, derived.problem.objects, _row_sums(derived), partition, _isolated(derived))


def normalized_row_sum(
    derived: RankingProblem | DerivedMatrices, partition: ComponentPartition | None = None
) -> ScoreVector:
    """Net preferences divided by the degree, ``p_i = s_i / d_i``.

    Raises :class:`IsolatedObjectError` if any object has degree zero.
    """
    derived = _derived(derived)
    isolated = _isolated(derived)
    if isolated:
        raise IsolatedObjectError(list(isolated))
    s = _row_sums(derived)
    if derived.exact:
        p = np.array([si / di for si, di in zip(s, derived.degrees)], dtype=object)
    else:
        p = s / derived.degrees
    partition = partition or derived.partition
    return ScoreVector(NORMALIZED_ROW_SUM, derived.problem.objects, p, partition)


def least_squares(
    derived: RankingProblem | DerivedMatrices,
    partition: ComponentPartition | None = None,
    *,
    tol: float = 1e-10,
    direct_limit: int = 2000,
    max_iter: int | None = None,
    exact: bool | str = "auto",
) -> ScoreVector:
    """Least squares scores: the zero-sum-per-component solution of ``L q = s``.

    Parameters
    ----------
    derived : RankingProblem or DerivedMatrices
    partition : ComponentPartition, optional
        Components of the comparison graph; computed when omitted.
    tol : float
        Relative residual bound ``||L q - s|| <= tol * max(1, ||s||)``.
    direct_limit : int
        Components up to this size are solved by dense factorisation of the
        reduced system, larger ones by conjugate gradient.
    max_iter : int, optional
        CG iteration budget per component; defaults to ``10 * size``.
    exact : bool or "auto"
        Solve over the rationals. ``"auto"`` does so for exact input whose
        components have at most 16 objects.

    Raises
    ------
    SolverError
        The residual bound is not met.
    """
    derived = _derived(derived)
    partition = partition or derived.partition
    if partition.labels.shape[0] != derived.n:
        raise ValidationError("partition does not match the problem size", module="scoring")
    s = _row_sums(derived)
    groups = [g for g in partition.groups() if len(g) > 1]

    if exact == "auto":
        exact = derived.exact and all(len(g) <= EXACT_SOLVE_MAX for g in groups)
    elif exact and not derived.exact:
        raise ValidationError("exact least squares needs an exact problem", module="scoring")

    if exact:
        q = np.array([Fraction(0)] * derived.n, dtype=object)
        lap = derived.laplacian
        for g in groups:
            q[g] = solve_reduced_exact(lap[np.ix_(g, g)], s[g])
        return ScoreVector(LEAST_SQUARES, derived.problem.objects, q, partition, _isolated(derived))

    lap = derived.laplacian
    if derived.exact:
        lap_f = lap.astype(np.float64)
        s_f = s.astype(np.float64)
    else:
        lap_f = lap
        s_f = s
    q = np.zeros(derived.n)
    for g in groups:
        size = len(g)
        if derived.exact:
            sub = lap_f[np.ix_(g, g)]
        else:
            sub = lap_f[g][:, g]
        if size <= direct_limit:
            dense = sub if isinstance(sub, np.ndarray) else sub.toarray()
            qg = solve_reduced_dense(dense, s_f[g])
        else:
            budget = max_iter if max_iter is not None else 10 * size
            qg, _, _ = conjugate_gradient(sub.tocsr(), s_f[g], tol=tol, maxiter=budget)
        q[g] = qg - qg.mean()

    residual = float(np.linalg.norm(lap_f @ q - s_f))
    if residual > tol * max(1.0, float(np.linalg.norm(s_f))):
        raise SolverError("least squares residual above tolerance", residual=residual)
    return ScoreVector(LEAST_SQUARES, derived.problem.objects, q, partition, _isolated(derived), residual)


SCORERS = {
    ROW_SUM: row_sum,
    NORMALIZED_ROW_SUM: normalized_row_sum,
    LEAST_SQUARES: least_squares,
}


def score(problem: RankingProblem | DerivedMatrices, method: str, **kwargs: Any) -> ScoreVector:
    """Dispatch to one of :data:`METHODS` by name."""
    try:
        func = SCORERS[method]
    except KeyError:
        raise ValidationError(f"unknown method {method!r}; choose from {METHODS}", module="scoring") from None
    return func(problem, **kwargs)


def preference_counts(problem: RankingProblem | DerivedMatrices) -> np.ndarray:
    """Row plus column mass ``sum_j (a_ij + a_ji)`` of every object."""
    return _derived(problem).degrees


@dataclass(frozen=True)
class RankingRow:
    rank: int
    object: str
    score: Any
    preference_count: Any
    component: int


@dataclass(frozen=True)
class RankingTable:
    """Strict ranking after tie-breaking, best object first."""

    method: str
    rows: tuple[RankingRow, ...]
    tie_break: str = TIE_BREAK
    _position: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_position", {r.object: r.rank for r in self.rows})

    @property
    def order(self) -> tuple[str, ...]:
        return tuple(r.object for r in self.rows)

    @property
    def objects(self) -> frozenset[str]:
        return frozenset(self._position)

    def rank_of(self, obj: str) -> int:
        try:
            return self._position[obj]
        except KeyError:
            raise ValidationError(f"object {obj!r} is not ranked", module="metrics") from None

    def ranks(self, objects: Sequence[str]) -> np.ndarray:
        return np.array([self.rank_of(o) for o in objects], dtype=np.intp)

    def __len__(self) -> int:
        return len(self.rows)

    def reversed(self) -> "RankingTable":
        n = len(self.rows)
        rows = [
            RankingRow(n - r.rank + 1, r.object, r.score, r.preference_count, r.component)
            for r in reversed(self.rows)
        ]
        return RankingTable(self.method, tuple(rows), self.tie_break)


def _sort_key(value: Any) -> Any:
    if isinstance(value, Fraction):
        return value
    # 12 significant digits absorb last-bit noise between equal float scores
    return float(f"{float(value):.12g}")


def rank(scores: ScoreVector, preference_counts: Sequence[Any] | Mapping[str, Any]) -> RankingTable:
    """Order objects by score, then preference count (both descending), then key."""
    objects = scores.objects
    if isinstance(preference_counts, Mapping):
        missing = [o for o in objects if o not in preference_counts]
        if missing:
            raise ValidationError(f"preference counts missing for {missing}", module="scoring")
        counts = [preference_counts[o] for o in objects]
    else:
        counts = list(preference_counts)
        if len(counts) != len(objects):
            raise ValidationError("preference counts do not cover all objects", module="scoring")
    labels = scores.partition.labels
    order = sorted(
        range(len(objects)),
        key=lambda i: (-_sort_key(scores.values[i]), -_sort_key(counts[i]), objects[i]),
    )
    rows = tuple(
        RankingRow(pos + 1, objects[i], scores.values[i], counts[i], int(labels[i]))
        for pos, i in enumerate(order)
    )
    return RankingTable(scores.method, rows)


def rank_problem(problem: RankingProblem, method: str, **kwargs: Any) -> RankingTable:
    derived = derive(problem)
    return rank(score(derived, method, **kwargs), derived.degrees)
