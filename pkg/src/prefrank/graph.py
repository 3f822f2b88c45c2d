"""Ranking problems and the matrices derived from them.

A ranking problem is an ordered set of objects together with a nonnegative
preference matrix ``A`` whose entry ``a_ij`` measures how strongly object ``i``
is preferred over object ``j``.  From ``A`` follow the skew-symmetric results
matrix ``R = A - A.T``, the symmetric matches matrix ``M = A + A.T``, the
degree vector ``d = M e`` and the graph Laplacian ``L = diag(d) - M``.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction
from typing import Any, Union

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from ._validation import (
    DENSE_PRINT_LIMIT,
    EXACT_MAX_OBJECTS,
    as_matrix,
    check_entries,
    check_square,
    exact_zeros,
    is_exact_array,
    to_fraction,
)
from .exceptions import ValidationError

Matrix = Union[np.ndarray, sp.csr_array]
ObjectRef = Union[int, str]


class RankingProblem:
    """Objects plus a nonnegative preference matrix with zero diagonal.

    Parameters
    ----------
    objects : sequence of str or None
        Object keys in matrix order. ``None`` names them ``X1 .. Xn``.
    matrix : array-like or sparse matrix of shape (n, n)
        Preference intensities.
    exact : bool or "auto"
        Store the matrix as Fractions. ``"auto"`` does so for small integer or
        rational input.

    Instances are immutable.
    """

    __slots__ = ("_objects", "_matrix", "_index")

    def __init__(self, objects: Sequence[Any] | None, matrix: Any, *, exact: bool | str = "auto") -> None:
        m = as_matrix(matrix, exact=exact)
        n = check_square(m)
        check_entries(m)
        if objects is None:
            objects = [f"X{i + 1}" for i in range(n)]
        keys = tuple(str(o) for o in objects)
        if len(keys) != n:
            raise ValidationError(f"{len(keys)} object keys for a {n}x{n} matrix")
        if any(not k for k in keys):
            raise ValidationError("object keys must be nonempty")
        if len(set(keys)) != n:
            dup = sorted({k for k in keys if keys.count(k) > 1})
            raise ValidationError(f"duplicate object keys: {dup}")
        if is_exact_array(m):
            m.setflags(write=False)
        else:
            m.data.flags.writeable = False
        self._objects = keys
        self._matrix = m
        self._index = {k: i for i, k in enumerate(keys)}

    @property
    def objects(self) -> tuple[str, ...]:
        return self._objects

    @property
    def matrix(self) -> Matrix:
        return self._matrix

    @property
    def n(self) -> int:
        return len(self._objects)

    @property
    def exact(self) -> bool:
        return is_exact_array(self._matrix)

    def index(self, obj: ObjectRef) -> int:
        if isinstance(obj, (int, np.integer)):
            if not 0 <= obj < self.n:
                raise ValidationError(f"object index {obj} out of range")
            return int(obj)
        try:
            return self._index[obj]
        except KeyError:
            raise ValidationError(f"unknown object {obj!r}") from None

    def entry(self, i: ObjectRef, j: ObjectRef) -> Any:
        return self._matrix[self.index(i), self.index(j)]

    def to_dense(self) -> np.ndarray:
        """Dense copy: Fractions in exact mode, float64 otherwise."""
        if self.exact:
            return self._matrix.copy()
        return self._matrix.toarray()

    def to_float(self) -> "RankingProblem":
        if not self.exact:
            return self
        return RankingProblem(self._objects, self._matrix.astype(np.float64), exact=False)

    def to_exact(self) -> "RankingProblem":
        if self.exact:
            return self
        return RankingProblem(self._objects, self._matrix.toarray(), exact=True)

    def triplets(self) -> Iterator[tuple[str, str, Any]]:
        """Yield ``(i_key, j_key, value)`` for every positive entry in row-major order."""
        if self.exact:
            rows, cols = np.nonzero(self._matrix != 0)
            for i, j in zip(rows.tolist(), cols.tolist()):
                yield self._objects[i], self._objects[j], self._matrix[i, j]
        else:
            coo = self._matrix.tocoo()
            order = np.lexsort((coo.col, coo.row))
            for k in order:
                yield self._objects[coo.row[k]], self._objects[coo.col[k]], float(coo.data[k])

    def with_entries(self, edits: Mapping[tuple[ObjectRef, ObjectRef], Any]) -> "RankingProblem":
        """Return a copy with the given entries replaced."""
        dense = self.to_dense()
        for (i, j), value in edits.items():
            ii, jj = self.index(i), self.index(j)
            dense[ii, jj] = to_fraction(value) if self.exact else float(value)
        return RankingProblem(self._objects, dense, exact=self.exact)

    def reorder(self, objects: Sequence[ObjectRef]) -> "RankingProblem":
        """Simultaneously permute rows and columns into the given object order."""
        idx = [self.index(o) for o in objects]
        if sorted(idx) != list(range(self.n)):
            raise ValidationError("reorder needs a permutation of all objects")
        return self.subproblem(objects)

    def subproblem(self, objects: Sequence[ObjectRef]) -> "RankingProblem":
        idx = np.array([self.index(o) for o in objects], dtype=np.intp)
        sub = self._matrix[np.ix_(idx, idx)] if self.exact else self._matrix[idx][:, idx]
        return RankingProblem([self._objects[i] for i in idx], sub, exact=self.exact)

    def equals(self, other: "RankingProblem") -> bool:
        if self.objects != other.objects:
            return False
        if self.exact and other.exact:
            return bool(np.all(self._matrix == other._matrix))
        return bool(np.array_equal(self.to_float().to_dense(), other.to_float().to_dense()))

    def __repr__(self) -> str:
        mode = "exact" if self.exact else "float"
        return f"RankingProblem(n={self.n}, {mode}, nnz={_nnz(self._matrix)})"

    def __str__(self) -> str:
        if self.n > DENSE_PRINT_LIMIT:
            return repr(self)
        return format_dense(self.to_dense(), self._objects)


def _nnz(m: Matrix) -> int:
    if is_exact_array(m):
        return int(np.count_nonzero(m != 0))
    return int(m.nnz)


def format_dense(dense: np.ndarray, labels: Sequence[str]) -> str:
    cells = [[str(v) if isinstance(v, Fraction) else f"{v:g}" for v in row] for row in dense]
    width = max([len(c) for row in cells for c in row] + [1])
    lw = max(len(x) for x in labels)
    lines = [f"{lab:<{lw}}  " + " ".join(c.rjust(width) for c in row) for lab, row in zip(labels, cells)]
    return "\n".join(lines)


@dataclass(frozen=True)
class DerivedMatrices:
    """Results, matches, degrees and Laplacian of a ranking problem."""

    problem: RankingProblem
    results: Matrix
    matches: Matrix
    degrees: np.ndarray
    laplacian: Matrix

    @property
    def exact(self) -> bool:
        return self.problem.exact

    @property
    def n(self) -> int:
        return self.problem.n

    @cached_property
    def row_sums(self) -> np.ndarray:
        """``R e``, read-only."""
        if self.exact:
            out = np.array([sum(row, Fraction(0)) for row in self.results], dtype=object)
        else:
            out = np.asarray(self.results.sum(axis=1), dtype=np.float64).ravel()
        out.setflags(write=False)
        return out

    @cached_property
    def partition(self) -> "ComponentPartition":
        """Components of the comparison graph, computed once."""
        return components(self)

    def degree_inverse(self) -> np.ndarray:
        """Diagonal of ``D^-``; zero where the degree is zero."""
        if self.exact:
            return np.array([Fraction(1) / d if d else Fraction(0) for d in self.degrees], dtype=object)
        with np.errstate(divide="ignore"):
            inv = np.where(self.degrees > 0, 1.0 / np.where(self.degrees > 0, self.degrees, 1.0), 0.0)
        return inv

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Index arrays ``(i, j)`` with ``i < j`` and ``m_ij > 0``."""
        if self.exact:
            rows, cols = np.nonzero(self.matches != 0)
        else:
            rows, cols = self.matches.nonzero()
        keep = rows < cols
        return rows[keep], cols[keep]


def derive(problem: RankingProblem) -> DerivedMatrices:
    """Compute ``R``, ``M``, ``d`` and ``L`` for ``problem``.

    Exact problems give exact (Fraction) results.
    """
    A = problem.matrix
    if problem.exact:
        R = A - A.T
        M = A + A.T
        d = M.sum(axis=1)
        d = np.array([Fraction(v) for v in d], dtype=object)
        L = -M
        for i in range(problem.n):
            L[i, i] = d[i]
        for arr in (R, M, d, L):
            arr.setflags(write=False)
        return DerivedMatrices(problem, R, M, d, L)
    At = A.T.tocsr()
    R = (A - At).tocsr()
    M = (A + At).tocsr()
    for arr in (R, M):
        arr.eliminate_zeros()
        arr.sort_indices()
    d = np.asarray(M.sum(axis=1)).ravel()
    L = (sp.diags_array(d, format="csr") - M).tocsr()
    L.sort_indices()
    return DerivedMatrices(problem, R, M, d, L)


@dataclass(frozen=True)
class ComponentPartition:
    """Weakly connected components of the comparison graph.

    ``labels[i]`` is the component id of object ``i``; ids are numbered in
    order of each component's first (lowest-index) object.
    """

    labels: np.ndarray
    count: int

    def members(self, label: int) -> np.ndarray:
        return np.flatnonzero(self.labels == label)

    def groups(self) -> list[np.ndarray]:
        return [self.members(c) for c in range(self.count)]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.count)


def components(derived: DerivedMatrices) -> ComponentPartition:
    """Partition objects by weak connectivity over edges with ``m_ij > 0``."""
    n = derived.n
    rows, cols = derived.edges()
    graph = sp.coo_array((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n))
    _, raw = connected_components(graph, directed=False)
    # relabel by first occurrence so the numbering depends only on object order
    mapping: dict[int, int] = {}
    labels = np.empty(n, dtype=np.intp)
    for i, lab in enumerate(raw.tolist()):
        labels[i] = mapping.setdefault(lab, len(mapping))
    labels.setflags(write=False)
    return ComponentPartition(labels, len(mapping))


def problem_from_triplets(
    triplets: Iterable[tuple[str, str, Any]],
    objects: Sequence[str] | None = None,
    *,
    exact: bool | str = "auto",
) -> RankingProblem:
    """Build a problem from ``(i_key, j_key, value)`` triplets.

    Without an explicit object list the keys are sorted lexicographically.
    Repeated pairs are summed.
    """
    entries: dict[tuple[str, str], Any] = {}
    for i, j, v in triplets:
        entries[i, j] = entries.get((i, j), 0) + v
    keys = list(objects) if objects is not None else sorted({k for pair in entries for k in pair})
    index = {k: n for n, k in enumerate(keys)}
    unknown = sorted({k for pair in entries for k in pair if k not in index})
    if unknown:
        raise ValidationError(f"triplets reference unknown objects: {unknown}")
    n = len(keys)
    values = list(entries.values())
    rational = all(isinstance(v, (int, Fraction)) for v in values)
    if exact is True or (exact == "auto" and rational and n <= EXACT_MAX_OBJECTS):
        dense = exact_zeros((n, n))
        for (i, j), v in entries.items():
            dense[index[i], index[j]] = to_fraction(v)
        return RankingProblem(keys, dense, exact=True)
    rows = [index[i] for i, _ in entries]
    cols = [index[j] for _, j in entries]
    data = [float(v) for v in values]
    return RankingProblem(keys, sp.csr_array((data, (rows, cols)), shape=(n, n)), exact=False)
