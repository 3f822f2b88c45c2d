"""Input validation and number-type helpers."""

from __future__ import annotations

import numbers
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

import numpy as np
import scipy.sparse as sp

from .exceptions import ValidationError

# largest n kept as a dense exact (Fraction) matrix
EXACT_MAX_OBJECTS = 64
# largest n printed or written as a dense matrix
DENSE_PRINT_LIMIT = 64


def is_exact_array(a: Any) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def to_fraction(x: Any) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (numbers.Integral, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        if not np.isfinite(x):
            raise ValidationError(f"non-finite entry {x!r}")
        return Fraction(float(x))
    if isinstance(x, numbers.Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x)
    raise ValidationError(f"cannot convert {x!r} to a rational number")


def exact_array(values: Any) -> np.ndarray:
    """Convert a dense 1-d or 2-d array-like to an object array of Fractions."""
    arr = np.asarray(values, dtype=object)
    out = np.empty(arr.shape, dtype=object)
    for idx, v in np.ndenumerate(arr):
        out[idx] = to_fraction(v)
    return out


def exact_zeros(shape: int | tuple[int, ...]) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out.fill(Fraction(0))
    return out


def _is_rational_like(arr: np.ndarray) -> bool:
    if arr.dtype.kind in "iub":
        return True
    if arr.dtype == object:
        return all(isinstance(v, (numbers.Rational, np.integer)) for v in arr.flat)
    return False


def as_matrix(X: Any, *, exact: bool | str = "auto") -> np.ndarray | sp.csr_array:
    """Coerce ``X`` into the canonical storage of a preference matrix.

    Exact storage is a dense object array of :class:`~fractions.Fraction`;
    inexact storage is a ``scipy.sparse.csr_array`` of float64.

    With ``exact="auto"`` integer or Fraction input of at most
    ``EXACT_MAX_OBJECTS`` rows is stored exactly and everything else as floats.
    """
    if sp.issparse(X):
        if exact is True:
            if X.shape[0] > EXACT_MAX_OBJECTS:
                raise ValidationError(
                    f"exact storage is limited to {EXACT_MAX_OBJECTS} objects"
                )
            return exact_array(X.toarray())
        if exact == "auto" and X.dtype.kind in "iu" and X.shape[0] <= EXACT_MAX_OBJECTS:
            return exact_array(X.toarray())
        out = sp.csr_array(X, dtype=np.float64, copy=True)
        out.eliminate_zeros()
        out.sort_indices()
        return out

    arr = np.asarray(X, dtype=object if _looks_object(X) else None)
    if arr.ndim != 2:
        raise ValidationError(f"preference matrix must be 2-d, got shape {arr.shape}")
    if exact == "auto":
        exact = _is_rational_like(arr) and arr.shape[0] <= EXACT_MAX_OBJECTS
    if exact:
        if arr.shape[0] > EXACT_MAX_OBJECTS:
            raise ValidationError(f"exact storage is limited to {EXACT_MAX_OBJECTS} objects")
        return exact_array(arr)
    try:
        dense = arr.astype(np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"preference matrix is not numeric: {exc}") from None
    out = sp.csr_array(dense)
    out.eliminate_zeros()
    out.sort_indices()
    return out


def _looks_object(X: Any) -> bool:
    if isinstance(X, np.ndarray):
        return X.dtype == object
    if isinstance(X, Sequence):
        for row in X:
            if isinstance(row, Sequence):
                if any(isinstance(v, Fraction) for v in row):
                    return True
    return False


def check_square(matrix: np.ndarray | sp.csr_array) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValidationError(f"preference matrix must be square, got shape {matrix.shape}")
    n = matrix.shape[0]
    if n < 1:
        raise ValidationError("a ranking problem needs at least one object")
    return n


def check_entries(matrix: np.ndarray | sp.csr_array) -> None:
    """Reject negative entries and a nonzero diagonal."""
    if is_exact_array(matrix):
        if any(v < 0 for v in matrix.flat):
            raise ValidationError("preference matrix has negative entries")
        diag = [i for i in range(matrix.shape[0]) if matrix[i, i] != 0]
    else:
        data = matrix.data
        if not np.all(np.isfinite(data)):
            raise ValidationError("preference matrix has non-finite entries")
        if np.any(data < 0):
            raise ValidationError("preference matrix has negative entries")
        diag = np.flatnonzero(matrix.diagonal()).tolist()
    if diag:
        raise ValidationError(f"preference matrix has nonzero diagonal at {diag}")


def check_preference_matrix(X: Any, objects: Sequence[str] | None = None, *, exact: bool | str = "auto"):
    """Validate ``X`` and wrap it into a :class:`~prefrank.graph.RankingProblem`.

    ``X`` may already be a ranking problem, in which case it is returned as is
    (``objects`` must then be omitted).
    """
    from .graph import RankingProblem

    if isinstance(X, RankingProblem):
        if objects is not None and tuple(objects) != X.objects:
            raise ValidationError("objects disagree with the ranking problem")
        return X
    return RankingProblem(objects, X, exact=exact)
