"""Solvers for Laplacian systems restricted to one connected component."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .exceptions import SolverError


def solve_fraction(matrix: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan elimination over the rationals.

    ``matrix`` must be square and nonsingular; it is not modified.
    """
    n = len(rhs)
    aug = [list(row) + [b] for row, b in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise SolverError("singular reduced system", residual=float("inf"))
        aug[col], aug[pivot] = aug[pivot], aug[col]
        inv = 1 / aug[col][col]
        prow = [v * inv for v in aug[col]]
        aug[col] = prow
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], prow)]
    return [aug[r][n] for r in range(n)]


def reduced_system(lap: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate the last unknown through ``sum(q) = 0``.

    Substituting ``q_last = -sum(q_rest)`` into the first ``c - 1`` rows of
    ``lap @ q = rhs`` gives a nonsingular system for a connected component; the
    dropped row is implied because both ``lap`` and ``rhs`` sum to zero.
    """
    head = lap[:-1, :-1] - lap[:-1, -1:]
    return head, rhs[:-1]


def solve_reduced_exact(lap: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    head, b = reduced_system(lap, rhs)
    q = solve_fraction(head.tolist(), b.tolist())
    last = -sum(q, Fraction(0))
    return np.array(q + [last], dtype=object)


def solve_reduced_dense(lap: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    head, b = reduced_system(lap, rhs)
    q = np.linalg.solve(head, b)
    return np.append(q, -q.sum())


def conjugate_gradient(
    lap: sp.csr_array,
    rhs: np.ndarray,
    *,
    tol: float,
    maxiter: int,
) -> tuple[np.ndarray, float, int]:
    """CG on a consistent singular PSD system, started from zero.

    Iterates stay in the range of ``lap`` so the limit is the minimum-norm
    (zero-sum) solution.  Returns ``(x, residual_norm, iterations)``; raises
    :class:`SolverError` when the budget runs out.
    """
    x = np.zeros_like(rhs)
    r = rhs - rhs.mean()
    p = r.copy()
    rs = float(r @ r)
    target = tol * max(1.0, float(np.linalg.norm(rhs)))
    if np.sqrt(rs) <= target:
        return x, float(np.sqrt(rs)), 0
    for it in range(1, maxiter + 1):
        Ap = lap @ p
        alpha = rs / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        rs_new = float(r @ r)
        if np.sqrt(rs_new) <= target:
            # recompute the true residual; recurrence drift can hide stagnation
            res = float(np.linalg.norm(lap @ x - rhs))
            if res <= target:
                return x, res, it
        p = r + (rs_new / rs) * p
        rs = rs_new
    res = float(np.linalg.norm(lap @ x - rhs))
    raise SolverError(f"conjugate gradient did not converge in {maxiter} iterations", residual=res)
