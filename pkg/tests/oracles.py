"""Reference computations written independently of the package code."""

import numpy as np


def normal_equations_least_squares(a: np.ndarray) -> np.ndarray:
    """Minimise sum over compared pairs of m_ij (q_i - q_j - r_ij / m_ij)^2.

    Builds the weighted incidence system and takes numpy's minimum-norm
    least-squares solution, which is zero-mean on every component.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    rows, targets, weights = [], [], []
    for i in range(n):
        for j in range(i + 1, n):
            m = a[i, j] + a[j, i]
            if m > 0:
                row = np.zeros(n)
                row[i], row[j] = 1.0, -1.0
                rows.append(row)
                targets.append((a[i, j] - a[j, i]) / m)
                weights.append(np.sqrt(m))
    if not rows:
        return np.zeros(n)
    w = np.array(weights)
    design = np.array(rows) * w[:, None]
    rhs = np.array(targets) * w
    q, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    return q


def brute_force_tau(order1, order2):
    """Kendall tau by enumerating every unordered pair."""
    pos1 = {o: i for i, o in enumerate(order1)}
    pos2 = {o: i for i, o in enumerate(order2)}
    objs = list(order1)
    conc = disc = 0
    for x in range(len(objs)):
        for y in range(x + 1, len(objs)):
            u, v = objs[x], objs[y]
            sign = (pos1[u] - pos1[v]) * (pos2[u] - pos2[v])
            if sign > 0:
                conc += 1
            else:
                disc += 1
    return conc, disc
