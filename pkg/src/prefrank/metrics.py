"""How well rankings reflect preferences, and how rankings agree with each other."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

import numpy as np

from .exceptions import ValidationError
from .graph import RankingProblem
from .scoring import RankingTable


@dataclass(frozen=True)
class ContradictionReport:
    """Total weight of preferences that the ranking contradicts."""

    count: Any
    total: Any
    ratio: float


@dataclass(frozen=True)
class CorrelationReport:
    tau: float
    concordant: int
    discordant: int

    @property
    def pairs(self) -> int:
        return self.concordant + self.discordant


def contradictions(problem: RankingProblem, ranking: RankingTable) -> ContradictionReport:
    """Sum of ``a_ij`` over pairs where the ranking puts ``j`` above ``i``."""
    missing = [o for o in problem.objects if o not in ranking.objects]
    if missing:
        raise ValidationError(f"ranking misses objects {missing}", module="metrics")
    pos = {o: ranking.rank_of(o) for o in problem.objects}
    zero: Any = Fraction(0) if problem.exact else 0.0
    count = zero
    total = zero
    for i, j, a in problem.triplets():
        total += a
        if pos[j] < pos[i]:
            count += a
    ratio = float(count / total) if total else 0.0
    return ContradictionReport(count, total, ratio)


def kendall(r1: RankingTable, r2: RankingTable) -> CorrelationReport:
    """Kendall's tau between two strict rankings of the same objects.

    ``tau = (concordant - discordant) / (n (n - 1) / 2)``; no tie correction
    is applied because both rankings are strict.
    """
    if r1.objects != r2.objects:
        only1 = sorted(r1.objects - r2.objects)
        only2 = sorted(r2.objects - r1.objects)
        raise ValidationError(f"rankings differ in objects: {only1} vs {only2}", module="metrics")
    objects = sorted(r1.objects)
    n = len(objects)
    if n < 2:
        return CorrelationReport(1.0, 0, 0)
    a = r1.ranks(objects)
    b = r2.ranks(objects)
    concordant = discordant = 0
    for i in range(n - 1):
        prod = np.sign(a[i + 1:] - a[i]) * np.sign(b[i + 1:] - b[i])
        concordant += int(np.count_nonzero(prod > 0))
        discordant += int(np.count_nonzero(prod < 0))
    tau = (concordant - discordant) / (n * (n - 1) / 2)
    return CorrelationReport(tau, concordant, discordant)


def kendall_table(rankings: Mapping[str, RankingTable]) -> list[list[float | None]]:
    """Upper-triangular matrix of pairwise tau values in insertion order.

    Entries on and below the diagonal are ``None``.
    """
    labels = list(rankings)
    out: list[list[float | None]] = []
    for i, li in enumerate(labels):
        row: list[float | None] = [None] * len(labels)
        for j in range(i + 1, len(labels)):
            row[j] = kendall(rankings[li], rankings[labels[j]]).tau
        out.append(row)
    return out
