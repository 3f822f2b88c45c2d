"""Recover partial preferences from ranked application lists and aggregate them.

A student prefers every object on the list to every object at a worse
position; nothing is inferred about objects that are not on the list.  When
the same object appears more than once only its first appearance is kept.
"""

from __future__ import annotations

import enum
import math
import warnings
from collections import Counter, defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Union

import numpy as np
import scipy.sparse as sp

from ._validation import EXACT_MAX_OBJECTS, exact_zeros
from .exceptions import ValidationError
from .graph import RankingProblem

STATE = "state"
STUDENT = "student"

# "A" and "K" are the Hungarian admission codes for state- and student-financed places
FINANCING_TOKENS = {
    "state": STATE,
    "a": STATE,
    "student": STUDENT,
    "k": STUDENT,
}


class DroppedObjectsWarning(UserWarning):
    """Objects without any preference were removed from a preference matrix."""


class Granularity(str, enum.Enum):
    FACULTY = "faculty"
    COURSE = "course"
    INSTITUTION = "institution"
    PROGRAMME = "programme"


def financing_class(token: str) -> str:
    """Map a financing token to ``"state"`` or ``"student"``."""
    try:
        return FINANCING_TOKENS[str(token).strip().lower()]
    except KeyError:
        raise ValidationError(f"unknown financing token {token!r}", module="prefmodel") from None


@dataclass(frozen=True)
class ApplicationRecord:
    """One row of an applicant's ranked list (position 1 is the favourite)."""

    student_id: str
    position: int
    faculty: str
    course: str
    level: str
    form: str
    financing: str
    year: int | None = None
    institution: str | None = None

    def __post_init__(self) -> None:
        if isinstance(self.position, bool) or not isinstance(self.position, (int, np.integer)):
            raise ValidationError(f"position must be an integer, got {self.position!r}", module="prefmodel")
        if self.position < 1:
            raise ValidationError(f"position must be >= 1, got {self.position}", module="prefmodel")
        if not str(self.student_id):
            raise ValidationError("empty student id", module="prefmodel")


def object_key(record: ApplicationRecord, granularity: Granularity | str) -> str:
    """Key of the object a record refers to at the given granularity."""
    g = Granularity(granularity)
    if g is Granularity.FACULTY:
        key = record.faculty
    elif g is Granularity.COURSE:
        key = record.course
    elif g is Granularity.INSTITUTION:
        key = record.institution or record.faculty.split("-", 1)[0]
    else:
        key = "|".join((record.faculty, record.course, record.level, record.form))
    if not key:
        raise ValidationError(f"empty {g.value} key for student {record.student_id}", module="prefmodel")
    return key


@dataclass(frozen=True)
class StudentPreferenceList:
    """Distinct objects of one student, most preferred first."""

    student_id: str
    objects: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.objects)) != len(self.objects):
            raise ValidationError(f"repeated object in list of {self.student_id}", module="prefmodel")

    @property
    def length(self) -> int:
        return len(self.objects)

    @property
    def k(self) -> int:
        """Number of revealed pairwise preferences."""
        n = len(self.objects)
        return n * (n - 1) // 2

    def pairs(self) -> Iterable[tuple[str, str]]:
        """Yield ``(better, worse)`` for every revealed preference."""
        return combinations(self.objects, 2)


def _sorted_records(records: Sequence[ApplicationRecord]) -> list[ApplicationRecord]:
    ids = {r.student_id for r in records}
    if len(ids) > 1:
        raise ValidationError(f"records of several students given: {sorted(ids)}", module="prefmodel")
    ordered = sorted(records, key=lambda r: r.position)
    counts = Counter(r.position for r in ordered)
    dups = sorted(p for p, c in counts.items() if c > 1)
    if dups:
        sid = ordered[0].student_id
        raise ValidationError(f"student {sid}: duplicate positions {dups}", module="prefmodel")
    return ordered


def _dedup(keys: Iterable[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(keys))


def derive_preferences(
    records: Sequence[ApplicationRecord], granularity: Granularity | str = Granularity.FACULTY
) -> StudentPreferenceList:
    """Truncated preference list of one student.

    Examples
    --------
    >>> from prefrank.datasets import single_applicant_records
    >>> derive_preferences(single_applicant_records()).objects
    ('SE-AOK', 'PTE-AOK', 'DE-AOK', 'SE-FOK')
    """
    if not records:
        return StudentPreferenceList("", ())
    ordered = _sorted_records(records)
    keys = _dedup(object_key(r, granularity) for r in ordered)
    return StudentPreferenceList(ordered[0].student_id, keys)


def derive_preferences_adjusted(
    records: Sequence[ApplicationRecord], granularity: Granularity | str = Granularity.FACULTY
) -> tuple[StudentPreferenceList, StudentPreferenceList]:
    """Preference lists derived separately for state- and student-financed records."""
    if not records:
        return StudentPreferenceList("", ()), StudentPreferenceList("", ())
    ordered = _sorted_records(records)
    sid = ordered[0].student_id
    parts: dict[str, list[str]] = {STATE: [], STUDENT: []}
    for r in ordered:
        parts[financing_class(r.financing)].append(object_key(r, granularity))
    return (
        StudentPreferenceList(sid, _dedup(parts[STATE])),
        StudentPreferenceList(sid, _dedup(parts[STUDENT])),
    )


class Weighting(str, enum.Enum):
    UNWEIGHTED = "unweighted"
    WEIGHTED = "weighted"
    MODERATELY_WEIGHTED = "moderately_weighted"


@dataclass(frozen=True)
class WeightingScheme:
    """Per-student weight rule, optionally applied per financing class."""

    weighting: Weighting = Weighting.UNWEIGHTED
    adjusted: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "weighting", Weighting(self.weighting))

    @classmethod
    def parse(cls, name: "str | WeightingScheme") -> "WeightingScheme":
        """Parse ``"weighted"``, ``"adjusted_unweighted"`` and the like."""
        if isinstance(name, WeightingScheme):
            return name
        text = str(name).strip().lower().replace("-", "_")
        adjusted = text.startswith("adjusted_")
        if adjusted:
            text = text[len("adjusted_"):]
        try:
            return cls(Weighting(text), adjusted)
        except ValueError:
            raise ValidationError(f"unknown weighting scheme {name!r}", module="prefmodel") from None

    @property
    def name(self) -> str:
        return ("adjusted_" if self.adjusted else "") + self.weighting.value

    def weight(self, lst: StudentPreferenceList) -> Fraction:
        """Weight of each preference revealed by ``lst`` (0 if it reveals none)."""
        if lst.length < 2:
            return Fraction(0)
        if self.weighting is Weighting.UNWEIGHTED:
            return Fraction(1)
        if self.weighting is Weighting.WEIGHTED:
            return Fraction(1, lst.k)
        return Fraction(1, lst.length - 1)


SCHEMES = tuple(
    WeightingScheme(w, adj) for adj in (False, True) for w in Weighting
)

ListOrPair = Union[StudentPreferenceList, tuple[StudentPreferenceList, StudentPreferenceList]]


def _flatten(lists: Iterable[ListOrPair]) -> Iterable[StudentPreferenceList]:
    for item in lists:
        if isinstance(item, StudentPreferenceList):
            yield item
        else:
            yield from item


def aggregate(
    lists: Iterable[ListOrPair],
    scheme: WeightingScheme | str = "unweighted",
    objects: Sequence[str] | None = None,
    *,
    exact: bool | str = "auto",
    max_denominator: int = 10**12,
    drop_isolated: bool = True,
) -> RankingProblem:
    """Sum weighted individual preferences into one preference matrix.

    Parameters
    ----------
    lists : iterable
        Student lists, or ``(state, student)`` pairs from
        :func:`derive_preferences_adjusted`. Each list is weighted on its own,
        so passing the financing partitions yields the adjusted matrix.
    scheme : WeightingScheme or str
    objects : sequence of str, optional
        Object universe in matrix order. Defaults to every observed key in
        lexicographic order.
    exact : bool or "auto"
        Keep Fraction entries. ``"auto"`` does so for at most 64 objects when
        no entry denominator exceeds ``max_denominator``.
    drop_isolated : bool
        Remove objects with no preference at all (emits
        :class:`DroppedObjectsWarning`).
    """
    scheme = WeightingScheme.parse(scheme)
    flat = list(_flatten(lists))
    observed = {o for lst in flat for o in lst.objects}
    if objects is None:
        universe = sorted(observed)
    else:
        universe = list(objects)
        unknown = sorted(observed.difference(universe))
        if unknown:
            raise ValidationError(f"lists reference objects outside the universe: {unknown}", module="prefmodel")
    if not universe:
        raise ValidationError("no objects to aggregate", module="prefmodel")

    # entry -> {weight denominator: number of students}; keeps the sum exact and cheap
    acc: dict[tuple[str, str], dict[int, int]] = defaultdict(lambda: defaultdict(int))
    for lst in flat:
        w = scheme.weight(lst)
        if not w:
            continue
        den = w.denominator
        for pair in lst.pairs():
            acc[pair][den] += 1

    if drop_isolated:
        touched = {o for pair in acc for o in pair}
        dropped = [o for o in universe if o not in touched]
        if dropped:
            warnings.warn(
                f"dropping {len(dropped)} object(s) without preferences: {dropped}",
                DroppedObjectsWarning,
                stacklevel=2,
            )
            universe = [o for o in universe if o in touched]
            if not universe:
                raise ValidationError("no object has any preference", module="prefmodel")

    index = {o: i for i, o in enumerate(universe)}
    n = len(universe)
    entries = {
        pair: sum((Fraction(c, den) for den, c in sorted(dens.items())), Fraction(0))
        for pair, dens in acc.items()
    }
    if exact == "auto":
        lcm = 1
        for dens in acc.values():
            for den in dens:
                lcm = math.lcm(lcm, den)
        exact = n <= EXACT_MAX_OBJECTS and lcm <= max_denominator

    if exact:
        dense = exact_zeros((n, n))
        for (a, b), v in entries.items():
            dense[index[a], index[b]] = v
        return RankingProblem(universe, dense, exact=True)
    keys = sorted(entries, key=lambda p: (index[p[0]], index[p[1]]))
    rows = np.array([index[a] for a, _ in keys], dtype=np.intp)
    cols = np.array([index[b] for _, b in keys], dtype=np.intp)
    data = np.array([float(entries[p]) for p in keys], dtype=np.float64)
    return RankingProblem(universe, sp.csr_array((data, (rows, cols)), shape=(n, n)), exact=False)


def group_by_student(records: Iterable[ApplicationRecord]) -> dict[str, list[ApplicationRecord]]:
    """Group records by student id, keeping first-seen order of students."""
    groups: dict[str, list[ApplicationRecord]] = {}
    for r in records:
        groups.setdefault(r.student_id, []).append(r)
    return groups


def student_lists(
    records: Iterable[ApplicationRecord],
    scheme: WeightingScheme | str = "unweighted",
    granularity: Granularity | str = Granularity.FACULTY,
) -> list[ListOrPair]:
    """Derive per-student lists (pairs for adjusted schemes) from raw records."""
    scheme = WeightingScheme.parse(scheme)
    derive_one = derive_preferences_adjusted if scheme.adjusted else derive_preferences
    return [derive_one(group, granularity) for group in group_by_student(records).values()]
