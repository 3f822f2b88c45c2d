"""Small published instances used as fixtures and demos."""

from __future__ import annotations

from .graph import RankingProblem

FIVE_OBJECT_MATRIX = (
    (0, 0, 6, 6, 0),
    (0, 0, 10, 10, 0),
    (12, 20, 0, 6, 7),
    (12, 20, 6, 0, 0),
    (0, 0, 5, 0, 0),
)

MEDICAL_FACULTIES = ("DE-AOK", "DE-FOK", "PTE-AOK", "SE-AOK", "SE-FOK", "SZTE-AOK", "SZTE-FOK")

# unweighted preference matrix of the Hungarian Dentistry and Medicine faculties, 2016
MEDICAL_FACULTIES_2016 = (
    (0, 138, 506, 127, 53, 308, 43),
    (146, 0, 144, 21, 37, 52, 76),
    (270, 87, 0, 140, 84, 273, 83),
    (634, 72, 778, 0, 244, 874, 68),
    (109, 178, 258, 101, 0, 129, 204),
    (560, 58, 835, 132, 49, 0, 72),
    (45, 137, 200, 17, 32, 122, 0),
)

# one applicant's list: position, faculty, course, level, form, financing
SINGLE_APPLICANT_RECORDS = (
    (1, "SE-AOK", "Medicine", "O", "N", "A"),
    (2, "PTE-AOK", "Medicine", "O", "N", "A"),
    (3, "DE-AOK", "Medicine", "O", "N", "K"),
    (4, "SE-AOK", "Medicine", "O", "N", "A"),
    (5, "SE-FOK", "Dentistry", "O", "N", "K"),
)


def load_five_object_example() -> RankingProblem:
    """Five objects where X2 is a 5/3-scaled copy of X1 and X3 is a bridge player."""
    return RankingProblem(["X1", "X2", "X3", "X4", "X5"], FIVE_OBJECT_MATRIX, exact=True)


def load_medical_faculties() -> RankingProblem:
    return RankingProblem(MEDICAL_FACULTIES, MEDICAL_FACULTIES_2016, exact=True)


def single_applicant_records(student_id: str = "s1", year: int = 2016) -> list:
    from .preferences import ApplicationRecord

    return [
        ApplicationRecord(
            student_id=student_id,
            position=pos,
            faculty=fac,
            course=course,
            level=level,
            form=form,
            financing=fin,
            year=year,
        )
        for pos, fac, course, level, form, fin in SINGLE_APPLICANT_RECORDS
    ]
