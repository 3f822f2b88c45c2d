import random
from fractions import Fraction

import numpy as np
import pytest

from prefrank import RankingProblem
from prefrank.datasets import load_five_object_example, load_medical_faculties, single_applicant_records
from prefrank.io import write_records
from prefrank.preferences import ApplicationRecord

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def acceptance_log(request):
    return request.config.stash[ACCEPTANCE_KEY]


@pytest.fixture
def five():
    return load_five_object_example()


@pytest.fixture
def medical():
    return load_medical_faculties()


@pytest.fixture
def example_records():
    return single_applicant_records()


@pytest.fixture
def example_file(tmp_path, example_records):
    path = tmp_path / "example.csv"
    write_records(path, example_records)
    return path


def random_rational_problem(rng: random.Random, n: int, density: float = 0.6) -> RankingProblem:
    """Dense exact problem with small rational entries."""
    rows = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < density:
                rows[i][j] = Fraction(rng.randint(1, 20), rng.randint(1, 6))
    return RankingProblem(None, np.array(rows, dtype=object), exact=True)


FACULTIES = ("F-A", "F-B", "G-C", "G-D", "H-E", "H-F", "J-G")


def random_pool(rng: random.Random, students: int, year: int = 2020, max_len: int = 7) -> list[ApplicationRecord]:
    """Synthetic applicant pool; lists may repeat objects and mix financing."""
    out = []
    for s in range(students):
        length = rng.randint(1, max_len)
        for pos in range(1, length + 1):
            out.append(ApplicationRecord(
                student_id=f"s{s}",
                position=pos,
                faculty=rng.choice(FACULTIES),
                course=rng.choice(("med", "dent")),
                level="O",
                form="N",
                financing=rng.choice("AK"),
                year=year,
            ))
    return out


def write_pool_file(path, seed: int = 0, years=(2015, 2016), students: int = 60) -> list[ApplicationRecord]:
    rng = random.Random(seed)
    records = [r for y in years for r in random_pool(rng, students, year=y)]
    write_records(path, records)
    return records


@pytest.fixture
def pool_file(tmp_path):
    path = tmp_path / "pool.csv"
    write_pool_file(path)
    return path


@pytest.fixture
def medical_files(tmp_path, medical):
    from prefrank.io import write_triplets

    trip, idx = tmp_path / "medical.csv", tmp_path / "medical.index.csv"
    write_triplets(medical, trip, idx)
    return trip, idx
