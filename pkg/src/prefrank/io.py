"""Reading application records and reading/writing matrices and tables."""

from __future__ import annotations

import csv
import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from ._validation import DENSE_PRINT_LIMIT
from .exceptions import ParseError, ValidationError
from .graph import RankingProblem, problem_from_triplets
from .preferences import ApplicationRecord, financing_class

logger = logging.getLogger(__name__)

REQUIRED_COLUMNS = ("year", "student_id", "position", "faculty", "course", "level", "form", "financing")
OPTIONAL_COLUMNS = ("institution",)
TRIPLET_HEADER = ("i_key", "j_key", "value")


@dataclass(frozen=True)
class Diagnostic:
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"


@dataclass
class RecordFile:
    """Parsed rows of one input file; ``lines[k]`` is the source line of ``records[k]``."""

    path: Path
    records: list[ApplicationRecord] = field(default_factory=list)
    lines: list[int] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    rows: int = 0


def _sniff_delimiter(header: str) -> str:
    return "\t" if "\t" in header else ","


def read_aliases(path: str | Path) -> dict[str, str]:
    """Two-column ``alias,canonical`` mapping file (header optional)."""
    aliases: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8-sig") as fh:
        text = fh.read()
    reader = csv.reader(text.splitlines(), delimiter=_sniff_delimiter(text.split("\n", 1)[0]))
    for n, row in enumerate(reader, start=1):
        if not row or row[0].startswith("#"):
            continue
        if n == 1 and [c.strip().lower() for c in row[:2]] == ["alias", "canonical"]:
            continue
        if len(row) < 2 or not row[0].strip() or not row[1].strip():
            raise ParseError(f"{path}: line {n}: expected 'alias,canonical'")
        aliases[row[0].strip()] = row[1].strip()
    return aliases


def read_roster(path: str | Path) -> list[str]:
    """Object keys, one per line (first column if delimited); ``#`` starts a comment."""
    keys: list[str] = []
    with open(path, encoding="utf-8-sig") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            key = line.split("\t")[0].split(",")[0].strip()
            if key and key not in keys:
                keys.append(key)
    return keys


def read_records(path: str | Path, aliases: Mapping[str, str] | None = None) -> RecordFile:
    """Parse a delimited application file.

    Malformed rows do not abort parsing; they are reported as diagnostics
    with their 1-based line number.  Missing required columns raise
    :class:`ParseError`.
    """
    path = Path(path)
    aliases = aliases or {}
    out = RecordFile(path)
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            first = fh.readline()
            if not first.strip():
                return out
            delimiter = _sniff_delimiter(first)
            fh.seek(0)
            reader = csv.reader(fh, delimiter=delimiter)
            header = [h.strip().lower() for h in next(reader)]
            missing = [c for c in REQUIRED_COLUMNS if c not in header]
            if missing:
                raise ParseError(f"{path}: missing required columns {missing}")
            col = {name: header.index(name) for name in REQUIRED_COLUMNS + OPTIONAL_COLUMNS if name in header}
            for row in reader:
                line = reader.line_num
                if not row or all(not c.strip() for c in row):
                    continue
                out.rows += 1
                try:
                    rec = _parse_row(row, col, aliases)
                except (ValueError, IndexError) as exc:
                    msg = exc.args[0] if isinstance(exc, ValidationError) else str(exc)
                    out.diagnostics.append(Diagnostic(line, str(msg)))
                    continue
                out.records.append(rec)
                out.lines.append(line)
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not valid UTF-8 ({exc.reason})") from None
    except csv.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    return out


def _parse_row(row: Sequence[str], col: Mapping[str, int], aliases: Mapping[str, str]) -> ApplicationRecord:
    if len(row) < len(col):
        raise ValueError(f"expected {len(col)} fields, got {len(row)}")
    get = {name: row[i].strip() for name, i in col.items()}
    for name in ("student_id", "faculty", "course"):
        if not get[name]:
            raise ValueError(f"empty {name}")
    try:
        year = int(get["year"])
    except ValueError:
        raise ValueError(f"bad year {get['year']!r}") from None
    try:
        position = int(get["position"])
    except ValueError:
        raise ValueError(f"bad position {get['position']!r}") from None
    if position < 1:
        raise ValueError(f"position must be >= 1, got {position}")
    financing = financing_class(get["financing"])
    faculty = aliases.get(get["faculty"], get["faculty"])
    institution = get.get("institution") or None
    if institution:
        institution = aliases.get(institution, institution)
    return ApplicationRecord(
        student_id=get["student_id"],
        position=position,
        faculty=faculty,
        course=get["course"],
        level=get["level"],
        form=get["form"],
        financing=financing,
        year=year,
        institution=institution,
    )


def write_records(path: str | Path, records: Iterable[ApplicationRecord], delimiter: str = ",") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(REQUIRED_COLUMNS)
        for r in records:
            w.writerow([r.year, r.student_id, r.position, r.faculty, r.course, r.level, r.form, r.financing])


# --- numbers ----------------------------------------------------------------


def format_value(v: Any) -> str:
    """Exact values as ``p/q`` (or integers), floats in round-trip form."""
    if isinstance(v, Fraction):
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def parse_value(text: str) -> Fraction | float:
    text = text.strip()
    try:
        if "/" in text or text.lstrip("+-").isdigit():
            return Fraction(text)
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad matrix value {text!r}") from None


def format_score(v: Any, decimals: int = 6) -> str:
    return f"{float(v):.{decimals}f}"


def format_count(v: Any) -> str:
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    f = float(v)
    return str(int(f)) if f.is_integer() else f"{f:.6f}"


# --- matrices ---------------------------------------------------------------


def _comment_lines(header: Mapping[str, Any] | None) -> list[str]:
    if not header:
        return []
    return ["# " + " ".join(f"{k}={v}" for k, v in header.items())]


def write_triplets(
    problem: RankingProblem,
    path: str | Path,
    index_path: str | Path | None = None,
    header: Mapping[str, Any] | None = None,
) -> None:
    """Write positive entries as ``i_key,j_key,value`` and the object order as an index file."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _comment_lines(header):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIPLET_HEADER)
        for i, j, v in problem.triplets():
            w.writerow([i, j, format_value(v)])
    if index_path is not None:
        write_index(problem.objects, index_path, header)


def write_index(objects: Sequence[str], path: str | Path, header: Mapping[str, Any] | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _comment_lines(header):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("index", "key"))
        for n, key in enumerate(objects):
            w.writerow((n, key))


def _data_rows(path: Path) -> list[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        lines = [(n, line) for n, line in enumerate(fh, start=1) if line.strip() and not line.startswith("#")]
    if not lines:
        return []
    delimiter = _sniff_delimiter(lines[0][1])
    rows = csv.reader([line for _, line in lines], delimiter=delimiter)
    return [(n, row) for (n, _), row in zip(lines, rows)]


def read_index(path: str | Path) -> list[str]:
    rows = _data_rows(Path(path))
    if rows and [c.strip().lower() for c in rows[0][1]] == ["index", "key"]:
        rows = rows[1:]
    keyed: list[tuple[int, str]] = []
    for n, row in rows:
        if len(row) < 2:
            raise ParseError(f"{path}: line {n}: expected 'index,key'")
        try:
            keyed.append((int(row[0]), row[1].strip()))
        except ValueError:
            raise ParseError(f"{path}: line {n}: bad index {row[0]!r}") from None
    keyed.sort()
    if [k for k, _ in keyed] != list(range(len(keyed))):
        raise ParseError(f"{path}: indices must be 0..n-1 without gaps")
    return [key for _, key in keyed]


def read_triplets(
    path: str | Path, index_path: str | Path | None = None, *, exact: bool | str = "auto"
) -> RankingProblem:
    """Load a triplet file; without an index file objects are ordered lexicographically."""
    path = Path(path)
    rows = _data_rows(path)
    if rows and [c.strip().lower() for c in rows[0][1]] == list(TRIPLET_HEADER):
        rows = rows[1:]
    triplets = []
    for n, row in rows:
        if len(row) != 3:
            raise ParseError(f"{path}: line {n}: expected 3 fields, got {len(row)}")
        triplets.append((row[0].strip(), row[1].strip(), parse_value(row[2])))
    objects = read_index(index_path) if index_path is not None else None
    return problem_from_triplets(triplets, objects, exact=exact)


def _json_value(v: Any) -> Any:
    if isinstance(v, Fraction):
        return v.numerator if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
    return float(v)


def matrix_to_json(problem: RankingProblem) -> dict:
    if problem.n > DENSE_PRINT_LIMIT:
        raise ValidationError(f"dense JSON output is limited to {DENSE_PRINT_LIMIT} objects", module="io")
    return {
        "objects": list(problem.objects),
        "matrix": [[_json_value(v) for v in row] for row in problem.to_dense()],
    }


def write_json_matrix(problem: RankingProblem, path: str | Path, header: Mapping[str, Any] | None = None) -> None:
    doc = {"header": dict(header or {}), **matrix_to_json(problem)}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def read_json_matrix(path: str | Path, *, exact: bool | str = "auto") -> RankingProblem:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        objects, rows = doc["objects"], doc["matrix"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"{path}: not a JSON preference matrix ({exc})") from None
    values = [[parse_value(v) if isinstance(v, str) else v for v in row] for row in rows]
    return RankingProblem(objects, values, exact=exact)


def read_matrix(path: str | Path, index_path: str | Path | None = None) -> RankingProblem:
    """Dispatch on the file suffix: ``.json`` dense matrix, anything else triplets."""
    if Path(path).suffix.lower() == ".json":
        return read_json_matrix(path)
    return read_triplets(path, index_path)


# --- tables -----------------------------------------------------------------


def write_table(
    path: str | Path,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: Mapping[str, Any] | None = None,
    *,
    as_json: bool = False,
) -> Path:
    """Write a table as tab-separated text (or JSON) with one ``#`` header line.

    Returns the path written; the suffix is replaced by ``.json`` in JSON mode.
    """
    path = Path(path)
    rows = [list(r) for r in rows]
    if as_json:
        path = path.with_suffix(".json")
        doc = {"header": dict(header or {}), "columns": list(columns), "rows": rows}
        path.write_text(json.dumps(doc, indent=1, default=str) + "\n", encoding="utf-8")
        return path
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in _comment_lines(header):
            fh.write(line + "\n")
        w = csv.writer(fh, delimiter="\t", lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow(["" if v is None else v for v in r])
    return path


def read_table(path: str | Path) -> tuple[dict[str, str], list[str], list[list[str]]]:
    """Inverse of :func:`write_table` for the delimited form."""
    header: dict[str, str] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = []
    for line in lines:
        if line.startswith("# "):
            for item in line[2:].split(" "):
                k, _, v = item.partition("=")
                header[k] = v
        elif line:
            body.append(line)
    rows = list(csv.reader(body, delimiter="\t"))
    return header, rows[0], rows[1:]
