"""End-to-end runs: records -> matrices -> scores -> rankings -> evaluation tables.

Years are processed independently.  Every output file starts with one
``#`` header line recording the config hash and the scheme/method it holds.
"""

from __future__ import annotations

import hashlib
import json
import logging
import warnings
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from . import __version__
from .axioms import AxiomVerdict, verdict_grid
from .exceptions import ValidationError
from .graph import RankingProblem, derive
from .io import (
    Diagnostic,
    format_count,
    format_score,
    read_aliases,
    read_matrix,
    read_records,
    read_roster,
    write_json_matrix,
    write_table,
    write_triplets,
)
from .metrics import ContradictionReport, contradictions, kendall_table
from .preferences import (
    ApplicationRecord,
    DroppedObjectsWarning,
    Granularity,
    StudentPreferenceList,
    WeightingScheme,
    aggregate,
    derive_preferences,
    derive_preferences_adjusted,
)
from .scoring import METHODS, RankingTable, ScoreVector, rank, score

logger = logging.getLogger(__name__)

MATRIX_YEAR = "matrix"
INPUT_SCHEME = "input"


@dataclass(frozen=True)
class RunConfig:
    """Settings of one pipeline run."""

    inputs: tuple[str, ...] = ()
    matrix_in: str | None = None
    index_in: str | None = None
    granularity: str = Granularity.FACULTY.value
    schemes: tuple[str, ...] = ("unweighted",)
    methods: tuple[str, ...] = METHODS
    years: tuple[int, ...] | None = None
    output_dir: str = "prefrank-out"
    tol: float = 1e-10
    direct_limit: int = 2000
    max_iter: int | None = None
    seed: int = 0
    trials: int = 200
    max_bad_ratio: float = 0.01
    roster: str | None = None
    aliases: str | None = None
    json: bool = False
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.schemes:
            raise ValidationError("at least one weighting scheme is required", module="cli")
        if not self.methods:
            raise ValidationError("at least one scoring method is required", module="cli")
        for m in self.methods:
            if m not in METHODS:
                raise ValidationError(f"unknown method {m!r}", module="cli")
        for s in self.schemes:
            WeightingScheme.parse(s)
        Granularity(self.granularity)
        if not self.tol > 0:
            raise ValidationError("tolerance must be positive", module="cli")
        if self.direct_limit < 0 or self.trials < 0 or self.jobs < 1:
            raise ValidationError("direct_limit and trials must be >= 0, jobs >= 1", module="cli")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValidationError("max_iter must be >= 1", module="cli")
        if not 0 <= self.max_bad_ratio <= 1:
            raise ValidationError("max_bad_ratio must lie in [0, 1]", module="cli")

    def config_hash(self) -> str:
        """Short digest of every setting that influences output content."""
        fields = asdict(self)
        fields.pop("output_dir")
        fields.pop("jobs")
        blob = json.dumps(fields, sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class YearStats:
    year: int
    applicants: int
    contributing: int
    unweighted: int
    weighted: int
    adjusted_unweighted: int
    objects: int


@dataclass
class IngestResult:
    """Records grouped by year and student, plus per-year statistics."""

    students: dict[int, dict[str, list[ApplicationRecord]]] = field(default_factory=dict)
    stats: dict[int, YearStats] = field(default_factory=dict)
    diagnostics: list[tuple[str, Diagnostic]] = field(default_factory=list)
    rows: int = 0
    roster: list[str] | None = None

    def lists(self, year: int, scheme: WeightingScheme | str, granularity: str) -> list[Any]:
        scheme = WeightingScheme.parse(scheme)
        derive_one = derive_preferences_adjusted if scheme.adjusted else derive_preferences
        return [derive_one(recs, granularity) for recs in self.students[year].values()]


def _year_stats(year: int, students: dict[str, list[ApplicationRecord]], granularity: str) -> YearStats:
    plain: list[StudentPreferenceList] = [derive_preferences(r, granularity) for r in students.values()]
    adjusted = [derive_preferences_adjusted(r, granularity) for r in students.values()]
    objects = {o for lst in plain for o in lst.objects}
    return YearStats(
        year=year,
        applicants=len(students),
        contributing=sum(1 for lst in plain if lst.k > 0),
        unweighted=sum(lst.k for lst in plain),
        weighted=sum(1 for lst in plain if lst.k > 0),
        adjusted_unweighted=sum(a.k + b.k for a, b in adjusted),
        objects=len(objects),
    )


def ingest(paths: Sequence[str | Path], config: RunConfig) -> IngestResult:
    """Parse record files, group them per year and student, and summarise.

    Students whose list repeats a position are rejected with one diagnostic
    per row.  The run aborts with :class:`ValidationError` when the share of
    rejected rows exceeds ``config.max_bad_ratio``.
    """
    aliases = read_aliases(config.aliases) if config.aliases else None
    result = IngestResult(roster=read_roster(config.roster) if config.roster else None)
    by_year: dict[int, dict[str, list[tuple[str, int, ApplicationRecord]]]] = defaultdict(dict)
    for path in paths:
        parsed = read_records(path, aliases)
        result.rows += parsed.rows
        result.diagnostics.extend((str(path), d) for d in parsed.diagnostics)
        for rec, line in zip(parsed.records, parsed.lines):
            if config.years is not None and rec.year not in config.years:
                continue
            by_year[rec.year].setdefault(rec.student_id, []).append((str(path), line, rec))

    for year in sorted(by_year):
        kept: dict[str, list[ApplicationRecord]] = {}
        for sid, items in by_year[year].items():
            positions = [rec.position for _, _, rec in items]
            if len(set(positions)) != len(positions):
                for path, line, rec in items:
                    result.diagnostics.append(
                        (path, Diagnostic(line, f"student {sid} year {year}: duplicate position {rec.position}"))
                    )
                continue
            kept[sid] = [rec for _, _, rec in items]
        result.students[year] = kept
        result.stats[year] = _year_stats(year, kept, config.granularity)

    bad = len(result.diagnostics)
    for path, diag in result.diagnostics:
        logger.warning("%s: %s", path, diag)
    if result.rows == 0:
        logger.warning("no application records found")
    elif bad / result.rows > config.max_bad_ratio:
        raise ValidationError(
            f"{bad} of {result.rows} rows rejected, above the allowed ratio {config.max_bad_ratio}",
            module="ingest",
        )
    return result


@dataclass
class YearResult:
    year: int | str
    problems: dict[str, RankingProblem] = field(default_factory=dict)
    scores: dict[tuple[str, str], ScoreVector] = field(default_factory=dict)
    rankings: dict[tuple[str, str], RankingTable] = field(default_factory=dict)
    contradictions: dict[tuple[str, str], ContradictionReport] = field(default_factory=dict)
    dropped: dict[str, list[str]] = field(default_factory=dict)


@dataclass
class Bundle:
    config: RunConfig
    years: dict[int | str, YearResult] = field(default_factory=dict)
    ingest: IngestResult | None = None
    axioms: dict | None = None
    files: list[Path] = field(default_factory=list)


def build_problems(ingested: IngestResult, year: int, config: RunConfig) -> tuple[dict[str, RankingProblem], dict[str, list[str]]]:
    problems: dict[str, RankingProblem] = {}
    dropped: dict[str, list[str]] = {}
    for name in config.schemes:
        scheme = WeightingScheme.parse(name)
        lists = ingested.lists(year, scheme, config.granularity)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DroppedObjectsWarning)
            problem = aggregate(lists, scheme, ingested.roster)
        for w in caught:
            logger.warning("year %s, %s: %s", year, scheme.name, w.message)
        universe = ingested.roster or sorted({o for item in lists for lst in _as_lists(item) for o in lst.objects})
        dropped[scheme.name] = [o for o in universe if o not in problem.objects]
        problems[scheme.name] = problem
    return problems, dropped


def _as_lists(item: Any) -> Sequence[StudentPreferenceList]:
    return (item,) if isinstance(item, StudentPreferenceList) else item


def evaluate_year(year: int | str, problems: dict[str, RankingProblem], config: RunConfig) -> YearResult:
    out = YearResult(year, problems)
    for scheme, problem in problems.items():
        derived = derive(problem)
        for method in config.methods:
            kwargs: dict[str, Any] = {}
            if method == "least_squares":
                kwargs = {"tol": config.tol, "direct_limit": config.direct_limit, "max_iter": config.max_iter}
            sv = score(derived, method, **kwargs)
            table = rank(sv, derived.degrees)
            out.scores[scheme, method] = sv
            out.rankings[scheme, method] = table
            out.contradictions[scheme, method] = contradictions(problem, table)
    return out


def run_pipeline(config: RunConfig, *, write: bool = True, with_axioms: bool = True) -> Bundle:
    """Run every stage and (optionally) write the output tables."""
    bundle = Bundle(config)
    if config.matrix_in:
        problem = read_matrix(config.matrix_in, config.index_in)
        jobs = [(MATRIX_YEAR, {INPUT_SCHEME: problem}, {})]
    else:
        if not config.inputs:
            raise ValidationError("no input files and no --matrix-in given", module="cli")
        bundle.ingest = ingest(config.inputs, config)
        jobs = []
        for year in sorted(bundle.ingest.students):
            if not any(s.k > 0 for s in bundle.ingest.lists(year, "unweighted", config.granularity)):
                logger.warning("year %s: no revealed preferences, skipped", year)
                continue
            problems, dropped = build_problems(bundle.ingest, year, config)
            jobs.append((year, problems, dropped))

    def work(job: tuple) -> YearResult:
        year, problems, dropped = job
        res = evaluate_year(year, problems, config)
        res.dropped = dropped
        return res

    if config.jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]
    for res in results:
        bundle.years[res.year] = res

    if with_axioms:
        bundle.axioms = {k: v for k, v in verdict_grid(trials=config.trials, seed=config.seed).items()}
    if write:
        write_bundle(bundle)
    return bundle


# --- writers ----------------------------------------------------------------


def _header(config: RunConfig, **extra: Any) -> dict[str, Any]:
    return {"prefrank": __version__, "config": config.config_hash(), **extra}


def ranking_rows(table: RankingTable) -> list[list[Any]]:
    return [
        [r.rank, r.object, format_score(r.score), format_count(r.preference_count), r.component]
        for r in table.rows
    ]


RANKING_COLUMNS = ("rank", "object", "score", "preference_count", "component")


def write_ingest_stats(ingested: IngestResult, out: Path, config: RunConfig) -> Path:
    cols = ("year", "applicants", "contributing", "unweighted", "weighted", "adjusted_unweighted", "objects")
    rows = [[getattr(s, c) for c in cols] for s in ingested.stats.values()]
    return write_table(out / "ingest_stats.tsv", cols, rows, _header(config, table="ingest_stats"), as_json=config.json)


def write_bundle(bundle: Bundle) -> list[Path]:
    config = bundle.config
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = bundle.files
    if bundle.ingest is not None:
        files.append(write_ingest_stats(bundle.ingest, out, config))
        if bundle.ingest.diagnostics:
            rows = [[p, d.line, d.message] for p, d in bundle.ingest.diagnostics]
            files.append(write_table(out / "diagnostics.tsv", ("file", "line", "message"), rows,
                                     _header(config, table="diagnostics"), as_json=config.json))

    contra_rows = []
    for year, res in bundle.years.items():
        ydir = out / str(year)
        ydir.mkdir(exist_ok=True)
        files.extend(write_year(res, ydir, config))
        for (scheme, method), rep in res.contradictions.items():
            contra_rows.append([year, scheme, method, format_count(rep.count), format_count(rep.total), f"{rep.ratio:.6f}"])
    files.append(write_table(
        out / "contradictions.tsv",
        ("year", "scheme", "method", "contradictory", "total", "ratio"),
        contra_rows,
        _header(config, table="contradictions"),
        as_json=config.json,
    ))
    if bundle.years:
        files.extend(write_trajectories(bundle, out))
    if bundle.axioms is not None:
        files.extend(write_axioms(bundle.axioms, out, config))
    return files


def write_trajectories(bundle: Bundle, out: Path) -> list[Path]:
    """One row per (year, object) with every method's score and rank."""
    config = bundle.config
    schemes = list(dict.fromkeys(s for res in bundle.years.values() for s in res.problems))
    cols = ["year", "object"]
    for m in config.methods:
        cols += [m, f"{m}_rank"]
    files = []
    for scheme in schemes:
        rows = []
        for year, res in bundle.years.items():
            if scheme not in res.problems:
                continue
            for i, obj in enumerate(res.problems[scheme].objects):
                row: list[Any] = [year, obj]
                for m in config.methods:
                    row += [format_score(res.scores[scheme, m].values[i]), res.rankings[scheme, m].rank_of(obj)]
                rows.append(row)
        files.append(write_table(out / f"trajectories_{scheme}.tsv", cols, rows,
                                 _header(config, scheme=scheme, method="all"), as_json=config.json))
    return files


def write_year(res: YearResult, ydir: Path, config: RunConfig) -> list[Path]:
    files: list[Path] = []
    for scheme, problem in res.problems.items():
        hdr = _header(config, year=res.year, scheme=scheme)
        trip = ydir / f"matrix_{scheme}.csv"
        idx = ydir / f"matrix_{scheme}.index.csv"
        write_triplets(problem, trip, idx, hdr)
        files += [trip, idx]
        if config.json and problem.n <= 64:
            jpath = ydir / f"matrix_{scheme}.json"
            write_json_matrix(problem, jpath, hdr)
            files.append(jpath)
        files.append(write_scores_table(res, scheme, ydir, config))
        for method in config.methods:
            table = res.rankings[scheme, method]
            files.append(write_table(
                ydir / f"ranking_{scheme}_{method}.tsv",
                RANKING_COLUMNS,
                ranking_rows(table),
                _header(config, year=res.year, scheme=scheme, method=method),
                as_json=config.json,
            ))
    files.append(write_kendall(res, ydir, config))
    files.append(write_ranks_table(res, ydir, config))
    return files


def write_scores_table(res: YearResult, scheme: str, ydir: Path, config: RunConfig) -> Path:
    """Scores and ranks of every object under each method, plus preference counts."""
    problem = res.problems[scheme]
    derived = derive(problem)
    cols: list[str] = ["object"]
    for m in config.methods:
        cols += [m, f"{m}_rank"]
    cols += ["preference_count", "preference_rank"]
    count_rank = _count_ranks(problem.objects, derived.degrees)
    rows = []
    for i, obj in enumerate(problem.objects):
        row: list[Any] = [obj]
        for m in config.methods:
            row += [format_score(res.scores[scheme, m].values[i]), res.rankings[scheme, m].rank_of(obj)]
        row += [format_count(derived.degrees[i]), count_rank[obj]]
        rows.append(row)
    return write_table(ydir / f"scores_{scheme}.tsv", cols, rows,
                       _header(config, year=res.year, scheme=scheme, method="all"), as_json=config.json)


def _count_ranks(objects: Sequence[str], counts: Sequence[Any]) -> dict[str, int]:
    order = sorted(range(len(objects)), key=lambda i: (-counts[i], objects[i]))
    return {objects[i]: pos + 1 for pos, i in enumerate(order)}


def write_kendall(res: YearResult, ydir: Path, config: RunConfig) -> Path:
    """Upper-triangular Kendall tau table between all method/scheme rankings."""
    labels = {}
    for method in config.methods:
        for scheme in res.problems:
            labels[f"{method}({scheme})"] = res.rankings[scheme, method]
    # rankings over different object sets are not comparable; restrict to shared objects
    shared = set.intersection(*(set(t.objects) for t in labels.values())) if labels else set()
    if any(set(t.objects) != shared for t in labels.values()):
        labels = {k: _restrict(t, shared) for k, t in labels.items()}
    table = kendall_table(labels)
    names = list(labels)
    rows = [[name] + ["" if v is None else f"{v:.3f}" for v in row] for name, row in zip(names, table)]
    return write_table(ydir / "kendall.tsv", ["ranking"] + names, rows,
                       _header(config, year=res.year, scheme="all", method="all"), as_json=config.json)


def _restrict(table: RankingTable, objects: set[str]) -> RankingTable:
    from .scoring import RankingRow

    rows = [r for r in table.rows if r.object in objects]
    rows = [RankingRow(n + 1, r.object, r.score, r.preference_count, r.component) for n, r in enumerate(rows)]
    return RankingTable(table.method, tuple(rows), table.tie_break)


def write_ranks_table(res: YearResult, ydir: Path, config: RunConfig) -> Path:
    """Ranks of every object by method and scheme."""
    cols = ["object"] + [f"{m}({s})" for m in config.methods for s in res.problems]
    objects = sorted(set().union(*(p.objects for p in res.problems.values())))
    rows = []
    for obj in objects:
        row: list[Any] = [obj]
        for m in config.methods:
            for s in res.problems:
                t = res.rankings[s, m]
                row.append(t.rank_of(obj) if obj in t.objects else "")
        rows.append(row)
    return write_table(ydir / "ranks.tsv", cols, rows,
                       _header(config, year=res.year, scheme="all", method="all"), as_json=config.json)


def axiom_grid_rows(grid: dict[tuple[Any, str], AxiomVerdict], methods: Sequence[str] = METHODS) -> list[list[str]]:
    axioms = list(dict.fromkeys(a for a, _ in grid))
    rows = []
    for a in axioms:
        rows.append([a.value] + [
            ("satisfied" if grid[a, m].satisfied else "violated") if (a, m) in grid else "" for m in methods
        ])
    return rows


def write_axioms(grid: dict, out: Path, config: RunConfig) -> list[Path]:
    hdr = _header(config, table="axioms", seed=config.seed, trials=config.trials)
    report = {"header": hdr, "verdicts": [v.to_dict() for v in grid.values()]}
    jpath = out / "axioms.json"
    jpath.write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    if config.json:
        return [jpath]
    tsv = write_table(out / "axioms.tsv", ["axiom", *METHODS], axiom_grid_rows(grid), hdr)
    return [tsv, jpath]
