"""Command line interface.

Exit codes: 0 success, 2 usage, 3 parse/IO failure, 4 validation failure,
5 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from . import __version__
from .axioms import verdict_grid
from .exceptions import ParseError, PrefrankError
from .io import format_count, write_json_matrix, write_table, write_triplets
from .pipeline import (
    RANKING_COLUMNS,
    Bundle,
    RunConfig,
    axiom_grid_rows,
    build_problems,
    ingest,
    ranking_rows,
    run_pipeline,
    write_axioms,
    write_bundle,
    write_ingest_stats,
    write_kendall,
)
from .pipeline import _header
from .preferences import Granularity
from .scoring import METHODS

def _add_common(p: argparse.ArgumentParser, *, records: bool = True, matrix: bool = True) -> None:
    if records:
        p.add_argument("inputs", nargs="*", help="application record files (CSV or TSV)")
        p.add_argument("--granularity", default="faculty", choices=[g.value for g in Granularity])
        p.add_argument("--scheme", dest="schemes", action="append", metavar="SCHEME",
                       help="weighting scheme, repeatable (default: unweighted); e.g. weighted, adjusted_unweighted")
        p.add_argument("--year", dest="years", action="append", type=int, help="restrict to a year, repeatable")
        p.add_argument("--roster", help="file listing the object universe")
        p.add_argument("--aliases", help="alias,canonical mapping applied to faculty keys")
        p.add_argument("--max-bad-ratio", type=float, default=0.01, help="abort above this share of bad rows")
    if matrix:
        p.add_argument("--matrix-in", help="prebuilt preference matrix (triplet CSV or dense JSON)")
        p.add_argument("--index", dest="index_in", help="object index file for --matrix-in")
        p.add_argument("--method", dest="methods", action="append", choices=METHODS,
                       help="scoring method, repeatable (default: all)")
        p.add_argument("--tol", type=float, default=1e-10, help="least squares residual tolerance")
        p.add_argument("--direct-limit", type=int, default=2000,
                       help="largest component solved directly (CG above)")
        p.add_argument("--max-iter", type=int, help="CG iteration budget per component (default 10 * size)")
        p.add_argument("--jobs", type=int, default=1, help="years evaluated in parallel")
    p.add_argument("--out", dest="output_dir", default="prefrank-out", help="output directory")
    p.add_argument("--json", action="store_true", help="structured JSON output instead of TSV")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefrank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse records and report per-year statistics")
    _add_common(p, matrix=False)

    p = sub.add_parser("build", help="write preference matrices per year and scheme")
    _add_common(p, matrix=False)

    for name, help_ in (
        ("rank", "score and rank objects"),
        ("eval", "count preferences contradicting each ranking"),
        ("kendall", "Kendall tau between rankings"),
        ("run", "full pipeline including the axiom grid"),
    ):
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "run":
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--trials", type=int, default=200)

    p = sub.add_parser("axioms", help="check the axioms for every method")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=200, help="random trials per satisfied cell")
    p.add_argument("--out", dest="output_dir", default="prefrank-out")
    p.add_argument("--json", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    get = lambda name, default=None: getattr(args, name, default)  # noqa: E731
    return RunConfig(
        inputs=tuple(get("inputs", ()) or ()),
        matrix_in=get("matrix_in"),
        index_in=get("index_in"),
        granularity=get("granularity", "faculty"),
        schemes=tuple(get("schemes") or ("unweighted",)),
        methods=tuple(get("methods") or METHODS),
        years=tuple(get("years")) if get("years") else None,
        output_dir=args.output_dir,
        tol=get("tol", 1e-10),
        direct_limit=get("direct_limit", 2000),
        max_iter=get("max_iter"),
        seed=get("seed", 0),
        trials=get("trials", 200),
        max_bad_ratio=get("max_bad_ratio", 0.01),
        roster=get("roster"),
        aliases=get("aliases"),
        json=args.json,
        jobs=get("jobs", 1),
    )


def _print_table(columns: Sequence[str], rows: Sequence[Sequence[object]]) -> None:
    print("\t".join(columns))
    for r in rows:
        print("\t".join("" if v is None else str(v) for v in r))


def cmd_ingest(config: RunConfig) -> int:
    result = ingest(config.inputs, config)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_ingest_stats(result, out, config)
    cols = ("year", "applicants", "contributing", "unweighted", "weighted", "adjusted_unweighted", "objects")
    _print_table(cols, [[getattr(s, c) for c in cols] for s in result.stats.values()])
    if result.diagnostics:
        print(f"{len(result.diagnostics)} row(s) rejected", file=sys.stderr)
    return 0


def cmd_build(config: RunConfig) -> int:
    result = ingest(config.inputs, config)
    out = Path(config.output_dir)
    for year in sorted(result.students):
        problems, _ = build_problems(result, year, config)
        ydir = out / str(year)
        ydir.mkdir(parents=True, exist_ok=True)
        for scheme, problem in problems.items():
            hdr = _header(config, year=year, scheme=scheme)
            write_triplets(problem, ydir / f"matrix_{scheme}.csv", ydir / f"matrix_{scheme}.index.csv", hdr)
            if config.json and problem.n <= 64:
                write_json_matrix(problem, ydir / f"matrix_{scheme}.json", hdr)
            print(f"{year}\t{scheme}\tobjects={problem.n}\tnnz={sum(1 for _ in problem.triplets())}")
    return 0


def _evaluate(config: RunConfig) -> Bundle:
    return run_pipeline(config, write=False, with_axioms=False)


def cmd_rank(config: RunConfig) -> int:
    bundle = _evaluate(config)
    out = Path(config.output_dir)
    for year, res in bundle.years.items():
        ydir = out / str(year)
        ydir.mkdir(parents=True, exist_ok=True)
        for (scheme, method), table in res.rankings.items():
            rows = ranking_rows(table)
            write_table(ydir / f"ranking_{scheme}_{method}.tsv", RANKING_COLUMNS, rows,
                        _header(config, year=year, scheme=scheme, method=method), as_json=config.json)
            print(f"# year={year} scheme={scheme} method={method}")
            _print_table(RANKING_COLUMNS, rows)
    return 0


def cmd_eval(config: RunConfig) -> int:
    bundle = _evaluate(config)
    cols = ("year", "scheme", "method", "contradictory", "total", "ratio")
    rows = [
        [year, scheme, method, format_count(rep.count), format_count(rep.total), f"{rep.ratio:.6f}"]
        for year, res in bundle.years.items()
        for (scheme, method), rep in res.contradictions.items()
    ]
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_table(out / "contradictions.tsv", cols, rows, _header(config, table="contradictions"), as_json=config.json)
    _print_table(cols, rows)
    return 0


def cmd_kendall(config: RunConfig) -> int:
    bundle = _evaluate(config)
    out = Path(config.output_dir)
    for year, res in bundle.years.items():
        ydir = out / str(year)
        ydir.mkdir(parents=True, exist_ok=True)
        path = write_kendall(res, ydir, config)
        print(f"# year={year}")
        print(path.read_text(encoding="utf-8"), end="")
    return 0


def cmd_axioms(config: RunConfig) -> int:
    grid = verdict_grid(trials=config.trials, seed=config.seed)
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_axioms(grid, out, config)
    _print_table(("axiom", *METHODS), axiom_grid_rows(grid))
    return 0


def cmd_run(config: RunConfig) -> int:
    bundle = run_pipeline(config, write=False)
    files = write_bundle(bundle)
    for f in files:
        print(f)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "build": cmd_build,
    "rank": cmd_rank,
    "eval": cmd_eval,
    "kendall": cmd_kendall,
    "axioms": cmd_axioms,
    "run": cmd_run,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        config = _config(args)
        return COMMANDS[args.command](config)
    except PrefrankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: [io] {exc}", file=sys.stderr)
        return ParseError.exit_code


if __name__ == "__main__":
    sys.exit(main())
