import json
import subprocess
import sys

import pytest

from prefrank.cli import main
from prefrank.io import read_table, write_triplets


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rank_matrix_in(tmp_path, medical_files, capsys):
    trip, idx = medical_files
    code, out, _ = run(["rank", "--matrix-in", trip, "--index", idx, "--out", tmp_path / "o"], capsys)
    assert code == 0
    assert "1\tSE-AOK\t2132.000000\t3208\t0" in out
    assert (tmp_path / "o" / "matrix" / "ranking_input_least_squares.tsv").exists()


def test_eval(tmp_path, medical_files, capsys):
    trip, idx = medical_files
    code, out, _ = run(["eval", "--matrix-in", trip, "--index", idx, "--out", tmp_path], capsys)
    assert code == 0
    assert "matrix\tinput\trow_sum\t2195\t8496" in out
    assert "matrix\tinput\tleast_squares\t2253\t8496" in out


def test_kendall(tmp_path, medical_files, capsys):
    trip, idx = medical_files
    code, out, _ = run(["kendall", "--matrix-in", trip, "--index", idx, "--out", tmp_path], capsys)
    assert code == 0
    _, cols, rows = read_table(tmp_path / "matrix" / "kendall.tsv")
    assert cols == ["ranking", "row_sum(input)", "normalized_row_sum(input)", "least_squares(input)"]
    assert rows[0][3] == "0.810"


def test_ingest_and_build(tmp_path, example_file, capsys):
    code, out, _ = run(["ingest", example_file, "--out", tmp_path], capsys)
    assert code == 0
    assert out.splitlines()[1] == "2016\t1\t1\t6\t1\t2\t4"
    code, out, _ = run(["build", example_file, "--scheme", "weighted", "--scheme", "adjusted_unweighted",
                        "--json", "--out", tmp_path], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "2016" / "matrix_weighted.json").read_text())
    assert doc["matrix"][0][1] in (0, "1/6")
    assert "adjusted_unweighted\tobjects=4\tnnz=2" in out


def test_axioms(tmp_path, capsys):
    code, out, _ = run(["axioms", "--trials", "20", "--seed", "3", "--out", tmp_path], capsys)
    assert code == 0
    assert "size_invariance\tviolated\tsatisfied\tsatisfied" in out
    report = json.loads((tmp_path / "axioms.json").read_text())
    assert report["header"]["seed"] == 3 and len(report["verdicts"]) == 12


def test_run(tmp_path, pool_file, capsys):
    code, out, _ = run(["run", pool_file, "--scheme", "unweighted", "--scheme", "weighted",
                        "--trials", "5", "--out", tmp_path / "o", "--jobs", "2"], capsys)
    assert code == 0
    assert (tmp_path / "o" / "2016" / "kendall.tsv").exists()
    assert (tmp_path / "o" / "axioms.tsv").exists()


def test_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["rank", "--method", "borda"])
    assert info.value.code == 2


def test_parse_error(tmp_path, capsys):
    code, _, err = run(["rank", tmp_path / "missing.csv", "--out", tmp_path], capsys)
    assert code == 3
    assert err.startswith("error: [io]")


def test_parse_error_bad_header(tmp_path, capsys):
    path = tmp_path / "r.csv"
    path.write_text("a,b\n1,2\n")
    code, _, err = run(["ingest", path, "--out", tmp_path], capsys)
    assert code == 3 and "missing required columns" in err


def test_validation_error(tmp_path, capsys):
    bad = tmp_path / "neg.csv"
    bad.write_text("a,b,-1\n")
    code, _, err = run(["rank", "--matrix-in", bad, "--out", tmp_path], capsys)
    assert code == 4 and "negative" in err


def test_validation_error_bad_scheme(tmp_path, example_file, capsys):
    code, _, _ = run(["rank", example_file, "--scheme", "heavy", "--out", tmp_path], capsys)
    assert code == 4


def test_solver_error(tmp_path, medical, capsys):
    # float entries skip the rational solver, so the CG budget applies
    trip = tmp_path / "float.csv"
    write_triplets(medical.to_float(), trip, tmp_path / "float.index.csv")
    code, _, err = run(["rank", "--matrix-in", trip, "--index", tmp_path / "float.index.csv",
                        "--direct-limit", "0", "--max-iter", "1", "--method", "least_squares",
                        "--out", tmp_path], capsys)
    assert code == 5
    assert "residual" in err


def test_module_entry_point(tmp_path, medical_files):
    trip, idx = medical_files
    proc = subprocess.run(
        [sys.executable, "-m", "prefrank", "eval", "--matrix-in", str(trip), "--index", str(idx), "--out", str(tmp_path)],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert "2253" in proc.stdout
