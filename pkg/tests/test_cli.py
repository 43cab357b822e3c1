import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from dst_protected import cli

FIGURE1 = str(Path(__file__).parent / "data" / "figure1.txt")


def run(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exact_small(capsys):
    status, out, _ = run(capsys, "exact", "--n", "3")
    assert status == 0
    assert out.splitlines()[0] == "n,l_n,ratio"
    assert out.splitlines()[-1] == "3,1/2,0.166666666666667"


def test_exact_zero(capsys):
    status, out, _ = run(capsys, "exact", "--n", "0", "--format", "json")
    rows = json.loads(out)["results"]
    assert status == 0 and rows == [{"n": "0", "l_n": "0", "ratio": ""}]


@pytest.mark.slow
def test_exact_both_500(capsys):
    status, out, _ = run(capsys, "exact", "--n", "500", "--method", "both")
    rows = csv_rows(out)
    assert status == 0
    assert len(rows) == 501
    assert all(r["agree"] == "true" for r in rows)
    assert rows[500]["ratio"].startswith("0.305710")


def test_exact_disagreement_exit_status(capsys, monkeypatch):
    from dst_protected import exact_sequence

    real = exact_sequence.l_closed_form_table

    def broken(N):
        table = real(N)
        values = list(table.values)
        values[-1] += 1
        return exact_sequence.SequenceTable(table.kind, tuple(values), table.method)

    monkeypatch.setattr(exact_sequence, "l_closed_form_table", broken)
    status, out, _ = run(capsys, "exact", "--n", "6", "--method", "both")
    assert status == 1
    assert csv_rows(out)[-1]["agree"] == "false"


def test_exact_cap(capsys):
    status, _, err = run(capsys, "exact", "--n", "2001")
    assert status == 2 and "n-cap" in err


@pytest.mark.parametrize(
    "digits, expected", [("23", "0.30707981393605921828549"), ("5", "0.30708"), ("1", "0.3")]
)
def test_constant(capsys, digits, expected):
    status, out, _ = run(capsys, "constant", "--digits", digits)
    row = csv_rows(out)[0]
    assert status == 0
    assert row["constant"] == expected
    assert int(row["truncation_index"]) > 0
    assert float(row["tail_bound"]) < 10 ** -int(digits)


def test_constant_digit_range(capsys):
    assert run(capsys, "constant", "--digits", "0")[0] == 2
    assert run(capsys, "constant", "--digits", "1001")[0] == 2


def test_simulate_n3(capsys):
    status, out, _ = run(capsys, "simulate", "--n", "3", "--trials", "100000", "--seed", "42")
    row = csv_rows(out)[0]
    assert status == 0
    assert row["exact"] == "1/2"
    assert abs(float(row["z"])) < 4


def test_simulate_n1(capsys):
    row = csv_rows(run(capsys, "simulate", "--n", "1", "--trials", "50")[1])[0]
    assert float(row["mean"]) == 0.0


def test_simulate_leaves_2000(capsys):
    status, out, _ = run(
        capsys, "simulate", "--n", "2000", "--trials", "10000", "--seed", "9", "--statistic", "leaves"
    )
    row = csv_rows(out)[0]
    assert status == 0
    assert abs(float(row["ratio"]) - 0.372046812) < 0.002
    assert row["exact"] == ""


def test_simulate_bad_statistic(capsys):
    status, _, err = run(capsys, "simulate", "--n", "5", "--statistic", "height")
    assert status == 2 and "statistic" in err


def test_simulate_deterministic_across_workers(capsys):
    args = ["simulate", "--n", "200", "--trials", "2000", "--seed", "11"]
    outputs = {run(capsys, *args, "--workers", w)[1] for w in ("1", "3", "8")}
    assert len(outputs) == 1


def test_compare(capsys):
    status, out, _ = run(capsys, "compare", "--n-list", "3,500", "--trials", "300", "--seed", "1")
    rows = {r["n"]: r for r in csv_rows(out)}
    assert status == 0
    assert rows["3"]["exact_ratio"] == "0.166666666666667"
    assert round(float(rows["500"]["residual"]), 5) == -0.00137
    assert rows["500"]["exact_ratio"].startswith("0.305710")


def test_compare_empty_list(capsys):
    status, _, err = run(capsys, "compare", "--n-list", "")
    assert status == 2 and "empty" in err


@pytest.mark.parametrize("k, count, labels", [("2", "2", "A D"), ("1", "5", "A B D E G")])
def test_build_figure1(capsys, k, count, labels):
    status, out, _ = run(capsys, "build", "--input", FIGURE1, "--k", k)
    row = csv_rows(out)[0]
    assert status == 0
    assert (row["nodes"], row["leaves"], row["protected"], row["protected_labels"]) == ("9", "4", count, labels)
    assert row["tree"] == "A(B(C,E(F,-)),D(-,G(I,H)))"


def test_build_bits_exhausted(capsys, tmp_path):
    path = tmp_path / "dup.txt"
    path.write_text("p:0\nq:0\nr:0\n")
    status, _, err = run(capsys, "build", "--input", str(path))
    assert status == 2 and "'r'" in err


def test_build_parse_error(capsys, tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("A:01\nB:0x1\n")
    status, _, err = run(capsys, "build", "--input", str(path))
    assert status == 2 and "line 2" in err


def test_build_missing_file(capsys, tmp_path):
    assert run(capsys, "build", "--input", str(tmp_path / "nope.txt"))[0] == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["exact", "--n", "12", "--method", "both"],
        ["constant", "--digits", "40"],
        ["simulate", "--n", "40", "--trials", "500", "--seed", "3"],
        ["compare", "--n-list", "10,20", "--trials", "100"],
        ["build", "--input", FIGURE1],
    ],
)
def test_csv_and_json_agree(capsys, argv):
    _, text_csv, _ = run(capsys, *argv, "--format", "csv")
    _, text_json, _ = run(capsys, *argv, "--format", "json")
    record = json.loads(text_json)
    rows = record["results"] if isinstance(record["results"], list) else [record["results"]]
    assert csv_rows(text_csv) == rows
    assert record["command"] == argv[0]
    assert record["metadata"]["version"]


def test_usage_error_status(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["exact"])
    assert info.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "dst_protected", "constant", "--digits", "5"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "0.30708" in proc.stdout


def test_help_lists_csv_schema(capsys):
    with pytest.raises(SystemExit):
        cli.main(["--help"])
    assert "CSV columns" in capsys.readouterr().out
