import csv
import io
import json
import subprocess
import sys

import pytest

from renyidesign import cli
from renyidesign.cli import RunConfig, UsageError, format_cell, main, parse_alpha, render, run
from renyidesign.permgroup import CycleLemmaReport
from fractions import Fraction


def invoke(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_alpha():
    assert parse_alpha("3") == [3]
    assert parse_alpha("2-5") == [2, 3, 4, 5]
    assert parse_alpha("2,4") == [2, 4]
    with pytest.raises(UsageError):
        parse_alpha("0")


def test_format_cell():
    assert format_cell(Fraction(4, 5)) == "4/5"
    assert format_cell(Fraction(1)) == "1/1"
    assert format_cell(True) == "true"
    assert format_cell(None) == ""
    assert format_cell(0.1) == "0.1"


def test_run_config_round_trip():
    c = RunConfig("moment", {"state": [2, 2], "alpha": "2"}, seed=7, format="json")
    assert RunConfig.from_json(c.to_json()) == c


def test_moment_state(capsys):
    code, out, _ = invoke(capsys, "moment", "--state", "2", "2", "--alpha", "2")
    assert code == 0
    (row,) = csv_rows(out)
    assert row["exact"] == "4/5"
    assert float(row["renyi_lower_bound_bits"]) == pytest.approx(0.321928, abs=1e-6)


def test_moment_choi_and_alpha1(capsys):
    _, out, _ = invoke(capsys, "moment", "--choi", "2", "2", "2", "2", "--alpha", "2")
    assert csv_rows(out)[0]["exact"] == "2/5"
    _, out, _ = invoke(capsys, "moment", "--state", "2", "2", "--alpha", "1")
    assert csv_rows(out)[0]["exact"] == "1/1"


def test_moment_range(capsys):
    _, out, _ = invoke(capsys, "moment", "--state", "2", "2", "--alpha", "1-3")
    assert [r["exact"] for r in csv_rows(out)] == ["1/1", "4/5", "7/10"]


def test_mc_requires_seed(capsys):
    code, out, err = invoke(capsys, "moment", "--state", "2", "2", "--alpha", "2", "--mc", "1000")
    assert code == 2 and out == ""
    assert "seed" in json.loads(err)["error"]


def test_mc_is_byte_identical(capsys):
    args = ("moment", "--state", "2", "2", "--alpha", "2", "--mc", "5000", "--seed", "11")
    _, first, _ = invoke(capsys, *args)
    _, second, _ = invoke(capsys, *args)
    assert first == second
    assert abs(float(csv_rows(first)[0]["z"])) < 4


def test_csv_and_json_carry_the_same_table(capsys):
    args = ("moment", "--state", "3", "4", "--alpha", "2-4")
    _, text_csv, _ = invoke(capsys, *args)
    _, text_json, _ = invoke(capsys, *args, "--format", "json")
    doc = json.loads(text_json)
    assert doc["schema_version"] == 1 and doc["command"] == "moment"
    assert doc["config"]["params"]["state"] == [3, 4]
    rows = csv_rows(text_csv)
    assert len(rows) == len(doc["rows"])
    for r, j in zip(rows, doc["rows"]):
        for key, value in j.items():
            assert r[key] == (value if isinstance(value, str) else format_cell(value))


def test_out_file(tmp_path, capsys):
    target = tmp_path / "t.csv"
    code, out, _ = invoke(capsys, "moment", "--state", "2", "2", "--alpha", "3", "--out", str(target))
    assert code == 0 and out == ""
    assert csv_rows(target.read_text())[0]["exact"] == "7/10"


def test_bounds_examples(capsys):
    _, out, _ = invoke(capsys, "bounds", "--theorem", "T1", "--d-A", "16", "--alpha", "2")
    row = csv_rows(out)[0]
    assert float(row["bound_bits"]) == 3.0 and row["asymptotic"] == "true"
    _, out, _ = invoke(capsys, "bounds", "--theorem", "T3", "--d-A", "1024", "--a", "1")
    row = csv_rows(out)[0]
    assert float(row["bound_bits"]) == 7.0 and row["valid"] == "true"
    _, out, _ = invoke(capsys, "bounds", "--theorem", "T5", "--d", "4", "--d-A", "2", "--d-B", "2", "--alpha", "2")
    assert csv_rows(out)[0]["valid"] == "false"


def test_bounds_all(capsys):
    code, out, _ = invoke(capsys, "bounds", "--theorem", "all", "--d-A", "16", "--alpha", "2", "--a", "1")
    rows = {r["theorem"]: r for r in csv_rows(out)}
    assert code == 0 and set(rows) == {"T1", "T2a", "T2b", "T3", "T4", "T5", "T6"}
    assert float(rows["T2a"]["jensen_bits"]) >= float(rows["T2a"]["bound_bits"])


def test_bounds_missing_parameter_is_usage_error(capsys):
    code, _, err = invoke(capsys, "bounds", "--theorem", "T2a", "--alpha", "2")
    assert code == 2 and "missing parameters" in err


def test_usage_errors(capsys):
    assert invoke(capsys, "moment", "--alpha", "2")[0] == 2
    assert invoke(capsys, "nonsense")[0] == 2
    assert invoke(capsys, "moment", "--choi", "2", "2", "2", "3", "--alpha", "2")[0] == 2


def test_verify_quick_passes(capsys):
    code, out, _ = invoke(capsys, "verify", "--quick", "--seed", "1", "--samples", "20000")
    assert code == 0
    assert all(r["pass"] == "true" for r in csv_rows(out))


def test_verify_requires_seed(capsys):
    assert invoke(capsys, "verify", "--quick")[0] == 2


def test_verify_failure_exit_code(monkeypatch, capsys):
    monkeypatch.setattr(cli, "verify_cycle_lemma", lambda alpha: CycleLemmaReport(False, 0, 1))
    code, _, err = invoke(capsys, "verify", "--quick", "--seed", "1", "--samples", "2000")
    assert code == 1
    assert "cycle lemma alpha=1" in json.loads(err)["failures"]


def test_gap_design(capsys):
    code, out, _ = invoke(capsys, "gap-design", "--dims", "2", "2", "--dims", "32", "32", "--alpha-max", "3")
    rows = csv_rows(out)
    assert code == 0
    first = rows[0]
    assert float(first["lambda_1"]) == pytest.approx(0.88730, abs=1e-5)
    assert float(first["lambda_2"]) == pytest.approx(0.11270, abs=1e-5)
    assert first["purity_exact"] == "4/5" == first["purity_target"]
    g3 = {int(r["d_A"]): float(r["gap_bits"]) for r in rows if r["alpha"] == "3"}
    assert 0 < g3[2] < g3[32]


def test_gap_design_regime_violation(capsys):
    code, out, _ = invoke(capsys, "gap-design", "--dims", "4", "2")
    assert code == 2
    assert "does not fit" in csv_rows(out)[0]["error"]


def test_run_returns_rows_and_text():
    rows, text, status = run(RunConfig("moment", {"state": [2, 2], "alpha": "2"}))
    assert status == 0 and rows[0]["exact"] == Fraction(4, 5)
    assert text == render(RunConfig("moment", {"state": [2, 2], "alpha": "2"}), rows)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "renyidesign", "moment", "--state", "2", "2", "--alpha", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0 and "4/5" in proc.stdout
