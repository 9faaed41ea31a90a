import csv
import io
import json

import pytest

from qpcasimir.cli import ENERGY_COLUMNS, main, parse_iters, parse_sigma
from qpcasimir.errors import ConfigError
from qpcasimir.lattice import parse_rules, preset


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_parse_iters():
    assert parse_iters("3") == [3]
    assert parse_iters("1..4") == [1, 2, 3, 4]
    for bad in ("", "4..1", "a", "1-3"):
        with pytest.raises(ConfigError):
            parse_iters(bad)


def test_parse_sigma():
    grid = parse_sigma("0.01:10000:60")
    assert len(grid) == 60 and grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(1e4)
    assert parse_sigma("2") == [2.0]
    assert parse_sigma("0.1,1,10") == [0.1, 1.0, 10.0]
    for bad in ("x", "1:2", "-1", "1:0.5:3", "nan"):
        with pytest.raises(ConfigError):
            parse_sigma(bad)


def test_energy_ideal_boyer(capsys):
    code, out, _ = run(capsys, "energy", "--preset", "fibonacci", "--iters", "1",
                       "--material", "ideal")
    assert code == 0
    (row,) = rows(out)
    assert tuple(row) == ENERGY_COLUMNS
    assert float(row["scaled_energy"]) == 0.875
    assert row["method"] == "ideal-closed-form"


def test_energy_finite_columns_and_raw(capsys):
    code, out, _ = run(capsys, "energy", "--preset", "thue-morse", "--iters", "1..2",
                       "--sigma", "2", "--raw")
    assert code == 0
    got = rows(out)
    assert [r["I"] for r in got] == ["1", "2"]
    assert got[0]["method"] == "polylog-N2" and got[1]["method"] == "quadrature"
    assert "raw_energy" in got[0]


def test_fit_fibonacci_ratio(capsys):
    code, out, _ = run(capsys, "fit", "--preset", "fibonacci", "--material", "ideal",
                       "--iters", "1..25")
    assert code == 0
    (row,) = rows(out)
    assert float(row["last_ratio"]) == pytest.approx(1.618, abs=0.005)
    assert row["status"] == "ok"


def test_fit_refused_on_sign_change(capsys):
    code, out, _ = run(capsys, "fit", "--preset", "triadic-cantor", "--iters", "1..6")
    assert code == 0
    (row,) = rows(out)
    assert row["status"] == "refused" and row["rate"] == ""


def test_sweep_shape_and_determinism(capsys, tmp_path):
    args = ["sweep", "--preset", "thue-morse", "--iters", "1..2", "--sigma", "0.01:10000:6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b), "--jobs", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    got = rows(a.read_text())
    assert len(got) == 12
    for it in ("1", "2"):
        # longer words dip below zero at small sigma first, then rise monotonically
        e = [float(r["scaled_energy"]) for r in got if r["I"] == it and float(r["sigma"]) > 1]
        assert all(y > x for x, y in zip(e, e[1:]))


def test_json_lines(capsys):
    code, out, _ = run(capsys, "sequence", "--preset", "fibonacci", "--iters", "0..3",
                       "--format", "json")
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert [x["word"] for x in lines] == ["D", "DN", "DND", "DNDDN"]


def test_sequence_large_iterate_counts_only(capsys):
    code, out, _ = run(capsys, "sequence", "--preset", "bronze-mean", "--iters", "25")
    (row,) = rows(out)
    assert code == 0 and row["word"] == "" and int(row["n_plates"]) > 10**12


def test_emit_rules_roundtrip(capsys, tmp_path):
    path = tmp_path / "silver.rules"
    assert main(["sequence", "--preset", "silver-mean", "--iters", "2",
                 "--emit-rules", str(path)]) == 0
    capsys.readouterr()
    assert parse_rules(path.read_text()) == preset("silver-mean")
    code, out, _ = run(capsys, "sequence", "--rules", str(path), "--iters", "2")
    assert code == 0 and rows(out)[0]["word"] == "DNDDDND"


@pytest.mark.parametrize("argv, code, kind", [
    (["energy", "--preset", "nope", "--iters", "1"], 2, "ConfigError"),
    (["energy", "--iters", "1"], 2, "ConfigError"),
    (["energy", "--preset", "fibonacci", "--iters", "9", "--sigma", "1"], 2, "ConfigError"),
    (["energy", "--preset", "fibonacci", "--iters", "1", "--spacing", "-1"], 2, "ConfigError"),
    (["bogus"], 2, "ConfigError"),
    (["sweep", "--preset", "fibonacci", "--iters", "1", "--material", "ideal"], 2,
     "ConfigError"),
    (["fit", "--preset", "fibonacci", "--iters", "1..3", "--sigma", "1,2"], 2, "ConfigError"),
])
def test_error_exit_codes(capsys, argv, code, kind):
    got, out, err = run(capsys, *argv)
    assert got == code
    payload = json.loads(err)
    assert payload["error"] == kind and payload["exit_code"] == code


def test_rule_parse_error_payload(capsys, tmp_path):
    path = tmp_path / "bad.rules"
    path.write_text("axiom D\nD -> D Q\n")
    code, _, err = run(capsys, "sequence", "--rules", str(path), "--iters", "1")
    payload = json.loads(err)
    assert code == 2 and payload["error"] == "RuleParseError"
    assert (payload["line"], payload["column"]) == (2, 8)


def test_numerical_failure_exit_code(capsys, monkeypatch):
    import qpcasimir.cli as cli
    from qpcasimir.errors import NumericalError

    def boom(*a, **k):
        raise NumericalError("did not converge")

    monkeypatch.setattr(cli, "energy_word", boom)
    code, _, err = run(capsys, "energy", "--preset", "fibonacci", "--iters", "1", "--sigma", "1")
    assert code == 3 and json.loads(err)["error"] == "NumericalError"


def test_greens_check(capsys):
    code, out, _ = run(capsys, "greens-check", "--points", "10")
    assert code == 0
    got = rows(out)
    assert {r["check"] for r in got} >= {"reciprocity", "transition"}
    assert all(r["failed"] == "0" for r in got)


def test_greens_check_failure_exit(capsys, monkeypatch):
    import qpcasimir.cli as cli
    from qpcasimir.greens import CheckResult

    monkeypatch.setattr(cli, "check_invariants", lambda **k: [CheckResult("reciprocity", 1, 2,
                                                                          0.1)])
    code, _, err = run(capsys, "greens-check")
    assert code == 4 and json.loads(err)["exit_code"] == 4


def test_console_script_installed():
    import shutil
    import subprocess

    exe = shutil.which("casimir")
    if exe is None:
        pytest.skip("console script not on PATH")
    out = subprocess.run([exe, "energy", "--preset", "fibonacci", "--iters", "2"],
                         capture_output=True, text=True, check=True).stdout
    assert rows(out)[0]["scaled_energy"] == "1.75"
