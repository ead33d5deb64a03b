import csv
import io
import json
import math
import subprocess
import sys

import pytest

from minorforge.cli import COLUMNS, SEED_ENV, main


def read_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def strip_timing(text):
    return [{k: v for k, v in r.items() if k != "elapsed_ms"} for r in read_rows(text)]


def test_sample_hm_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["sample", "hm", "--n", "1000", "--seed", "7", "--out", str(a)]) == 0
    assert main(["sample", "hm", "--n", "1000", "--seed", "7", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("1000 1500\n")


def test_sample_rejects_odd_rn(capsys):
    assert main(["sample", "gsimple", "--n", "9", "--r", "3"]) == 2
    assert "rn must be even" in capsys.readouterr().err


def test_sample_gnm_empty(capsys):
    assert main(["sample", "gnm", "--n", "100", "--m", "0"]) == 0
    assert capsys.readouterr().out == "100 0\n"


def test_sample_reports_diagnostics(tmp_path, capsys):
    out = tmp_path / "g.txt"
    assert main(["sample", "gsimple", "--n", "20", "--r", "3", "--seed", "1", "--out", str(out)]) == 0
    info = capsys.readouterr().out
    assert "rejections=" in info and "model=gsimple" in info


def test_sample_missing_parameter():
    assert main(["sample", "gnm", "--n", "10"]) == 2


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["minor", "--n", "100", "--mode", "bogus"])
    assert exc.value.code == 2
    assert main(["minor", "--n", "7"]) == 2


def test_minor_rows(tmp_path):
    out, certs = tmp_path / "m.csv", tmp_path / "certs"
    n = 4096
    code = main(["minor", "--n", str(n), "--trials", "4", "--seed", "3", "--out", str(out), "--dump-certs", str(certs)])
    assert code == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(COLUMNS)
    rows = read_rows(text)
    assert [r["trial"] for r in rows] == ["0", "1", "2", "3"]
    for r in rows:
        assert r["status"] == "ok" and r["verify"] == "true"
        assert int(r["order"]) <= 2 * math.sqrt(3 * n)
    dumped = sorted(certs.iterdir())
    assert len(dumped) == 4
    cert = json.loads(dumped[0].read_text())
    assert cert["order"] == int(rows[0]["order"]) and cert["seed"] == 3


def test_minor_infeasible_row_does_not_crash(capsys):
    assert main(["minor", "--n", "100", "--epsilon", "0.1"]) == 1
    rows = read_rows(capsys.readouterr().out)
    assert rows[0]["status"] == "infeasible"


def test_minor_faithful_rows_are_reported(capsys):
    main(["minor", "--n", "4096", "--mode", "faithful", "--trials", "2"])
    rows = read_rows(capsys.readouterr().out)
    assert len(rows) == 2
    assert all(r["status"] in ("ok", "degenerate", "infeasible") for r in rows)


def test_minor_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["minor", "--n", "4096", "--trials", "100", "--seed", "11"]
    main(base + ["--parallel", "1", "--out", str(a)])
    main(base + ["--parallel", "8", "--out", str(b)])
    assert strip_timing(a.read_text()) == strip_timing(b.read_text())


def test_env_seed_overrides_flag(tmp_path, monkeypatch):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    main(["sample", "hm", "--n", "100", "--seed", "5", "--out", str(a)])
    monkeypatch.setenv(SEED_ENV, "5")
    main(["sample", "hm", "--n", "100", "--seed", "999", "--out", str(b)])
    assert a.read_bytes() == b.read_bytes()
    monkeypatch.setenv(SEED_ENV, "nope")
    assert main(["sample", "hm", "--n", "100"]) == 2


def test_phase_rows_and_summary(tmp_path):
    out, summary = tmp_path / "p.csv", tmp_path / "s.txt"
    code = main(["phase", "--n", "20000", "--lambda", "1,2", "--trials", "3", "--seed", "2", "--out", str(out), "--summary", str(summary)])
    assert code == 0
    rows = read_rows(out.read_text())
    assert [r["trial"] for r in rows] == [str(i) for i in range(6)]
    for r in rows:
        lam = float(r["param"])
        assert int(r["upper_bound"]) <= 4 * (2 * lam) ** 1.5 + 3
        assert r["verify"] == "true" and r["mode"] == "gnm"
    text = summary.read_text()
    assert "4*lambda_p^1.5 + 3" in text and text.count("\n") == 4


def test_phase_parallel_matches_serial(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["phase", "--n", "20000", "--lambda", "1,2", "--trials", "4", "--seed", "8", "--summary", str(tmp_path / "s")]
    main(base + ["--parallel", "1", "--out", str(a)])
    main(base + ["--parallel", "8", "--out", str(b)])
    assert strip_timing(a.read_text()) == strip_timing(b.read_text())


def test_phase_bad_lambda():
    assert main(["phase", "--n", "100", "--lambda", "x"]) == 2


def test_oracle_command(capsys):
    assert main(["oracle", "--max-n", "6", "--samples", "40"]) == 0
    assert "violations=0" in capsys.readouterr().out
    assert main(["oracle", "--max-n", "12"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "minorforge", "sample", "gnm", "--n", "5", "--m", "2", "--seed", "1"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "5 2"
