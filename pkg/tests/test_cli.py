import json
import subprocess
import sys

import pytest

from invfactors import cli
from invfactors.records import bundled_fixture_path, load_bundled, serialize_records

FIXTURES = str(bundled_fixture_path())


def run_cli(*argv):
    return cli.main(list(argv))


def test_density_x60d_zero_with_coincidence_certificate(tmp_path, capsys):
    out = tmp_path / "r.json"
    code = run_cli(
        "density", "--records", FIXTURES, "--label", "x60d.t1", "--j", "2",
        "--trunc", "100", "--json", str(out),
    )
    assert code == 0
    report = json.loads(out.read_text())
    row = report["result"][0]
    assert row["verdict"] == "ZERO"
    assert row["certificate"]["coincidences"] == [[2, 2]]
    assert row["value_lo"] == 0.0 and row["value_hi"] == 0.0
    assert "T4b" in row["criteria"]
    assert capsys.readouterr().out.strip()


def test_density_positive_value(tmp_path):
    out = tmp_path / "r.json"
    code = run_cli(
        "density", "--records", FIXTURES, "--label", "x60d.t1", "--j", "1",
        "--trunc", "500", "--json", str(out), "--csv", str(tmp_path / "r.csv"),
    )
    assert code == 0
    row = json.loads(out.read_text())["result"][0]
    assert row["verdict"] == "POSITIVE"
    assert 0 < row["value_lo"] <= row["value_hi"] < 1
    csv_text = (tmp_path / "r.csv").read_text()
    assert csv_text.splitlines()[0].startswith("label,j,verdict")


def test_positivity_sweep_all(capsys):
    code = run_cli("positivity", "--records", FIXTURES, "--label", "x60d.t1", "--j", "all")
    assert code == 0
    out = capsys.readouterr().out
    lines = [ln for ln in out.splitlines() if ln.strip()]
    # j = 1 POSITIVE, j = 2 ZERO, j = 3 (gcd 1) POSITIVE, j = 4 POSITIVE
    assert len(lines) == 4
    assert sum("ZERO" in ln for ln in lines) == 1
    assert "ZERO" in lines[1]


def test_positivity_serre_record_spot_checks():
    code = run_cli("positivity", "--records", FIXTURES, "--label", "37.a1", "--j", "1,2,37,74")
    assert code == 0


def test_cli_determinism(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert run_cli(
            "density", "--records", FIXTURES, "--label", "full2torsion", "--j", "3",
            "--trunc", "100", "--json", str(out),
        ) == 0
    assert a.read_bytes() == b.read_bytes()


def test_density_requires_image_data(capsys):
    code = run_cli("density", "--records", FIXTURES, "--label", "19.a3", "--j", "1")
    assert code == cli.EXIT_VALIDATION
    assert "lacks level-scoped image data" in capsys.readouterr().err


def test_unknown_label(capsys):
    code = run_cli("positivity", "--records", FIXTURES, "--label", "nope", "--j", "1")
    assert code == cli.EXIT_VALIDATION


def test_validation_failure_exit_code(tmp_path, capsys):
    bad = {
        "schema_version": 1,
        "records": [{
            "label": "cmcurve", "weierstrass": [0, 0, 0, -1, 0],
            "conductor": 32, "discriminant": 64, "cm": True,
        }],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    code = run_cli("scan", "--records", str(path))
    assert code == cli.EXIT_VALIDATION
    assert "non-cm-required" in capsys.readouterr().err


def test_budget_exhaustion_exit_code(tmp_path, capsys):
    code = run_cli(
        "positivity", "--records", FIXTURES, "--label", "toy.196style",
        "--j", "1", "--budget", "10",
    )
    assert code == cli.EXIT_BUDGET


def test_empirical_cli(tmp_path):
    out = tmp_path / "e.json"
    code = run_cli(
        "empirical", "--records", FIXTURES, "--label", "19.a3", "--j", "3",
        "--x", "3000", "--json", str(out), "--csv", str(tmp_path / "e.csv"),
    )
    assert code == 0
    row = json.loads(out.read_text())["result"][0]
    assert row["hits"] > 0
    assert row["good_count"] > 400
    assert (tmp_path / "e.csv").read_text().count("\n") == 2  # header + one row


def test_empirical_budget_exit(tmp_path):
    code = run_cli(
        "empirical", "--records", FIXTURES, "--label", "19.a3", "--j", "1",
        "--x", "20000", "--x-budget", "10000",
    )
    assert code == cli.EXIT_BUDGET


def test_empirical_with_density_interval(tmp_path):
    out = tmp_path / "e.json"
    code = run_cli(
        "empirical", "--records", FIXTURES, "--label", "full2torsion", "--j", "1",
        "--x", "2000", "--trunc", "100", "--json", str(out), "--histogram",
    )
    assert code == 0
    row = json.loads(out.read_text())["result"][0]
    assert row["hits"] == 0
    assert row["value_lo"] == 0.0 and row["value_hi"] == 0.0


def test_coincidences_cli(tmp_path, capsys):
    out = tmp_path / "c.json"
    code = run_cli(
        "coincidences", "--records", FIXTURES, "--label", "x60d.t1",
        "--j-bound", "10", "--json", str(out), "--csv", str(tmp_path / "c.csv"),
    )
    assert code == 0
    result = json.loads(out.read_text())["result"]
    assert result[0]["coincidences"][0] == {
        "j": 2, "p": 2, "primitive": True, "witness_divisor": None,
    }
    csv_lines = (tmp_path / "c.csv").read_text().splitlines()
    assert len(csv_lines) == 4  # header + (2,2), (6,2), (10,2)


def test_scan_cli_small_corpus(tmp_path):
    recs = [load_bundled(lbl) for lbl in
            ("full2torsion", "x60d.t1", "toy.196style", "toy.19a3style", "19.a3")]
    path = tmp_path / "corpus.json"
    path.write_text(serialize_records(recs))
    out = tmp_path / "scan.json"
    code = run_cli("scan", "--records", str(path), "--j-bound", "10",
                   "--json", str(out), "--csv", str(tmp_path / "scan.csv"))
    assert code == 0
    report = json.loads(out.read_text())
    assert report["result"]["counterexamples"] == 0
    by_label = {e["label"]: e for e in report["result"]["records"]}
    assert by_label["19.a3"]["skipped"]
    assert by_label["toy.196style"]["zeros"] == [7, 9]
    assert by_label["full2torsion"]["zeros"] == [1, 3, 5, 7, 9]


def test_scan_counterexample_exit_code(tmp_path):
    # abstract V4 toy covered by three kernels: flagged, exit 5
    rec = {
        "label": "v4.toy",
        "weierstrass": [0, 0, 0, -7, 6],
        "conductor": None,
        "discriminant": 6400,
        "cm": False,
        "a_serre": None,
        "adelic_level": 30,
        "image_generators": [[11, 15, 0, 11], [19, 15, 0, 19]],
        "galois_image": False,
        "metadata": {"note": "abstract covering toy; not a Galois image"},
    }
    path = tmp_path / "cx.json"
    path.write_text(json.dumps({"schema_version": 1, "records": [rec]}))
    code = run_cli("scan", "--records", str(path), "--j-bound", "6")
    assert code == cli.EXIT_COUNTEREXAMPLE


def test_console_script_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "invfactors.cli", "positivity", "--records", FIXTURES,
         "--label", "full2torsion", "--j", "1,2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "ZERO" in proc.stdout and "POSITIVE" in proc.stdout
