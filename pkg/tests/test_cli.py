import json

import pytest

from coopetition import cli, oracle
from coopetition.scenario_io import bundled


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_example(tmp_path, capsys):
    code, out, _ = run(["solve", str(bundled("two_firm_example.yaml")), "--out", str(tmp_path), "--no-timestamp"], capsys)
    assert code == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["r_star"] in ([0, 0], [1, 1])
    block = rep["reference"]
    assert block["verified"] == {"fl": True, "local": True}
    assert {r["profile"] for r in block["rows"]} == {"fl", "local"}
    assert "reference comparison" in out
    assert "generated_at" not in rep


def test_timestamp_present_by_default(tmp_path, capsys):
    code, _, _ = run(["solve", str(bundled("two_firm_example.yaml")), "--out", str(tmp_path)], capsys)
    assert code == 0 and "generated_at" in json.loads((tmp_path / "report.json").read_text())


def test_byte_identical_outputs(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["solve", str(bundled("two_firm_example.yaml")), "--out", str(d), "--no-timestamp"], capsys)[0] == 0
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()


def test_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(bundled("two_firm_example.yaml").read_text().replace("w_p: 1.0", "w_p: 0.0"))
    code, _, err = run(["solve", str(bad), "--out", str(tmp_path)], capsys)
    assert code == 1 and "w_p must be positive" in err


def test_settings_override_validated(tmp_path, capsys):
    code, _, err = run(["solve", str(bundled("two_firm_example.yaml")), "--out", str(tmp_path), "--damping", "1.5"], capsys)
    assert code == 1 and "damping" in err


def test_non_convergence_exit_code(tmp_path, capsys):
    s = tmp_path / "s.yaml"
    s.write_text(bundled("two_firm_example.yaml").read_text() + "settings:\n  max_br_iterations: 1\n")
    code, _, err = run(["solve", str(s), "--out", str(tmp_path)], capsys)
    assert code == 2 and "price_game" in err


def test_oracle_failure_exit_code(tmp_path, capsys, monkeypatch):
    real = oracle.verify_no_deviation

    def pessimist(*a, **k):
        v = real(*a, **k)
        return v._replace(passed=False, worst_gain=1.0, worst_company="I")

    monkeypatch.setattr(oracle, "verify_no_deviation", pessimist)
    code, out, _ = run(["solve", str(bundled("two_firm_example.yaml")), "--out", str(tmp_path)], capsys)
    assert code == 3 and "FAIL" in out


def test_check_dist(tmp_path, capsys):
    code, out, _ = run(["check-dist", "valley_mixture", "--out", str(tmp_path)], capsys)
    assert code == 1 and "violated" in out
    doc = json.loads((tmp_path / "check_dist.json").read_text())
    assert 0.2 < doc["violation_at"] < 0.5
    for desc in ("uniform", "truncated_gamma", "{kind: truncated_gaussian, sd: 0.3}"):
        assert run(["check-dist", desc, "--out", str(tmp_path)], capsys)[0] == 0
    assert run(["check-dist", "{kind: nope}", "--out", str(tmp_path)], capsys)[0] == 1


def test_oracle_check(tmp_path, capsys):
    code, out, _ = run(["oracle-check", str(bundled("two_firm_example.yaml")), "--out", str(tmp_path),
                        "--grid", "600", "--no-timestamp"], capsys)
    assert code == 0
    doc = json.loads((tmp_path / "oracle_check.json").read_text())
    assert doc["passed"] and doc["grid_n"] == 600


def test_sweep_small(tmp_path, capsys):
    fx = tmp_path / "f.csv"
    rows = bundled("accuracy_tables.csv").read_text().splitlines()
    fx.write_text("\n".join([rows[0], rows[1], rows[19]]) + "\n")
    code, out, _ = run(["sweep", str(fx), str(bundled("sweep_params.yaml")), "--out", str(tmp_path),
                        "--grid", "300", "--no-timestamp"], capsys)
    assert code == 0
    table = (tmp_path / "collaboration.csv").read_text().splitlines()
    assert table[0].startswith("dataset,sweep,sweep_key,collaborate")
    assert len(table) == 3
    assert (tmp_path / "prices_cifar-10_beta.csv").exists()
    assert "differs from reported" in out


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        cli.main([])
