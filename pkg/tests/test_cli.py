import csv
import json
import math
from pathlib import Path

import pytest

from wavelab.cli import main
from wavelab.config import SchemaError, load_config
from wavelab.report import to_json, write_csv

CONFIGS = sorted((Path(__file__).parent.parent / "configs").glob("*"))


def experiment_of(path):
    cfg = load_config(path)
    return cfg.experiment, cfg.name


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(command, config, out):
    return main([command, "--config", str(config), "--out", str(out)])


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_cos_mode_solve(tmp_path):
    cfg = CONFIGS[0].parent / "cos_mode_solve.json"
    assert run("solve", cfg, tmp_path) == 0
    table = rows(tmp_path / "cos_mode.csv")
    assert table[0] == ["t", "eta", "gronwall_bound"]
    assert all(abs(float(r[1]) - 1) <= 1e-6 for r in table[1:])
    summary = json.loads((tmp_path / "cos_mode.summary.json").read_text())
    assert summary["passed"] and summary["config"]["name"] == "cos_mode"
    assert all("invariant" in v and "tolerance" in v for v in summary["verdicts"])


def test_smooth_existence_sweep(tmp_path):
    assert run("sweep-existence", CONFIGS[0].parent / "smooth_existence.yaml", tmp_path) == 0
    summary = json.loads((tmp_path / "smooth_existence.summary.json").read_text())
    assert summary["results"]["verdict"] == "moderate"
    assert abs(summary["results"]["fit"]["fitted_N"]) <= 1e-6
    assert len(rows(tmp_path / "smooth_existence.csv")) == 1 + 8


def test_oracle_compare_constant_potential(tmp_path):
    assert run("oracle-compare", CONFIGS[0].parent / "constant_potential_oracle.yaml", tmp_path) == 0
    summary = json.loads((tmp_path / "constant_potential_oracle.summary.json").read_text())
    assert summary["results"]["max_discrepancy"] <= 2e-4


@pytest.mark.parametrize("config", CONFIGS, ids=[c.stem for c in CONFIGS])
def test_rerun_is_byte_identical(config, tmp_path):
    command, name = experiment_of(config)
    assert run(command, config, tmp_path / "a") == 0
    assert run(command, config, tmp_path / "b") == 0
    for suffix in (".csv", ".summary.json"):
        assert (tmp_path / "a" / f"{name}{suffix}").read_bytes() == (tmp_path / "b" / f"{name}{suffix}").read_bytes()


def test_threads_do_not_change_reports(tmp_path):
    cfg = CONFIGS[0].parent / "delta_uniqueness.yaml"
    assert main(["sweep-uniqueness", "--config", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert main(["sweep-uniqueness", "--config", str(cfg), "--out", str(tmp_path / "b"), "--threads", "3"]) == 0
    assert (tmp_path / "a" / "delta_uniqueness.csv").read_bytes() == (tmp_path / "b" / "delta_uniqueness.csv").read_bytes()


BASE = """schema_version: 1
name: probe
problem:
  T: 0.5
  dt: 1.0e-3
  m: 8
"""


@pytest.mark.parametrize("extra, field", [
    ("  V: {kind: dirac, x0: 1.0, weight: -2.0}\n", "problem.V.weight"),
    ("  u0: {kind: wiggle}\n", "problem.u0.kind"),
    ("  colour: red\n", "problem.colour"),
    ("  m: 0\n", None),
])
def test_schema_errors_exit_2(tmp_path, capsys, extra, field):
    text = BASE.replace("  m: 8\n", "") + extra if extra.startswith("  m:") else BASE + extra
    assert run("solve", write(tmp_path, "c.yaml", text), tmp_path) == 2
    err = capsys.readouterr().err
    assert "schema error" in err
    if field:
        assert field in err and f"line {text.count(chr(10))}" in err


def test_schema_version_and_experiment_mismatch(tmp_path):
    assert run("solve", write(tmp_path, "c.yaml", BASE.replace("schema_version: 1", "schema_version: 2")), tmp_path) == 2
    assert run("lift-solve", write(tmp_path, "d.yaml", BASE + "experiment: solve\n"), tmp_path) == 2


def test_invalid_json_reports_line(tmp_path, capsys):
    p = write(tmp_path, "c.json", '{\n  "schema_version": 1,\n  "name": "x",,\n}\n')
    assert run("solve", p, tmp_path) == 2
    assert "line 3" in capsys.readouterr().err


def test_missing_config_exit_2(tmp_path):
    assert run("solve", tmp_path / "absent.yaml", tmp_path) == 2


def test_singular_solve_needs_eps_value(tmp_path):
    text = BASE + "  V: {kind: dirac, x0_over_L: 0.5}\n"
    assert run("solve", write(tmp_path, "c.yaml", text), tmp_path) == 2
    assert run("solve", write(tmp_path, "d.yaml", text + "eps: {value: 0.125}\n"), tmp_path / "o") == 0


def test_guard_violations_exit_3(tmp_path, capsys):
    big_dt = BASE.replace("dt: 1.0e-3", "dt: 0.5").replace("m: 8", "m: 64")
    assert run("solve", write(tmp_path, "c.yaml", big_dt), tmp_path) == 3
    assert "[step-size]" in capsys.readouterr().err
    bad_lift = BASE + "  boundary: {g0: {kind: const, c: 1.0}}\n"
    assert run("lift-solve", write(tmp_path, "d.yaml", bad_lift), tmp_path) == 3
    assert "[boundary-consistency]" in capsys.readouterr().err
    neg = BASE + "  V: {kind: sin, amp: 1.0, omega: 2.0}\n"
    assert run("solve", write(tmp_path, "e.yaml", neg), tmp_path) == 3
    assert "[potential-sign]" in capsys.readouterr().err


def test_failed_verdict_exit_1(tmp_path):
    text = BASE + "  u0: {kind: mode, k: 1}\ntolerances: {energy_drift_factor: 0.0}\n"
    assert run("solve", write(tmp_path, "c.yaml", text), tmp_path) == 1
    summary = json.loads((tmp_path / "probe.summary.json").read_text())
    assert summary["passed"] is False


def test_unwritable_output_exit_4(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert run("solve", write(tmp_path, "c.yaml", BASE), blocker / "sub") == 4


def test_random_seed_problem(tmp_path):
    text = BASE.replace("m: 8", "m: 16\n  random_seed: 3")
    assert run("verify-energy", write(tmp_path, "c.yaml", text), tmp_path) == 0
    text_bad = text + "  V: {kind: const, c: 1}\n"
    assert run("verify-energy", write(tmp_path, "d.yaml", text_bad), tmp_path) == 2


def test_empty_series_is_header_only(tmp_path):
    write_csv(tmp_path / "e.csv", ["t", "eta"], [])
    assert (tmp_path / "e.csv").read_text() == "t,eta\n"


def test_json_float_format():
    assert to_json(0.1) == "0.10000000000000001"
    assert to_json(1.0) == "1.0"
    assert to_json(math.inf) == '"inf"'
    assert to_json({"a": [1, None, True]}) == '{\n  "a": [\n    1,\n    null,\n    true\n  ]\n}'


def test_parse_rejects_malformed_eps():
    from wavelab.config import parse_config
    base = {"schema_version": 1, "name": "x", "problem": {}}
    with pytest.raises(SchemaError):
        parse_config({**base, "eps": {"grid": [0.5, 0.6, 0.1]}})
    with pytest.raises(SchemaError):
        parse_config({**base, "eps": {"j_min": 3, "j_max": 4}})
    cfg = parse_config({**base, "eps": {"grid": [0.5, 0.25, 0.1]}})
    assert cfg.problem.eps_grid == (0.5, 0.25, 0.1)
