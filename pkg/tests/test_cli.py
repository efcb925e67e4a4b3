import json

import numpy as np
import pytest

from wavestab.cli import build_parser, main
from wavestab.experiments import ExperimentConfig
from wavestab.io import read_field_binary, read_rows_csv

CHEAP = ["--suite", "green_formula", "--suite", "mollifier_rates"]


def test_print_config(capsys):
    assert main(["--print-config", "--seed", "3"]) == 0
    cfg = json.loads(capsys.readouterr().out)
    assert cfg["seed"] == 3
    assert ExperimentConfig.from_dict(cfg).seed == 3


def test_print_config_after_subcommand(capsys):
    assert main(["verify", "--print-config"]) == 0
    assert json.loads(capsys.readouterr().out)["seed"] == 0


def test_no_command_is_usage_error(capsys):
    assert main([]) == 2


def test_subcommands_exist():
    p = build_parser()
    for cmd in ("verify", "stability", "rates", "plots"):
        assert p.parse_args([cmd]).command == cmd


@pytest.mark.parametrize("change", [{"M": 1.0}, {"geometry": {"cfl": 1.2}}, {"bogus": 1}])
def test_configuration_errors_exit_2(tmp_path, capsys, change):
    p = tmp_path / "c.json"
    p.write_text(json.dumps(change))
    assert main(["verify", "--config", str(p), "--out", str(tmp_path / "o")] + CHEAP) == 2
    assert "configuration error" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_unknown_suite_exits_2(tmp_path):
    assert main(["verify", "--out", str(tmp_path), "--suite", "nope"]) == 2


def test_verify_writes_outputs(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--out", str(out)] + CHEAP) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and set(report["suites"]) == {"green_formula", "mollifier_rates"}
    rows = read_rows_csv(out / "suites.csv")
    assert {r["suite"] for r in rows} == {"green_formula", "mollifier_rates"}
    vals, h = read_field_binary(out / "oracle_pair.bin")
    assert vals.shape[0] == 6 and h == ExperimentConfig().geometry.h
    assert np.all(vals[3:] == 0)


def test_verify_failure_exits_1(tmp_path, capsys, monkeypatch):
    import wavestab.cli as cli

    def fake(config, suites):
        return {"kind": "verify", "suites": {"x": {"checks": {"c": False}}}, "failed": ["x"]}

    monkeypatch.setattr(cli, "run_verify", fake)
    assert main(["verify", "--out", str(tmp_path)]) == 1
    assert "FAILED: x" in capsys.readouterr().err


def test_seed_changes_hash(tmp_path):
    main(["verify", "--out", str(tmp_path / "a")] + CHEAP)
    main(["verify", "--out", str(tmp_path / "b"), "--seed", "9"] + CHEAP)
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert a["config_hash"] != b["config_hash"] and b["seed"] == 9


def test_plots_from_reports(tmp_path, capsys):
    lam = [4.0, 8.0, 16.0]
    fit = {"slope": -1.0, "intercept": 0.0, "r2": 1.0, "n": 3}
    report = {"kind": "rates", "mollifier": {"lambdas": lam, "sup_error": [1 / x for x in lam],
                                             "second_difference": lam, "sup_error_fit": fit,
                                             "second_difference_fit": fit},
              "go_rows": [], "go_fits": {}}
    d = tmp_path / "rates"
    d.mkdir()
    (d / "report.json").write_text(json.dumps(report))
    assert main(["plots", "--out", str(tmp_path)]) == 0
    assert (d / "rates_mollifier_sup_error.svg").exists()
    assert "rates_mollifier_sup_error.svg" in capsys.readouterr().out


def test_plots_without_reports_exits_2(tmp_path):
    assert main(["plots", "--out", str(tmp_path)]) == 2


def test_plots_bad_report_exits_2(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    bad = tmp_path / "report.json"
    bad.write_text("{oops")
    assert main(["plots", str(bad)]) == 2
    assert not (tmp_path / "results").exists()
