import json

import pytest

import repdyn.cli as cli
from repdyn.payoff import ChainTooLargeError


def _write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def test_list_strategies(capsys):
    assert cli.main(["list-strategies"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    for token in ("AoN:K=", "ADCO:K=", "ZD:chi=", "WSLS", "coop-rates"):
        assert token in out


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "rates.csv"
    cfg = _write_config(tmp_path, {"experiment": "coop-rates", "K": [1, 2, 3],
                                   "output": str(out)})
    assert cli.main(["run", cfg]) == cli.EXIT_OK
    lines = out.read_text(encoding="utf-8").splitlines()
    header = next(l for l in lines if not l.startswith("#"))
    assert header == "K,N,t,epsilon,aon_coop_rate,adco_coop_rate"
    assert "wrote 3 rows" in capsys.readouterr().out


def test_run_is_deterministic(tmp_path):
    outs = []
    for name in ("a.csv", "b.csv"):
        out = tmp_path / name
        cfg = _write_config(tmp_path, {"experiment": "fixed-points", "K": [2, 5],
                                       "output": str(out)}, name + ".json")
        assert cli.main(["run", cfg]) == cli.EXIT_OK
        lines = out.read_text(encoding="utf-8").splitlines()
        outs.append([l for l in lines if not l.startswith(("# wall_time_s",
                                                           "# config"))])
    assert outs[0] == outs[1]


def test_run_missing_config_is_config_error(tmp_path, capsys):
    assert cli.main(["run", str(tmp_path / "nope.json")]) == cli.EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_run_invalid_json_reports_location(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"experiment": "coop-rates",\n  "K": [1,]}', encoding="utf-8")
    assert cli.main(["run", str(path)]) == cli.EXIT_CONFIG
    err = capsys.readouterr().err
    assert "line 2" in err


def test_run_unknown_experiment(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"experiment": "bogus"})
    assert cli.main(["run", cfg]) == cli.EXIT_CONFIG


def test_stochastic_preset_requires_seed(tmp_path, capsys):
    cfg = _write_config(tmp_path, {"experiment": "pairwise-replicator"})
    assert cli.main(["run", cfg]) == cli.EXIT_CONFIG
    assert "seed" in capsys.readouterr().err


def test_set_overrides_config_options(tmp_path, capsys):
    out = tmp_path / "o.csv"
    cfg = _write_config(tmp_path, {"experiment": "coop-rates", "K": [1],
                                   "output": str(out)})
    assert cli.main(["run", cfg, "--set", "K=[1,2,3,4]"]) == cli.EXIT_OK
    assert "wrote 4 rows" in capsys.readouterr().out
    assert cli.main(["run", cfg, "--set", "badoverride"]) == cli.EXIT_CONFIG


def test_resource_errors_map_to_exit_3(tmp_path, capsys, monkeypatch):
    def boom(config):
        raise ChainTooLargeError("joint state space exceeds cap")

    monkeypatch.setattr(cli, "run", boom)
    cfg = _write_config(tmp_path, {"experiment": "coop-rates"})
    assert cli.main(["run", cfg]) == cli.EXIT_RESOURCE
    assert "resource error" in capsys.readouterr().err


def test_validate_exit_codes(capsys, monkeypatch):
    monkeypatch.setattr(cli, "validation_checks",
                        lambda seed: [("alpha", True, ""), ("beta", True, "ok")])
    assert cli.main(["validate", "--seed", "0"]) == cli.EXIT_OK
    assert "all 2 checks passed" in capsys.readouterr().out

    monkeypatch.setattr(cli, "validation_checks",
                        lambda seed: [("alpha", True, ""), ("beta", False, "bad")])
    assert cli.main(["validate"]) == cli.EXIT_VALIDATION
    out = capsys.readouterr().out
    assert "FAIL" in out and "1 of 2 checks failed" in out
