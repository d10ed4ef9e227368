import numpy as np
import pytest

from repdyn.experiments import (
    CLASSIC_SPECS,
    ConfigError,
    ExperimentConfig,
    ResultTable,
    build_mem1_grid,
    classics_roster,
    run,
    run_coop_rates,
    run_fixed_points,
    validation_checks,
)
from repdyn.payoff import adco_group_coop_rate, aon_group_coop_rate
from repdyn.strategy import spec_of


def test_mem1_grid_shape_and_order():
    grid = build_mem1_grid()
    assert len(grid) == 6**4
    assert grid[0].vector() == (0.0, 0.0, 0.0, 0.0)
    assert grid[-1].vector() == (1.0, 1.0, 1.0, 1.0)
    # lexicographic in (p_CC, p_CD, p_DC, p_DD)
    assert grid[1].vector() == (0.0, 0.0, 0.0, 0.2)
    assert len({g.vector() for g in grid}) == 6**4


def test_classics_roster_matches_specs():
    roster = classics_roster()
    assert [spec_of(s) for s in roster] == list(CLASSIC_SPECS)
    assert len(roster) == 10


def test_config_from_dict_errors():
    with pytest.raises(ConfigError, match="experiment"):
        ExperimentConfig.from_dict({})
    with pytest.raises(ConfigError, match="unknown experiment"):
        ExperimentConfig.from_dict({"experiment": "nope"})
    with pytest.raises(ConfigError, match="game parameters"):
        ExperimentConfig.from_dict(
            {"experiment": "coop-rates", "game": {"epsilon": 0.9}}
        )


def test_config_roundtrip_keeps_options():
    doc = {"experiment": "coop-rates", "game": {"epsilon": 0.02},
           "seed": 3, "K": "1..5", "N": [2, 5]}
    cfg = ExperimentConfig.from_dict(doc)
    assert cfg.opt("K", None) == "1..5"
    assert ExperimentConfig.from_dict(cfg.to_dict()).to_dict() == cfg.to_dict()


def test_coop_rates_preset_values_and_range_syntax():
    cfg = ExperimentConfig.from_dict(
        {"experiment": "coop-rates", "game": {"epsilon": 0.01},
         "K": "1..4", "N": [3], "t": [2]}
    )
    table = run_coop_rates(cfg)
    assert table.column("K") == [1, 2, 3, 4]
    assert table.column("aon_coop_rate")[2] == pytest.approx(
        aon_group_coop_rate(3, 3, 0.01)
    )
    assert table.column("adco_coop_rate")[2] == pytest.approx(
        adco_group_coop_rate(3, 2, 3, 0.01)
    )


def test_fixed_points_preset_reports_unstable_points():
    cfg = ExperimentConfig.from_dict(
        {"experiment": "fixed-points", "game": {"epsilon": 0.001}, "K": [2]}
    )
    table = run_fixed_points(cfg)
    assert table.column("stability") == ["unstable", "unstable"]
    for x in table.column("x_star"):
        assert 0.0 < x < 1.0


def test_result_table_csv_format(tmp_path):
    table = ResultTable(["a", "b"], [[1, 0.5], [2, 1 / 3]], {"note": "x", "d": {"k": 1}})
    path = tmp_path / "t.csv"
    table.write_csv(str(path))
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# note: x"
    assert lines[1] == '# d: {"k": 1}'
    assert lines[2] == "a,b"
    assert float(lines[4].split(",")[1]) == 1 / 3  # 17 significant digits


def test_run_adds_metadata_and_writes_output(tmp_path):
    out = tmp_path / "rates.csv"
    cfg = ExperimentConfig.from_dict(
        {"experiment": "coop-rates", "K": [1, 2], "output": str(out)}
    )
    table = run(cfg)
    assert "config" in table.metadata
    assert "wall_time_s" in table.metadata
    assert table.metadata["version"].startswith("repdyn ")
    text = out.read_text(encoding="utf-8")
    assert text.startswith("# config: ")
    assert "K,N,t,epsilon,aon_coop_rate,adco_coop_rate" in text


def test_validation_checks_all_pass():
    checks = validation_checks(seed=0)
    assert len(checks) >= 8
    failures = [name for name, ok, _ in checks if not ok]
    assert failures == []
