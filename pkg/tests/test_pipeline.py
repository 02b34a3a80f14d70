import json

import pytest

from config import parse_config
from pipeline import main, run_pipeline

EXPECTED_TABLES = {"q_table", "equilibria", "curves", "simulate", "epsilon", "gain_curve", "disagreement"}


@pytest.fixture(scope="module")
def pipeline_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("results")
    config = parse_config({"montecarlo": {"trials": 20_000}})
    return run_pipeline(config, out), out


def test_pipeline_writes_every_table(pipeline_run):
    tables, out = pipeline_run
    assert set(tables) == EXPECTED_TABLES
    for name in EXPECTED_TABLES:
        assert (out / f"{name}.csv").exists()


def test_pipeline_summary(pipeline_run):
    _, out = pipeline_run
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["selected_point"]["kind"] == "interior"
    assert summary["config"]["montecarlo"]["trials"] == 20_000
    # the symmetric equilibrium beats everybody playing FS
    assert summary["network_utility"] > summary["network_fs_utility"]


def test_pipeline_symmetric_tables(pipeline_run):
    tables, _ = pipeline_run
    assert len(tables["q_table"]) == 100
    assert len(tables["gain_curve"]) == 16
    assert tables["disagreement"]["rate"].iloc[-1] <= tables["disagreement"]["rate"].iloc[0]
    assert (tables["epsilon"]["samples"] == 20_000).all()


def test_pipeline_strong_players(tmp_path):
    strong = {
        "direct": {"model": "rayleigh", "mean_db": 0.0},
        "cross": {"model": "rayleigh", "mean_db": -6.0},
        "power_db": 20.0,
    }
    config = parse_config({"players": [strong, strong], "montecarlo": {"trials": 10_000}})
    tables = run_pipeline(config, tmp_path)
    # FDM is rare when interference is weak
    assert (tables["simulate"]["fdm_freq"] < 0.2).all()
    assert (tables["gain_curve"][["gain_db_p1", "gain_db_p2"]] >= -1e-9).all().all()


def test_pipeline_main_reads_config_file(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"montecarlo": {"trials": 5_000, "seed": 7}}), encoding="utf-8")
    main([str(cfg), str(tmp_path / "out")])
    summary = json.loads((tmp_path / "out" / "summary.json").read_text(encoding="utf-8"))
    assert summary["config"]["montecarlo"]["seed"] == 7
