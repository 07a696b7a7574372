import csv
import json

import numpy as np
import pytest

from fxforecast.cli import EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, main


@pytest.fixture()
def small_config(tmp_path):
    cfg = {
        "data": {"synthetic": {"generator": "fx_regime", "n": 240, "seed": 1}},
        "grid": {"families": ["MLFFNN", "NARX"], "neurons": [2, 3], "algorithms": ["LM", "SCG"]},
        "trainer": {"max_epochs": 10},
        "garch": [{"family": "GARCH", "p": 1, "q": 1}, {"family": "EGARCH", "p": 1, "q": 1}],
        "garch_restarts": 1,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def _run(*argv):
    return main([str(a) for a in argv])


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_simulate_then_ingest_and_describe(tmp_path):
    sim = tmp_path / "sim"
    assert _run("simulate", "rw", "--n", 200, "--seed", 3, "--out", sim) == EXIT_OK
    meta = json.loads((sim / "simulate.json").read_text())
    assert meta == {"process": "random_walk", "drift": 0.0, "n": 200, "seed": 3}
    ing = tmp_path / "ing"
    assert _run("ingest", "--data", sim / "simulated.csv", "--difference", "y", "--out", ing) == EXIT_OK
    info = json.loads((ing / "ingest.json").read_text())
    assert info["n"] == 199 and "y_diff" in info["columns"]
    desc = tmp_path / "desc"
    assert _run("describe", "--data", ing / "frame.csv", "--out", desc) == EXIT_OK
    rows = _read_csv(desc / "describe.csv")
    assert rows[0][:3] == ["column", "mean", "median"] and len(rows) == 3


@pytest.mark.parametrize("process,extra", [("garch", []), ("garch", ["--egarch", "--gamma", "-0.1", "--omega", "-0.1",
                                                                     "--beta", "0.9"]), ("narx", [])])
def test_simulate_processes(tmp_path, process, extra):
    assert _run("simulate", process, "--n", 100, "--out", tmp_path, *extra) == EXIT_OK
    assert len(_read_csv(tmp_path / "simulated.csv")) == 101


def test_simulate_is_seeded(tmp_path):
    _run("simulate", "garch", "--n", 50, "--seed", 4, "--out", tmp_path / "a")
    _run("simulate", "garch", "--n", 50, "--seed", 4, "--out", tmp_path / "b")
    assert (tmp_path / "a" / "simulated.csv").read_bytes() == (tmp_path / "b" / "simulated.csv").read_bytes()


@pytest.mark.parametrize("test", ["jb", "adf", "pp", "archlm"])
def test_stattest_subcommands(tmp_path, test):
    _run("simulate", "rw", "--n", 300, "--out", tmp_path)
    out = tmp_path / "st"
    assert _run("stattest", test, "--data", tmp_path / "simulated.csv", "--columns", "y", "--out", out) == EXIT_OK
    body = json.loads((out / f"stattest_{test}.json").read_text())
    assert set(body) == {"y"} and 0 <= body["y"]["p_value"] <= 1
    assert _read_csv(out / f"stattest_{test}.csv")[0][:4] == ["test", "spec", "statistic", "p_value"]


def test_adf_on_random_walk_fails_to_reject(tmp_path):
    _run("simulate", "rw", "--n", 500, "--seed", 1, "--out", tmp_path)
    _run("stattest", "adf", "--data", tmp_path / "simulated.csv", "--columns", "y", "--spec", "c", "--out", tmp_path)
    assert json.loads((tmp_path / "stattest_adf.json").read_text())["y"]["decision"] == "fail-to-reject"


def test_train_and_evaluate(tmp_path, small_config):
    out = tmp_path / "mlp"
    assert _run("train-mlffnn", "--config", small_config, "--neurons", 3, "--algorithm", "LM", "--out", out) == EXIT_OK
    body = json.loads((out / "train.json").read_text())
    assert body["algorithm"] == "LM" and set(body["metrics"]) == {"train", "validation", "test"}
    assert _read_csv(out / "history.csv")[0] == ["epoch", "train_mse", "val_mse", "test_mse"]
    ev = tmp_path / "ev"
    assert _run("evaluate", "--config", small_config, "--model", out / "model.json", "--out", ev) == EXIT_OK
    reports = json.loads((ev / "evaluate.json").read_text())
    assert reports[2]["mse"] == pytest.approx(body["metrics"]["test"]["mse"], rel=1e-12)


def test_train_narx(tmp_path, small_config):
    out = tmp_path / "narx"
    assert _run("train-narx", "--config", small_config, "--neurons", 3, "--input-delay", 1, "--output-delay", 2,
                "--out", out) == EXIT_OK
    spec = json.loads((out / "train.json").read_text())["spec"]
    assert spec["input_delay"] == 1 and spec["output_delay"] == 2


def test_fit_garch(tmp_path, small_config):
    out = tmp_path / "g"
    assert _run("fit-garch", "--config", small_config, "--out", out) == EXIT_OK
    fits = json.loads((out / "garch.json").read_text())
    assert [(f["family"], f["p"], f["q"]) for f in fits] == [("GARCH", 1, 1), ("EGARCH", 1, 1)]
    assert (out / "variance_GARCH_1_1.csv").exists()
    coef = _read_csv(out / "coefficients.csv")
    assert coef[0] == ["model", "name", "estimate", "std_error", "z", "p_value", "stars"]


def test_grid_ancova_compare(tmp_path, small_config):
    g = tmp_path / "grid"
    assert _run("grid", "--config", small_config, "--family", "MLFFNN", "--out", g) == EXIT_OK
    grid = json.loads((g / "grid.json").read_text())
    assert len(grid["MLFFNN"]["records"]) == 4
    a = tmp_path / "anc"
    assert _run("ancova", "--records", g / "grid.json", "--out", a) == EXIT_OK
    table = json.loads((a / "ancova.json").read_text())["MLFFNN"]
    assert [r["df"] for r in table["rows"]] == [2, 1, 1, 1, 1, 4, 3]
    c = tmp_path / "cmp"
    assert _run("compare", "--config", small_config, "--out", c) == EXIT_OK
    report = json.loads((c / "report.json").read_text())
    assert [row[0] for row in _read_csv(c / "chart.csv")[1:]] == ["MLFFNN", "NARX", "GARCH(1,1)", "EGARCH(1,1)"]
    assert report["comparison"]["verdict"] in ("no significant difference", "ANN better", "GARCH family better")


def test_compare_output_is_byte_identical(tmp_path, small_config):
    for name in ("a", "b"):
        assert _run("compare", "--config", small_config, "--seed", 7, "--out", tmp_path / name) == EXIT_OK
    assert (tmp_path / "a" / "report.json").read_bytes() == (tmp_path / "b" / "report.json").read_bytes()


def test_evaluate_columns(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("date,a,p\n2020-01-01,1,1.5\n2020-01-02,2,2\n2020-01-03,3,2.5\n")
    assert _run("evaluate", "--data", path, "--actual", "a", "--predicted", "p", "--out", tmp_path) == EXIT_OK
    rep = json.loads((tmp_path / "evaluate.json").read_text())[0]
    assert rep["mse"] == pytest.approx(1 / 6)


# ---- exit codes


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert _run("nosuchcommand") == EXIT_USAGE
    assert _run("stattest", "kpss") == EXIT_USAGE
    assert _run("describe", "--data", tmp_path / "missing.csv", "--out", tmp_path) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text('{"grid": {"neurons": []}}')
    assert _run("grid", "--config", bad, "--out", tmp_path) == EXIT_USAGE
    assert _run("evaluate", "--config", bad, "--out", tmp_path) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_missing_column_is_usage_error(tmp_path):
    _run("simulate", "rw", "--n", 50, "--out", tmp_path)
    assert _run("stattest", "jb", "--data", tmp_path / "simulated.csv", "--columns", "nope", "--out", tmp_path) == EXIT_USAGE


def test_numerical_failure_exit_code(tmp_path):
    path = tmp_path / "flat.csv"
    rows = "\n".join(f"2020-01-{d:02d},1.0" for d in range(1, 31))
    path.write_text("date,y\n" + rows + "\n")
    assert _run("describe", "--data", path, "--out", tmp_path) == EXIT_NUMERIC
    assert _run("simulate", "garch", "--alpha", 0.5, "--beta", 0.6, "--out", tmp_path) == EXIT_USAGE


def test_schema_prints_json(capsys):
    assert _run("schema") == EXIT_OK
    schema = json.loads(capsys.readouterr().out)
    assert "grid" in schema["properties"]
    assert np.isin(["data", "seed"], list(schema["properties"])).all()
