import csv
import io
import json
from fractions import Fraction as F

import pytest

from bdwalk.cli import run_command
from bdwalk.config import (
    ConfigError,
    load_config,
    parse_config,
    sim_from_dict,
    sim_to_dict,
    walk_from_dict,
    walk_to_dict,
)
from bdwalk.reports import Report, emit_report, jsonable, payload_bytes, render_csv, render_json
from bdwalk.walks import Model


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


# -- config ----------------------------------------------------------------


def test_minimal_model1():
    spec = walk_from_dict({"model": "model1", "d": 2, "alpha": ["1/4", "1/4"]})
    assert spec.model is Model.MODEL1 and spec.alpha == (F(1, 4), F(1, 4))


def test_alpha_sum_error_carries_pointer():
    with pytest.raises(ConfigError) as err:
        parse_config({"schema_version": 1, "walks": [{"model": "model1", "d": 2, "alpha": ["1/4", "1/3"]}]})
    ptr, msg = err.value.errors[0]
    assert ptr == "/walks/0" and "sum-alpha" in msg


def test_schema_errors_carry_pointers():
    with pytest.raises(ConfigError) as err:
        parse_config({"schema_version": 1, "sim": {"steps": 0}, "walks": [{"model": "model9", "d": 2, "alpha": []}]})
    pointers = {p for p, _ in err.value.errors}
    assert "/sim/steps" in pointers and "/walks/0/model" in pointers
    with pytest.raises(ConfigError):
        parse_config({"schema_version": 2})
    with pytest.raises(ConfigError):
        parse_config({"schema_version": 1, "bogus": 1})


def test_model2_round_trip():
    doc = {"model": "model2", "d": 2, "alpha": ["1/4", "1/4"], "delta": ["1/4", "0"]}
    spec = walk_from_dict(doc)
    again = walk_from_dict(json.loads(json.dumps(walk_to_dict(spec))))
    assert again == spec
    assert walk_to_dict(again) == {"model": "model2", "d": 2, "alpha": ["1/4", "1/4"], "delta": ["1/4", "0"]}


def test_table_round_trip():
    doc = {
        "model": "model5", "d": 2, "alpha": ["1/4", "1/4"], "c": "1/20", "M": 2,
        "rate_tables": [{"up": {"2": "1/5", "-2": "1/5"}, "down": {"2": "1/5", "-2": "1/5"}}, {"up": {}}],
    }
    spec = walk_from_dict(doc)
    assert walk_from_dict(walk_to_dict(spec)) == spec


def test_bundle_and_sim_defaults(tmp_path):
    path = write(tmp_path, {
        "schema_version": 1,
        "rates": {"kind": "bd_gamma", "gamma": "2", "d": 3},
        "coordinates": [{"rates": {"kind": "ratio", "c": "-1"}}],
        "sim": {"steps": 1000},
    })
    bundle = load_config(path)
    assert bundle.rates.to_dict() == {"kind": "bd_gamma", "gamma": "2", "d": 3}
    assert bundle.coordinates[0].reflection_doubling is False
    cfg = sim_from_dict(bundle.sim, seed=5)
    assert sim_to_dict(cfg)["burn_in"] == 100 and cfg.seed == 5
    assert parse_config(bundle.resolved()).resolved() == bundle.resolved()


def test_load_failures(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{nope")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        sim_from_dict({})


# -- reports ---------------------------------------------------------------


def sample_report():
    rows = [{"n": 1, "p_exact": "3/4", "p": 0.75}, {"n": 2, "p_exact": "5/8", "p": 0.625}]
    return Report("pn-exact", {"d": 2}, {"x": F(1, 3), "inf": float("inf")}, {"table": "test"}, 7, rows)


def test_jsonable():
    assert jsonable(F(3, 4)) == "3/4"
    assert jsonable(float("nan")) == "nan"
    assert jsonable({1: (F(1), 2.5)}) == {"1": ["1", 2.5]}


def test_render_csv_rows():
    lines = render_csv(sample_report()).splitlines()
    assert lines == ["n,p_exact,p", "1,3/4,0.75", "2,5/8,0.625"]


def test_render_json_document():
    doc = json.loads(render_json(sample_report()))
    assert doc["metadata"]["seed"] == 7 and doc["metadata"]["command"] == "pn-exact"
    assert doc["payload"]["x"] == "1/3" and doc["payload"]["inf"] == "inf"
    assert doc["payload"]["table"][0] == {"n": 1, "p_exact": "3/4", "p": 0.75}
    assert payload_bytes(doc) == payload_bytes(json.loads(render_json(sample_report())))


def test_emit_report_writes_whole_files(tmp_path):
    paths = emit_report(sample_report(), tmp_path / "out", "both")
    assert sorted(p.name for p in paths) == ["pn-exact.csv", "pn-exact.json"]
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["pn-exact.csv", "pn-exact.json"]


# -- CLI -------------------------------------------------------------------


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_pn_exact_csv(capsys):
    code, out, _ = run(capsys, "pn-exact", "--d", "2", "--n-max", "3")
    assert code == 0
    assert out.splitlines()[:3] == ["n,p_exact,p", "1,3/4,0.75", "2,5/8,0.625"]
    code, out, _ = run(capsys, "pn-exact", "--d", "3", "--n-max", "100")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 100 and rows[0]["p_exact"] == "5/6"


def test_pn_exact_bounds(capsys):
    code, out, _ = run(capsys, "pn-exact", "--d", "3", "--n-max", "2", "--k-low", "1/2", "--k-high", "1")
    assert code == 0
    assert next(csv.DictReader(io.StringIO(out)))["upper_exact"] == "5/6"


def test_classify_verdicts(capsys):
    code, out, _ = run(capsys, "classify", "--family", "bd-gamma", "--gamma", "2", "--d", "3")
    doc = json.loads(out)
    assert code == 0 and doc["payload"]["verdict"] == "transient"
    assert abs(doc["payload"]["z"] - 2) < 1e-3
    code, out, _ = run(capsys, "classify", "--family", "bd-gamma", "--gamma", "2", "--d", "2")
    doc = json.loads(out)
    assert doc["payload"]["verdict"] == "null_recurrent" and abs(doc["payload"]["z"] - 1) < 1e-3


def test_examples78_example_one(capsys):
    code, out, _ = run(capsys, "examples78", "--example", "1", "--c", "1", "--d", "2", "--n-max", "200")
    doc = json.loads(out)
    assert code == 0
    assert abs(doc["payload"]["z"] - 2) < 0.05 and doc["payload"]["verdict"] == "transient"


def test_level_chain_from_walk_config(tmp_path, capsys):
    path = write(tmp_path, {"schema_version": 1, "model": "model1", "d": 2, "alpha": ["2/5", "1/10"]})
    code, out, _ = run(capsys, "level-chain", "--config", str(path), "--n-max", "10", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["p_exact"] for r in rows[:2]] == ["3/4", "5/8"]


def test_simulate_reproducible_and_round_trips(tmp_path, capsys):
    path = write(tmp_path, {"schema_version": 1, "model": "model1", "d": 2, "alpha": ["1/4", "1/4"],
                            "sim": {"steps": 5000, "walks": 4, "n_max": 30}})
    docs = []
    for sub in ("a", "b"):
        code, out, _ = run(capsys, "simulate", "--config", str(path), "--seed", "3", "--out", str(tmp_path / sub))
        assert code == 0 and out.strip().endswith("simulate.json")
        docs.append(json.loads((tmp_path / sub / "simulate.json").read_text()))
    assert payload_bytes(docs[0]) == payload_bytes(docs[1])
    meta = docs[0]["metadata"]
    assert meta["seed"] == 3 and meta["config"]["sim"]["burn_in"] == 500
    walk_from_dict(meta["config"]["walk"])
    sim_from_dict(meta["config"]["sim"])
    if docs[0]["payload"]["absent_levels"]:
        assert meta["notes"]


def test_flags_override_config(tmp_path, capsys):
    path = write(tmp_path, {"schema_version": 1, "model": "model1", "d": 1, "alpha": ["1/2"],
                            "sim": {"steps": 1000, "seed": 1}})
    _, out, _ = run(capsys, "simulate", "--config", str(path), "--seed", "9", "--steps", "2000")
    cfg = json.loads(out)["metadata"]["config"]["sim"]
    assert cfg["seed"] == 9 and cfg["steps"] == 2000


def test_conserve_check(tmp_path, capsys):
    path = write(tmp_path, {"schema_version": 1, "walks": [
        {"model": "model1", "d": 2, "alpha": ["1/4", "1/4"]},
        {"model": "model2", "d": 2, "alpha": ["1/4", "1/4"], "delta": ["1/4", "0"]},
    ], "sim": {"steps": 20000, "walks": 20, "n_max": 3}})
    code, out, _ = run(capsys, "conserve-check", "--config", str(path), "--seed", "1")
    doc = json.loads(out)
    assert code == 0 and len(doc["payload"]["pairs"]) == 1


@pytest.mark.parametrize("argv, kind", [
    (["classify", "--bogus"], "usage"),
    (["pn-exact", "--d", "1", "--n-max", "3"], "usage"),
    (["level-chain", "--family", "uniform", "--alpha", "1/4", "--d", "4", "--n-max", "40",
      "--method", "enumerate", "--budget", "100"], "budget"),
    ([], "usage"),
])
def test_errors_exit_two(capsys, argv, kind):
    code, out, err = run(capsys, *argv)
    assert code == 2 and out == ""
    assert json.loads(err)["error"] == kind


def test_config_error_written_to_out(tmp_path, capsys):
    path = write(tmp_path, {"schema_version": 1, "model": "model1", "d": 2, "alpha": ["1/4", "1/3"]})
    code, _, err = run(capsys, "simulate", "--config", str(path), "--out", str(tmp_path / "o"))
    assert code == 2
    doc = json.loads((tmp_path / "o" / "error.json").read_text())
    assert doc["error"] == "config" and doc == json.loads(err)
    assert [p.name for p in (tmp_path / "o").iterdir()] == ["error.json"]


def test_examples78_with_simulation(capsys):
    code, out, _ = run(capsys, "examples78", "--example", "2", "--c", "-1", "--n-max", "80",
                       "--simulate", "--horizon", "2000", "--walks", "4", "--seed", "5")
    doc = json.loads(out)
    assert code == 0 and doc["metadata"]["seed"] == 5
    mc = doc["payload"]["montecarlo"]
    assert mc["horizons"] == [2000, 4000, 8000] and len(mc["per_replicate"]) == 4
    assert doc["payload"]["coordinate_verdict"] in ("null_recurrent", "positive_recurrent")
