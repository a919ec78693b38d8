import csv
import io
import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from tci import cli, presets
from tci.reinsurance import pair_residuals, ReinsuranceModel
from tci.normal import TargetDist


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def as_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def as_json(command, text):
    doc = json.loads(text)
    jsonschema.validate(doc, cli.schema_for(command))
    return doc


def test_dividend_plan_rows(capsys):
    code, out, _ = run(capsys, "dividend-plan", "--n", "3", "--mubar", "1", "--M", "0.5", "--xi", "1")
    assert code == 0
    rows = as_rows(out)
    assert [(r["c0"], r["c1"], r["c2"]) for r in rows] == [("1", "0.5", "0"), ("0", "0.5", "1")]
    assert rows[0]["kappa"] == "1" and rows[0]["t_star"] == "1"


def test_dividend_plan_inadmissible(capsys):
    code, out, err = run(capsys, "dividend-plan", "--mubar", "1", "--xi", "0.5", "--M", "0.4")
    assert code == 2 and out == ""
    assert "M below mubar-xi" in err
    code, _, err = run(capsys, "dividend-plan", "--delta", "0.3", "--sigmabar", "0.2")
    assert code == 2 and "variance unreachable" in err


def test_dividend_plan_json_round_trip(capsys):
    code, out, _ = run(capsys, "dividend-plan", "--format", "json")
    doc = as_json("dividend-plan", out)
    assert code == 0
    assert doc["rows"][0]["c0"] == 1.0
    assert json.loads(json.dumps(doc)) == doc
    assert list(doc) == ["command", "parameters", "meta", "columns", "rows"]


def test_survival_table_defaults(capsys):
    code, out, _ = run(capsys, "survival-table")
    assert code == 0
    rows = as_rows(out)
    assert [float(r["eta"]) for r in rows] == list(presets.TABLE_ETAS)
    for r in rows:
        ref = presets.TABLE_ROWS[float(r["eta"])]
        assert abs(float(r["b0"]) - ref[0]) < 1e-3 and abs(float(r["b1"]) - ref[1]) < 1e-3
        assert abs(float(r["p_b0_b1"]) - ref[2]) < 1e-2 and abs(float(r["p_b1_b0"]) - ref[3]) < 1e-2


def test_survival_table_empty_and_partial(capsys):
    code, out, _ = run(capsys, "survival-table", "--etas", "")
    assert code == 0 and out.strip() == "eta,b0,b1,p_b0_b1,p_b1_b0,status"
    code, out, _ = run(capsys, "survival-table", "--etas", "0.25,0.34")
    rows = as_rows(out)
    assert code == 0 and rows[0]["status"] == "ok" and rows[1]["status"].startswith("infeasible")
    code, out, err = run(capsys, "survival-table", "--etas", "0.34,0.345")
    assert code == 3 and "infeasible" in err


def test_survival_table_json(capsys):
    code, out, _ = run(capsys, "survival-table", "--etas", "0.25,0.34", "--format", "json")
    doc = as_json("survival-table", out)
    assert doc["rows"][1]["b0"] is None


def test_figure_control_curve(capsys):
    code, out, _ = run(capsys, "figures", "--figure", "1", "--format", "json")
    doc = as_json("figures", out)
    assert code == 0
    assert doc["rows"][0] == {"t": 0.0, "b": 1.0}
    assert abs(doc["meta"]["A"] - 3.613) < 1e-2 and abs(doc["meta"]["C"] - 6.5837) < 1e-2


def test_figure_dominance_single_crossing(capsys):
    code, out, _ = run(capsys, "figures", "--figure", "dominance", "--format", "json")
    doc = as_json("figures", out)
    diff = np.array([r["G1"] - r["G0"] for r in doc["rows"] if r["y"] > 0])
    signs = np.sign(diff[np.abs(diff) > 1e-14])
    assert np.count_nonzero(np.diff(signs)) == 1
    ystar = doc["meta"]["ystar"]
    y = np.array([r["y"] for r in doc["rows"] if r["y"] > 0])[np.abs(diff) > 1e-14]
    cross = y[np.flatnonzero(np.diff(signs))[0]:][:2]
    assert cross[0] <= ystar <= cross[1]


def test_figure_circle_invariants(capsys):
    code, out, _ = run(capsys, "figures", "--figure", "circle", "--format", "json")
    doc = as_json("figures", out)
    model = ReinsuranceModel(**presets.CIRCLE_BASE)
    target = TargetDist(T=1.0, **presets.CIRCLE_TARGET)
    assert len(doc["rows"]) == 360
    for r in doc["rows"]:
        rs, rq = pair_residuals(model, target, (r["b0"], r["b1"], r["b2"]))
        assert abs(rs) <= 1e-10 and abs(rq) <= 1e-10


def test_figure_penalisation_and_n3(capsys):
    code, out, _ = run(capsys, "figures", "--figure", "penalisation")
    rows = as_rows(out)
    assert code == 0 and len(rows) == len(presets.PENALISATION_GRID)
    code, out, _ = run(capsys, "figures", "--figure", "n3", "--samples", "12", "--format", "json")
    doc = as_json("figures", out)
    assert len(doc["rows"]) == 12


def test_unknown_figure(capsys):
    code, _, err = run(capsys, "figures", "--figure", "7")
    assert code == 2 and "unknown figure" in err


def test_mc_validate_pass_fail_and_determinism(capsys):
    code, out1, _ = run(capsys, "mc-validate", "--paths", "20000", "--etas", "0.25,0.3")
    assert code == 0
    code, out2, _ = run(capsys, "mc-validate", "--paths", "20000", "--etas", "0.25,0.3")
    assert out1 == out2
    code, _, err = run(capsys, "mc-validate", "--paths", "20000", "--etas", "0.25", "--se-multiplier", "0")
    assert code == 4 and "validation failed" in err
    code, _, _ = run(capsys, "mc-validate", "--paths", "100")
    assert code == 2


def test_mc_validate_json(capsys):
    code, out, _ = run(capsys, "mc-validate", "--paths", "20000", "--etas", "0.27", "--format", "json")
    doc = as_json("mc-validate", out)
    assert doc["meta"]["all_ok"] and len(doc["rows"]) == 2


def test_var_es(capsys):
    code, out, _ = run(capsys, "var-es")
    assert as_rows(out) == [{"alpha": "0.975", "var": "1.95996", "es": "2.3378"}]
    code, out, _ = run(capsys, "var-es", "--M", "0.05", "--delta", "0.2", "--alpha", "0.5", "--format", "json")
    doc = as_json("var-es", out)
    assert abs(doc["rows"][0]["var"] + 0.05) < 1e-12 and abs(doc["rows"][0]["es"] - 0.109577) < 1e-6
    code, _, err = run(capsys, "var-es", "--alpha", "1.5")
    assert code == 2 and "alpha" in err


def test_reinsurance_solve(capsys):
    code, out, _ = run(capsys, "reinsurance-solve", "--format", "json")
    doc = as_json("reinsurance-solve", out)
    assert code == 0 and abs(doc["rows"][0]["b0"] - 0.4448) < 1e-3
    code, out, _ = run(capsys, "reinsurance-solve", "--eta", "0.3", "--M", "0.08", "--delta", "0.22",
                       "--bound-mode", "paper-example")
    row = as_rows(out)[0]
    assert abs(float(row["delta_min"]) - 0.2094) < 1e-3 and abs(float(row["delta_max"]) - 0.2962) < 1e-3
    code, _, err = run(capsys, "reinsurance-solve", "--delta", "0.1")
    assert code == 3


def test_penalisation_command(capsys):
    code, out, _ = run(capsys, "penalisation", "--penalties", "0,0.01,0.05", "--format", "json")
    doc = as_json("penalisation", out)
    assert abs(doc["meta"]["b_hat"] - 0.632456) < 1e-6
    assert doc["rows"][2]["b0"] is None
    code, _, err = run(capsys, "penalisation", "--delta", "0.5")
    assert code == 2


def test_three_period_command(capsys):
    code, out, _ = run(capsys, "three-period", "--samples", "6", "--format", "json")
    doc = as_json("three-period", out)
    assert code == 0 and len(doc["rows"]) == 6
    code, out, _ = run(capsys, "three-period", "--samples", "3", "--method", "mc", "--paths", "20000")
    assert code == 0 and {r["method"] for r in as_rows(out)} == {"mc"}
    code, _, _ = run(capsys, "three-period", "--delta", "0.1")
    assert code == 3
    code, _, _ = run(capsys, "three-period", "--method", "trapezoid")
    assert code == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# dividend setup\nmubar = 2\nxi=1\nM=1.5\nn=2\n")
    code, out, _ = run(capsys, "dividend-plan", "--config", str(cfg))
    assert as_rows(out)[0]["c0"] == "1"
    code, out, _ = run(capsys, "dividend-plan", "--config", str(cfg), "--M", "1.8")
    assert as_rows(out)[0]["c0"] == "0.4"
    js = tmp_path / "run.json"
    js.write_text(json.dumps({"lambda": 2, "bound-mode": "paper-example", "eta": 0.3, "M": 0.08, "delta": 0.22}))
    code, out, _ = run(capsys, "reinsurance-solve", "--config", str(js))
    assert code == 0 and abs(float(as_rows(out)[0]["delta_min"]) - 0.2094) < 1e-3


def test_bad_config(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense=1\n")
    assert run(capsys, "var-es", "--config", str(bad))[0] == 2
    bad.write_text("alpha=high\n")
    assert run(capsys, "var-es", "--config", str(bad))[0] == 2
    assert run(capsys, "var-es", "--config", str(tmp_path / "missing"))[0] == 2
    assert run(capsys, "survival-table", "--etas", "0.25,x")[0] == 2


def test_seed_from_environment(monkeypatch, capsys):
    args = ["mc-validate", "--paths", "20000", "--etas", "0.25", "--format", "json"]
    monkeypatch.setenv("TCI_SEED", "5")
    doc5 = json.loads(run(capsys, *args)[1])
    assert doc5["parameters"]["seed"] == 5
    doc_flag = json.loads(run(capsys, *args, "--seed", "6")[1])
    assert doc_flag["parameters"]["seed"] == 6
    assert doc_flag["rows"][0]["p_mc"] != doc5["rows"][0]["p_mc"]
    monkeypatch.setenv("TCI_SEED", "abc")
    assert run(capsys, *args)[0] == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    code, out, _ = run(capsys, "var-es", "--out", str(target))
    assert code == 0 and out == ""
    assert target.read_text().startswith("alpha,var,es")


def test_csv_quoting(capsys):
    code, out, _ = run(capsys, "mc-validate", "--paths", "20000", "--etas", "0.25")
    assert '"b0,b1"' in out


def test_unknown_subcommand():
    with pytest.raises(SystemExit) as info:
        cli.main(["nope"])
    assert info.value.code == 2


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "tci", "var-es", "--alpha", "0.9"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("alpha,var,es")


@pytest.mark.parametrize("command", cli.COMMANDS)
def test_every_command_has_schema(command):
    schema = cli.schema_for(command)
    jsonschema.Draft202012Validator.check_schema(schema)
