import csv
import io
import json

import pytest

from crystalline import builtins
from crystalline.cli import RunConfig, main, run
from crystalline.polynomial import MultiPoly, StablePair, pair_to_dict


def call(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_poisson(capsys):
    code, out, _ = call(capsys, "verify", "--builtin", "poisson", "--xi", "1", "--window", "300",
                        "--degree-max", "20", "--sigma", "1")
    assert code == 0
    rep = json.loads(out)
    assert rep["residual"] < 1e-10 and rep["passed"]


def test_zeros_csv(capsys):
    code, out, _ = call(capsys, "zeros", "--builtin", "lasso", "--xi", "1,1.41421356237",
                        "--window", "100", "--emit", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) > 100
    assert all(r["multiplicity"] == "1" for r in rows)


def test_curve_csv(capsys):
    code, out, _ = call(capsys, "curve", "--builtin", "lasso", "--resolution", "512", "--emit", "csv")
    assert code == 0
    comps = {r["component"] for r in csv.DictReader(io.StringIO(out))}
    assert comps == {"0", "1"}


def test_out_directory(tmp_path, capsys):
    code, _, _ = call(capsys, "coeffs", "--builtin", "lasso", "--degree-max", "8",
                      "--algorithm", "both", "--emit", "csv", "--out", str(tmp_path))
    assert code == 0
    summary = json.loads((tmp_path / "coeffs.summary.json").read_text())
    assert summary["max_disagreement"] <= 1e-12
    assert (tmp_path / "coeffs.csv").read_text().startswith("k,degree,re,im")


def test_deterministic_output(capsys):
    a = call(capsys, "stability", "--builtin", "lasso", "--budget", "2000", "--seed", "5")
    b = call(capsys, "stability", "--builtin", "lasso", "--budget", "2000", "--seed", "5")
    assert a == b and a[0] == 0


def test_structure_commands(capsys):
    code, out, _ = call(capsys, "gaps", "--builtin", "lasso", "--window", "50")
    assert code == 0 and json.loads(out)["min_gap"] > 0.01
    code, out, _ = call(capsys, "delone", "--builtin", "lasso", "--window", "50", "--r", "1", "--R", "3.3")
    assert code == 0
    code, out, _ = call(capsys, "delone", "--builtin", "lasso", "--window", "50", "--r", "1.5", "--R", "3.3")
    assert code == 1
    code, out, _ = call(capsys, "progression", "--builtin", "lasso", "--xi", "1,0.5", "--window", "40")
    assert code == 0 and json.loads(out)["decomposition"]["exact"]
    code, out, _ = call(capsys, "relations", "--builtin", "lasso", "--window", "40")
    assert code == 0 and json.loads(out)["found"] is None
    code, out, _ = call(capsys, "spectrum", "--builtin", "poisson", "--window", "20")
    assert code == 0 and abs(json.loads(out)["slope"] - 1) < 0.2


def test_config_errors(capsys, tmp_path):
    code, _, err = call(capsys, "zeros", "--builtin", "lasso", "--xi", "1")
    assert code == 2 and "xi" in err
    code, _, err = call(capsys, "verify", "--builtin", "lasso", "--window", "-3")
    assert code == 2 and "window" in err
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{"window": 10,\n "colour": 3}')
    code, _, err = call(capsys, "zeros", "--config", str(cfg))
    assert code == 2 and "colour" in err
    cfg.write_text('{"window": 10,\n "xi": [1, }')
    code, _, err = call(capsys, "zeros", "--config", str(cfg))
    assert code == 2 and "line 2" in err
    code, _, err = call(capsys, "zeros", "--pair", str(tmp_path / "missing.json"))
    assert code == 2


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"builtin": "poisson", "xi": [1], "window": 20}))
    code, out, _ = call(capsys, "zeros", "--config", str(cfg))
    assert code == 0 and json.loads(out)["count"] == 7


def test_numerical_failure_exit_code(capsys):
    code, _, err = call(capsys, "verify", "--builtin", "lasso", "--window", "5", "--degree-max", "5",
                        "--sigma", "0.2")
    assert code == 3 and "TailTooLarge" in err


def test_pair_file(capsys, tmp_path):
    path = tmp_path / "pair.json"
    path.write_text(json.dumps(pair_to_dict(builtins.builtin_pair("lasso"))))
    code, out, _ = call(capsys, "zeros", "--pair", str(path), "--xi", "1,1.5", "--window", "20")
    assert code == 0 and json.loads(out)["all_simple"]


def test_run_config_direct():
    assert run(RunConfig("coeffs", builtin="poisson", degree_max=5)) == 0


def test_reproduce_all_filter(capsys):
    code, out, err = call(capsys, "reproduce-all", "--filter", "zeros")
    assert code == 0
    names = [r["name"] for r in json.loads(out)["results"]]
    assert names == ["poisson_reduction", "lasso_zero_structure", "rational_collapse",
                     "irrationality_probe"]


def test_reproduce_all_corrupted_builtin(capsys, monkeypatch):
    def corrupted():
        P = MultiPoly.from_exact(2, {(0, 0): 1, (1, 0): -1, (0, 2): 1, (1, 2): -1})
        good = builtins.lasso_pair()
        return StablePair(P, P, good.ell, good.eta)

    monkeypatch.setitem(builtins.BUILTINS, "lasso", corrupted)
    code, out, err = call(capsys, "reproduce-all", "--filter", "coeffs")
    assert code == 1
    assert "[FAIL]  2 coefficient_golden_values" in err
