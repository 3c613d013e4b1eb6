import io
import json
import subprocess
import sys

import numpy as np
import pytest

from multimatch.cli import DataError, parse_couples, parse_table, run

from .conftest import DATA, INTRO_COUNTS


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_parse_couples_well_formed(tmp_path):
    p = write(tmp_path, "c.csv", "weight,x_E,x_H,y_E,y_H\n1,1,2,3,4\n2,5,5,1,1\n1.5,3,3,3,3\n")
    data, warnings = parse_couples(str(p))
    assert len(data) == 3 and not warnings
    assert data.x_labels == ("E", "H")


def test_parse_couples_numeric_header(tmp_path):
    p = write(tmp_path, "c.csv", "weight,x_1,x_2,y_1\n1,1,2,3\n")
    data, _ = parse_couples(str(p))
    assert data.X.shape == (1, 2) and data.Y.shape == (1, 1)


def test_parse_couples_bad_row_names_line(tmp_path):
    p = write(tmp_path, "c.csv", "weight,x_E,x_H,y_E,y_H\n1,1,abc,3,4\n1,1,2,3,4\n")
    with pytest.raises(DataError, match="line 2"):
        parse_couples(str(p))


def test_parse_couples_range_warning(tmp_path):
    p = write(tmp_path, "c.csv", "weight,x_E,x_H,y_E,y_H\n1,1,2,3,4\n1,6,2,3,0\n")
    _, warnings = parse_couples(str(p))
    assert len(warnings) == 2 and all(w.startswith("line 3") for w in warnings)


@pytest.mark.parametrize("text", ["", "1,2,3\n", "weight,x_E,x_H\n1,2,3\n"])
def test_parse_couples_header_errors(tmp_path, text):
    with pytest.raises(DataError):
        parse_couples(str(write(tmp_path, "c.csv", text)))


def test_parse_table():
    t = parse_table(str(DATA / "health_pairs_2010.csv"))
    assert t.rows == (1, 2, 3, 4, 5) and t.masses.shape == (5, 5)


def test_solve_intro():
    code, out, _ = call("solve", "--market", DATA / "intro_market.json", "--q", DATA / "intro_theta.json", "--oracle")
    assert code == 0
    rep = json.loads(out)
    assert rep["spec_version"] == "1.0"
    assert rep["matrix"]["counts"] == INTRO_COUNTS
    assert rep["value"] == 7200 and rep["oracle"]["unique"]


def test_ipf_golden():
    golden = json.loads((DATA / "binary_grid_density_golden.json").read_text())
    code, out, _ = call("ipf", "--market", DATA / "binary_grid_market.json", "--q", DATA / "binary_grid_theta.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["matrix"]["firms"] == golden["firms"]
    np.testing.assert_allclose(rep["matrix"]["density"], golden["density"], atol=golden["tolerance"]["density"])
    assert rep["identity_error"] < 1e-8


def test_gamma_health_table():
    code, out, _ = call("gamma", "--table", DATA / "health_pairs_2010.csv")
    assert code == 0
    assert json.loads(out)["gamma"]["gamma"] == pytest.approx(0.7586, abs=0.02)


def test_gamma_on_couples(tmp_path):
    p = write(tmp_path, "c.csv", "weight,x_E,x_H,y_E,y_H\n1,1,1,1,1\n1,2,2,2,2\n1,3,1,1,3\n")
    code, out, _ = call("gamma", "--couples", p, "--stat", "WM_HH")
    assert code == 0
    assert set(json.loads(out)["gamma"]) == {"WM_HH"}


def test_verdicts_are_not_errors(tmp_path):
    code, out, _ = call("solve", "--market", DATA / "intro_market.json", "--q", DATA / "intro_theta.json")
    sol = write(tmp_path, "sol.json", out)
    code, out, _ = call("sort-check", "--matching", sol, "--pattern", DATA / "pattern_p11_p22.json",
                        "--market", DATA / "intro_market.json")
    assert code == 0
    rep = json.loads(out)
    assert rep["global"]["holds"] is False and rep["weak"]["holds"] is True
    assert rep["global_exists"]["exists"] is False


def test_dominance_pair_and_undominance(tmp_path):
    m1 = write(tmp_path, "m1.json", json.dumps({"cells": [
        {"x": [10, 10], "y": [10, 20], "mass": 1}, {"x": [20, 20], "y": [20, 10], "mass": 1}]}))
    m2 = write(tmp_path, "m2.json", json.dumps({"cells": [
        {"x": [10, 10], "y": [20, 10], "mass": 1}, {"x": [20, 20], "y": [10, 20], "mass": 1}]}))
    pat = DATA / "pattern_p11_p22.json"
    code, out, _ = call("dominance", "--matching", m1, "--other", m2, "--pattern", pat)
    assert code == 0
    rep = json.loads(out)
    assert rep["dominates"] is False and rep["separating_function"]
    code, out, _ = call("dominance", "--matching", m1, "--pattern", pat)
    assert json.loads(out)["undominated"] is True


def test_exit_codes(tmp_path):
    assert call()[0] == 1
    assert call("bogus")[0] == 1
    assert call("solve", "--market", DATA / "intro_market.json")[0] == 1
    assert call("ipf", "--market", DATA / "binary_grid_market.json", "--q", DATA / "binary_grid_theta.json",
                "--sigma-delta", "-1")[0] == 1
    assert call("solve", "--market", tmp_path / "missing.json", "--q", DATA / "intro_theta.json")[0] == 2
    bad = write(tmp_path, "bad.json", "{not json")
    assert call("solve", "--market", bad, "--q", DATA / "intro_theta.json")[0] == 2
    unbalanced = write(tmp_path, "u.json", json.dumps({
        "firms": [{"attrs": [1], "mass": 2}], "workers": [{"attrs": [1], "mass": 1}]}))
    code, _, err = call("solve", "--market", unbalanced, "--q", write(tmp_path, "q.json", '{"theta": [[1]]}'))
    assert code == 2 and "mass mismatch" in err
    code, _, err = call("ipf", "--market", DATA / "binary_grid_market.json", "--q", DATA / "binary_grid_theta.json",
                        "--max-iters", "2")
    assert code == 3 and "numerical" in err


def test_estimate_and_simulate_reproducible(tmp_path):
    sim = tmp_path / "sim.csv"
    args = ("simulate", "--params", DATA / "couples_theta.json", "--n", 3000, "--seed", 5, "--out", sim)
    assert call(*args)[0] == 0
    first = sim.read_bytes()
    assert call(*args)[0] == 0
    assert sim.read_bytes() == first
    est = ("estimate", "--couples", sim, "--seed", 2, "--restarts", 2)
    c1, o1, _ = call(*est)
    c2, o2, _ = call(*est)
    assert c1 == c2 == 0 and o1 == o2
    rep = json.loads(o1)
    assert rep["converged"] and len(rep["offsets"]) == 25


def test_estimate_report_feeds_simulate(tmp_path):
    sim = tmp_path / "sim.csv"
    call("simulate", "--params", DATA / "couples_theta.json", "--n", 2000, "--out", sim)
    _, out, _ = call("estimate", "--couples", sim, "--method", "ascent")
    params = write(tmp_path, "fit.json", out)
    code, out, _ = call("simulate", "--params", params, "--n", 5)
    assert code == 0
    assert out.splitlines()[0] == "weight,x_E,x_H,y_E,y_H" and len(out.splitlines()) == 6


def test_diagnostics_arithmetic():
    code, out, _ = call("diagnostics", "--kl", ".3952", "--entropy", "7.837")
    assert code == 0
    assert json.loads(out)["efficiency_loss_percent"] == pytest.approx(4.8, abs=0.05)


def test_aligned_text_and_output_file(tmp_path):
    dest = tmp_path / "r.txt"
    code, out, _ = call("diagnostics", "--kl", "1", "--entropy", "3", "--format", "aligned-text", "-o", dest)
    assert code == 0 and out == ""
    text = dest.read_text()
    assert "efficiency_loss_percent" in text and "25" in text


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "multimatch", "diagnostics", "--kl", "1", "--entropy", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["efficiency_loss_percent"] == 50
