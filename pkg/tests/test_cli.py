import json
import os

import pytest

from porecouple.cli import main

SMALL = {"macro_resolution": 160, "dns_resolution": 160, "n_samples": 2}


def _cfg(tmp_path, name="cfg.json", **kw):
    path = tmp_path / name
    path.write_text(json.dumps({**SMALL, "out": str(tmp_path / "out"), **kw}))
    return str(path)


@pytest.fixture(scope="module")
def circle_out(tmp_path_factory):
    d = tmp_path_factory.mktemp("circle")
    cfg = _cfg(d, case="case2")
    assert main(["effective-params", "--config", cfg]) == 0
    return d, cfg


def test_effective_params_deterministic(circle_out, tmp_path):
    d, _ = circle_out
    cfg2 = _cfg(tmp_path, case="case2")
    assert main(["effective-params", "--config", cfg2]) == 0
    a = (d / "out" / "effective_params.json").read_bytes()
    b = (tmp_path / "out" / "effective_params.json").read_bytes()
    assert a == b


def test_circle_flags(circle_out):
    d, _ = circle_out
    doc = json.loads((d / "out" / "effective_params.json").read_text())
    assert doc["flags"]["k12"] == "symmetry-zero" and doc["flags"]["k21"] == "symmetry-zero"
    assert doc["flags"]["k11"] == "nonzero" and doc["flags"]["N1_bl"] == "nonzero"
    assert doc["boundary_layer"]["l"] == 4
    for j in (1, 2):
        lines = (d / "out" / f"cell_traces_j{j}.csv").read_text().splitlines()
        assert lines[0] == "x,w1,dw1_dy2,w2,pi,dw1_dy1" and len(lines) == 33


def test_ellipse_all_nonzero(tmp_path):
    cfg = _cfg(tmp_path, case="case3")
    assert main(["effective-params", "--config", cfg]) == 0
    doc = json.loads((tmp_path / "out" / "effective_params.json").read_text())
    assert doc["shape"] == "ellipse"
    assert set(doc["flags"].values()) == {"nonzero"}


def test_run_macro_requires_document(tmp_path, capsys):
    cfg = _cfg(tmp_path)
    assert main(["run-macro", "--config", cfg]) == 2
    assert "effective-params" in capsys.readouterr().err


def test_run_macro_outputs(circle_out):
    d, cfg = circle_out
    assert main(["run-macro", "--config", cfg, "--mode", "classical", "--interface", "sigmad"]) == 0
    out = d / "out"
    assert (out / "macro_classical-sigmad_ff.csv").exists() and (out / "macro_classical-sigmad_pm.csv").exists()
    rep = json.loads((out / "report.json").read_text())
    assert rep["conservation"]["max_div_ff"] <= 1e-9 and rep["conservation"]["max_div_pm"] <= 1e-9
    assert rep["interface_y"] == pytest.approx(-0.025)


def test_validate_bookkeeping(circle_out):
    d, cfg = circle_out
    assert main(["validate", "--config", cfg]) == 0
    out = d / "out"
    rep = json.loads((out / "report.json").read_text())
    assert len(rep["rel_l2"]) == 12
    assert len(os.listdir(out / "plots")) == 4
    profiles = os.listdir(out / "profiles")
    assert sum(p.endswith("__dns.csv") for p in profiles) == 4
    svg = (out / "plots" / "v1_x1_0.1.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<polyline") == 4


def test_plot_command(circle_out, tmp_path):
    d, cfg = circle_out
    assert main(["plot", "--config", cfg]) == 0
    empty = _cfg(tmp_path, name="empty.json")
    assert main(["plot", "--config", empty]) == 2


@pytest.mark.parametrize("body, code", [
    ({"case": "case9"}, 2),
    ({"mode": "new", "interface": "sigmad"}, 2),
    ({"macro_resolution": 33}, 2),
    ({"bogus": 1}, 2),
    ({"stripe_l": 1}, 4),
])
def test_exit_codes(tmp_path, body, code):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"out": str(tmp_path / "o"), **body}))
    assert main(["effective-params", "--config", str(path)]) == code


def test_negative_alpha(tmp_path):
    assert main(["run-macro", "--preset", "case1", "--out", str(tmp_path), "--alpha", "-1"]) == 2


def test_decay_and_solver_exit_codes(tmp_path, monkeypatch):
    from porecouple import cli
    from porecouple.errors import DecayError, SolverError

    for exc, code in ((DecayError("no plateau"), 3), (SolverError("singular"), 5)):
        def boom(cfg, exc=exc):
            raise exc
        monkeypatch.setattr(cli, "effective_parameters", boom)
        assert main(["effective-params", "--preset", "case1", "--out", str(tmp_path)]) == code
