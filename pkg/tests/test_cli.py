import json
from pathlib import Path

import pytest

from pfx.cli import main
from pfx.io import TRACE_HEADER, dumps, fmt_float, read_csv

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(tmp_path, cmd, spec, *extra):
    out = tmp_path / "out"
    code = main([cmd, str(SPECS / spec), "--out", str(out), *extra])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, report, out


def test_triangle_counterexample(tmp_path):
    code, rep, _ = run(tmp_path, "audit-metric", "triangle_counterexample.pfx")
    assert code == 0 and rep["passed"]
    w = rep["D_triangle_witness"]
    assert (w["x"], w["y"], w["z"]) == (0.0, 0.5, 1 / 3)
    assert w["lhs"] == 0.5625 and abs(w["rhs"] - 0.513117) < 5e-7


def test_certify_exit_codes(tmp_path):
    code, rep, _ = run(tmp_path, "certify", "certify_halving.pfx")
    assert code == 0 and rep["certified"] and rep["pairs_checked"] == 200 * 199
    code, rep, _ = run(tmp_path, "certify", "certify_identity.pfx")
    assert code == 2 and rep["worst_margin"] == pytest.approx(-0.1)


def test_iterate_outputs(tmp_path):
    code, rep, out = run(tmp_path, "iterate", "iterate_halving.pfx")
    assert code == 0 and rep["stop_reason"] == "tolerance_met" and rep["gamma_decay_ok"]
    rows = read_csv(out / "trace.csv")
    assert list(rows[0]) == TRACE_HEADER and len(rows) == rep["n_steps"] + 1
    assert rows[-1]["gamma_n"] == ""
    assert float(rows[1]["d_n"]) == 0.25


def test_bvp_outputs(tmp_path):
    code, rep, out = run(tmp_path, "bvp", "bvp_sine.pfx")
    assert code == 0 and rep["final_sup_norm"] <= 1e-9 and rep["max_step_ratio"] <= 0.094
    assert len(read_csv(out / "solution.csv")) == 201


def test_series_and_gauge(tmp_path):
    assert run(tmp_path, "series", "series_third.pfx")[0] == 0
    assert run(tmp_path, "audit-gauge", "gauge_ln.pfx")[0] == 0


def test_kind_mismatch_and_missing_file(tmp_path):
    assert main(["series", str(SPECS / "gauge_ln.pfx"), "--out", str(tmp_path)]) == 1
    assert main(["series", str(tmp_path / "missing.pfx"), "--out", str(tmp_path)]) == 1


def test_bad_spec_and_bad_tol(tmp_path):
    bad = tmp_path / "bad.pfx"
    bad.write_text("[series]\nT = x/3\n")
    assert main(["series", str(bad), "--out", str(tmp_path)]) == 1
    assert main(["iterate", str(SPECS / "iterate_halving.pfx"), "--out", str(tmp_path), "--tol", "-1"]) == 1


def test_failing_gauge_blocks_certification(tmp_path):
    spec = tmp_path / "g.pfx"
    spec.write_text("[certify]\nT = x/2\nD = abs(x-y)\ndomain = [0, 1]\nF = -ln(t)\ntau = 0.1\n")
    assert main(["certify", str(spec), "--out", str(tmp_path / "o")]) == 1
    assert "error" in json.loads((tmp_path / "o" / "report.json").read_text())


def test_domain_exit_is_refuted(tmp_path):
    spec = tmp_path / "d.pfx"
    spec.write_text("[iterate]\nT = 2*x\nD = abs(x-y)\ndomain = [0, 1]\nx0 = 0.3\n")
    assert main(["iterate", str(spec), "--out", str(tmp_path / "o")]) == 2


def test_json_formatting():
    text = dumps({"a": 0.1, "b": float("inf"), "c": [1, True, None], "d": "s"})
    assert text == '{\n  "a": 0.10000000000000001,\n  "b": null,\n  "c": [1, true, null],\n  "d": "s"\n}\n'
    assert float(fmt_float(1 / 3)) == 1 / 3
