import json
import os

import numpy as np

from cmc_lab.cli import main


def run(tmp_path, *argv):
    cwd = os.getcwd()
    os.chdir(tmp_path)
    try:
        return main(list(argv))
    finally:
        os.chdir(cwd)


def test_generate_timelike_with_pinch(tmp_path):
    code = run(
        tmp_path, "generate", "--family", "delaunay-t", "--k", "2", "--H", "0.5",
        "--nr", "9", "--nt", "8", "--r-range", "-0.5", "0.5", "-o", "dt.obj",
    )
    assert code == 0
    lines = (tmp_path / "dt.obj").read_text().splitlines()
    vs = [l.split()[1:] for l in lines if l.startswith("v ")]
    assert len(vs) == 72
    # middle row r = 0 pinches to the cone point
    mid = np.array(vs[4 * 8 : 5 * 8], dtype=float)
    assert np.allclose(mid, 0.0, atol=1e-12)
    side = json.loads((tmp_path / "dt.obj.json").read_text())
    assert side["family"] == "delaunay_timelike"
    assert side["H"] == 0.5 and side["k"] == 2.0


def test_generate_conjugate_and_model(tmp_path):
    assert run(
        tmp_path, "generate", "--family", "conjugate", "--of", "delaunay-t",
        "--k", "2", "--H", "0.5", "--nr", "7", "--nt", "7", "-o", "conj.obj",
    ) == 0
    assert run(tmp_path, "generate", "--family", "model-25", "--nr", "5", "--nt", "5", "-o", "m.obj") == 0
    side = json.loads((tmp_path / "m.obj.json").read_text())
    assert side["family"] == "model_25"


def test_generate_singular_curve_sidecar(tmp_path):
    assert run(
        tmp_path, "generate", "--family", "delaunay-t", "--k", "2", "--nr", "9",
        "--nt", "7", "--r-range", "-0.5", "0.5", "--singular-curve", "-o", "sc.obj",
    ) == 0
    side = json.loads((tmp_path / "sc.obj.json").read_text())
    assert side["singular_curve"]
    assert all(abs(rec["location"][0]) < 1e-10 for rec in side["singular_curve"])


def test_generate_invalid_parameters_exit2(tmp_path):
    assert run(tmp_path, "generate", "--family", "delaunay-t", "--H", "0.5") == 2
    assert run(tmp_path, "generate", "--family", "delaunay-t", "--k", "1", "--H", "0.5") == 2
    assert run(tmp_path, "generate", "--family", "nosuch") == 2
    assert run(tmp_path, "generate", "--family", "conjugate", "--k", "2") == 2


def test_generate_io_failure_exit3(tmp_path):
    assert run(
        tmp_path, "generate", "--family", "model-fold", "--nr", "3", "--nt", "3",
        "-o", "missing_dir/out.obj",
    ) == 3


def test_classify_conjugate(tmp_path):
    assert run(
        tmp_path, "classify", "--family", "conjugate", "--of", "delaunay-t",
        "--k", "2", "--H", "0.5", "--grid", "11", "--samples", "2", "-o", "c.json",
    ) == 0
    doc = json.loads((tmp_path / "c.json").read_text())
    res = doc["results"]
    assert res["criterion"]["verdict"] == "cusp25"
    assert abs(res["criterion"]["condition4_det"] + 288.0) < 1e-3
    assert all(s["kind"] == "first_kind" for s in res["samples"])
    assert doc["config"]["seed"] == 0
    assert "timing" in doc


def test_classify_delaunay_conelike_with_certificates(tmp_path):
    assert run(
        tmp_path, "classify", "--family", "delaunay-t", "--k", "2", "--H", "0.5",
        "--grid", "9", "--samples", "2", "-o", "d.json",
    ) == 0
    res = json.loads((tmp_path / "d.json").read_text())["results"]
    assert all(s["kind"] == "conelike" for s in res["samples"])
    assert res["criterion"]["verdict"] == "not_applicable"
    assert res["certificates"]
    assert all(c["conclusion"] == "fold impossible" for c in res["certificates"])
    assert all(f["verdict"] == "rejected" for f in res["fold_symmetry"])


def test_classify_fold_model(tmp_path):
    assert run(
        tmp_path, "classify", "--family", "model-fold", "--grid", "9", "--samples", "1", "-o", "f.json",
    ) == 0
    res = json.loads((tmp_path / "f.json").read_text())["results"]
    assert res["criterion"]["verdict"] == "rejected_cond4"
    assert res["fold_symmetry"][0]["verdict"] == "fold_candidate"


def test_sweep_rows_and_predictions(tmp_path):
    assert run(tmp_path, "sweep", "--k", "2,0.5,3,-1", "--H", "0.5", "--grid", "7", "-o", "s.csv") == 0
    lines = (tmp_path / "s.csv").read_text().splitlines()
    header = lines[0].split(",")
    rows = [dict(zip(header, l.split(","))) for l in lines[1:]]
    assert [r["branch"] for r in rows] == ["I-i", "I-i", "I-i", "I-ii"]
    preds = {r["k"]: r["predicted_case_I"] for r in rows}
    assert abs(float(preds["2.0"]) + 288.0) < 1e-12
    assert abs(float(preds["0.5"]) + 2304.0) < 1e-12
    assert abs(float(preds["3.0"]) + 36.0) < 1e-12
    assert preds["-1.0"] == ""
    assert all(r["verdict"] == "cusp25" for r in rows)
    assert all(float(r["rel_diff"]) < 1e-6 for r in rows if r["rel_diff"])


def test_sweep_empty_list_exit2(tmp_path):
    assert run(tmp_path, "sweep", "--k", "", "-o", "s.csv") == 2


def test_sweep_row_error_recorded(tmp_path):
    assert run(tmp_path, "sweep", "--k", "1", "--H", "0.5", "-o", "e.csv") == 0
    lines = (tmp_path / "e.csv").read_text().splitlines()
    assert "k=1 degenerate" in lines[1]


def test_verify_suite_filter_and_determinism(tmp_path):
    assert run(tmp_path, "verify", "--suite", "laplacian", "--trials", "4",
               "--seed", "7", "-o", "v1.json") == 0
    assert run(tmp_path, "verify", "--suite", "laplacian", "--trials", "4",
               "--seed", "7", "-o", "v2.json") == 0
    d1 = json.loads((tmp_path / "v1.json").read_text())
    d2 = json.loads((tmp_path / "v2.json").read_text())
    d1.pop("timing"), d2.pop("timing")
    for d in (d1, d2):
        d["config"].pop("out")
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_verify_unknown_suite_exit2(tmp_path):
    assert run(tmp_path, "verify", "--suite", "nosuch") == 2


def test_rep_export_and_reconstruct(tmp_path):
    assert run(
        tmp_path, "rep", "--export-from", "delaunay-t", "--k", "2", "--H", "0.5",
        "--ns", "11", "--nt", "7", "-o", "g.json",
    ) == 0
    assert run(
        tmp_path, "rep", "--gauss-data", "g.json", "-o", "rec.obj", "--report", "r.json",
    ) == 0
    rep = json.loads((tmp_path / "r.json").read_text())["results"]
    assert rep["harmonic_max"] < 1e-6
    assert rep["loop_max_rel"] < 1e-8
    assert (tmp_path / "rec.obj").exists()


def test_rep_constant_g_exit1(tmp_path):
    from cmc_lab.jets import Jet2

    gj = Jet2.constant(0.25 + 0.1j, (0.0, 0.0), 3)
    node = {"g": [0.25, 0.1], "omega_hat": [0.0, 0.0],
            "g_jet": [[float(np.real(z)), float(np.imag(z))] for z in gj.c.ravel()]}
    doc = {"grid": {"u0": 0.0, "v0": 0.0, "du": 0.1, "dv": 0.1, "nu": 2, "nv": 2},
           "H": 0.5, "degree": 3, "nodes": [[node, node], [node, node]]}
    (tmp_path / "const.json").write_text(json.dumps(doc))
    assert run(tmp_path, "rep", "--gauss-data", "const.json", "-o", "x.obj") == 1


def test_rep_malformed_json_exit2(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    assert run(tmp_path, "rep", "--gauss-data", "bad.json", "-o", "x.obj") == 2


def test_rep_missing_file_exit3(tmp_path):
    assert run(tmp_path, "rep", "--gauss-data", "nope.json", "-o", "x.obj") == 3


def test_classify_determinism(tmp_path):
    for name in ("a.json", "b.json"):
        assert run(
            tmp_path, "classify", "--family", "model-25", "--grid", "7",
            "--samples", "1", "--seed", "5", "-o", name,
        ) == 0
    da = json.loads((tmp_path / "a.json").read_text())
    db = json.loads((tmp_path / "b.json").read_text())
    da.pop("timing"), db.pop("timing")
    da["config"].pop("out"), db["config"].pop("out")
    assert json.dumps(da, sort_keys=True) == json.dumps(db, sort_keys=True)


def test_threads_env_does_not_change_results(tmp_path, monkeypatch):
    monkeypatch.setenv("CMC_LAB_THREADS", "3")
    assert run(tmp_path, "sweep", "--k", "2,3", "--H", "0.5", "--grid", "5", "-o", "p.csv") == 0
    monkeypatch.setenv("CMC_LAB_THREADS", "1")
    assert run(tmp_path, "sweep", "--k", "2,3", "--H", "0.5", "--grid", "5", "-o", "q.csv") == 0
    assert (tmp_path / "p.csv").read_text() == (tmp_path / "q.csv").read_text()
