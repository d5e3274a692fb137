import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rodknots.cli import EXIT_DOMAIN, EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, JobConfig, InputError, main
from rodknots.curves import integrate_frenet
from rodknots.io import (
    CurveFormatError,
    curve_from_csv,
    curve_to_csv,
    jsonable,
    mesh_edge_report,
    mesh_to_obj,
    mesh_to_ply,
    read_curve,
    ribbon_mesh,
    sidecar_path,
    write_curve,
    write_mesh,
)


def helix(kappa0=1.0, tau=0.5, length=10.0, steps=400):
    return integrate_frenet(lambda s: np.full_like(s, kappa0), tau, length, steps)


# -- curve files -------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
def test_csv_round_trip(kappa0, tau):
    c = helix(kappa0, tau, steps=200)
    back = curve_from_csv(curve_to_csv(c))
    for f in ("s", "position", "T", "N", "B", "kappa"):
        assert np.array_equal(getattr(back, f), getattr(c, f))
    assert back.tau == c.tau and not back.closed


def test_csv_infers_odd_closure(rod13_coarse):
    back = curve_from_csv(curve_to_csv(rod13_coarse))
    assert back.closed and back.parity == "odd"


@pytest.mark.parametrize("mangle", ["header", "short", "text", "nan", "spacing", "frame", "speed"])
def test_csv_rejects_bad_input(mangle):
    lines = curve_to_csv(helix()).splitlines()
    rows = [r.split(",") for r in lines[1:]]
    if mangle == "header":
        lines[0] = lines[0].replace("kappa", "k")
    elif mangle == "short":
        lines = lines[:4]
    elif mangle == "text":
        rows[3][2] = "abc"
    elif mangle == "nan":
        rows[3][2] = "nan"
    elif mangle == "spacing":
        rows[3][0] = str(float(rows[3][0]) + 1e-3)
    elif mangle == "frame":
        rows[3][4] = str(float(rows[3][4]) + 1e-3)
    elif mangle == "speed":
        rows[3][1] = str(float(rows[3][1]) + 0.1)
    if mangle != "header" and mangle != "short":
        lines = lines[:1] + [",".join(r) for r in rows]
    with pytest.raises(CurveFormatError):
        curve_from_csv("\n".join(lines) + "\n")


def test_sidecar_round_trip(tmp_path, rod13_coarse):
    path = tmp_path / "rod.csv"
    sc = write_curve(rod13_coarse, path, extra={"note": 1 + 2j})
    assert sc == sidecar_path(path)
    side = json.loads(sc.read_text())
    assert side["parity"] == "odd" and side["note"] == {"re": 1.0, "im": 2.0}
    curve, side2 = read_curve(path)
    assert curve.closed and curve.parity == "odd"
    assert side2 == side
    sc.write_text("{broken")
    with pytest.raises(CurveFormatError):
        read_curve(path)
    with pytest.raises(CurveFormatError):
        read_curve(tmp_path / "missing.csv")


def test_jsonable():
    out = jsonable({"a": np.float64(1.5), "b": np.arange(2), "c": (np.bool_(True), 1j), 3: np.int64(4)})
    assert json.loads(json.dumps(out)) == {"a": 1.5, "b": [0, 1], "c": [True, {"re": 0.0, "im": 1.0}], "3": 4}


# -- meshes ---------------------------------------------------------------------

def test_ribbon_on_odd_rod_is_one_twisted_strip(rod13_coarse):
    mesh = ribbon_mesh(rod13_coarse, 0.05)
    rep = mesh_edge_report(mesh)
    m = len(rod13_coarse) - 1
    assert len(mesh.vertices) == 2 * m and len(mesh.faces) == 2 * m
    assert rep["max_use"] == 2 and rep["degenerate_faces"] == 0
    assert rep["border_edges"] == 2 * m and rep["border_is_cycles"]
    # the half twist joins the two long sides into a single border loop
    last = mesh.faces[-2:]
    assert set(map(int, last[0])) == {2 * (m - 1), 1, 2 * (m - 1) + 1}


def test_ribbon_open_and_vertical():
    c = helix(steps=100)
    mesh = ribbon_mesh(c, 0.1, direction="vertical")
    rep = mesh_edge_report(mesh)
    # an open strip has two short ends, so the border is one loop
    assert rep["max_use"] == 2 and rep["border_edges"] == 2 * 100 + 2
    assert np.allclose(mesh.vertices[1::2] - mesh.vertices[0::2], [0, 0, 0.1])
    with pytest.raises(ValueError):
        ribbon_mesh(c, 0.0)
    with pytest.raises(ValueError):
        ribbon_mesh(c, 0.1, direction="binormal")


def test_mesh_writers(tmp_path):
    mesh = ribbon_mesh(helix(steps=100), 0.1)
    obj = mesh_to_obj(mesh)
    assert obj.count("\nf ") + obj.startswith("f ") == len(mesh.faces)
    ply = mesh_to_ply(mesh)
    assert f"element vertex {len(mesh.vertices)}" in ply
    assert write_mesh(mesh, tmp_path / "r.ply").read_text() == ply
    with pytest.raises(ValueError):
        write_mesh(mesh, tmp_path / "r.stl")


# -- command line ---------------------------------------------------------------

def test_cli_rod_bt_invariants_export(tmp_path, capsys):
    out = str(tmp_path / "r13")
    assert main(["rod", "--m", "1", "--n", "3", "--samples", "600", "--out", out]) == EXIT_OK
    summary = json.loads((tmp_path / "r13.rod.json").read_text())
    assert abs(summary["dtheta_over_2pi"] - 1 / 3) < 1e-10
    assert main(["bt", "--m", "1", "--n", "3", "--C", "0.01", "--samples", "600",
                 "--out", str(tmp_path / "b13")]) == EXIT_OK
    capsys.readouterr()
    assert main(["invariants", "--pair", out + ".csv", str(tmp_path / "b13.csv")]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert abs(rep["linking"]) < 1e-6
    assert rep["extra"]["n_periods"] == 3 and rep["extra"]["theorem_residual"] < 1e-3
    assert main(["export", "--curve", out + ".csv", "--format", "ply", "--out", str(tmp_path / "m")]) == EXIT_OK
    assert (tmp_path / "m.ply").exists()


def test_cli_bt_on_curve_file(tmp_path):
    path = tmp_path / "h.csv"
    write_curve(helix(steps=1000), path)
    assert main(["bt", "--curve", str(path), "--C", "0.4", "--out", str(tmp_path / "hb")]) == EXIT_OK
    curve, side = read_curve(tmp_path / "hb.csv")
    assert side["transform"]["C"] == 0.4 and len(curve) == 1001


def test_cli_roots_and_bt2(tmp_path, capsys):
    assert main(["roots", "--m", "2", "--n", "5", "--k", "2", "--out", str(tmp_path / "roots")]) == EXIT_OK
    found = json.loads(capsys.readouterr().out)
    near = min(found["roots"], key=lambda r: abs(r["sigma_re"] - 0.8982))
    assert near["sigma_im"] == pytest.approx(0.8714, abs=1e-3)
    args = ["bt2", "--m", "2", "--n", "5", "--k", "2", "--sigma-re", str(near["sigma_re"]),
            "--sigma-im", str(near["sigma_im"]), "--samples", "3000", "--out", str(tmp_path / "d")]
    assert main(args) == EXIT_OK
    curve, side = read_curve(tmp_path / "d.csv")
    assert curve.closed and side["transform"]["omega_gauge"] == "psi"
    # a seed far from any root is refused
    bad = args[:8] + ["0.2", "--sigma-im", "2.9", "--samples", "1000", "--out", str(tmp_path / "e")]
    assert main(bad) == EXIT_NUMERIC


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["rod", "--m", "1", "--n", "2", "--out", str(tmp_path / "x")]) == EXIT_DOMAIN
    assert main(["invariants"]) == EXIT_INPUT
    assert main(["invariants", "--curve", str(tmp_path / "none.csv")]) == EXIT_INPUT
    assert main(["export", "--curve", str(tmp_path / "none.csv"), "--width", "-1"]) == EXIT_INPUT
    assert main([]) == EXIT_INPUT
    with pytest.raises(SystemExit) as exc:
        main(["rod", "--m", "one", "--n", "3"])
    assert exc.value.code == EXIT_INPUT
    capsys.readouterr()


def test_cli_config_round_trip(tmp_path):
    cfg_path = tmp_path / "job.json"
    out = str(tmp_path / "r")
    assert main(["--save-config", str(cfg_path), "rod", "--m", "2", "--n", "5",
                 "--samples", "500", "--out", out]) == EXIT_OK
    cfg = JobConfig.load(cfg_path)
    assert cfg.command == "rod" and cfg.params["n"] == 5
    (tmp_path / "r.csv").unlink()
    assert main(["--config", str(cfg_path)]) == EXIT_OK
    assert (tmp_path / "r.csv").exists()
    # explicit options override the config
    assert main(["--config", str(cfg_path), "--samples", "400", "--out", str(tmp_path / "s")]) == EXIT_OK
    assert len(read_curve(tmp_path / "s.csv")[0]) == 401
    with pytest.raises(InputError):
        JobConfig.from_json('{"params": {}}')
    (tmp_path / "bad.json").write_text("[")
    assert main(["--config", str(tmp_path / "bad.json")]) == EXIT_INPUT


def test_cli_help_mentions_exit_codes(capsys):
    with pytest.raises(SystemExit):
        main(["--help"])
    assert "Exit codes" in capsys.readouterr().out
