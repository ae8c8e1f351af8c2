import json
import subprocess
import sys

import numpy as np
import pytest

from lagbonnet import io
from lagbonnet.catalog import make_constant_solution, perturb
from lagbonnet.chart import ConformalChart
from lagbonnet.cli import main
from lagbonnet.surface_data import SurfaceData


@pytest.fixture
def files(tmp_path):
    ch = ConformalChart(24, 24)
    d = make_constant_solution(ch, 0, 0.0, 1.0, 1.0)
    paths = {"const": tmp_path / "const.json"}
    io.write_surface_file(paths["const"], d)
    p = perturb(d, "u", 0.1)
    paths["pert"] = tmp_path / "pert.json"
    io.write_surface_file(paths["pert"], p.data)
    paths["pred"] = p.predicted
    strip = ConformalChart(32, 32, 1.0, 2.0, 0.0, 1.0)
    z = strip.z()
    zero = np.zeros(strip.shape)
    paths["bonnet"] = tmp_path / "bonnet.json"
    io.write_surface_file(paths["bonnet"], SurfaceData(strip, 0, zero, zero, 1 / (z + np.conj(z))))
    sq = ConformalChart(33, 33, -1.0, 1.0, -1.0, 1.0)
    paths["cubic"] = tmp_path / "cubic.json"
    io.write_surface_file(paths["cubic"], SurfaceData(sq, 0, np.zeros(sq.shape), np.zeros(sq.shape), sq.z() ** 3))
    return paths


def _run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out


def test_check_constant_file(files, capsys):
    code, out = _run(["check", files["const"]], capsys)
    rep = json.loads(out.out)
    io.validate_report(rep)
    assert code == 0 and rep["exit"] == 0
    assert all(rep["norms"][k]["linf"] < 1e-10 for k in ("closedness", "gauss", "codazzi"))


def test_check_perturbed_file(files, capsys):
    code, out = _run(["check", files["pert"]], capsys)
    rep = json.loads(out.out)
    assert code == 1 and rep["exit"] == 1 and not rep["verdicts"]["gauss"]
    pred = np.max(np.abs(files["pred"]["gauss"][2:-2, 2:-2]))
    assert rep["norms"]["gauss"]["linf"] == pytest.approx(pred, rel=0.25)


def test_pair_of_identical_fields(files, capsys):
    code, out = _run(["pair", files["const"], files["const"]], capsys)
    assert code == 2 and "not a pair" in out.err


def test_input_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"version": 1, "c": 2}))
    code, out = _run(["check", bad], capsys)
    assert code == 2 and "malformed" in out.err
    code, _ = _run(["check", tmp_path / "nope.json"], capsys)
    assert code == 2
    with pytest.raises(SystemExit) as exc:
        main(["check"])
    assert exc.value.code == 2


def test_reports_are_byte_identical(files, tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for r in (a, b):
        assert main(["check", str(files["pert"]), "--report", str(r)]) == 1
    assert a.read_bytes() == b.read_bytes()


def test_reconstruct_exports_csv(files, tmp_path, capsys):
    out = tmp_path / "imm.csv"
    code, res = _run(["reconstruct", files["const"], "--out", out, "--tol-class", "h2", "--base", "3,4"], capsys)
    rep = json.loads(res.out)
    assert code == 0, rep
    assert out.read_text().startswith("x,y,f1_re")
    assert rep["norms"]["cross_defect"]["linf"] == 0.0


def test_reconstruct_refuses_incompatible_data(files, capsys):
    code, res = _run(["reconstruct", files["pert"], "--tol-class", "h2"], capsys)
    assert code == 1 and "error" in json.loads(res.out)["details"]
    code, _ = _run(["reconstruct", files["pert"], "--override-integrability", "--base", "0.5,0.5"], capsys)
    assert code == 1  # still reported: monodromy is large


def test_bad_base(files, capsys):
    code, res = _run(["reconstruct", files["const"], "--base", "99,0"], capsys)
    assert code == 2
    code, res = _run(["reconstruct", files["const"], "--base", "1"], capsys)
    assert code == 2


def test_deform_writes_new_data(files, tmp_path, capsys):
    out = tmp_path / "deformed.json"
    code, res = _run(["deform", files["bonnet"], "--t0", "1.0", "--out", out, "--override-integrability"], capsys)
    rep = json.loads(res.out)
    assert rep["norms"]["closure_defect"]["linf"] <= 1e-6
    new = io.parse_surface_file(out)
    old = io.parse_surface_file(files["bonnet"])
    assert np.allclose(np.abs(new.psi), np.abs(old.psi))
    assert not np.allclose(new.psi, old.psi)


def test_deform_rejects_non_bonnet(tmp_path, capsys):
    ch = ConformalChart(24, 24)
    z = ch.z()
    zero = np.zeros(ch.shape)
    p = tmp_path / "g.json"
    io.write_surface_file(p, SurfaceData(ch, 0, zero, zero, np.exp(z * np.conj(z))))
    code, res = _run(["deform", p], capsys)
    assert code == 1 and json.loads(res.out)["verdicts"] == {"bonnet": False}


def test_umbilics_report(files, capsys):
    code, res = _run(["umbilics", files["cubic"]], capsys)
    rep = json.loads(res.out)
    assert code == 0 and rep["details"]["degree"] == 3
    assert rep["details"]["umbilics"][0]["index"] == 3


def test_bonnet_bundle(files, capsys):
    code, res = _run(["bonnet", files["bonnet"], "--tol-class", "h2"], capsys)
    rep = json.loads(res.out)
    assert code == 0 and rep["verdicts"]["r17_r18_agree"]
    assert rep["norms"]["h.r_hode"]["linf"] <= 1e-10


def test_catalog_and_merge(tmp_path, capsys):
    surf = tmp_path / "clifford.json"
    rep = tmp_path / "cat.rep"
    assert main(["catalog", "constant", "--c", "1", "--phi0", "0", "--psi0", "1", "--nx", "8", "--ny", "8",
                 "--out", str(surf), "--report", str(rep)]) == 0
    d = io.parse_surface_file(surf)
    assert d.c == 1 and d.chart.shape == (8, 8)
    assert main(["check", str(surf), "--report", str(tmp_path / "chk.rep")]) == 0
    merged = tmp_path / "m.json"
    assert main(["report", str(rep), str(tmp_path / "chk.rep"), "--out", str(merged)]) == 0
    m = json.loads(merged.read_text())
    io.validate_report(m)
    assert m["command"] == "report"
    code, _ = _run(["catalog", "constant", "--c", "0", "--phi0", "1", "--psi0", "2"], capsys)
    assert code == 2
    code, out = _run(["catalog", "profile", "--c", "1", "--u-init", "0.01", "--nx", "16", "--ny", "4"], capsys)
    assert code == 0 and io.parse_surface(out.out).c == 1


def test_pair_report(tmp_path, capsys):
    ch = ConformalChart(16, 16)
    z = ch.z()
    zero = np.zeros(ch.shape)
    h = z + 1
    a = SurfaceData(ch, 0, zero, zero, 0.5 * h * (1j * 0.3 + 1))
    b = SurfaceData(ch, 0, zero, zero, 0.5 * h * (1j * 0.3 - 1))
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    io.write_surface_file(pa, a)
    io.write_surface_file(pb, b)
    code, out = _run(["pair", pa, pb], capsys)
    rep = json.loads(out.out)
    assert code == 0, rep
    assert rep["norms"]["modulus"]["linf"] <= 1e-15


def test_console_module_entry(files):
    r = subprocess.run([sys.executable, "-m", "lagbonnet.cli", "check", str(files["const"])],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["command"] == "check"
