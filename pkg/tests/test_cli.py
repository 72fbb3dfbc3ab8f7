import json
from fractions import Fraction as Q

import pytest

from ltgconvex.cli import CHECKS, main
from ltgconvex.etale import HelixBand, LineMap, PlanePolygon
from ltgconvex.finite import fence, pseudocircle, wrap_map
from ltgconvex.intervals import least_connected_table
from ltgconvex.models import CylinderPoint, cyl_geodesic, cylinder_atlas, path_from_lift

A = cylinder_atlas()


def dump(tmp_path, name, doc):
    p = tmp_path / name
    p.write_text(json.dumps(doc), encoding="utf-8")
    return str(p)


def run(argv, capsys):
    code = main(argv)
    return code, capsys.readouterr()


def square_wave():
    lift = [(Q(0), Q(0))]
    for k in range(4):
        u = Q(k, 4)
        lift += [(u, Q(1, 2)), (u + Q(1, 8), Q(1, 2)), (u + Q(1, 8), Q(0)), (u + Q(1, 4), Q(0))]
    lift.append((Q(1), Q(1)))
    return path_from_lift("cylinder", A, lift)


# -- check --------------------------------------------------------------------------------------------

def test_check_axioms_fence_passes(tmp_path, capsys):
    inp = dump(tmp_path, "fence.json", least_connected_table(fence(5)).to_dict())
    code, out = run(["check", "check-axioms", "--input", inp], capsys)
    assert code == 0
    assert json.loads(out.out)["pass"] is True


def test_check_axioms_pseudocircle_fails_with_witnesses(tmp_path, capsys):
    inp = dump(tmp_path, "pc.json", pseudocircle().to_dict())
    outp = tmp_path / "rep.json"
    code, _ = run(["check", "check-axioms", "--input", inp, "--out", str(outp)], capsys)
    assert code == 2
    rep = json.loads(outp.read_text(encoding="utf-8"))["report"]
    wit = rep["witnesses"][0]
    assert wit["axiom"] == "C2" and len(wit["sets"]) == 2


def test_malformed_json_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{"points": [0, 1,\n  "leq": }', encoding="utf-8")
    code, out = run(["check", "check-axioms", "--input", str(p)], capsys)
    assert code == 1
    assert "line 2" in out.err


@pytest.mark.parametrize("argv", [
    ["check", "no-such-check", "--input", "x.json"],
    ["check", "check-axioms", "--input", "missing.json"],
    ["check", "check-axioms"],
    ["frobnicate"],
    ["mine", "--max-points", "9"],
])
def test_input_errors_exit_1(tmp_path, capsys, argv):
    assert run(argv, capsys)[0] == 1


def test_wrong_instance_kind_for_check(tmp_path, capsys):
    inp = dump(tmp_path, "pc.json", pseudocircle().to_dict())
    assert run(["check", "filtered", "--input", inp], capsys)[0] == 1


@pytest.mark.parametrize("check, expect", [
    ("continuous", 0), ("local-homeomorphism", 0), ("locally-open", 0), ("filtered", 2),
])
def test_map_checks_on_wrap(tmp_path, capsys, check, expect):
    inp = dump(tmp_path, "wrap.json", wrap_map(2, 4).to_dict())
    assert run(["check", check, "--input", inp], capsys)[0] == expect


def test_g2_check_on_polyline(tmp_path, capsys):
    helix = dump(tmp_path, "h.json", cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(0, 1), 1).to_json())
    assert run(["check", "g2", "--input", helix], capsys)[0] == 0
    assert run(["check", "g2", "--input", dump(tmp_path, "w.json", square_wave().to_json())], capsys)[0] == 2


def test_every_check_is_documented():
    assert "check-axioms" in CHECKS and "disjointness" in CHECKS and "g2" in CHECKS


# -- factorize -----------------------------------------------------------------------------------------

def test_factorize_wrap(tmp_path, capsys):
    inp = dump(tmp_path, "wrap.json", wrap_map(2, 4).to_dict())
    code, out = run(["factorize", "--input", inp], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["factorized"]
    assert sorted(len(v) for v in rep["fibers"].values()) == [2, 2, 2, 2]


# -- straighten ----------------------------------------------------------------------------------------

def test_straighten_square_wave_to_helix(tmp_path, capsys):
    inp = dump(tmp_path, "wave.json", square_wave().to_json())
    trace = tmp_path / "trace.json"
    code, out = run(["straighten", "--input", inp, "--trace", str(trace)], capsys)
    assert code == 0
    assert "winding: 1" in out.out
    doc = json.loads(trace.read_text(encoding="utf-8"))
    helix = cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(0, 1), 1)
    assert doc["final"] == helix.to_json() and doc["status"] == "converged"


def test_straighten_geodesic_zero_steps(tmp_path, capsys):
    inp = dump(tmp_path, "g.json", cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(Q(1, 3), 2), 0).to_json())
    code, out = run(["straighten", "--input", inp], capsys)
    assert code == 0 and "steps: 0" in out.out


def test_straighten_budget_zero_exits_3(tmp_path, capsys):
    inp = dump(tmp_path, "wave.json", square_wave().to_json())
    code, out = run(["straighten", "--input", inp, "--budget", "0"], capsys)
    assert code == 3 and "budget exhausted" in out.out


# -- verify-ltg and tietze -----------------------------------------------------------------------------

def test_verify_ltg_square(tmp_path, capsys):
    inp = dump(tmp_path, "sq.json", PlanePolygon([(0, 0), (1, 0), (1, 1), (0, 1)]).to_json())
    pairs = dump(tmp_path, "pairs.json", [[["0", "0"], ["1", "1"]]])
    code, out = run(["verify-ltg", "--input", inp, "--pairs", pairs], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["weakly_convex"] and rep["pairs"] == 1


def test_verify_ltg_l_polygon(tmp_path, capsys):
    L = PlanePolygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
    code, out = run(["verify-ltg", "--input", dump(tmp_path, "L.json", L.to_json())], capsys)
    assert code == 2 and json.loads(out.out)["stage"] == "NotLocallyConvex"


def test_verify_ltg_finite_wrap_with_atlas(tmp_path, capsys):
    pc = pseudocircle()
    charts = [least_connected_table(pc.subspace(pc.subset(pc.up[pc.idx(p)]))).to_dict() for p in (0, 2)]
    doc = {**wrap_map(2, 4).to_dict(), "atlas": charts}
    code, out = run(["verify-ltg", "--input", dump(tmp_path, "w.json", doc)], capsys)
    assert code == 0 and json.loads(out.out)["pairs"] == 6


def test_verify_ltg_line_map(tmp_path, capsys):
    inp = dump(tmp_path, "loop.json", LineMap.equator_loop(2).to_json())
    assert run(["verify-ltg", "--input", inp], capsys)[0] == 0


def test_tietze(tmp_path, capsys):
    band = dump(tmp_path, "band.json", HelixBand(1, Q(1, 8)).to_json())
    L = dump(tmp_path, "L.json", PlanePolygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)]).to_json())
    assert run(["tietze", "--input", band], capsys)[0] == 0
    assert run(["tietze", "--input", L], capsys)[0] == 2


# -- mine and determinism ------------------------------------------------------------------------------

def test_mine_c2(tmp_path, capsys):
    out = tmp_path / "gal.json"
    assert run(["mine", "--target", "C2-fails", "--max-points", "4", "--out", str(out)], capsys)[0] == 0
    gal = json.loads(out.read_text(encoding="utf-8"))
    assert gal["minimal_size"] == 4


@pytest.mark.parametrize("argv", [
    ["mine", "--target", "filtered-fails-for-local-homeo", "--max-points", "4"],
    ["mine", "--target", "C2-fails", "--max-points", "5", "--seed", "3", "--budget", "30"],
])
def test_reports_byte_identical(tmp_path, capsys, argv):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(argv + ["--out", str(a)], capsys)
    run(argv + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()


def test_thread_env_does_not_change_gallery(tmp_path, capsys, monkeypatch):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    argv = ["mine", "--target", "C2-fails", "--max-points", "5"]
    monkeypatch.setenv("CONVEXITY_KERNEL_THREADS", "1")
    run(argv + ["--out", str(a)], capsys)
    monkeypatch.setenv("CONVEXITY_KERNEL_THREADS", "3")
    run(argv + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()
