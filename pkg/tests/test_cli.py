"""Driver behavior: exit codes, report output, JSON shape, seeding."""

import json

import pytest

from tractorcheck.cli import main, seeded_expr_text
from tractorcheck.scenes import load_scene, scene_geometry


def test_passing_run_exits_zero(capsys):
    rc = main(["--suite", "killing", "--scene", "flat_4", "--points", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS]" in out
    assert "[FAIL]" not in out
    assert "0 failed" in out


def test_quiet_prints_only_summary(capsys):
    rc = main(["--suite", "killing", "--scene", "flat_4", "--points", "1",
               "--quiet"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[PASS]" not in out
    assert "suite killing on flat_4" in out


def test_json_report(tmp_path, capsys):
    path = tmp_path / "report.json"
    rc = main(["--suite", "q", "--scene", "sphere_4", "--points", "2",
               "--quiet", "--json", str(path)])
    capsys.readouterr()
    assert rc == 0
    data = json.loads(path.read_text())
    (rep,) = data["reports"]
    assert rep["suite"] == "q" and rep["scene"] == "sphere_4"
    assert rep["passed"] is True
    assert rep["counts"]["failed"] == 0
    assert len(rep["points"]) == 2
    for check in rep["checks"]:
        assert check["passed"] is True
        for v in check["point"]:
            int(v.split("/")[0])  # rationals rendered as p/q strings


def test_multiple_scenes(capsys):
    rc = main(["--suite", "curvature", "--scene", "flat_4",
               "--scene", "builtin:sphere_4", "--points", "1", "--quiet"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "on flat_4" in out and "on sphere_4" in out


def test_unknown_scene_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "curvature", "--scene", "atlantis"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_dim4_needs_dimension_four(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "dim4", "--scene", "perturbed_flat_6"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_spectrum_needs_a_sphere(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "spectrum", "--scene", "flat_4"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_q_needs_einstein(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--suite", "q", "--scene", "perturbed_flat_5", "--points", "1"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_suite_flag_required(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--scene", "flat_4"])
    capsys.readouterr()
    assert exc.value.code == 2


def test_failing_check_exits_one(tmp_path, capsys):
    # a user scene may declare anything; a bogus Einstein scale must
    # surface as a failed check, not an error
    text = "\n".join([
        "[scene]",
        "name = bogus_scale",
        "dimension = 4",
        "coordinates = x1, x2, x3, x4",
        "",
        "[metric]",
        'g_11 = "1"',
        'g_22 = "1"',
        'g_33 = "1"',
        'g_44 = "1"',
        "",
        "[einstein_scales]",
        'scale_1 = "1 + x1*x2"',
        "",
        "[samples]",
        "point_1 = 1/2, 1/3, 1/5, 1/7",
    ]) + "\n"
    path = tmp_path / "bogus.scene"
    path.write_text(text)
    rc = main(["--suite", "einstein", "--scene", str(path), "--points", "1"])
    out = capsys.readouterr().out
    assert rc == 1
    assert "[FAIL]" in out
    assert "parallel tractor" in out


def test_seeded_expressions_are_stable():
    coords = ("x1", "x2", "x3")
    a = seeded_expr_text(coords, 1, "demo:0")
    b = seeded_expr_text(coords, 1, "demo:0")
    c = seeded_expr_text(coords, 2, "demo:0")
    assert a == b
    assert a != c
    spec = load_scene("flat_4")
    g = scene_geometry(spec, spec.sample_points[0], 3)
    g.jet(seeded_expr_text(g.coords, 1, "demo:parse"), 3)
