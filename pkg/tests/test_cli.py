from __future__ import annotations

import csv
import io
import json

import pytest

from hjsde.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_resolve(capsys):
    code, out, _ = run(capsys, "resolve", "--p", "8", "--q", "3")
    rep = json.loads(out)
    assert code == 0
    assert rep["e"] == [3, 3] and rep["c1"] == "Negative" and rep["conjugate_q"] == 3
    code, out, _ = run(capsys, "resolve", "--p", "4", "--q", "3")
    assert json.loads(out)["c1"] == "Zero"
    code, out, _ = run(capsys, "resolve", "--p", "8", "--q", "3", "--blowup", "1")
    assert json.loads(out)["e"] == [4, 1, 4]


def test_usage_errors(capsys):
    assert run(capsys, "resolve", "--p", "1", "--q", "0")[0] == 2
    assert run(capsys, "resolve", "--p", "8", "--q", "2")[0] == 2
    assert run(capsys, "resolve")[0] == 2
    code, _, err = run(capsys, "verify", "--target", "sde", "--p", "3", "--q", "2")
    assert code == 2 and "e_j" in err
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--target", "nonsense"])
    assert exc.value.code == 2


def test_profile_json(capsys):
    code, out, _ = run(capsys, "profile", "--p", "8", "--q", "3")
    rep = json.loads(out)
    assert code == 0 and rep["boundary_zero"] == "3/8" and rep["violations"] == []


def test_profile_file_round_trip(capsys, tmp_path):
    path = tmp_path / "p.json"
    run(capsys, "profile", "--p", "8", "--q", "3", "--output", str(path))
    code, out, _ = run(capsys, "eval", "--profile", str(path), "--point", "1,0.5", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["F"]) == pytest.approx(0.051619725962490259, rel=1e-12)


def test_plot_data_f0(capsys):
    code, out, _ = run(capsys, "plot-data", "--mode", "f0", "--p", "8", "--q", "3", "--format", "csv",
                       "--grid", "9", "--eta-range", "0,1")
    rows = list(csv.reader(io.StringIO(out)))[1:]
    assert ["0.375", "0"] in rows
    code, out, _ = run(capsys, "plot-data", "--mode", "f0", "--kind", "ch", "--p", "8", "--q", "3",
                       "--format", "csv", "--grid", "4", "--eta-range", "0,0.375")
    assert all(r[1] == "0" for r in list(csv.reader(io.StringIO(out)))[1:])


def test_plot_data_zero_is_vertical_for_odd(capsys):
    code, out, _ = run(capsys, "plot-data", "--mode", "zero", "--kind", "odd", "--p", "8", "--q", "3",
                       "--format", "csv", "--grid", "4")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and all(abs(float(r["eta"]) - 0.375) < 1e-12 for r in rows)


def test_plot_data_infinity(capsys):
    code, out, _ = run(capsys, "plot-data", "--mode", "infinity", "--p", "8", "--q", "3", "--grid", "3")
    rep = json.loads(out)
    assert code == 0 and rep["center"] == "3/8" and len(rep["psi2_psi2"]) == 3


def test_verify_targets(capsys):
    code, out, _ = run(capsys, "verify", "--target", "sde", "--p", "8", "--q", "3", "--grid", "5")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "pass" and rep["scalar_negative"]
    assert len(rep["points"]) == 25
    code, out, _ = run(capsys, "verify", "--target", "hyperbolic", "--grid", "20")
    assert code == 0 and json.loads(out)["vanishing_half"] == "both"
    code, _, _ = run(capsys, "verify", "--target", "sfk", "--p", "8", "--q", "3", "--expect-einstein", "yes")
    assert code == 1
    for target in ("joyce", "eigen", "extension", "bergman"):
        code, out, _ = run(capsys, "verify", "--target", target, "--p", "8", "--q", "3")
        assert code == 0, target


def test_rho_floor_for_curvature(capsys):
    code, _, err = run(capsys, "verify", "--target", "sde", "--p", "8", "--q", "3", "--rho-range", "0.001,1",
                       "--eta-range", "0.5,1")
    assert code == 2


def test_deterministic_across_workers(capsys):
    args = ["verify", "--target", "sde", "--p", "8", "--q", "3", "--grid", "4", "--format", "csv"]
    _, a, _ = run(capsys, *args, "--workers", "1")
    _, b, _ = run(capsys, *args, "--workers", "3")
    assert a == b
