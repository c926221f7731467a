import json

import numpy as np
import pytest

from ohmicbath import cli
from ohmicbath import io as oio
from ohmicbath.core import Trajectory
from ohmicbath.coupling import TabulatedCoupling


def test_trajectory_csv_round_trip(tmp_path):
    t = np.linspace(0, 1, 7)
    tr = Trajectory(t, np.sin(t) / 3, np.cos(t) / 7, {2.5: t**2 / 11})
    path = tmp_path / "traj.csv"
    oio.write_trajectory_csv(path, tr)
    back = oio.read_trajectory_csv(path)
    np.testing.assert_array_equal(back.q, tr.q)
    np.testing.assert_array_equal(back.x[2.5], tr.x[2.5])
    assert path.read_text().splitlines()[0] == "t,q,qdot,x@2.5"


def test_tabulated_coupling_loader(tmp_path):
    path = tmp_path / "alpha.csv"
    path.write_text("omega,alpha\n# comment\n0,0\n1,0.5\n2,0.25\n")
    c = oio.load_tabulated_coupling(path)
    assert isinstance(c, TabulatedCoupling)
    np.testing.assert_array_equal(c.values, [0.0, 0.5, 0.25])
    path.write_text("0,0\n1,x\n")
    with pytest.raises(ValueError):
        oio.load_tabulated_coupling(path)


def test_json_conversion(tmp_path):
    from ohmicbath.coupling import Verdict

    obj = {"a": np.float64(1.5), "b": np.arange(3), "v": Verdict.FAILS, "nan": float("nan"), "t": (1, 2)}
    path = tmp_path / "x.json"
    oio.write_json(path, obj)
    data = json.loads(path.read_text())
    assert data == {"a": 1.5, "b": [0, 1, 2], "v": "FAILS", "nan": "nan", "t": [1, 2]}


def test_svg_writers(tmp_path):
    oio.svg_lines(tmp_path / "l.svg", {"a": ([0, 1, 2], [0, 1, 0])}, title="t")
    oio.svg_heatmap(tmp_path / "h.svg", [0, 1], [0, 1, 2], np.arange(6.0).reshape(3, 2) - 2)
    for name in ("l.svg", "h.svg"):
        text = (tmp_path / name).read_text()
        assert text.startswith("<svg") and text.rstrip().endswith("</svg>")


def _run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_figure1_outputs(tmp_path):
    assert _run(tmp_path, "figure1") == 0
    rows = np.loadtxt(tmp_path / "qt.csv", delimiter=",", skiprows=1)
    assert rows[np.argmin(np.abs(rows[:, 0])), 1] == 1.0
    report = json.loads((tmp_path / "figure1.json").read_text())
    assert 2.5 <= report["late_time_peak_omega"] <= 3.5
    assert {"qt.csv", "xomega.csv", "figure1.svg"} <= {p.name for p in tmp_path.iterdir()}


def test_figure1_zero_amplitude(tmp_path):
    assert _run(tmp_path, "figure1", "--b", "0", "--format", "csv") == 0
    for name in ("qt.csv", "xomega.csv"):
        data = np.loadtxt(tmp_path / name, delimiter=",", skiprows=1)
        assert np.all(data[:, -1] == 0.0)
    assert not (tmp_path / "figure1.svg").exists()


def test_outputs_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert _run(d, "figure1", "--gamma", "0.7") == 0
    for name in ("qt.csv", "xomega.csv", "figure1.json", "figure1.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_verify_default_and_failures(tmp_path):
    assert _run(tmp_path, "verify") == 0
    assert json.loads((tmp_path / "verification.json").read_text())["pass"]
    assert _run(tmp_path / "s2", "verify", "--strength", "2") == 1
    report = json.loads((tmp_path / "s2" / "verification.json").read_text())
    assert report["checks"]["diagonalizability"]["verdict"] == "FAILS"
    assert _run(tmp_path / "g0", "verify", "--gamma", "0") == 0
    checks = json.loads((tmp_path / "g0" / "verification.json").read_text())["checks"]
    assert "kramers_kronig" not in checks and not checks["zero_mode_condition"]["satisfied"]


def test_thermal_report(tmp_path):
    assert _run(tmp_path, "thermal", "--temperature", "0") == 0
    rep = json.loads((tmp_path / "thermal.json").read_text())
    assert rep["q2"]["divergent_coefficient"] == 0.0
    assert np.isfinite(rep["energy"]) and np.isfinite(rep["p2"])


def test_coefficients_report(tmp_path):
    assert _run(tmp_path, "coefficients", "--n-modes", "20001", "--omega-max", "150") == 0
    rep = json.loads((tmp_path / "coefficients.json").read_text())
    assert abs(rep["norm_integral"] - 1.0) <= 1e-4
    header = (tmp_path / "coefficients.csv").read_text().splitlines()[0]
    assert header == "omega,Re_fq,Im_fq,hX,Re_G,Im_G"


def test_oracle_compare(tmp_path):
    assert _run(tmp_path, "oracle-compare") == 0
    rep = json.loads((tmp_path / "oracle.json").read_text())
    assert rep["max_abs_error"] <= 1e-2 and rep["pass"]
    assert _run(tmp_path / "coarse", "oracle-compare", "--n-modes", "200", "--omega-max", "20",
                "--dt", "1e-3") == 1


def test_config_file_and_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nomega0 = 2\ngamma=0.5\nformat=json\n")
    assert _run(tmp_path, "figure1", "--config", str(cfg), "--gamma", "0.25") == 0
    rep = json.loads((tmp_path / "figure1.json").read_text())
    assert rep["params"] == {"omega0": 2.0, "gamma": 0.25, "strength": 1.0}
    assert not (tmp_path / "qt.csv").exists()


@pytest.mark.parametrize("args,field", [
    (["--omega0", "-1"], "omega0"),
    (["--eta", "0"], "eta"),
    (["--n-modes", "2.5"], "n_modes"),
    (["--t-span", "3", "1"], "t_span"),
    (["--format", "png"], "format"),
])
def test_config_errors_exit_2(tmp_path, capsys, args, field):
    assert _run(tmp_path, "thermal", *args) == 2
    assert field in capsys.readouterr().err


def test_bad_config_file_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour=blue\n")
    assert _run(tmp_path, "figure1", "--config", str(cfg)) == 2
    assert "colour" in capsys.readouterr().err


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["figure1", "--out", str(blocker / "sub")]) == 3
