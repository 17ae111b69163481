import io
import json
import logging
import math

import pandas as pd
import pytest

from cli import _attach_negative_values, dispatch, parse_grid, setup_logging
from errors import DomainError


@pytest.fixture(autouse=True)
def reset_logging():
    yield
    root = logging.getLogger()
    for handler in root.handlers[:]:
        if type(handler) in (logging.StreamHandler, logging.FileHandler):
            root.removeHandler(handler)
            handler.close()


def _json(capsys, argv):
    assert dispatch(argv) == 0
    return json.loads(capsys.readouterr().out)


def _csv(capsys, argv):
    assert dispatch(argv) == 0
    captured = capsys.readouterr()
    meta = [line for line in captured.err.splitlines() if line.startswith("# meta ")]
    return pd.read_csv(io.StringIO(captured.out), float_precision="round_trip"), meta


def test_parse_grid():
    assert list(parse_grid("-1:1:3")) == [-1.0, 0.0, 1.0]
    assert list(parse_grid("2:2:1")) == [2.0]
    with pytest.raises(DomainError):
        parse_grid("0:1")
    with pytest.raises(DomainError):
        parse_grid("1:0:5")
    with pytest.raises(DomainError):
        parse_grid("0:inf:3")


def test_negative_values_are_attached():
    argv = ["density", "--grid", "-3:3:7", "--family", "kac", "--n", "-1"]
    assert _attach_negative_values(argv) == ["density", "--grid=-3:3:7", "--family", "kac", "--n", "-1"]
    assert _attach_negative_values(["expect", "--interval", "-inf:0"])[1] == "--interval=-inf:0"


def test_density_curve(capsys):
    frame, meta = _csv(capsys, ["density", "--family", "kostlan", "--n", "4", "--grid", "-3:3:601"])
    assert list(frame.columns) == ["t", "rho"]
    assert len(frame) == 601
    assert len(meta) == 1
    assert json.loads(meta[0][len("# meta "):])["command"] == "density"
    t, rho = frame["t"].iloc[300], frame["rho"].iloc[300]
    assert t == pytest.approx(0.0, abs=1e-12)
    assert rho == pytest.approx(2.0 / math.pi, rel=1e-12)


def test_density_csv_round_trips_exactly(capsys):
    from ensembles import ClosedFormFamily, ensemble_for
    from kernel_engine import density

    frame, _ = _csv(capsys, ["density", "--family", "kac", "--n", "5", "--grid", "-2:2:41"])
    e = ensemble_for(ClosedFormFamily.kac(5))
    for t, rho in zip(frame["t"], frame["rho"]):
        assert rho == density(e, t)


def test_density_methods_agree(capsys):
    argv = ["density", "--family", "kostlan", "--n", "6", "--grid", "-1:1:5"]
    engine, _ = _csv(capsys, argv)
    closed, _ = _csv(capsys, argv + ["--method", "closed"])
    logderiv, _ = _csv(capsys, argv + ["--method", "logderiv"])
    assert closed["rho"].to_numpy() == pytest.approx(engine["rho"].to_numpy(), rel=1e-10)
    assert logderiv["rho"].to_numpy() == pytest.approx(engine["rho"].to_numpy(), abs=1e-6)


def test_expect_closed_form(capsys):
    out = _json(capsys, ["expect", "--family", "kostlan", "--n", "9"])
    assert out["expected"] == 3.0
    assert out["method"] == "closed"
    assert "quad_tol" in out["meta"]["defaults"]


def test_expect_engine(capsys):
    out = _json(capsys, ["expect", "--family", "kostlan", "--n", "9", "--method", "engine"])
    assert out["expected"] == pytest.approx(3.0, abs=1e-8)
    out = _json(capsys, ["expect", "--family", "kac", "--n", "1"])
    assert out["expected"] == pytest.approx(1.0, abs=1e-10)


def test_usage_errors_exit_2(capsys):
    assert dispatch(["density", "--family", "kac", "--grid", "0:1:5"]) == 2
    assert dispatch(["density", "--family", "power_series", "--grid", "-2:2:5"]) == 2
    assert dispatch(["density", "--family", "nonsense", "--grid", "0:1:5"]) == 2
    assert dispatch(["expect", "--family", "kac", "--n", "3", "--method", "closed", "--interval", "0:1"]) == 2
    assert dispatch(["mc"]) == 2
    assert dispatch([]) == 2
    capsys.readouterr()


def test_computation_errors_exit_1(capsys):
    assert dispatch(["expect", "--family", "entire", "--interval", "0:1000", "--method", "engine"]) == 1
    assert "failed" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    [], ["density"], ["expect"], ["asymptotic"], ["noncentral"], ["systems"], ["matrix"], ["complex"],
    ["mc"], ["mc", "expect"], ["mc", "fixed-points"], ["mc", "eigen"], ["mc", "matrix-poly"], ["mc", "radial"],
    ["selftest"],
])
def test_help(capsys, argv):
    assert dispatch(argv + ["--help"]) == 0
    assert "usage" in capsys.readouterr().out


def test_asymptotic(capsys):
    out = _json(capsys, ["asymptotic", "--n", "100", "--exact"])
    assert abs(out["error"]) < 5e-4
    assert out["C1"] == pytest.approx(0.6257358072, abs=1e-8)
    out = _json(capsys, ["asymptotic", "--n", "1000", "--m", "2"])
    assert 0.0 < out["positive_zeros"] < 0.5


def test_noncentral(capsys):
    out = _json(capsys, ["noncentral", "--family", "kostlan", "--n", "2", "--m", "1"])
    assert out["expected"] == pytest.approx(math.sqrt(2.0) * math.exp(-0.5), abs=1e-6)
    out = _json(capsys, ["noncentral", "--family", "power_series", "--case", "case2", "--m", "1",
                         "--interval", "0:0.9"])
    assert out["expected"] == pytest.approx(out["closed_form"], abs=1e-7)
    frame, _ = _csv(capsys, ["noncentral", "--family", "entire", "--m", "1", "--grid", "-1:1:3"])
    assert list(frame.columns) == ["t", "rho", "m0", "m1"]
    assert frame["m0"].to_numpy() == pytest.approx([1.0, 1.0, 1.0], rel=1e-9)


def test_systems(capsys):
    out = _json(capsys, ["systems", "--family", "kostlan_multihomogeneous", "--degrees", "2,3"])
    assert out["expected"] == pytest.approx(math.sqrt(6.0), rel=1e-14)
    out = _json(capsys, ["systems", "--family", "kostlan_multihomogeneous", "--degrees", "3,3",
                         "--point", "-0.1,0.2"])
    assert out["expected"] == pytest.approx(3.0, rel=1e-14)
    assert out["density"] == pytest.approx(out["density_general"], abs=1e-5)
    out = _json(capsys, ["systems", "--family", "entire", "--m", "2"])
    assert out["expected"] == "inf"


def test_matrix(capsys):
    out = _json(capsys, ["matrix", "--n", "4", "--block", "2"])
    assert out["expected"] == pytest.approx(11.0 * math.sqrt(2.0) / 8.0, rel=1e-14)
    assert out["block_factor"] == pytest.approx(math.pi / 2.0, rel=1e-14)
    frame, _ = _csv(capsys, ["matrix", "--n", "3", "--scatter", "2", "--seed", "1"])
    assert list(frame.columns) == ["re", "im"]
    assert len(frame) == 6


def test_complex(capsys):
    frame, _ = _csv(capsys, ["complex", "--family", "kostlan_complex", "--n", "10", "--radii", "0:2:3"])
    assert frame["count"].to_numpy() == pytest.approx([0.0, 5.0, 8.0], rel=1e-14)
    assert math.isnan(frame["areal"].iloc[0])
    out = _json(capsys, ["complex", "--strip", "0.6,2,0,1"])
    assert out["expected"] > 0


def test_mc_runs_are_bit_identical(capsys):
    argv = ["mc", "expect", "--family", "kac", "--n", "4", "--samples", "200", "--seed", "5", "--format", "json"]
    assert dispatch(argv) == 0
    first = capsys.readouterr().out
    assert dispatch(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    out = json.loads(first)
    assert out["n"] == 200 and out["seed"] == 5
    assert out["meta"]["samples"] == 200


def test_mc_radial(capsys):
    frame, _ = _csv(capsys, ["mc", "radial", "--family", "kostlan_complex", "--n", "5", "--radii", "0:1:2",
                             "--samples", "100", "--seed", "3"])
    assert frame["mean"].iloc[0] == 0.0
    assert frame["target"].to_numpy() == pytest.approx([0.0, 2.5])
    assert frame["r"].tolist() == [0.0, 1.0]


def test_setup_logging_rolls_old_lines(tmp_path):
    current = tmp_path / "current_log.txt"
    current.write_text("".join(f"line {i}\n" for i in range(40)))
    setup_logging(log_dir=str(tmp_path))
    lines = current.read_text().splitlines()
    assert lines[:30] == [f"line {i}" for i in range(10, 40)]
    archived = (tmp_path / "archived_logs.txt").read_text().splitlines()
    assert archived == [f"line {i}" for i in range(10)]
