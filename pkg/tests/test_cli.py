import json
from math import factorial

import pytest

from resurgence.cli import dumps, main, read_coeffs, run


def A(report_stokes):
    return complex(float(report_stokes["A"][0]), float(report_stokes["A"][1]))


@pytest.fixture(scope="module")
def euler_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("coeffs") / "euler.txt"
    lines = ["# Euler: sum (-1)^n n! x^(n+1)", "0"] + [str((-1) ** n * factorial(n)) for n in range(30)]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestAnalyze:
    def test_e2(self):
        code, rep = run(["analyze", "--k", "2", "--order", "40"])
        assert code == 0
        assert [s["q"] for s in rep["polygon_x"]["zero"]["slopes"]] == ["0", "1"]
        assert rep["determining"]["roots"] == ["0", "1/16"]
        nearest = min((p for p in rep["borel"]["poles"] if p[2]), key=lambda p: abs(complex(float(p[0]), float(p[1]))))
        assert abs(float(nearest[0]) + 1 / 16) < 1e-6
        assert rep["config"] == {"order": 40, "precision": 256, "tol": 1e-10}
        assert rep["precision_bits"] == 256

    def test_euler(self):
        code, rep = run(["analyze", "--op", "x*theta^2 + theta - 1", "--order", "30"])
        assert code == 0
        assert [b["u"] for b in rep["basis"]] == ["0", "1"]
        assert rep["basis"][0]["leading"] == ["1", "-1", "2", "-6"]
        assert abs(A(rep["stokes"]) - 2j * 3.141592653589793) < 1e-6
        assert rep["stokes"]["status"] == "ok"

    def test_operator_text_round_trips(self):
        _, rep = run(["analyze", "--k", "3", "--order", "10"])
        code, again = run(["analyze", "--op", rep["operator_x"], "--order", "10"])
        assert code == 0 and again["operator"] == rep["operator_x"]

    def test_parse_error(self):
        code, rep = run(["analyze", "--op", "x*theta^"])
        assert code == 1 and rep["error"]["kind"] == "parse"

    def test_shape_error(self):
        code, rep = run(["analyze", "--op", "x^-3*theta + x^-2*theta^2 + x^-1*theta^4 + 1"])
        assert code == 1 and rep["error"]["kind"] == "polygon-shape"
        assert {"slopes", "u"} <= set(rep["error"]["detail"])

    def test_no_horizontal_slope(self):
        code, rep = run(["analyze", "--op", "theta^2 + x^-1"])
        assert code == 1 and rep["error"]["kind"] == "no-formal-solution"


def test_partition_single_point():
    code, rep = run(["partition", "--k", "2", "--lambda", "0.05", "--tol", "1e-10"])
    assert code == 0
    (row,) = rep["rows"]
    assert row["lambda"] == "0.05"
    assert float(row["abs_diff"]) <= 1e-8
    assert float(row["quad_err"]) <= 1e-10


def test_partition_k1_has_no_resummation():
    code, rep = run(["partition", "--k", "1", "--lambda-grid", "0:0.2:3"])
    assert code == 0 and len(rep["rows"]) == 3
    assert "resummed" not in rep["rows"][0] and "borel" not in rep


def test_partition_bad_grid():
    code, rep = run(["partition", "--k", "2", "--lambda-grid", "0:1"])
    assert code == 1 and rep["error"]["kind"] == "input"


def test_resum_euler(euler_file):
    code, rep = run(["resum", "--coeffs", str(euler_file), "--direction", "0", "--z", "1"])
    assert code == 0
    assert rep["laplace"]["value"][0].startswith("0.5963473623")
    assert abs(A(rep["stokes"]) - 2j * 3.141592653589793) < 1e-6


def test_resum_missing_file(tmp_path):
    code, rep = run(["resum", "--coeffs", str(tmp_path / "nope"), "--z", "1"])
    assert code == 1 and rep["error"]["kind"] == "input"


def test_read_coeffs(tmp_path):
    path = tmp_path / "c.txt"
    path.write_text("1/2  # half\n\n1.5 -2\n")
    a, b = read_coeffs(path)
    assert str(a) == "1/2" and complex(b) == complex(1.5, -2)
    path.write_text("1 2 3\n")
    with pytest.raises(ValueError):
        read_coeffs(path)


def test_airy():
    code, rep = run(["airy", "--q", "1"])
    assert code == 0
    assert (rep["u_plus"], rep["u_minus"], rep["beta"]) == ("2/3", "-2/3", "-1/2")
    assert [b["borel_leading_zeros"] for b in rep["branches"]] == [["0", "4/3"], ["0", "-4/3"]]


def test_airy_degenerate():
    code, rep = run(["airy", "--q", "0"])
    assert code == 1 and rep["error"]["kind"] == "unsupported"


def test_report_round_trip_is_byte_identical():
    _, rep = run(["airy", "--q", "4", "--order", "10"])
    text = dumps(rep)
    assert dumps(json.loads(text)) == text


def test_main_writes_out(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["analyze", "--op", "x*theta^2 + theta - 1", "--order", "20", "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["command"] == "analyze"


def test_main_exit_code_on_error(capsys):
    assert main(["analyze", "--op", "theta^"]) == 1
    assert json.loads(capsys.readouterr().out)["error"]["kind"] == "parse"


def test_grid_and_config():
    from resurgence.config import PartitionGrid, RunConfig

    assert PartitionGrid.parse(2, "0:1:3").lambdas == (0.0, 0.5, 1.0)
    assert PartitionGrid.parse(2, "0.1:9:1").lambdas == (0.1,)
    with pytest.raises(ValueError):
        RunConfig(precision=32)
    with pytest.raises(ValueError):
        RunConfig(tol=0)
