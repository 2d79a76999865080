import json
import math
import subprocess
import sys

import pytest

from cubelab.cli import main


def run(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    lines = [l for l in text.splitlines() if l]
    return lines[0].split(","), [l.split(",") for l in lines[1:]]


class TestDual:
    def test_single_row(self, capsys):
        code, out, _ = run(["dual", "--n", "1..1"], capsys)
        assert code == 0
        header, rows = csv_rows(out)
        assert header == ["n", "value", "certified", "restarts", "seed"]
        assert rows == [["1", "1", "true", "250", "42"]]

    def test_plateau_and_jump(self, capsys):
        code, out, _ = run(["dual", "--n", "2..8", "--restarts", "200", "--seed", "42"], capsys)
        assert code == 0
        _, rows = csv_rows(out)
        vals = [float(r[1]) for r in rows]
        assert all(abs(v - vals[0]) <= 1e-9 for v in vals[:-1])
        assert vals[-1] > vals[0] + 1e-6

    def test_byte_identical(self, capsys, tmp_path):
        argv = ["dual", "--n", "1..6", "--restarts", "30", "--seed", "5"]
        _, first, _ = run(argv, capsys)
        _, second, _ = run(argv, capsys)
        assert first == second
        path = tmp_path / "fig.csv"
        assert run(argv + ["--out", str(path)], capsys)[0] == 0
        assert path.read_text() == first

    def test_seed_env(self, capsys, monkeypatch):
        monkeypatch.setenv("CUBELAB_SEED", "9")
        _, out, _ = run(["dual", "--n", "2..2", "--restarts", "3"], capsys)
        assert csv_rows(out)[1][0][4] == "9"
        _, out, _ = run(["dual", "--n", "2..2", "--restarts", "3", "--seed", "11"], capsys)
        assert csv_rows(out)[1][0][4] == "11"

    def test_json(self, capsys):
        code, out, _ = run(["dual", "--n", "1..2", "--format", "json"], capsys)
        assert code == 0
        data = json.loads(out)
        assert data["complete"] is True

    def test_budget(self, capsys):
        code, out, err = run(["dual", "--n", "1..14", "--budget", "1e-6"], capsys)
        assert code == 0
        assert "budget" in err
        assert len(csv_rows(out)[1]) < 14

    @pytest.mark.parametrize(
        "argv",
        [
            ["dual", "--n", "0..2"],
            ["dual", "--n", "3..2"],
            ["dual", "--n", "x"],
            ["dual", "--threads", "0"],
            ["dual", "--budget", "0"],
            [],
            ["nope"],
        ],
    )
    def test_usage_errors(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 1
        assert "usage" in err


class TestKhintchine:
    def test_half(self, capsys):
        code, out, _ = run(["khintchine", "--p", "0.5", "--n", "4"], capsys)
        assert code == 0
        _, rows = csv_rows(out)
        assert float(rows[0][1]) == 1.0

    def test_out_of_range(self, capsys):
        assert run(["khintchine", "--p", "1.2"], capsys)[0] == 1

    def test_certify(self, capsys):
        code, out, _ = run(["certify", "--p", "0.75"], capsys)
        assert code == 0
        data = json.loads(out)
        assert data["epsilon"] > 0 and data["q_upper"] < 1

    def test_certify_failure(self, capsys):
        code, _, err = run(["certify", "--p", "0.6"], capsys)
        assert code == 2
        assert "certification failed" in err

    def test_certify_grid_keeps_going(self, capsys):
        code, out, _ = run(["certify", "--p", "0.6,0.75", "--format", "csv"], capsys)
        assert code == 0
        _, rows = csv_rows(out)
        assert rows[0][1] == "nan" and float(rows[1][1]) > 0

    def test_certify_range(self, capsys):
        assert run(["certify", "--p", "0.5"], capsys)[0] == 1

    def test_bound(self, capsys):
        code, out, _ = run(["bound"], capsys)
        assert code == 0
        assert json.loads(out)["bound"] < math.pi / 2 - 1e-3

    def test_bound_pz_route_asserts(self, capsys):
        code, _, err = run(["bound", "--method", "pz", "--grid", "200"], capsys)
        assert code == 2
        assert "not below" in err


class TestBellman:
    def test_two_point(self, capsys, tmp_path):
        path = tmp_path / "heat.csv"
        code, _, err = run(["bellman", "--check", "two-point", "--grid", "2001", "--out", str(path)], capsys)
        assert code == 0
        header, rows = csv_rows(path.read_text())
        assert header == ["a", "b", "defect"]
        assert len(rows) == 201 * 201
        assert min(float(r[2]) for r in rows) >= -1e-12

    def test_two_point_custom_k_reports_only(self, capsys, tmp_path):
        argv = ["bellman", "--check", "two-point", "--k", str(math.sqrt(2 * math.pi) * 1.001)]
        code, _, err = run(argv + ["--out", str(tmp_path / "h.csv")], capsys)
        assert code == 0
        assert float(err.split()[-1]) < 0

    @pytest.mark.parametrize("check", ["curvature", "mb", "two-value", "symmetric"])
    def test_checks(self, check, capsys):
        code, out, _ = run(["bellman", "--check", check], capsys)
        assert code == 0
        assert csv_rows(out)[1]

    def test_mb_chain(self, capsys):
        _, out, _ = run(["bellman", "--check", "mb"], capsys)
        rows = dict(r for r in csv_rows(out)[1])
        assert float(rows["chain(1/8)"]) == pytest.approx(math.pi / 2, rel=1e-15)
        assert float(rows["chain(M_I)"]) == pytest.approx(math.sqrt(math.pi), rel=1e-9)

    def test_unknown(self, capsys):
        code, _, err = run(["bellman", "--check", "nope"], capsys)
        assert code == 1
        assert "two-point" in err


class TestSeries:
    def test_lp_sum(self, capsys):
        code, out, _ = run(["series", "--name", "lp-sum", "--n-max", "10000"], capsys)
        assert code == 0
        _, rows = csv_rows(out)
        assert rows[-1][0] == "10000"
        assert abs(float(rows[-1][3])) < 0.05

    @pytest.mark.parametrize("name", ["l1-growth", "majority-odd", "majority-even", "clt"])
    def test_names(self, name, capsys):
        assert run(["series", "--name", name, "--n-max", "1000"], capsys)[0] == 0

    def test_unknown(self, capsys):
        code, _, err = run(["series", "--name", "zzz"], capsys)
        assert code == 1
        assert "lp-sum" in err


def test_verify(capsys):
    code, out, _ = run(["verify"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert any(l.startswith("PASS") for l in lines)
    assert not any(l.startswith("FAIL") for l in lines)
    assert "const 1/(2pi) = 0.15915494309189535" in lines


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cubelab", "dual", "--n", "1..2", "--restarts", "2"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("n,value")
