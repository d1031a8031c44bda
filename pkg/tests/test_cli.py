import csv
import io
import json
import math
import subprocess
import sys

import pytest

from wynerci.cli import (
    EXIT_MISMATCH,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    SweepSpec,
    UsageError,
    main,
    run_sweep,
)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_report(out):
    values = {}
    for line in out.splitlines():
        parts = line.split()
        if len(parts) >= 2 and not line.startswith("model"):
            try:
                values[parts[0]] = float(parts[1])
            except ValueError:
                values[parts[0]] = None
    return values


class TestBound:
    def test_agc_exact(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "agc", "--rho-hat", "0.5", "--sigma-a", "1")
        assert code == EXIT_OK
        v = parse_report(out)
        assert v["exact"] == pytest.approx(0.953038, abs=5e-7)
        assert v["mutual_information"] == pytest.approx(0.413771, abs=5e-7)

    def test_gaussian(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "gaussian", "--rho", "0.5")
        assert code == EXIT_OK
        v = parse_report(out)
        assert v["lower_bound"] == pytest.approx(0.549306, abs=5e-7)
        assert v["mutual_information"] == pytest.approx(0.143841, abs=5e-7)

    def test_laplace_json(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "laplace", "--rho-l", "0.99", "--json")
        assert code == EXIT_OK
        report = json.loads(out)
        assert report["lower_bound"] == pytest.approx(2.457512, abs=5e-6)
        assert report["upper_bound"] is None

    def test_relaxed(self, capsys):
        code, out, _ = run(capsys, "bound", "--model", "gaussian", "--rho", "0.5", "--gamma", "0.1")
        assert code == EXIT_OK
        s = math.sqrt(1 - math.exp(-0.2))
        assert parse_report(out)["lower_bound"] == pytest.approx(0.5 * math.log(3 * (1 - s) / (1 + s)), abs=1e-9)
        assert "relaxed" in out

    def test_csv_out(self, capsys, tmp_path):
        path = tmp_path / "point.csv"
        code, _, _ = run(capsys, "bound", "--model", "agc4", "--rho-hat", "0.5", "--r", "0.9",
                         "--sigma-a", "1", "--out", str(path))
        assert code == EXIT_OK
        rows = list(csv.DictReader(path.open()))
        assert len(rows) == 1 and rows[0]["exact"] == ""

    @pytest.mark.parametrize("argv", [
        ["bound"],
        ["bound", "--model", "agc", "--rho-hat", "0.5"],
        ["bound", "--model", "laplace", "--rho-l", "1.0"],
        ["bound", "--model", "gaussian", "--rho", "1.0"],
        ["bound", "--model", "weibull"],
        ["frobnicate"],
    ])
    def test_usage_errors(self, capsys, argv):
        code, _, _ = run(capsys, *argv)
        assert code == EXIT_USAGE


class TestSweep:
    def test_fig1_matches_fixture(self, capsys, tmp_path):
        path = tmp_path / "fig1.csv"
        assert run(capsys, "sweep", "--figure", "1", "--out", str(path))[0] == EXIT_OK
        lines = path.read_text().splitlines()
        assert lines[0] == "param,exact,mi"
        assert len(lines) == 102
        for fixture in ("fig1_exact", "fig1_mi"):
            code, out, _ = run(capsys, "compare", str(path), "--fixture", fixture, "--tol", "1e-3")
            assert code == EXIT_OK, out

    def test_deterministic_bytes(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--model", "agc4", "--rho-hat", "0.5", "--r", "0.9", "--param", "sigma_a",
                "--start", "0", "--stop", "2", "--step", "0.25", "--quantities", "lower,upper,mi"]
        run(capsys, *argv, "--out", str(a))
        run(capsys, *argv, "--out", str(b))
        assert a.read_bytes() == b.read_bytes()
        assert b"\r" not in a.read_bytes()

    def test_jobs_same_output(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--model", "laplace", "--param", "rho_l", "--start", "0.3", "--stop", "0.6",
                "--step", "0.1", "--quantities", "lower,mi"]
        run(capsys, *argv, "--out", str(a))
        run(capsys, *argv, "--jobs", "2", "--out", str(b))
        assert a.read_bytes() == b.read_bytes()

    def test_gamma_sweep(self, capsys):
        code, out, _ = run(capsys, "sweep", "--model", "gaussian", "--rho", "0.5", "--param", "gamma",
                           "--start", "0", "--stop", "0.2", "--step", "0.1", "--quantities", "gamma_lower")
        assert code == EXIT_OK
        rows = list(csv.reader(io.StringIO(out)))
        assert rows[0] == ["param", "gamma_lower"]
        assert float(rows[1][1]) == pytest.approx(0.5 * math.log(3), abs=1e-12)
        assert float(rows[3][1]) == 0.0   # gamma = 0.2 exceeds the Gaussian MI

    def test_failed_point_is_empty_cell(self, caplog):
        # rho = 1 is a degenerate pair: that point fails, the others still run
        spec = SweepSpec("gaussian", {}, "rho", 0.0, 1.0, 0.5, ["lower", "mi"])
        out = io.StringIO()
        failures = run_sweep(spec, out)
        rows = list(csv.reader(io.StringIO(out.getvalue())))
        assert failures == 1
        assert rows[3] == ["1", "", ""]
        assert float(rows[2][1]) == pytest.approx(0.5 * math.log(3), abs=1e-15)
        assert "failed" in caplog.text

    def test_failed_point_exit_code(self):
        proc = subprocess.run(
            [sys.executable, "-m", "wynerci.cli", "sweep", "--model", "gaussian", "--param", "rho",
             "--start", "0.5", "--stop", "1", "--step", "0.5", "--quantities", "lower"],
            capture_output=True, text=True, check=False)
        assert proc.returncode == EXIT_NUMERICAL
        assert proc.stdout.splitlines()[-1] == "1,"
        assert "WARNING point rho=1 failed" in proc.stderr

    @pytest.mark.parametrize("extra", [
        ["--step", "0"],
        ["--start", "3", "--stop", "1"],
        ["--quantities", "exact"],
        ["--quantities", "nonsense"],
    ])
    def test_invalid_spec(self, capsys, extra):
        base = {"--start": "0", "--stop": "1", "--step": "0.5", "--quantities": "lower"}
        for k, v in zip(extra[::2], extra[1::2]):
            base[k] = v
        argv = ["sweep", "--model", "agc4", "--rho-hat", "0.5", "--r", "0.9", "--param", "sigma_a"]
        for k, v in base.items():
            argv += [k, v]
        assert run(capsys, *argv)[0] == EXIT_USAGE

    def test_sweepspec_validation(self):
        with pytest.raises(UsageError):
            SweepSpec("laplace", {}, "rho_l", 0.1, 0.2, 0.1, ["upper"])
        with pytest.raises(UsageError):
            SweepSpec("gaussian", {"rho": 0.5}, "rho", 0.1, 0.2, 0.1, ["gamma_lower"])

    def test_grid_endpoints(self):
        spec = SweepSpec("laplace", {}, "rho_l", 0.2, 0.99, 0.01, ["lower"])
        grid = spec.grid()
        assert len(grid) == 80 and grid[0] == 0.2 and grid[-1] == 0.99


class TestConfig:
    def test_file_values_apply(self, capsys, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"model": "gaussian", "rho": 0.5}))
        code, out, _ = run(capsys, "bound", "--config", str(conf))
        assert code == EXIT_OK
        assert parse_report(out)["lower_bound"] == pytest.approx(0.549306, abs=5e-7)

    def test_flags_take_precedence(self, capsys, tmp_path):
        conf = tmp_path / "c.json"
        conf.write_text(json.dumps({"model": "gaussian", "rho": 0.5}))
        code, out, _ = run(capsys, "bound", "--config", str(conf), "--rho", "0.0")
        assert code == EXIT_OK
        assert parse_report(out)["lower_bound"] == 0.0

    @pytest.mark.parametrize("content", ["{not json", json.dumps({"colour": "red"})])
    def test_bad_config(self, capsys, tmp_path, content):
        conf = tmp_path / "c.json"
        conf.write_text(content)
        assert run(capsys, "bound", "--config", str(conf))[0] == EXIT_USAGE

    def test_missing_config(self, capsys, tmp_path):
        assert run(capsys, "bound", "--config", str(tmp_path / "nope.json"))[0] == EXIT_USAGE

    def test_quadrature_flags(self, capsys):
        code, _, _ = run(capsys, "bound", "--model", "agc", "--rho-hat", "0.5", "--sigma-a", "1",
                         "--abs-tol", "0")
        assert code == EXIT_USAGE


class TestVerify:
    def test_lemma2_pass(self, capsys):
        code, out, _ = run(capsys, "verify-lemma2", "--rho", "0.5", "--lam", "0.25")
        assert code == EXIT_OK
        gap = float(next(l for l in out.splitlines() if l.startswith("gap")).split()[1])
        assert 0 <= gap <= 1e-3
        assert out.rstrip().endswith("PASS")

    def test_lemma2_boundary(self, capsys):
        assert run(capsys, "verify-lemma2", "--rho", "0.9", "--lam", "0.9")[0] == EXIT_OK

    def test_lemma2_out_of_scope(self, capsys):
        code, out, _ = run(capsys, "verify-lemma2", "--rho", "0.3", "--lam", "0.5")
        assert code == EXIT_USAGE
        assert "out of scope" in out

    def test_lemma2_tight_tolerance_fails(self, capsys):
        code, out, _ = run(capsys, "verify-lemma2", "--rho", "0.5", "--lam", "0.25", "--tol", "1e-9")
        assert code == EXIT_NUMERICAL
        assert out.rstrip().endswith("FAIL")

    def test_gmu(self, capsys):
        code, out, _ = run(capsys, "verify-gmu", "--rho", "0.5", "--gamma", "0.1")
        assert code == EXIT_OK
        assert "2.348756174" in out

    def test_gmu_gamma_zero(self, capsys):
        assert run(capsys, "verify-gmu", "--rho", "0.5", "--gamma", "0")[0] == EXIT_USAGE


class TestCompare:
    @pytest.fixture
    def fig2_csv(self, capsys, tmp_path):
        # the plotted Example 2 curves correspond to r = 0.8
        path = tmp_path / "fig2.csv"
        assert run(capsys, "sweep", "--figure", "2", "--r", "0.8", "--out", str(path))[0] == EXIT_OK
        return path

    @pytest.mark.parametrize("fixture", ["fig2_lower", "fig2_mi", "fig2_upper"])
    def test_fig2_pass(self, capsys, fig2_csv, fixture):
        code, out, _ = run(capsys, "compare", str(fig2_csv), "--fixture", fixture)
        assert code == EXIT_OK, out

    def test_corrupted_row_listed(self, capsys, fig2_csv):
        lines = fig2_csv.read_text().splitlines()
        header = lines[0].split(",")
        col = header.index("upper")
        cells = lines[21].split(",")   # sigma_A = 1
        cells[col] = "9.0"
        lines[21] = ",".join(cells)
        fig2_csv.write_text("\n".join(lines) + "\n")
        code, out, _ = run(capsys, "compare", str(fig2_csv), "--fixture", "fig2_upper")
        assert code == EXIT_MISMATCH
        assert "row param=1:" in out
        assert "FAIL (1 rows" in out

    def test_empty_cell_fails(self, capsys, fig2_csv):
        lines = fig2_csv.read_text().splitlines()
        lines[5] = lines[5].split(",")[0] + ",,,,"
        fig2_csv.write_text("\n".join(lines) + "\n")
        code, out, _ = run(capsys, "compare", str(fig2_csv), "--fixture", "fig2_mi")
        assert code == EXIT_MISMATCH
        assert "<empty>" in out

    def test_alignment_error(self, capsys, fig2_csv):
        lines = fig2_csv.read_text().splitlines()
        fig2_csv.write_text("\n".join(lines[:-1]) + "\n")
        code, out, _ = run(capsys, "compare", str(fig2_csv), "--fixture", "fig2_mi")
        assert code == EXIT_MISMATCH
        assert "alignment error" in out

    def test_missing_column(self, capsys, fig2_csv):
        assert run(capsys, "compare", str(fig2_csv), "--fixture", "fig1_exact")[0] == EXIT_USAGE

    def test_missing_file(self, capsys, tmp_path):
        assert run(capsys, "compare", str(tmp_path / "none.csv"), "--fixture", "fig1_mi")[0] == EXIT_USAGE
