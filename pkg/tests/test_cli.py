import json

import pytest

from otlab import ConvergenceTable, cli


def write_measure(path, lines):
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def delta_files(tmp_path):
    mu = write_measure(tmp_path / "mu.txt", ["0.0 1.0"])
    nu = write_measure(tmp_path / "nu.txt", ["1.0 1.0"])
    return mu, nu


class TestSolveCommand:
    def test_point_to_point(self, delta_files, capsys):
        mu, nu = delta_files
        code = cli.main(["solve", mu, nu, "--cost", "l1"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["cost"] == pytest.approx(1.0, abs=1e-12)
        assert out["plan_entries"] == [[0, 0, 1.0]]
        assert out["duality_gap"] <= 1e-9
        assert len(out["dual_f"]) == 1 and len(out["dual_g"]) == 1

    def test_identical_measures_cost_zero(self, tmp_path, capsys):
        path = write_measure(tmp_path / "m.txt", ["0.0 0.5", "1.0 0.5"])
        code = cli.main(["solve", path, path, "--cost", "sql2", "--normalize"])
        out = json.loads(capsys.readouterr().out)
        assert code == 0
        assert out["cost"] == pytest.approx(0.0, abs=1e-12)

    def test_malformed_weight_line_exits_2(self, tmp_path, capsys):
        mu = write_measure(tmp_path / "mu.txt", ["0.0 0.7", "1.0 0.7"])
        nu = write_measure(tmp_path / "nu.txt", ["1.0 1.0"])
        assert cli.main(["solve", mu, nu, "--cost", "l1"]) == 2

    def test_missing_file_exits_2(self, tmp_path):
        nu = write_measure(tmp_path / "nu.txt", ["1.0 1.0"])
        assert cli.main(["solve", str(tmp_path / "absent.txt"), nu]) == 2

    def test_bad_cost_string_exits_2(self, delta_files):
        mu, nu = delta_files
        assert cli.main(["solve", mu, nu, "--cost", "manhattan"]) == 2


class TestBenchCommand:
    def test_writes_csv_and_sidecar(self, tmp_path, capsys):
        out = tmp_path / "cube.csv"
        code = cli.main([
            "bench", "--setting", "cube:1:10", "--cost", "sql2",
            "--estimator", "two-sample", "--n-grid", "4,8", "--reps", "2",
            "--seed", "3", "--threads", "1", "--out", str(out),
        ])
        assert code == 0
        table = ConvergenceTable.read_csv(out)
        assert len(table.rows) == 2
        assert table.metadata["populationCost"] == 3.0
        err = capsys.readouterr().err
        assert "rate fit skipped" in err or "fitted slope" in err

    def test_rerun_is_byte_identical(self, tmp_path):
        args = ["bench", "--setting", "cube:1:2", "--cost", "l1",
                "--estimator", "two-sample", "--n-grid", "4,8,16", "--reps", "3",
                "--seed", "11", "--threads", "2", "--out"]
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        assert cli.main(args + [str(a)]) == 0
        assert cli.main(args + [str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_grid_row_count_for_power_range(self, tmp_path):
        out = tmp_path / "semi.csv"
        code = cli.main([
            "bench", "--setting", "semidiscrete:2:1:4", "--cost", "l1",
            "--estimator", "one-sample-nu", "--n-grid", "2^2..2^4", "--reps", "2",
            "--seed", "0", "--oracle-m", "10000", "--threads", "1",
            "--out", str(out),
        ])
        assert code == 0
        assert len(ConvergenceTable.read_csv(out).rows) == 3

    def test_invalid_combination_exits_4(self, tmp_path):
        code = cli.main([
            "bench", "--setting", "cube:1:3", "--cost", "sql2",
            "--estimator", "one-sample-mu", "--n-grid", "4,8", "--reps", "2",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 4

    def test_unsupported_cost_for_sphere_exits_4(self, tmp_path):
        code = cli.main([
            "bench", "--setting", "sphere:1:2", "--cost", "pow-coord:1.5",
            "--estimator", "two-sample", "--n-grid", "4,8", "--reps", "2",
            "--oracle-m", "10000", "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 4

    def test_bad_setting_exits_2(self, tmp_path):
        code = cli.main([
            "bench", "--setting", "torus:1:2", "--n-grid", "4,8",
            "--out", str(tmp_path / "x.csv"),
        ])
        assert code == 2


class TestNGridParsing:
    def test_power_range(self):
        assert cli.parse_n_grid("2^6..2^10") == [64, 128, 256, 512, 1024]

    def test_comma_list(self):
        assert cli.parse_n_grid("5,10,20") == [5, 10, 20]

    def test_rejects_disorder(self):
        with pytest.raises(ValueError):
            cli.parse_n_grid("8,4")
        with pytest.raises(ValueError):
            cli.parse_n_grid("2^5..2^3")


class TestRatesCommand:
    def test_semiconcave_example(self, capsys):
        assert cli.main(["rates", "semiconcave", "d=10"]) == 0
        assert "n^(-2/d) = n^(-0.2)" in capsys.readouterr().out

    def test_general_critical_example(self, capsys):
        assert cli.main(["rates", "general", "k=2"]) == 0
        assert "n^(-1/2) log n" in capsys.readouterr().out

    def test_hoelder_fraction_example(self, capsys):
        assert cli.main(["rates", "hoelder", "a=0.5", "d=4"]) == 0
        assert "n^(-1/8)" in capsys.readouterr().out

    def test_semidiscrete(self, capsys):
        assert cli.main(["rates", "semidiscrete"]) == 0
        assert "n^(-1/2)" in capsys.readouterr().out

    def test_unknown_family_exits_2(self):
        assert cli.main(["rates", "sobolev", "d=3"]) == 2

    def test_missing_parameter_exits_2(self):
        assert cli.main(["rates", "general"]) == 2


class TestVerifyCommand:
    def test_ctransform_suite_passes(self, capsys):
        assert cli.main(["verify", "--suite", "ctransform", "--trials", "200",
                         "--seed", "1"]) == 0
        assert "passed" in capsys.readouterr().out

    def test_all_suites_pass_quickly(self):
        assert cli.main(["verify", "--suite", "all", "--trials", "25",
                         "--seed", "2"]) == 0

    def test_unknown_suite_exits_2(self):
        assert cli.main(["verify", "--suite", "nonsense"]) == 2

    def test_planted_bug_is_detected(self, capsys, monkeypatch):
        import otlab.ctransform as ct

        real = ct.contraction_gap
        monkeypatch.setattr(ct, "contraction_gap",
                            lambda f1, f2, C: -real(f1, f2, C) - 1e-6)
        code = cli.main(["verify", "--suite", "ctransform", "--trials", "50",
                         "--seed", "3"])
        assert code == 5
        assert "counterexample" in capsys.readouterr().err
