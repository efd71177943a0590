import subprocess
import sys

import pytest

from bigap.cli import main, parse_config, ConfigError
from bigap.harness import strip_timing


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line)


class TestSample:
    def test_complete(self, tmp_path, capsys):
        out = tmp_path / "g.txt"
        assert main(["sample", "--n1", "2", "--n2", "3", "--p", "1.0", "--seed", "7", "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "2 3 6" and len(lines) == 7

    def test_empty(self, tmp_path):
        out = tmp_path / "g.txt"
        assert main(["sample", "--n1", "4", "--n2", "5", "--p", "0", "--out", str(out)]) == 0
        assert out.read_text() == "4 5 0\n"

    def test_repeatable(self, tmp_path):
        args = ["sample", "--n1", "30", "--n2", "40", "--p", "0.2", "--seed", "3", "--out"]
        main(args + [str(tmp_path / "a.txt")])
        main(args + [str(tmp_path / "b.txt")])
        assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()

    def test_bad_flag(self, tmp_path):
        assert main(["sample", "--n1", "2", "--bogus", "1", "--out", "x"]) == 2

    def test_bad_p(self, tmp_path):
        assert main(["sample", "--n1", "2", "--n2", "2", "--p", "3", "--out", str(tmp_path / "x")]) == 2

    def test_io_error(self, tmp_path):
        assert main(["sample", "--n1", "2", "--n2", "2", "--p", "1", "--out", str(tmp_path / "no" / "x")]) == 1


class TestSpectrum:
    def test_k23(self, tmp_path, capsys):
        f = tmp_path / "k23.txt"
        f.write_text("2 3 6\n0 0\n0 1\n0 2\n1 0\n1 1\n1 2\n")
        assert main(["spectrum", str(f)]) == 0
        out = kv(capsys.readouterr().out)
        assert abs(float(out["mu1"]) - 2.449490) < 1e-6
        assert out["mu_plus_certified"] == "true"
        assert {"mu1", "mu2", "mu_min", "mu_abs", "mu_plus", "residual"} <= set(out)

    def test_empty(self, tmp_path, capsys):
        f = tmp_path / "e.txt"
        f.write_text("3 3 0\n")
        assert main(["spectrum", str(f)]) == 0
        out = kv(capsys.readouterr().out)
        assert float(out["mu1"]) == 0 and float(out["mu2"]) == 0 and float(out["mu_min"]) == 0

    def test_single_edge(self, tmp_path, capsys):
        f = tmp_path / "s.txt"
        f.write_text("1 1 1\n0 0\n")
        assert main(["spectrum", str(f), "--mode", "both"]) == 0
        out = kv(capsys.readouterr().out)
        assert float(out["mu1"]) == pytest.approx(1) and float(out["mu_min"]) == pytest.approx(-1)
        assert float(out["norm_mu1"]) == pytest.approx(1)

    def test_malformed_reports_line(self, tmp_path, capsys):
        f = tmp_path / "bad.txt"
        f.write_text("2 2 2\n0 0\n1 9\n")
        assert main(["spectrum", str(f)]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["spectrum", str(tmp_path / "none.txt")]) == 1

    def test_solver_failure_exit_3(self, tmp_path, capsys):
        out = tmp_path / "g.txt"
        main(["sample", "--n1", "300", "--n2", "300", "--p", "0.05", "--out", str(out)])
        assert main(["spectrum", str(out), "--tol", "1e-30"]) == 3


class TestVerify:
    def test_default_case(self, capsys):
        assert main(["verify", "--n1", "20", "--n2", "20", "--p", "0.3", "--trials", "25", "--seed", "1"]) == 0
        out = kv(capsys.readouterr().out)
        for check in ("blocks", "weyl", "negation", "symmetry", "k_residual"):
            assert out[check] == "25/25"

    def test_complete(self, capsys):
        assert main(["verify", "--n1", "5", "--n2", "6", "--p", "1.0", "--trials", "2"]) == 0
        assert float(kv(capsys.readouterr().out)["k_residual_max"]) == 0

    def test_over_cap(self, capsys):
        assert main(["verify", "--n1", "800", "--n2", "800", "--p", "0.1"]) == 2
        assert "cap" in capsys.readouterr().err


class TestExperiment:
    def test_flags(self, tmp_path, capsys):
        out = tmp_path / "e.csv"
        rc = main(["experiment", "--n1", "300", "--n2", "300", "--p", "0.1", "--trials", "50",
                   "--seed", "11", "--workers", "1", "--out", str(out)])
        assert rc == 0
        s = kv(capsys.readouterr().out)
        assert s["satisfied_fraction"] == "1" and s["excluded"] == "0"

    def test_zero_trials(self, tmp_path, capsys):
        rc = main(["experiment", "--n1", "10", "--n2", "10", "--p", "0.1", "--trials", "0", "--out", str(tmp_path / "e.csv")])
        assert rc == 2

    def test_config_file_and_rerun(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# small run\nn1 = 30\nn2 = 40\np = 0.3   # density\ntrials = 6\nseed = 5\nmode = both\n")
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["experiment", "--config", str(cfg), "--workers", "1", "--out", str(a)]) == 0
        assert main(["experiment", "--config", str(cfg), "--workers", "2", "--out", str(b)]) == 0
        assert strip_timing(a.read_text()) == strip_timing(b.read_text())

    def test_config_error_names_line(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("n1 = 10\nn2 = ten\n")
        assert main(["experiment", "--config", str(cfg), "--out", str(tmp_path / "x.csv")]) == 2
        assert "line 2" in capsys.readouterr().err

    def test_workers_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("BIGAP_WORKERS", "2")
        assert main(["experiment", "--n1", "10", "--n2", "12", "--p", "0.5", "--trials", "4",
                     "--out", str(tmp_path / "e.csv")]) == 0


def test_parse_config():
    assert parse_config("n1 = 3\n\n# x\nmaster_seed=9\n") == {"n1": 3, "seed": 9}
    with pytest.raises(ConfigError) as info:
        parse_config("n1 = 3\nwhat = 1\n")
    assert info.value.lineno == 2
    with pytest.raises(ConfigError):
        parse_config("n1\n")


def test_selftest(capsys):
    assert main(["selftest"]) == 0


def test_unknown_subcommand():
    assert main(["frobnicate"]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "bigap", "selftest"], capture_output=True, text=True)
    assert r.returncode == 0 and "backend=" in r.stdout
