import filecmp
from pathlib import Path

from slotswap.cli import EXIT_CONFIG, EXIT_OK, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


BASE = ["--population", "12", "--runs", "2", "--max-days", "20", "--tail-days", "5", "--seed", "3"]


class TestValidation:
    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(capsys, "validate", "--config", "/nonexistent/sim.ini")
        assert code == EXIT_CONFIG
        assert "config not found: /nonexistent/sim.ini" in err

    def test_beta_zero_rejected(self, capsys):
        code, _, err = run_cli(capsys, "validate", "--beta", "0")
        assert code == EXIT_CONFIG
        assert "beta" in err

    def test_unknown_config_key(self, capsys, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text("[simulation]\nnot_a_key = 5\n")
        code, _, err = run_cli(capsys, "validate", "--config", str(cfg))
        assert code == EXIT_CONFIG
        assert "not_a_key" in err

    def test_unknown_curve_rejected(self, capsys):
        code, _, err = run_cli(capsys, "validate", "--curves", "mystery:1.0")
        assert code == EXIT_CONFIG
        assert "mystery" in err

    def test_valid_defaults(self, capsys):
        code, out, _ = run_cli(capsys, "validate", "--population", "96", "--beta", "1")
        assert code == EXIT_OK
        assert "config ok" in out
        assert "population = 96" in out

    def test_config_file_with_overrides(self, capsys, tmp_path):
        cfg = tmp_path / "sim.ini"
        cfg.write_text("[simulation]\npopulation = 24\nbeta = 2.0\n\n[curves]\nflat = 1.0\n")
        code, out, _ = run_cli(capsys, "validate", "--config", str(cfg), "--beta", "1")
        assert code == EXIT_OK
        assert "population = 24" in out
        assert "beta = 1.0" in out
        assert "overrides: beta=1" in out


class TestRunCommand:
    def test_run_twice_identical_artifacts(self, capsys, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        code1, *_ = run_cli(capsys, "run", *BASE, "--out", str(out1))
        code2, *_ = run_cli(capsys, "run", *BASE, "--out", str(out2))
        assert code1 == code2 == EXIT_OK
        for name in ("daily_000.csv", "runs.csv", "manifest.txt"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_printed_artifact_paths_exist(self, capsys, tmp_path):
        out = tmp_path / "r"
        code, stdout, _ = run_cli(capsys, "run", *BASE, "--out", str(out))
        assert code == EXIT_OK
        assert out.exists()
        assert (out / "runs.csv").exists()
        assert "outcome:" in stdout


class TestBatchCommand:
    def test_batch_summary_and_files(self, capsys, tmp_path):
        out = tmp_path / "batch"
        code, stdout, _ = run_cli(capsys, "batch", *BASE, "--out", str(out))
        assert code == EXIT_OK
        assert "runs:" in stdout
        assert (out / "batch.csv").exists()
        assert (out / "runs.csv").exists()
        assert (out / "manifest.txt").exists()
        assert len(list(out.glob("daily_*.csv"))) == 2

    def test_manifest_echoes_overrides(self, capsys, tmp_path):
        out = tmp_path / "batch"
        run_cli(capsys, "batch", *BASE, "--out", str(out))
        manifest = (out / "manifest.txt").read_text()
        assert "population = 12" in manifest
        assert "curve_hash_flat" in manifest
        assert "artifact_version" in manifest


class TestSweepCommand:
    def test_population_sweep(self, capsys, tmp_path):
        out = tmp_path / "sweep"
        code, stdout, _ = run_cli(
            capsys,
            "sweep",
            "--axis", "population",
            "--values", "12,24",
            "--runs", "2",
            "--max-days", "10",
            "--tail-days", "2",
            "--seed", "3",
            "--out", str(out),
        )
        assert code == EXIT_OK
        sweep = (out / "sweep.csv").read_text().splitlines()
        assert sweep[0].startswith("population,")
        assert len(sweep) == 3

    def test_bad_axis(self, capsys):
        code = main(["sweep", "--axis", "population", "--values", ""])
        assert code == EXIT_CONFIG


class TestOptimumCommand:
    def test_optimum_flat(self, capsys):
        code, stdout, _ = run_cli(
            capsys, "optimum", "--curve", "flat", "--population", "96", "--samples", "20",
            "--seed", "1",
        )
        assert code == EXIT_OK
        assert "mean optimum" in stdout
