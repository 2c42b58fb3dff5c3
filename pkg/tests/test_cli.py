"""Command-line front end: subcommands, CSV outputs, and exit codes."""

import csv
import os
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from seqbound import cli
from seqbound.cli import BOUNDS_HEADER, MATRIX_HEADER, SWEEP_HEADER
from seqbound.report import VERIFICATION_HEADER
from seqbound.sampling import TAIL_HEADER

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
MARKOV = str(CONFIG_DIR / "markov.yaml")
WINDOW_SMALL = str(CONFIG_DIR / "window_small.yaml")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("CONFIG", "OUT", "SEED", "BUDGET", "T", "N_SAMPLES"):
        monkeypatch.delenv("SEQBOUND_" + name, raising=False)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write_yaml(path, doc):
    path.write_text(yaml.safe_dump(doc))
    return str(path)


def small_markov_doc(**extra):
    doc = {
        "scenario": {
            "family": "markov",
            "horizon": 3,
            "alphabet": 2,
            "markov": {"transition": [[0.9, 0.1], [0.2, 0.8]], "init": [1.0, 0.0]},
        },
        "target": {"name": "sum_symbols"},
    }
    doc.update(extra)
    return doc


# ============================================================
# Subcommands: happy paths
# ============================================================


class TestSubcommands:
    def test_describe(self, capsys):
        assert cli.main(["describe", "--config", MARKOV]) == 0
        out = capsys.readouterr().out
        assert "scenario: markov" in out
        assert "horizon: 8" in out
        assert "seed: 20260816" in out
        assert "dobrushin alpha: 0.7" in out
        assert "  step 1 reads -" in out
        assert "  step 2 reads 1" in out

    def test_describe_window_reports_calibration(self, capsys):
        assert cli.main(["describe", "--config", WINDOW_SMALL]) == 0
        out = capsys.readouterr().out
        assert "calibrated beta:" in out
        assert "achieved alpha: 0.8" in out

    def test_matrix(self, tmp_path, capsys):
        assert cli.main(["matrix", "--config", MARKOV, "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "||H||_1 = 0.7" in out
        assert "kappa = 0.147885065137" in out
        influence = read_rows(tmp_path / "influence.csv")
        assert influence[0] == list(MATRIX_HEADER)
        assert len(influence) == 1 + 7  # superdiagonal of an 8-step chain
        assert all(abs(float(row[2]) - 0.7) < 1e-9 for row in influence[1:])
        resolvent = read_rows(tmp_path / "resolvent.csv")
        assert len(resolvent) == 1 + 36  # dense upper triangle with diagonal

    def test_bounds(self, tmp_path, capsys):
        assert cli.main(["bounds", "--config", MARKOV, "--out", str(tmp_path)]) == 0
        rows = read_rows(tmp_path / "bounds.csv")
        assert rows[0] == list(BOUNDS_HEADER)
        by_name = {}
        for row in rows[1:]:
            by_name.setdefault(row[0], []).append(row)
        assert {"exact", "spectral", "scalar_collapse", "markov", "uniform_decay",
                "samson", "kontorovich"} <= set(by_name)
        assert all(row[2] == "1" for row in by_name["exact"])
        assert all(row[2] == "0" for row in by_name["kontorovich"])  # alpha 0.7 diverges
        assert len(by_name["exact"]) == 20  # default threshold grid
        assert len(by_name["kontorovich"]) == 1
        out = capsys.readouterr().out
        assert "exact" in out and "wrote" in out

    def test_verify(self, tmp_path, capsys):
        code = cli.main(
            ["verify", "--config", MARKOV, "--out", str(tmp_path), "--n-samples", "20000"]
        )
        assert code == 0
        out = capsys.readouterr().out
        for suite in ("oscillation", "recursion", "coupling-marginals", "tail-domination"):
            assert f"suite {suite}:" in out
        verification = read_rows(tmp_path / "verification.csv")
        assert verification[0] == list(VERIFICATION_HEADER)
        assert all(row[6] == "1" for row in verification[1:])
        tails = read_rows(tmp_path / "tails.csv")
        assert tails[0] == list(TAIL_HEADER)
        assert "tightness exact:" in out

    def test_sweep(self, tmp_path, capsys):
        config = write_yaml(
            tmp_path / "sweep.yaml",
            {
                "scenario": {
                    "family": "window",
                    "horizon": 8,
                    "alphabet": 2,
                    "window": {"width": 3, "target_alpha": 0.5},
                },
                "target": {"name": "terminal_indicator", "symbol": 1},
                "sweep": {"horizons": [4, 6, 8]},
            },
        )
        assert cli.main(["sweep", "--config", config, "--out", str(tmp_path)]) == 0
        rows = read_rows(tmp_path / "sweep.csv")
        assert rows[0] == list(SWEEP_HEADER)
        assert [row[0] for row in rows[1:]] == ["4", "6", "8"]
        for row in rows[1:]:
            assert 0.0 < float(row[1]) <= float(row[2])  # exact <= scalar collapse
            assert abs(float(row[3]) - 4.0) < 1e-9  # 1 / (1 - 0.5)^2
        assert "N=8:" in capsys.readouterr().out

    def test_sweep_requires_window_family(self, tmp_path):
        config = write_yaml(
            tmp_path / "markov_sweep.yaml", small_markov_doc(sweep={"horizons": [3, 4]})
        )
        assert cli.main(["sweep", "--config", config, "--out", str(tmp_path)]) == 2


# ============================================================
# Exit codes
# ============================================================


class TestExitCodes:
    def test_missing_config_is_an_argument_error(self, capsys):
        assert cli.main(["describe"]) == 2
        assert "config" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        config = write_yaml(tmp_path / "bad.yaml", small_markov_doc(bogus={"x": 1}))
        assert cli.main(["describe", "--config", config]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_unreadable_config_path(self, tmp_path):
        assert cli.main(["describe", "--config", str(tmp_path / "absent.yaml")]) == 2

    def test_budget_exhaustion(self, capsys):
        assert cli.main(["matrix", "--config", MARKOV, "--budget", "1"]) == 3
        assert "budget" in capsys.readouterr().err

    def test_calibration_failure(self, tmp_path, capsys):
        config = write_yaml(
            tmp_path / "degenerate.yaml",
            {
                "scenario": {
                    "family": "window",
                    "horizon": 1,
                    "alphabet": 2,
                    "window": {"width": 3, "target_alpha": 0.5},
                },
                "target": {"name": "sum_symbols"},
            },
        )
        assert cli.main(["describe", "--config", config]) == 4
        assert "influence" in capsys.readouterr().err

    def test_verification_failure(self, tmp_path, capsys):
        config = write_yaml(
            tmp_path / "undersized.yaml",
            small_markov_doc(
                sensitivity={"declared": [0.25, 0.25, 0.25]},
                run={"n_samples": 4000, "seed": 5},
            ),
        )
        assert cli.main(["verify", "--config", config, "--out", str(tmp_path)]) == 1
        out = capsys.readouterr().out
        assert "failing checks:" in out
        assert "sensitivity_declared" in out

    def test_unknown_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["frobnicate"])
        assert err.value.code == 2

    def test_bad_flag_value_exits_two(self):
        with pytest.raises(SystemExit) as err:
            cli.main(["describe", "--config", MARKOV, "--seed", "-5"])
        assert err.value.code == 2


# ============================================================
# Flag > environment > config resolution
# ============================================================


class TestEnvResolution:
    def test_env_supplies_config_and_seed(self, monkeypatch, capsys):
        monkeypatch.setenv("SEQBOUND_CONFIG", MARKOV)
        monkeypatch.setenv("SEQBOUND_SEED", "42")
        assert cli.main(["describe"]) == 0
        assert "seed: 42" in capsys.readouterr().out

    def test_flag_beats_env(self, monkeypatch, capsys):
        monkeypatch.setenv("SEQBOUND_SEED", "42")
        assert cli.main(["describe", "--config", MARKOV, "--seed", "7"]) == 0
        assert "seed: 7" in capsys.readouterr().out

    def test_env_values_are_validated(self, monkeypatch, capsys):
        monkeypatch.setenv("SEQBOUND_BUDGET", "zero")
        assert cli.main(["describe", "--config", MARKOV]) == 2
        assert "SEQBOUND_BUDGET" in capsys.readouterr().err


# ============================================================
# Module entry point
# ============================================================


class TestModuleEntry:
    def test_python_dash_m(self):
        env = {k: v for k, v in os.environ.items() if not k.startswith("SEQBOUND_")}
        result = subprocess.run(
            [sys.executable, "-m", "seqbound", "describe", "--config", MARKOV],
            capture_output=True,
            text=True,
            env=env,
        )
        assert result.returncode == 0
        assert "scenario: markov" in result.stdout
