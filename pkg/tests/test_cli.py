import numpy as np
import pytest

from liesync import cli
from liesync.groups import IntegrityError

MINI_CFG = """
group = SO3
agents = 2
t_final = 0.5
omega = 5
seed = 3
"""


@pytest.fixture
def mini_config(tmp_path):
    path = tmp_path / "mini.cfg"
    path.write_text(MINI_CFG)
    return path


def run_cli(*argv):
    return cli.main(list(argv))


# --- simulate ----------------------------------------------------------------

def test_simulate_writes_csv_and_summary(mini_config, tmp_path, capsys):
    out = tmp_path / "run.csv"
    code = run_cli("simulate", "--config", str(mini_config), "--out", str(out))
    captured = capsys.readouterr().out
    assert code == 0
    assert out.exists()
    assert "final_J=" in captured
    assert "ultimate_bound=" in captured
    assert "initial_J=" in captured


def test_simulate_missing_config_exits_one(tmp_path, capsys):
    code = run_cli("simulate", "--config", str(tmp_path / "absent.cfg"),
                   "--out", str(tmp_path / "x.csv"))
    assert code == 1
    assert "config error" in capsys.readouterr().err


def test_simulate_bad_config_exits_one(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("group = SO3\nagents = 2\nt_final = 1\nmultipliers = 1 2 3 4 5 6\nseed = 0\n")
    code = run_cli("simulate", "--config", str(bad), "--out", str(tmp_path / "x.csv"))
    assert code == 1


def test_simulate_mode_and_omega_flags_override(mini_config, tmp_path, capsys):
    out = tmp_path / "g.csv"
    code = run_cli("simulate", "--config", str(mini_config), "--out", str(out),
                   "--mode", "gradient", "--omega", "7")
    assert code == 0
    # gradient flow from a common random base: cost only decreases
    from liesync.experiment import read_csv
    record = read_csv(out)
    assert record.costs[-1] <= record.costs[0] + 1e-12


def test_simulate_integrity_error_exits_two(mini_config, tmp_path, monkeypatch, capsys):
    def explode(cfg):
        raise IntegrityError("synthetic drift")
    monkeypatch.setattr(cli, "run", explode)
    code = run_cli("simulate", "--config", str(mini_config),
                   "--out", str(tmp_path / "x.csv"))
    assert code == 2
    assert "integrity" in capsys.readouterr().err


def test_unknown_flag_exits_one(mini_config, tmp_path, capsys):
    code = run_cli("simulate", "--config", str(mini_config),
                   "--out", str(tmp_path / "x.csv"), "--frobnicate")
    assert code == 1


def test_simulate_benchmark_fixture_converges(fixtures_dir, tmp_path, capsys):
    out = tmp_path / "benchmark.csv"
    code = run_cli("simulate", "--config", str(fixtures_dir / "so3_three_agent.cfg"),
                   "--out", str(out))
    captured = capsys.readouterr().out
    assert code == 0
    values = dict(line.split("=", 1) for line in captured.strip().splitlines())
    assert float(values["final_J"]) < 0.1 * float(values["initial_J"])


def test_gradient_flow_subcommand(mini_config, tmp_path, capsys):
    out = tmp_path / "grad.csv"
    code = run_cli("gradient-flow", "--config", str(mini_config), "--out", str(out))
    assert code == 0
    from liesync.experiment import read_csv
    record = read_csv(out)
    assert np.all(np.diff(record.costs) <= 1e-12)


# --- freqs ---------------------------------------------------------------------

def test_freqs_count_one(capsys):
    assert run_cli("freqs", "--count", "1") == 0
    assert capsys.readouterr().out.strip() == "1"


def test_freqs_count_three(capsys):
    assert run_cli("freqs", "--count", "3") == 0
    assert capsys.readouterr().out.strip() == "1 3 5"


def test_freqs_validate_rejects_double(capsys):
    code = run_cli("freqs", "--validate", "1 2")
    assert code == 3
    assert "2*1" in capsys.readouterr().out


def test_freqs_validate_accepts(capsys):
    assert run_cli("freqs", "--validate", "3 5 7") == 0
    assert capsys.readouterr().out.strip() == "valid"


def test_freqs_malformed_list(capsys):
    assert run_cli("freqs", "--validate", "3 five 7") == 1


def test_freqs_requires_exactly_one_flag(capsys):
    assert run_cli("freqs") == 1
    assert run_cli("freqs", "--count", "2", "--validate", "3 5") == 1


def test_freqs_bad_count(capsys):
    assert run_cli("freqs", "--count", "0") == 1


# --- average-check ---------------------------------------------------------------

def test_average_check_passes_on_halving(mini_config, capsys):
    code = run_cli("average-check", "--config", str(mini_config),
                   "--omega", "1", "--amplitudes", "0.2 0.1")
    captured = capsys.readouterr().out
    assert code == 0
    assert "ratio=" in captured and "ok=yes" in captured


def test_average_check_needs_two_levels(mini_config, capsys):
    assert run_cli("average-check", "--config", str(mini_config),
                   "--amplitudes", "0.2") == 1


def test_average_check_rejects_increasing_levels(mini_config, capsys):
    assert run_cli("average-check", "--config", str(mini_config),
                   "--amplitudes", "0.1 0.2") == 1


def test_average_check_rejects_nonpositive(mini_config, capsys):
    assert run_cli("average-check", "--config", str(mini_config),
                   "--amplitudes", "0.2 0") == 1


def test_average_check_property_failure_exits_four(mini_config, monkeypatch, capsys):
    # a zeroed reference derivative breaks the quartic residual scaling
    monkeypatch.setattr(cli, "directional_derivatives",
                        lambda net, cfg, eps=1e-5: np.zeros((2, 3)))
    code = run_cli("average-check", "--config", str(mini_config),
                   "--omega", "1", "--amplitudes", "0.2 0.1")
    assert code == 4
    assert "ok=no" in capsys.readouterr().out


def test_no_subcommand_exits_one(capsys):
    assert run_cli() == 1
