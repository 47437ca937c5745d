"""Command-line interface: exit codes, dataset generation, policy training,
experiment runs, report rendering, reproducible outputs."""
import json
import logging

import numpy as np
import pytest

from surroforge.cli import main
from surroforge.policies import MaxEntropyPolicy

TINY_MEA = """
[mea]
horizon = 20
episodes_per_eval = 2
population = 6
elite_fraction = 0.34
iterations = 1
k_neighbors = 3
"""


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("SURROFORGE_CACHE", str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)


def write_config(tmp_path, text, name="exp.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def micro_config(tmp_path):
    return write_config(tmp_path, f"""
[experiment]
env = "mountaincar"
samplers = ["lhs", "ra"]
samples = 150
families = ["gbt"]
seeds = [0, 1]
out_dir = "{tmp_path / 'results'}"

[gbt]
trees = 3
max_depth = 3
""")


def test_usage_errors_exit_1(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["gen-dataset", "--sampler", "bogus"])
    assert exc.value.code == 1
    assert "error" in capsys.readouterr().err


def test_help_exits_0():
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0


def test_bad_config_exits_1(tmp_path):
    cfg = write_config(tmp_path, '[experiment]\nenv = "marscar"\n')
    assert main(["run-experiment", "--config", cfg]) == 1
    assert main(["gen-dataset", "--config", cfg, "--sampler", "lhs"]) == 1


def test_report_without_results_exits_1(tmp_path):
    cfg = write_config(tmp_path, f'[experiment]\nout_dir = "{tmp_path / "empty"}"\n')
    assert main(["report", "--config", cfg]) == 1


def test_corrupt_results_exits_2(tmp_path):
    out = tmp_path / "broken"
    out.mkdir()
    (out / "results.json").write_text("{not json")
    cfg = write_config(tmp_path, f'[experiment]\nout_dir = "{out}"\n')
    assert main(["report", "--config", cfg]) == 2


def test_failed_fits_exit_2(tmp_path):
    cfg = write_config(tmp_path, f"""
[experiment]
env = "mountaincar"
samplers = ["lhs"]
samples = 150
families = ["mlp"]
seeds = [0]
out_dir = "{tmp_path / 'results'}"

[mlp]
layers = [4]
learning_rate = 1e200
epochs = 1
""")
    with np.errstate(over="ignore", invalid="ignore"):
        assert main(["run-experiment", "--config", cfg]) == 2
    results = json.loads((tmp_path / "results" / "results.json").read_text())
    assert results["ranking"] is None
    assert results["groups"] is None


def test_gen_dataset_discrete_pairs_every_action(tmp_path, capsys):
    cfg = write_config(tmp_path, f"""
[experiment]
env = "mountaincar"
samples = 1000
out_dir = "{tmp_path / 'out'}"
""")
    assert main(["gen-dataset", "--config", cfg, "--sampler", "lhs"]) == 0
    out = capsys.readouterr().out
    assert "wrote 3000 transitions" in out
    path = tmp_path / "out" / "mountaincar-lhs-k3000-s0.csv"
    assert path.exists()
    assert len(path.read_text().splitlines()) == 3001  # header + k * 3 actions

    first = path.read_bytes()
    assert main(["gen-dataset", "--config", cfg, "--sampler", "lhs"]) == 0
    assert path.read_bytes() == first


def test_gen_dataset_agent_count_is_exact(tmp_path):
    cfg = write_config(tmp_path, f"""
[experiment]
env = "cartpole"
samples = 1000
out_dir = "{tmp_path / 'out'}"
""")
    assert main(["gen-dataset", "--config", cfg, "--sampler", "ra"]) == 0
    path = tmp_path / "out" / "cartpole-ra-k1000-s0.csv"
    assert len(path.read_text().splitlines()) == 1001


def test_train_mea_round_trip(tmp_path, capsys):
    cfg = write_config(tmp_path, f"""
[experiment]
env = "mountaincar"
out_dir = "{tmp_path / 'out'}"
{TINY_MEA}""")
    assert main(["train-mea", "--config", cfg]) == 0
    assert "entropy" in capsys.readouterr().out
    path = tmp_path / "out" / "mea-mountaincar-s0.json"
    policy = MaxEntropyPolicy.load(path)
    assert policy.config["iterations"] == 1
    action = policy.act(np.array([-0.5, 0.0]), np.random.default_rng(0))
    assert action in (0, 1, 2)

    first = path.read_bytes()
    assert main(["train-mea", "--config", cfg]) == 0  # cache hit retrains nothing
    assert path.read_bytes() == first


def test_run_experiment_and_report(tmp_path, capsys, caplog):
    cfg = micro_config(tmp_path)
    results_dir = tmp_path / "results"
    assert main(["run-experiment", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "Environment: mountaincar" in out
    assert "Averaged R² by training sampler" in out
    assert "Group summary" in out
    for name in ("matrix_gbt.csv", "groups.csv", "ranking.csv", "results.json",
                 "heatmap_gbt.svg", "scatter_ra.csv"):
        assert (results_dir / name).exists(), name

    matrix_bytes = (results_dir / "matrix_gbt.csv").read_bytes()
    results_bytes = (results_dir / "results.json").read_bytes()
    with caplog.at_level(logging.INFO, logger="surroforge.cache"):
        assert main(["run-experiment", "--config", cfg]) == 0
    assert any("cache hit" in rec.message for rec in caplog.records)
    assert (results_dir / "matrix_gbt.csv").read_bytes() == matrix_bytes
    assert (results_dir / "results.json").read_bytes() == results_bytes
    capsys.readouterr()

    assert main(["report", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "Averaged R² by training sampler" in out
    assert "heatmap_gbt.svg" in out
    assert (results_dir / "scatter_ra.svg").exists()
