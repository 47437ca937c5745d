"""Uncertainty-driven dataset builder: budget accounting, stop reasons,
determinism, faithful transitions."""
import numpy as np
import pytest

from surroforge.envs import make_env
from surroforge.surrogates import ALConfig, GPConfig, kriging_active_learning
from surroforge.surrogates.gp import GPSurrogate

TINY = ALConfig(pool_size=128, max_points_per_epoch=50, std_threshold=0.01,
                epochs=3, initial_points=16)


def test_config_validation():
    with pytest.raises(ValueError):
        ALConfig(pool_size=0)
    with pytest.raises(ValueError):
        ALConfig(max_points_per_epoch=0)
    with pytest.raises(ValueError):
        ALConfig(epochs=0)
    with pytest.raises(ValueError):
        ALConfig(initial_points=0)
    with pytest.raises(ValueError):
        ALConfig(std_threshold=0.0)


def test_budget_and_meta_accounting():
    model, data = kriging_active_learning("mountaincar", TINY, seed=0)
    assert isinstance(model, GPSurrogate)
    epochs = data.meta["epochs"]
    assert len(epochs) == TINY.epochs
    total_added = 0
    for entry in epochs:
        assert set(entry) == {"added", "stop", "max_std"}
        assert 0 <= entry["added"] <= TINY.max_points_per_epoch
        assert entry["stop"] in ("threshold", "cap", "exhausted")
        assert entry["max_std"] >= 0.0
        total_added += entry["added"]
    assert len(data) == TINY.initial_points + total_added
    assert len(data) <= TINY.initial_points + TINY.epochs * TINY.max_points_per_epoch
    assert data.meta["sampler_id"] == "al"
    assert data.meta["seed"] == 0
    assert data.meta["params"]["std_threshold"] == TINY.std_threshold
    assert set(np.unique(data.actions)) <= {0.0, 1.0, 2.0}


def test_transitions_replay_exactly():
    _, data = kriging_active_learning("mountaincar", TINY, seed=1)
    env = make_env("mountaincar")
    for i in range(len(data)):
        env.set_state(data.states[i])
        assert np.array_equal(env.state, data.states[i])
        result = env.step(int(data.actions[i, 0]))
        assert np.array_equal(result.next_state, data.next_states[i])
        assert result.reward == data.rewards[i]
        assert result.done == bool(data.dones[i])


def test_deterministic_per_seed():
    _, a = kriging_active_learning("mountaincar", TINY, seed=7)
    _, b = kriging_active_learning("mountaincar", TINY, seed=7)
    _, c = kriging_active_learning("mountaincar", TINY, seed=8)
    assert np.array_equal(a.states, b.states)
    assert np.array_equal(a.next_states, b.next_states)
    assert a.meta["epochs"] == b.meta["epochs"]
    assert not np.array_equal(a.states, c.states)


def test_threshold_stop_adds_nothing():
    cfg = ALConfig(pool_size=32, max_points_per_epoch=10, std_threshold=1e6,
                   epochs=2, initial_points=8)
    _, data = kriging_active_learning("mountaincar", cfg, seed=0)
    assert len(data) == cfg.initial_points
    for entry in data.meta["epochs"]:
        assert entry["added"] == 0
        assert entry["stop"] == "threshold"


def test_cap_stop_uses_full_budget():
    cfg = ALConfig(pool_size=64, max_points_per_epoch=10, std_threshold=1e-12,
                   epochs=1, initial_points=8)
    _, data = kriging_active_learning("mountaincar", cfg, seed=0)
    entry = data.meta["epochs"][0]
    assert entry["added"] == cfg.max_points_per_epoch
    assert entry["stop"] == "cap"
    assert len(data) == 18


def test_exhausted_stop_consumes_pool():
    # 2 pooled states x 3 actions = 6 candidates, budget 50, threshold ~0
    cfg = ALConfig(pool_size=2, max_points_per_epoch=50, std_threshold=1e-300,
                   epochs=1, initial_points=8)
    _, data = kriging_active_learning("mountaincar", cfg, seed=0)
    entry = data.meta["epochs"][0]
    assert entry["added"] == 6
    assert entry["stop"] == "exhausted"
    assert entry["max_std"] == 0.0


def test_continuous_actions_sampled_jointly():
    cfg = ALConfig(pool_size=32, max_points_per_epoch=15, std_threshold=0.01,
                   epochs=2, initial_points=12)
    model, data = kriging_active_learning(
        "pendulum", cfg, GPConfig(noise_variance=1e-6), seed=0)
    assert data.action_dim == 1
    assert data.state_dim == 3
    assert np.all(np.abs(data.actions) <= 2.0)
    assert model.predict(data.states[0], data.actions[0]).shape == (3,)
