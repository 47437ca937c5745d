"""Gaussian-process surrogate: kernel values, interpolation, uncertainty,
noise-ladder behavior, size cap, persistence."""
import numpy as np
import pytest
from scipy import linalg

from surroforge.dataset import Dataset
from surroforge.envs import make_env
from surroforge.sampling import build_generative_dataset, generative_plan
from surroforge.surrogates import GPConfig, load_model
from surroforge.surrogates.gp import (MAX_GP_ROWS, GPSurrogate,
                                      cholesky_with_ladder, se_kernel)


def mc_dataset(k, seed=0):
    env = make_env("mountaincar")
    return build_generative_dataset(
        env, generative_plan(env, "lhs", k, seed=seed), sampler_id="lhs")


def sin_dataset(n=20):
    x = np.linspace(0.0, np.pi, n)
    states = x[:, None]
    actions = np.zeros((n, 1))
    next_states = (x + np.sin(x))[:, None]
    return Dataset(states, actions, next_states, np.zeros(n),
                   np.zeros(n, dtype=bool),
                   {"env": "synthetic", "sampler_id": "grid", "seed": 0})


def test_config_validation():
    with pytest.raises(ValueError):
        GPConfig(length_scale=(0.0,))
    with pytest.raises(ValueError):
        GPConfig(signal_variance=0.0)
    with pytest.raises(ValueError):
        GPConfig(noise_variance=-1.0)
    with pytest.raises(ValueError):
        GPConfig(length_scale=(1.0, 2.0)).scales_for(3)
    assert np.array_equal(GPConfig(length_scale=2.0).scales_for(3),
                          [2.0, 2.0, 2.0])


def test_se_kernel_values():
    A = np.array([[0.0, 0.0], [1.0, 0.0]])
    B = np.array([[1.0, 0.0]])
    K = se_kernel(A, B, np.array([1.0, 1.0]), 2.0)
    assert K[0, 0] == pytest.approx(2.0 * np.exp(-0.5))
    assert K[1, 0] == pytest.approx(2.0)
    # anisotropic scales divide per dimension
    K2 = se_kernel(A, B, np.array([2.0, 1.0]), 1.0)
    assert K2[0, 0] == pytest.approx(np.exp(-0.5 * 0.25))
    full = se_kernel(A, A, np.array([1.0, 1.0]), 3.0)
    assert np.allclose(full, full.T)
    assert np.allclose(np.diag(full), 3.0)


def test_interpolates_training_points():
    data = mc_dataset(20, seed=0)  # 60 transitions
    model = GPSurrogate().fit(data)
    pred = model.predict(data.states, data.actions)
    worst = np.max(np.abs(pred - data.next_states))
    assert worst <= 1e-6, f"worst interpolation error {worst}"


def test_predictive_std_grows_away_from_data():
    data = mc_dataset(20, seed=1)
    model = GPSurrogate().fit(data)
    at_train = model.predict_std(data.states[:5], data.actions[:5])
    far = model.predict_std(np.array([[-1.2, 0.07]]), np.array([[2.0]]))
    assert np.all(at_train >= 0.0)
    assert np.max(at_train) < np.min(far)


def test_sin_regression_rmse():
    model = GPSurrogate().fit(sin_dataset())
    grid = np.linspace(0.0, np.pi, 200)[:, None]
    pred = model.predict(grid, np.zeros((200, 1)))
    truth = grid[:, 0] + np.sin(grid[:, 0])
    rmse = np.sqrt(np.mean((pred[:, 0] - truth) ** 2))
    assert rmse <= 0.05, f"rmse {rmse}"


def test_noise_ladder_escalates_until_positive_definite():
    K = np.diag([1.0, -1e-6])
    L, noise = cholesky_with_ladder(K, 1e-8)
    assert noise == pytest.approx(1e-5)
    assert np.allclose(L @ L.T, K + noise * np.eye(2))
    assert np.allclose(L, np.tril(L))
    # a healthy matrix keeps the requested floor
    _, noise0 = cholesky_with_ladder(np.eye(3), 1e-8)
    assert noise0 == pytest.approx(1e-8)


def test_noise_ladder_gives_up():
    with pytest.raises(RuntimeError, match="not positive definite"):
        cholesky_with_ladder(np.diag([1.0, -1.0]), 1e-8)


def test_row_cap():
    n = MAX_GP_ROWS + 1
    rng = np.random.default_rng(0)
    states = rng.uniform(-1, 1, (n, 2))
    data = Dataset(states, np.zeros((n, 1)), states, np.zeros(n),
                   np.zeros(n, dtype=bool),
                   {"env": "synthetic", "sampler_id": "big", "seed": 0})
    with pytest.raises(ValueError, match="at most 5000"):
        GPSurrogate().fit(data)


def test_save_load_round_trip(tmp_path):
    data = mc_dataset(10, seed=2)
    model = GPSurrogate(GPConfig(length_scale=(0.7,))).fit(data)
    path = model.save(tmp_path / "gp.json")
    loaded = load_model(path)
    assert isinstance(loaded, GPSurrogate)
    assert loaded.config == model.config
    query = data.states[:9], data.actions[:9]
    assert np.array_equal(loaded.predict(*query), model.predict(*query))
    assert np.array_equal(loaded.predict_std(*query), model.predict_std(*query))
    assert loaded.noise_used == model.noise_used


def test_minimum_row_count():
    data = mc_dataset(10, seed=0).subset(np.array([0]))
    with pytest.raises(ValueError, match="at least 2"):
        GPSurrogate().fit(data)


def test_predict_std_shapes():
    data = mc_dataset(10, seed=3)
    model = GPSurrogate().fit(data)
    single = model.predict_std(data.states[0], data.actions[0])
    assert single.shape == (2,)
    batch = model.predict_std(data.states[:4], data.actions[:4])
    assert batch.shape == (4, 2)
    with pytest.raises(ValueError, match="input dim"):
        model.predict_std(np.zeros((2, 5)), np.zeros((2, 1)))
