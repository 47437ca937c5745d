"""Gaussian-process dataset builder driven by predictive uncertainty.

Each epoch draws a fresh Latin-hypercube candidate pool, then repeatedly
simulates the candidate with the largest predictive standard deviation and
appends it to the training set, until the pool's max std drops below the
threshold or the per-epoch budget is exhausted. The training set carries
over across epochs: the initial seed sample plus everything acquired so
far. Inputs are normalized by the environment bounds and targets by the
statistics of the initial sample, so the std threshold keeps fixed units
throughout the run.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ..dataset import Dataset
from ..envs import Continuous, make_env
from ..sampling import SamplePlan, lhs_sample
from .base import Normalizer, encode_inputs
from .gp import GPConfig, GPSurrogate, cholesky_with_ladder, se_kernel

log = logging.getLogger("surroforge.active_learning")


@dataclass(frozen=True)
class ALConfig:
    pool_size: int = 4096
    max_points_per_epoch: int = 300
    std_threshold: float = 0.01
    epochs: int = 3
    initial_points: int = 64

    def __post_init__(self):
        if min(self.pool_size, self.max_points_per_epoch, self.epochs,
               self.initial_points) < 1:
            raise ValueError("pool_size, max_points_per_epoch, epochs, "
                             "initial_points must be positive")
        if self.std_threshold <= 0:
            raise ValueError("std_threshold must be positive")


def _derived_seed(key):
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _input_bounds(spec):
    """Bounds of the encoded input space: state box plus action column(s)."""
    bounds = spec.bounds_array
    space = spec.action_space
    if isinstance(space, Continuous):
        return np.vstack([bounds, np.asarray(space.bounds, dtype=float)])
    return np.vstack([bounds, [[0.0, float(space.count - 1)]]])


def _simulate(env, state_point, action):
    """One transition from an injected state; returns the canonical start."""
    env.set_state(state_point)
    start = env.state
    result = env.step(action)
    return start, result


class _Acquirer:
    """Incremental GP posterior over a fixed candidate pool.

    Keeps the Cholesky factor in a preallocated buffer and updates pool
    variances with a rank-1 row per added point, so each acquisition costs
    O(n^2 + n * pool) instead of a full refit.
    """

    def __init__(self, X0, length_scales, signal_variance, noise_variance, capacity):
        self.ls = length_scales
        self.sf2 = signal_variance
        n0 = X0.shape[0]
        self.X = np.zeros((capacity, X0.shape[1]))
        self.X[:n0] = X0
        self.n = n0
        K = se_kernel(X0, X0, self.ls, self.sf2)
        L0, self.noise = cholesky_with_ladder(K, noise_variance)
        self.L = np.zeros((capacity, capacity))
        self.L[:n0, :n0] = L0
        self.V = None

    def start_pool(self, Xc):
        K_tc = se_kernel(self.X[:self.n], Xc, self.ls, self.sf2)
        self.V = np.zeros((self.X.shape[0], Xc.shape[0]))
        self.V[:self.n] = linalg.solve_triangular(
            self.L[:self.n, :self.n], K_tc, lower=True)
        return self.sf2 - np.sum(self.V[:self.n] ** 2, axis=0)

    def add(self, x_new, Xc):
        """Append a training input; returns the pool variance decrement."""
        n = self.n
        k_vec = se_kernel(self.X[:n], x_new[None, :], self.ls, self.sf2)[:, 0]
        c = linalg.solve_triangular(self.L[:n, :n], k_vec, lower=True)
        # the guard keeps the factor usable when the new point nearly
        # duplicates an existing one
        d = np.sqrt(max(self.sf2 + self.noise - c @ c, 1e-12))
        self.L[n, :n] = c
        self.L[n, n] = d
        self.X[n] = x_new
        row = (se_kernel(x_new[None, :], Xc, self.ls, self.sf2)[0] - c @ self.V[:n]) / d
        self.V[n] = row
        self.n = n + 1
        return row**2


def kriging_active_learning(env_name, al_config=None, gp_config=None, seed=0):
    """Build a dataset by uncertainty-driven acquisition; returns the final
    Gaussian-process model fitted on it and the dataset itself."""
    al_cfg = al_config or ALConfig()
    gp_cfg = gp_config or GPConfig()
    env = make_env(env_name)
    spec = env.spec
    n = spec.state_dim
    continuous = isinstance(spec.action_space, Continuous)
    n_actions = None if continuous else spec.action_space.count

    in_bounds = _input_bounds(spec)
    in_mid = in_bounds.mean(axis=1)
    in_half = np.maximum((in_bounds[:, 1] - in_bounds[:, 0]) / 2.0, 1e-12)
    input_norm = Normalizer(in_mid, in_half)

    states, actions, next_states, rewards, dones = [], [], [], [], []

    def record(start, action, result):
        states.append(start)
        actions.append(np.atleast_1d(np.asarray(action, dtype=float)))
        next_states.append(result.next_state)
        rewards.append(result.reward)
        dones.append(result.done)

    # initial seed sample: LHS over the state box, actions round-robin for
    # discrete spaces and sampled jointly for continuous ones
    init_bounds = in_bounds if continuous else spec.bounds_array
    init_plan = SamplePlan(method="lhs", count=al_cfg.initial_points,
                           bounds=init_bounds,
                           seed=_derived_seed((int(seed), 0x41, 0)))
    for i, point in enumerate(lhs_sample(init_plan)):
        action = point[n:] if continuous else int(i % n_actions)
        start, result = _simulate(env, point[:n], action)
        record(start, action, result)

    X0 = input_norm.transform(encode_inputs(np.asarray(states), np.asarray(actions)))
    deltas0 = np.asarray(next_states) - np.asarray(states)
    target_norm = Normalizer.fit(deltas0)

    capacity = al_cfg.initial_points + al_cfg.epochs * al_cfg.max_points_per_epoch
    scales = gp_cfg.scales_for(X0.shape[1])
    acq = _Acquirer(X0, scales, gp_cfg.signal_variance, gp_cfg.noise_variance,
                    capacity)

    epochs_meta = []
    for epoch in range(al_cfg.epochs):
        pool_bounds = in_bounds if continuous else spec.bounds_array
        pool_plan = SamplePlan(method="lhs", count=al_cfg.pool_size,
                               bounds=pool_bounds,
                               seed=_derived_seed((int(seed), 0x41, 1 + epoch)))
        pool = lhs_sample(pool_plan)
        if continuous:
            cand_states = pool[:, :n]
            cand_actions = pool[:, n:]
        else:
            cand_states = np.repeat(pool, n_actions, axis=0)
            cand_actions = np.tile(np.arange(n_actions, dtype=float),
                                   al_cfg.pool_size)[:, None]
        Xc = input_norm.transform(encode_inputs(cand_states, cand_actions))

        var = acq.start_pool(Xc)
        alive = np.ones(Xc.shape[0], dtype=bool)
        added = 0
        while True:
            live = np.flatnonzero(alive)
            if live.size == 0:
                reason, max_std = "exhausted", 0.0
                break
            live_std = np.sqrt(np.maximum(var[live], 0.0))
            pick = int(np.argmax(live_std))
            max_std = float(live_std[pick])
            if max_std < al_cfg.std_threshold:
                reason = "threshold"
                break
            if added >= al_cfg.max_points_per_epoch:
                reason = "cap"
                break
            j = int(live[pick])
            action = (cand_actions[j] if continuous else int(cand_actions[j, 0]))
            start, result = _simulate(env, cand_states[j], action)
            record(start, action, result)
            x_new = input_norm.transform(
                encode_inputs(start[None, :], np.atleast_2d(
                    np.asarray(action, dtype=float))))[0]
            var = var - acq.add(x_new, Xc)
            alive[j] = False
            added += 1
        epochs_meta.append({"added": added, "stop": reason,
                            "max_std": max_std})
        log.info("al epoch %d: added %d points, stop=%s, max_std=%.6f",
                 epoch + 1, added, reason, max_std)

    meta = {
        "env": spec.name,
        "sampler_id": "al",
        "seed": int(seed),
        "params": {
            "pool_size": al_cfg.pool_size,
            "max_points_per_epoch": al_cfg.max_points_per_epoch,
            "std_threshold": al_cfg.std_threshold,
            "epochs": al_cfg.epochs,
            "initial_points": al_cfg.initial_points,
            "noise_variance": gp_cfg.noise_variance,
        },
        "epochs": epochs_meta,
    }
    dataset = Dataset(np.asarray(states), np.asarray(actions),
                      np.asarray(next_states), np.asarray(rewards),
                      np.asarray(dones), meta)
    model = GPSurrogate(gp_cfg).fit(dataset, seed=seed)
    return model, dataset
