"""Cross-entropy-method training of the maximum-entropy exploration policy.

Each candidate parameter vector is scored by the k-NN entropy of the states
it visits across a fixed number of evaluation rollouts. States are
normalized per dimension with the moments of the uniform law on the
environment's sampling bounds (mean = interval midpoint, std = range /
sqrt(12)); a fixed normalization keeps the objective sensitive to how much
of the space a candidate actually covers, which a per-batch z-score would
erase.
"""
from dataclasses import asdict, dataclass

import math

import numpy as np

from .entropy import knn_entropy
from .envs import env_spec, make_env
from .policies import MaxEntropyPolicy

# additive floor on the CEM search std, prevents premature collapse
SIGMA_FLOOR = 0.05


@dataclass(frozen=True)
class MEAConfig:
    horizon: int = 0  # 0 means the environment's episode cap
    episodes_per_eval: int = 8
    population: int = 64
    elite_fraction: float = 0.125
    iterations: int = 50
    k_neighbors: int = 4

    def __post_init__(self):
        if self.horizon < 0 or self.episodes_per_eval < 1 or self.population < 1:
            raise ValueError("horizon, episodes_per_eval and population must be positive")
        if not 0.0 < self.elite_fraction < 1.0:
            raise ValueError("elite_fraction must be in (0, 1)")
        if self.iterations < 0 or self.k_neighbors < 1:
            raise ValueError("iterations must be >= 0 and k_neighbors >= 1")


def _derived_seed(key):
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def bounds_normalization(spec):
    """Per-dim (mean, std) of the uniform distribution on the sampling bounds."""
    bounds = spec.bounds_array
    mid = bounds.mean(axis=1)
    scale = (bounds[:, 1] - bounds[:, 0]) / math.sqrt(12.0)
    return mid, scale


def rollout_states(env, policy, episodes, horizon, seed_key):
    """Visited states (initial state plus every successor) over `episodes`
    independent rollouts; episodes end early on the environment's done flag."""
    states = []
    for ep in range(episodes):
        state = env.reset(_derived_seed(seed_key + (ep,)))
        rng = np.random.default_rng(np.random.SeedSequence(seed_key + (ep, 1)))
        states.append(state)
        for _ in range(horizon):
            state, _, done = env.step(policy.act(state, rng))
            states.append(state)
            if done:
                break
    return np.asarray(states)


def visitation_entropy(states, k, mid, scale):
    """Entropy score of a batch of visited states; -inf on degenerate support."""
    normalized = (np.asarray(states, dtype=float) - mid) / scale
    try:
        return float(knn_entropy(normalized, k=k))
    except ValueError:
        return -math.inf


def train_max_entropy_policy(env_name, config=None, seed=0):
    """Cross-entropy method over the policy parameter space.

    Runs iterations + 1 population evaluations (the extra one is the initial
    random population) and returns the best-scoring candidate ever seen.
    Deterministic under seed: candidate draws and every rollout reset flow
    from (seed, iteration, candidate, episode) derived seeds.
    """
    config = config or MEAConfig()
    spec = env_spec(env_name)
    env = make_env(env_name)
    horizon = config.horizon or spec.max_episode_steps
    mid, scale = bounds_normalization(spec)
    n_params = MaxEntropyPolicy.parameter_count(spec)
    n_elite = max(1, int(round(config.population * config.elite_fraction)))

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xCE)))
    mu = np.zeros(n_params)
    sigma = np.ones(n_params)
    best_score = -math.inf
    best_params = mu.copy()

    for iteration in range(config.iterations + 1):
        candidates = mu + sigma * rng.standard_normal((config.population, n_params))
        scores = np.empty(config.population)
        for c in range(config.population):
            policy = MaxEntropyPolicy(spec, candidates[c])
            states = rollout_states(
                env, policy, config.episodes_per_eval, horizon,
                (int(seed), iteration, c))
            scores[c] = visitation_entropy(states, config.k_neighbors, mid, scale)
        order = np.argsort(-scores, kind="stable")
        if scores[order[0]] > best_score:
            best_score = float(scores[order[0]])
            best_params = candidates[order[0]].copy()
        elite = candidates[order[:n_elite]]
        mu = elite.mean(axis=0)
        sigma = elite.std(axis=0) + SIGMA_FLOOR

    return MaxEntropyPolicy(
        spec, best_params, entropy=best_score, config=asdict(config))
