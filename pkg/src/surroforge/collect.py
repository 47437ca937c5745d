"""Agent-based dataset collection and dataset mixing.

``collect`` gathers exactly k transitions by rolling a policy through the
environment: episodes chain transition to transition, and whenever the done
flag rises (terminal state or episode cap) the environment resets with a
fresh derived seed. ``mix_datasets`` draws proportional shares from source
datasets without replacement and shuffles them together.
"""
import numpy as np

from .dataset import Dataset


def _derived_seed(key):
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def collect(env, policy, k, seed, sampler_id=None):
    """Roll `policy` in `env` until exactly k transitions are recorded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    spec = env.spec
    states = np.empty((k, spec.state_dim))
    actions = np.empty((k, spec.action_dim))
    next_states = np.empty((k, spec.state_dim))
    rewards = np.empty(k)
    dones = np.empty(k, dtype=bool)

    policy_rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0)))
    episode = 0
    state = env.reset(_derived_seed((int(seed), 1, episode)))
    for i in range(k):
        action = policy.act(state, policy_rng)
        result = env.step(action)
        states[i] = state
        actions[i] = np.atleast_1d(np.asarray(action, dtype=float))
        next_states[i] = result.next_state
        rewards[i] = result.reward
        dones[i] = result.done
        if result.done:
            episode += 1
            state = env.reset(_derived_seed((int(seed), 1, episode)))
        else:
            state = result.next_state

    meta = {
        "env": spec.name,
        "sampler_id": sampler_id or policy.kind,
        "seed": int(seed),
        "params": {"k": int(k), "policy": policy.kind, "episodes": episode + 1},
    }
    return Dataset(states, actions, next_states, rewards, dones, meta)


def mix_datasets(parts, k, seed, sampler_id=None):
    """Draw floor(proportion * k) transitions from each part (remainder goes
    to the first part) without replacement, then shuffle globally.

    Parts backed by the same dataset object draw disjoint rows, so mixing a
    dataset with itself yields a plain k-subset of it.
    """
    if not parts:
        raise ValueError("need at least one part")
    proportions = [p for _, p in parts]
    if abs(sum(proportions) - 1.0) > 1e-9:
        raise ValueError(f"proportions must sum to 1, got {sum(proportions)}")
    shares = [int(p * k) for p in proportions]
    shares[0] += k - sum(shares)

    rng = np.random.default_rng(np.random.SeedSequence((int(seed), 0xA1)))
    # one permutation per distinct source object, consumed share by share
    perms = {}
    cursors = {}
    picks = []
    for (dataset, _), share in zip(parts, shares):
        key = id(dataset)
        if key not in perms:
            perms[key] = rng.permutation(len(dataset))
            cursors[key] = 0
        start = cursors[key]
        if start + share > len(dataset):
            raise ValueError(
                f"dataset {dataset.meta.get('sampler_id')!r} has too few transitions "
                f"({len(dataset)}) for its share ({share} more needed at offset {start})")
        picks.append((dataset, perms[key][start:start + share]))
        cursors[key] = start + share

    states = np.vstack([d.states[idx] for d, idx in picks])
    actions = np.vstack([d.actions[idx] for d, idx in picks])
    next_states = np.vstack([d.next_states[idx] for d, idx in picks])
    rewards = np.concatenate([d.rewards[idx] for d, idx in picks])
    dones = np.concatenate([d.dones[idx] for d, idx in picks])
    order = rng.permutation(k)

    constituents = [d.meta.get("sampler_id", "?") for d, _ in parts]
    first_env = parts[0][0].meta.get("env")
    meta = {
        "env": first_env,
        "sampler_id": sampler_id or "+".join(constituents),
        "seed": int(seed),
        "params": {
            "k": int(k),
            "constituents": constituents,
            "proportions": list(proportions),
        },
    }
    return Dataset(states[order], actions[order], next_states[order],
                   rewards[order], dones[order], meta)
