"""Generative space sampling: Latin hypercube, Sobol, uniform random.

Each sampler draws k points from a finite axis-aligned box. The generative
dataset builder then simulates exactly one transition per sampled point,
re-initializing the environment through ``set_state`` before every
simulation so no internal state carries over between samples.
"""
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dataset import Dataset
from .envs import Continuous, Discrete

SAMPLE_METHODS = ("lhs", "sobol", "random")

# Joe-Kuo "new-joe-kuo-6" primitive polynomial data for dimensions 2..8.
# Each entry: (degree s, coefficient a, initial direction numbers m_1..m_s).
# Dimension 1 is the van der Corput sequence (all m_j = 1).
_JOE_KUO = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
)
MAX_SOBOL_DIM = len(_JOE_KUO) + 1
_NBITS = 32


@dataclass(frozen=True)
class SamplePlan:
    method: str
    count: int
    bounds: np.ndarray  # (d, 2)
    seed: int = 0

    def __post_init__(self):
        if self.method not in SAMPLE_METHODS:
            raise ValueError(f"unknown sample method {self.method!r}")
        if self.count < 1:
            raise ValueError("sample count must be >= 1")
        bounds = np.asarray(self.bounds, dtype=float)
        if bounds.ndim != 2 or bounds.shape[1] != 2:
            raise ValueError("bounds must have shape (d, 2)")
        if not np.all(np.isfinite(bounds)) or not np.all(bounds[:, 0] < bounds[:, 1]):
            raise ValueError("bounds must be finite with lo < hi")
        object.__setattr__(self, "bounds", bounds)

    @property
    def dim(self):
        return self.bounds.shape[0]


def _affine(unit, bounds):
    lo, hi = bounds[:, 0], bounds[:, 1]
    return lo + unit * (hi - lo)


def lhs_sample(plan):
    """Latin hypercube: one point in each of k equal strata per dimension."""
    if plan.method != "lhs":
        raise ValueError("plan method must be 'lhs'")
    rng = np.random.default_rng(plan.seed)
    k, d = plan.count, plan.dim
    unit = np.empty((k, d))
    for j in range(d):
        # stratum order is permuted, the point sits uniformly inside its stratum
        unit[:, j] = (rng.permutation(k) + rng.uniform(0.0, 1.0, k)) / k
    return _affine(unit, plan.bounds)


def _sobol_direction_integers(dim):
    if not 1 <= dim <= MAX_SOBOL_DIM:
        raise ValueError(
            f"sobol supports 1..{MAX_SOBOL_DIM} dimensions, got {dim}")
    vs = np.empty((dim, _NBITS), dtype=np.uint64)
    vs[0] = [1 << (_NBITS - (k + 1)) for k in range(_NBITS)]
    for d in range(1, dim):
        s, a, m_init = _JOE_KUO[d - 1]
        m = list(m_init)
        for k in range(s, _NBITS):
            new = m[k - s] ^ (m[k - s] << s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    new ^= m[k - i] << i
            m.append(new)
        vs[d] = [m[k] << (_NBITS - (k + 1)) for k in range(_NBITS)]
    return vs


def sobol_unit(count, dim):
    """First `count` points of the base-2 Sobol sequence on [0,1)^dim.

    The initial all-zeros point of the raw sequence is skipped: a degenerate
    corner sample adds no information. Output is seed-independent.
    """
    vs = _sobol_direction_integers(dim)
    n = count + 1
    # c[i] = index of the rightmost zero bit of i, driving the Gray-code update
    c = np.empty(n, dtype=np.int64)
    for i in range(n):
        c[i] = ((i ^ (i + 1)).bit_length()) - 1
    x = np.bitwise_xor.accumulate(vs[:, c[: n - 1]], axis=1)
    return (x / float(1 << _NBITS)).T


def sobol_sample(plan):
    if plan.method != "sobol":
        raise ValueError("plan method must be 'sobol'")
    return _affine(sobol_unit(plan.count, plan.dim), plan.bounds)


def uniform_sample(plan):
    if plan.method != "random":
        raise ValueError("plan method must be 'random'")
    rng = np.random.default_rng(plan.seed)
    unit = rng.uniform(0.0, 1.0, (plan.count, plan.dim))
    return _affine(unit, plan.bounds)


_SAMPLERS = {"lhs": lhs_sample, "sobol": sobol_sample, "random": uniform_sample}


def sample(plan):
    return _SAMPLERS[plan.method](plan)


def generative_plan(env, method, count, seed):
    """Build the sampling plan for an environment: state box for discrete
    actions, joint state-action box for continuous actions."""
    bounds = env.spec.bounds_array
    if isinstance(env.spec.action_space, Continuous):
        bounds = np.vstack([bounds, np.asarray(env.spec.action_space.bounds, float)])
    return SamplePlan(method=method, count=count, bounds=bounds, seed=seed)


def build_generative_dataset(env, plan, sampler_id: Optional[str] = None):
    """Simulate one transition per sampled point.

    Discrete actions: every sampled state is paired with every action,
    yielding count * n_actions transitions. Continuous actions: the action
    dims are sampled jointly with the state, yielding count transitions.
    """
    spec = env.spec
    n = spec.state_dim
    points = sample(plan)
    space = spec.action_space
    if isinstance(space, Discrete):
        if plan.dim != n:
            raise ValueError(f"plan dimension {plan.dim} != state dim {n}")
        total = plan.count * space.count
    else:
        if plan.dim != n + space.dim:
            raise ValueError(
                f"plan dimension {plan.dim} != state+action dims {n + space.dim}")
        total = plan.count

    states = np.empty((total, n))
    actions = np.empty((total, 1 if isinstance(space, Discrete) else space.dim))
    next_states = np.empty((total, n))
    rewards = np.empty(total)
    dones = np.empty(total, dtype=bool)

    row = 0
    for point in points:
        if isinstance(space, Discrete):
            for action in range(space.count):
                env.set_state(point)
                start = env.state  # canonical form of the injected point
                result = env.step(action)
                states[row] = start
                actions[row, 0] = float(action)
                next_states[row] = result.next_state
                rewards[row] = result.reward
                dones[row] = result.done
                row += 1
        else:
            env.set_state(point[:n])
            start = env.state
            result = env.step(point[n:])
            states[row] = start
            actions[row] = point[n:]
            next_states[row] = result.next_state
            rewards[row] = result.reward
            dones[row] = result.done
            row += 1

    meta = {
        "env": spec.name,
        "sampler_id": sampler_id or plan.method,
        "seed": int(plan.seed),
        "params": {
            "method": plan.method,
            "k": int(plan.count),
            "bounds": plan.bounds.tolist(),
        },
    }
    return Dataset(states, actions, next_states, rewards, dones, meta)
