"""Action policies: random, heuristic experts, epsilon-blended partial
experts, and the trainable maximum-entropy policy.

Every policy maps a state to an action through ``act(state, rng)``. Only
the random policy and the random branch of a partial expert consume the
rng; expert and maximum-entropy policies are deterministic.
"""
import json
import math
from pathlib import Path

import numpy as np

from .envs import Continuous, Discrete, env_spec

POLICY_FORMAT_VERSION = 1


class Policy:
    kind = "abstract"

    def __init__(self, spec):
        self.spec = spec

    @property
    def env_name(self):
        return self.spec.name

    def act(self, state, rng):
        raise NotImplementedError


class RandomPolicy(Policy):
    """Uniform over the discrete actions, or uniform within continuous bounds."""

    kind = "random"

    def act(self, state, rng):
        space = self.spec.action_space
        if isinstance(space, Discrete):
            return int(rng.integers(space.count))
        bounds = np.asarray(space.bounds, dtype=float)
        return rng.uniform(bounds[:, 0], bounds[:, 1])


def _cartpole_expert(state):
    # PD rule on the pole: push right iff 0.5*theta + 1.0*theta_dot > 0
    return 1 if 0.5 * state[2] + 1.0 * state[3] > 0 else 0


def _mountaincar_expert(state):
    # energy pumping: push in the sign of the velocity, right at rest
    return 2 if state[1] >= 0 else 0


def _pendulum_expert(state):
    # energy-based swing-up with linear stabilization near upright;
    # the rod's energy is E = m l^2/6 thdot^2 + m g l/2 cos(theta)
    c, s, theta_dot = state
    theta = math.atan2(s, c)
    m, g, l = 1.0, 10.0, 1.0
    energy = m * l * l / 6.0 * theta_dot**2 + m * g * l / 2.0 * c
    energy_top = m * g * l / 2.0
    if abs(theta) < 0.4 and abs(theta_dot) < 2.0:
        u = -8.0 * theta - 2.0 * theta_dot
    else:
        u = 1.0 * theta_dot * (energy_top - energy)
        if u == 0.0:
            u = 2.0  # exactly at rest at the bottom: kick to start swinging
    return np.array([min(max(u, -2.0), 2.0)])


_EXPERTS = {
    "cartpole": _cartpole_expert,
    "mountaincar": _mountaincar_expert,
    "pendulum": _pendulum_expert,
}


class ExpertPolicy(Policy):
    kind = "expert"

    def __init__(self, spec):
        super().__init__(spec)
        try:
            self._rule = _EXPERTS[spec.name]
        except KeyError:
            raise ValueError(f"no expert heuristic for environment {spec.name!r}") from None

    def act(self, state, rng):
        return self._rule(state)


class PartialExpertPolicy(Policy):
    """Expert action with probability 1 - epsilon, uniform random otherwise."""

    kind = "partial"

    def __init__(self, spec, epsilon):
        super().__init__(spec)
        if not 0.0 <= epsilon <= 1.0:
            raise ValueError("epsilon must be in [0, 1]")
        self.epsilon = float(epsilon)
        self._expert = ExpertPolicy(spec)
        self._random = RandomPolicy(spec)

    def act(self, state, rng):
        if self.epsilon > 0.0 and rng.uniform() < self.epsilon:
            return self._random.act(state, rng)
        return self._expert.act(state, rng)


class MaxEntropyPolicy(Policy):
    """One hidden layer of 32 tanh units over range-normalized state
    features, linear output; argmax over logits for discrete actions,
    clipped means for continuous actions."""

    kind = "max_entropy"
    hidden = 32

    def __init__(self, spec, parameters, entropy=None, config=None):
        super().__init__(spec)
        n_in = spec.state_dim
        n_out = self.output_dim(spec)
        expected = self.parameter_count(spec)
        parameters = np.asarray(parameters, dtype=float)
        if parameters.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got {parameters.shape}")
        self.parameters = parameters
        self.entropy = None if entropy is None else float(entropy)
        self.config = dict(config or {})
        h = self.hidden
        off = 0
        self._w1 = parameters[off:off + n_in * h].reshape(n_in, h); off += n_in * h
        self._b1 = parameters[off:off + h]; off += h
        self._w2 = parameters[off:off + h * n_out].reshape(h, n_out); off += h * n_out
        self._b2 = parameters[off:off + n_out]
        bounds = spec.bounds_array
        self._mid = bounds.mean(axis=1)
        self._half = (bounds[:, 1] - bounds[:, 0]) / 2.0
        if isinstance(spec.action_space, Continuous):
            ab = np.asarray(spec.action_space.bounds, dtype=float)
            self._alo, self._ahi = ab[:, 0], ab[:, 1]

    @classmethod
    def output_dim(cls, spec):
        space = spec.action_space
        return space.count if isinstance(space, Discrete) else space.dim

    @classmethod
    def parameter_count(cls, spec):
        n_in, h, n_out = spec.state_dim, cls.hidden, cls.output_dim(spec)
        return n_in * h + h + h * n_out + n_out

    def _forward(self, state):
        feat = (state - self._mid) / self._half
        return np.tanh(feat @ self._w1 + self._b1) @ self._w2 + self._b2

    def act(self, state, rng):
        out = self._forward(state)
        if isinstance(self.spec.action_space, Discrete):
            return int(np.argmax(out))
        return np.clip(out, self._alo, self._ahi)

    # -- persistence -----------------------------------------------------
    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "format_version": POLICY_FORMAT_VERSION,
            "kind": self.kind,
            "env": self.spec.name,
            "architecture": {
                "inputs": self.spec.state_dim,
                "hidden": self.hidden,
                "outputs": self.output_dim(self.spec),
                "activation": "tanh",
            },
            "parameters": [float(v) for v in self.parameters],
            "entropy": self.entropy,
            "config": self.config,
        }
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        tmp.replace(path)
        return path

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            payload = json.load(fh)
        if payload.get("kind") != cls.kind:
            raise ValueError(f"not a max-entropy policy file: {path}")
        if "format_version" not in payload:
            raise ValueError(f"policy file missing format_version: {path}")
        spec = env_spec(payload["env"])
        return cls(
            spec,
            np.asarray(payload["parameters"], dtype=float),
            entropy=payload.get("entropy"),
            config=payload.get("config"),
        )


def expert_policy(env_name):
    return ExpertPolicy(env_spec(env_name))


def random_policy(env_name):
    return RandomPolicy(env_spec(env_name))


def partial_expert_policy(env_name, epsilon):
    return PartialExpertPolicy(env_spec(env_name), epsilon)
