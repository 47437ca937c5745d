"""Deterministic classic-control environments exposed as MDPs.

Each environment advances with an explicit Euler integrator at the canonical
time step of its task and supports arbitrary state injection through
``set_state``, so generative samplers can simulate one transition from any
point of the state space without carryover from previous samples.
"""
import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np

__all__ = [
    "Discrete",
    "Continuous",
    "EnvSpec",
    "StepResult",
    "Environment",
    "CartPoleEnv",
    "MountainCarEnv",
    "PendulumEnv",
    "ENV_NAMES",
    "make_env",
    "env_spec",
]


@dataclass(frozen=True)
class Discrete:
    """Discrete action space with actions 0 .. count-1."""

    count: int


@dataclass(frozen=True)
class Continuous:
    """Continuous action space of dimension dim with per-dim closed bounds."""

    dim: int
    bounds: tuple  # ((lo, hi), ...) of length dim


@dataclass(frozen=True)
class EnvSpec:
    name: str
    state_dim: int
    action_space: Union[Discrete, Continuous]
    sampling_bounds: tuple  # ((lo, hi), ...) of length state_dim
    max_episode_steps: int

    def __post_init__(self):
        if self.state_dim < 1:
            raise ValueError("state_dim must be >= 1")
        if isinstance(self.action_space, Discrete):
            if self.action_space.count < 2:
                raise ValueError("discrete action count must be >= 2")
        elif isinstance(self.action_space, Continuous):
            if self.action_space.dim < 1:
                raise ValueError("continuous action dim must be >= 1")
        else:
            raise TypeError("action_space must be Discrete or Continuous")
        if len(self.sampling_bounds) != self.state_dim:
            raise ValueError("sampling_bounds length must equal state_dim")
        for lo, hi in self.sampling_bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError("sampling bounds must be finite with lo < hi")

    @property
    def bounds_array(self):
        return np.asarray(self.sampling_bounds, dtype=float)

    @property
    def action_dim(self):
        """Width of the action column block in encoded datasets."""
        return 1 if isinstance(self.action_space, Discrete) else self.action_space.dim


class StepResult(NamedTuple):
    next_state: np.ndarray
    reward: float
    done: bool


def _rng_from_seed(seed):
    # accept any 64-bit integer, including negatives
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


class Environment:
    """Single-owner mutable simulator; all randomness flows from reset seeds."""

    spec: EnvSpec

    def __init__(self):
        self._state = None
        self._steps = 0

    # -- subclass hooks -------------------------------------------------
    def _initial_state(self, rng):
        raise NotImplementedError

    def _dynamics(self, state, action):
        """Pure transition function; returns (next_state, reward)."""
        raise NotImplementedError

    def _terminal(self, state):
        return False

    def _canonical(self, state):
        """Normalize an injected state to the internal representation."""
        return state

    # -- MDP interface --------------------------------------------------
    @property
    def state(self):
        if self._state is None:
            raise RuntimeError("environment has no state; call reset or set_state first")
        return self._state.copy()

    def reset(self, seed):
        self._state = self._initial_state(_rng_from_seed(seed))
        self._steps = 0
        return self._state.copy()

    def set_state(self, state):
        state = np.asarray(state, dtype=float)
        if state.shape != (self.spec.state_dim,):
            raise ValueError(
                f"state must have shape ({self.spec.state_dim},), got {state.shape}")
        if not np.all(np.isfinite(state)):
            raise ValueError("state entries must be finite")
        self._state = self._canonical(state)
        self._steps = 0

    def _validate_action(self, action):
        space = self.spec.action_space
        if isinstance(space, Discrete):
            if isinstance(action, (bool, np.bool_)) or not isinstance(
                    action, (int, np.integer)):
                raise ValueError(f"action must be an integer index, got {action!r}")
            if not 0 <= int(action) < space.count:
                raise ValueError(
                    f"action index {int(action)} out of range [0, {space.count})")
            return int(action)
        a = np.atleast_1d(np.asarray(action, dtype=float))
        if a.shape != (space.dim,):
            raise ValueError(f"action must have {space.dim} dims, got shape {a.shape}")
        for value, (lo, hi) in zip(a, space.bounds):
            if not lo <= value <= hi:
                raise ValueError(f"action value {value} outside bounds [{lo}, {hi}]")
        return a

    def step(self, action):
        if self._state is None:
            raise RuntimeError("environment has no state; call reset or set_state first")
        action = self._validate_action(action)
        was_terminal = self._terminal(self._state)
        next_state, reward = self._dynamics(self._state, action)
        self._state = next_state
        self._steps += 1
        done = (was_terminal or self._terminal(next_state)
                or self._steps >= self.spec.max_episode_steps)
        return StepResult(next_state.copy(), float(reward), bool(done))


class CartPoleEnv(Environment):
    """Cart-pole balancing; 2 actions (push left / push right), dt = 0.02."""

    gravity = 9.8
    masscart = 1.0
    masspole = 0.1
    total_mass = masscart + masspole
    length = 0.5  # half the pole length
    polemass_length = masspole * length
    force_mag = 10.0
    tau = 0.02
    x_threshold = 2.4
    theta_threshold = 12 * 2 * math.pi / 360

    spec = EnvSpec(
        name="cartpole",
        state_dim=4,
        action_space=Discrete(2),
        # velocities are formally unbounded; +-4 covers all shipped policies
        sampling_bounds=((-4.8, 4.8), (-4.0, 4.0), (-0.418, 0.418), (-4.0, 4.0)),
        max_episode_steps=500,
    )

    def _initial_state(self, rng):
        return rng.uniform(-0.05, 0.05, 4)

    def _terminal(self, state):
        return abs(state[0]) > self.x_threshold or abs(state[2]) > self.theta_threshold

    def _dynamics(self, state, action):
        x, x_dot, theta, theta_dot = state
        force = self.force_mag if action == 1 else -self.force_mag
        costheta = math.cos(theta)
        sintheta = math.sin(theta)
        temp = (force + self.polemass_length * theta_dot**2 * sintheta) / self.total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * costheta**2 / self.total_mass))
        xacc = temp - self.polemass_length * thetaacc * costheta / self.total_mass
        x = x + self.tau * x_dot
        x_dot = x_dot + self.tau * xacc
        theta = theta + self.tau * theta_dot
        theta_dot = theta_dot + self.tau * thetaacc
        return np.array([x, x_dot, theta, theta_dot]), 1.0


class MountainCarEnv(Environment):
    """Underpowered car in a valley; 3 actions (left, idle, right), unit step."""

    min_position = -1.2
    max_position = 0.6
    max_speed = 0.07
    goal_position = 0.5
    force = 0.001
    gravity = 0.0025

    spec = EnvSpec(
        name="mountaincar",
        state_dim=2,
        action_space=Discrete(3),
        sampling_bounds=((-1.2, 0.6), (-0.07, 0.07)),
        max_episode_steps=200,
    )

    def _initial_state(self, rng):
        return np.array([rng.uniform(-0.6, -0.4), 0.0])

    def _terminal(self, state):
        return state[0] >= self.goal_position

    def _dynamics(self, state, action):
        position, velocity = state
        velocity += (action - 1) * self.force - math.cos(3 * position) * self.gravity
        velocity = min(max(velocity, -self.max_speed), self.max_speed)
        position += velocity
        position = min(max(position, self.min_position), self.max_position)
        if position == self.min_position and velocity < 0:
            velocity = 0.0
        return np.array([position, velocity]), -1.0


class PendulumEnv(Environment):
    """Torque-controlled pendulum swing-up; state observed as (cos, sin, angular velocity)."""

    max_speed = 8.0
    max_torque = 2.0
    dt = 0.05
    g = 10.0
    m = 1.0
    l = 1.0

    spec = EnvSpec(
        name="pendulum",
        state_dim=3,
        action_space=Continuous(1, ((-2.0, 2.0),)),
        sampling_bounds=((-1.0, 1.0), (-1.0, 1.0), (-8.0, 8.0)),
        max_episode_steps=200,
    )

    def _initial_state(self, rng):
        theta = rng.uniform(-math.pi, math.pi)
        theta_dot = rng.uniform(-1.0, 1.0)
        return np.array([math.cos(theta), math.sin(theta), theta_dot])

    def _canonical(self, state):
        # injected (cos, sin) need not lie on the unit circle; the angle is
        # recovered with atan2, so the stored state is always consistent
        theta = math.atan2(state[1], state[0])
        return np.array([math.cos(theta), math.sin(theta), state[2]])

    def _dynamics(self, state, action):
        theta = math.atan2(state[1], state[0])
        theta_dot = state[2]
        u = float(action[0])
        norm_theta = ((theta + math.pi) % (2 * math.pi)) - math.pi
        cost = norm_theta**2 + 0.1 * theta_dot**2 + 0.001 * u**2
        theta_dot = theta_dot + (3 * self.g / (2 * self.l) * math.sin(theta)
                                 + 3.0 / (self.m * self.l**2) * u) * self.dt
        theta_dot = min(max(theta_dot, -self.max_speed), self.max_speed)
        theta = theta + theta_dot * self.dt
        return np.array([math.cos(theta), math.sin(theta), theta_dot]), -cost


_REGISTRY = {
    "cartpole": CartPoleEnv,
    "mountaincar": MountainCarEnv,
    "pendulum": PendulumEnv,
}

ENV_NAMES = tuple(sorted(_REGISTRY))


def make_env(name):
    try:
        cls = _REGISTRY[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; choose from {ENV_NAMES}") from None
    return cls()


def env_spec(name):
    return make_env(name).spec
