"""Transition datasets and their on-disk CSV + JSON-sidecar format.

A dataset holds N transitions as parallel arrays. Discrete actions are
stored as a single real-valued index column so every dataset is a plain
numeric table. Files are written with full-precision decimal floats
(shortest round-trip repr), which makes outputs diffable and byte-stable
across runs with the same configuration.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


@dataclass
class Dataset:
    states: np.ndarray       # (N, n)
    actions: np.ndarray      # (N, m') with m' = action dims, 1 for discrete
    next_states: np.ndarray  # (N, n)
    rewards: np.ndarray      # (N,)
    dones: np.ndarray        # (N,) bool
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=float)
        self.actions = np.asarray(self.actions, dtype=float)
        if self.actions.ndim == 1:
            self.actions = self.actions[:, None]
        self.next_states = np.asarray(self.next_states, dtype=float)
        self.rewards = np.asarray(self.rewards, dtype=float)
        self.dones = np.asarray(self.dones, dtype=bool)
        n = len(self.states)
        if not (len(self.actions) == len(self.next_states)
                == len(self.rewards) == len(self.dones) == n):
            raise ValueError("dataset arrays must have equal lengths")
        if self.states.shape != self.next_states.shape:
            raise ValueError("states and next_states must have the same shape")
        self.meta.setdefault("format_version", FORMAT_VERSION)
        self.meta["count"] = n

    def __len__(self):
        return len(self.states)

    @property
    def state_dim(self):
        return self.states.shape[1]

    @property
    def action_dim(self):
        return self.actions.shape[1]

    def subset(self, indices, **meta_overrides):
        meta = dict(self.meta)
        meta.update(meta_overrides)
        meta.pop("count", None)
        return Dataset(
            states=self.states[indices],
            actions=self.actions[indices],
            next_states=self.next_states[indices],
            rewards=self.rewards[indices],
            dones=self.dones[indices],
            meta=meta,
        )

    # -- persistence -----------------------------------------------------
    def save(self, path):
        """Write <path> as CSV and <path stem>.meta.json alongside."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        n, m = self.state_dim, self.action_dim
        header = ",".join(
            [f"s{i}" for i in range(n)]
            + [f"a{i}" for i in range(m)]
            + [f"ns{i}" for i in range(n)]
            + ["reward", "done"]
        )
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w") as fh:
            fh.write(header + "\n")
            for i in range(len(self)):
                row = (
                    [repr(float(v)) for v in self.states[i]]
                    + [repr(float(v)) for v in self.actions[i]]
                    + [repr(float(v)) for v in self.next_states[i]]
                    + [repr(float(self.rewards[i])), str(int(self.dones[i]))]
                )
                fh.write(",".join(row) + "\n")
        tmp.replace(path)
        meta_tmp = self._meta_path(path).with_suffix(".json.tmp")
        with open(meta_tmp, "w") as fh:
            json.dump(self.meta, fh, indent=2, sort_keys=True, default=_jsonable)
            fh.write("\n")
        meta_tmp.replace(self._meta_path(path))
        return path

    @staticmethod
    def _meta_path(path):
        path = Path(path)
        return path.with_name(path.stem + ".meta.json")

    @classmethod
    def load(cls, path):
        path = Path(path)
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        n = sum(1 for c in header if c.startswith("s") and not c.startswith("ns"))
        m = sum(1 for c in header if c.startswith("a"))
        expected = ([f"s{i}" for i in range(n)] + [f"a{i}" for i in range(m)]
                    + [f"ns{i}" for i in range(n)] + ["reward", "done"])
        if header != expected:
            raise ValueError(f"unexpected dataset header in {path}: {header}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != 2 * n + m + 2:
            raise ValueError(f"column count mismatch in {path}")
        meta_path = cls._meta_path(path)
        meta = {}
        if meta_path.exists():
            with open(meta_path) as fh:
                meta = json.load(fh)
        return cls(
            states=data[:, :n],
            actions=data[:, n:n + m],
            next_states=data[:, n + m:2 * n + m],
            rewards=data[:, 2 * n + m],
            dones=data[:, 2 * n + m + 1] != 0,
            meta=meta,
        )


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def concatenate(datasets, meta=None):
    """Stack datasets with identical column layout into one."""
    if not datasets:
        raise ValueError("need at least one dataset")
    return Dataset(
        states=np.vstack([d.states for d in datasets]),
        actions=np.vstack([d.actions for d in datasets]),
        next_states=np.vstack([d.next_states for d in datasets]),
        rewards=np.concatenate([d.rewards for d in datasets]),
        dones=np.concatenate([d.dones for d in datasets]),
        meta=dict(meta or {}),
    )
