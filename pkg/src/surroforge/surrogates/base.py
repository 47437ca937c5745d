"""Shared surrogate plumbing: input encoding, normalization, the fit/predict
contract, and JSON model persistence.

Every family regresses normalized per-dimension deltas (s_next - s) on
normalized encoded inputs (state with the action appended; a discrete
action contributes a single real index column). Predictions reconstruct
s_next = s + de-normalized delta, so scoring is always on the next state.
"""
import json
from pathlib import Path

import numpy as np

MODEL_FORMAT_VERSION = 1


def encode_inputs(states, actions):
    """Stack states and action columns into the regression input matrix."""
    states = np.asarray(states, dtype=float)
    actions = np.asarray(actions, dtype=float)
    if actions.ndim == 1:
        actions = actions[:, None]
    if len(states) != len(actions):
        raise ValueError("states and actions must have equal lengths")
    return np.hstack([states, actions])


class Normalizer:
    """Per-feature affine map to zero mean, unit scale (constant features
    keep scale 1 so the round-trip stays exact)."""

    def __init__(self, mean, scale):
        self.mean = np.asarray(mean, dtype=float)
        self.scale = np.asarray(scale, dtype=float)

    @classmethod
    def fit(cls, values):
        values = np.asarray(values, dtype=float)
        mean = values.mean(axis=0)
        scale = values.std(axis=0)
        scale[scale == 0.0] = 1.0
        return cls(mean, scale)

    def transform(self, values):
        return (np.asarray(values, dtype=float) - self.mean) / self.scale

    def inverse(self, values):
        return np.asarray(values, dtype=float) * self.scale + self.mean

    def to_dict(self):
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, payload):
        return cls(payload["mean"], payload["scale"])


class Surrogate:
    """fit/predict interface shared by all families.

    Subclasses implement ``_fit_normalized(X, Y, seed)`` and
    ``_predict_normalized(X)`` plus parameter (de)serialization.
    """

    family = "abstract"

    def __init__(self):
        self.input_norm = None
        self.target_norm = None
        self.input_dim = None
        self.output_dim = None

    def fit(self, dataset, seed=0):
        X = encode_inputs(dataset.states, dataset.actions)
        deltas = dataset.next_states - dataset.states
        if len(X) < self.min_fit_rows:
            raise ValueError(
                f"{self.family} needs at least {self.min_fit_rows} transitions, got {len(X)}")
        self.input_dim = X.shape[1]
        self.output_dim = deltas.shape[1]
        self.input_norm = Normalizer.fit(X)
        self.target_norm = Normalizer.fit(deltas)
        self._fit_normalized(self.input_norm.transform(X),
                             self.target_norm.transform(deltas), seed)
        return self

    min_fit_rows = 2

    def predict(self, states, actions):
        """Predicted next states; accepts a single (state, action) pair or
        batches of either."""
        states = np.asarray(states, dtype=float)
        single = states.ndim == 1
        if single:
            states = states[None, :]
            actions = np.atleast_1d(np.asarray(actions, dtype=float))[None, :]
        X = encode_inputs(states, actions)
        if X.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {X.shape[1]}")
        deltas = self.target_norm.inverse(
            self._predict_normalized(self.input_norm.transform(X)))
        out = states + deltas
        return out[0] if single else out

    def _fit_normalized(self, X, Y, seed):
        raise NotImplementedError

    def _predict_normalized(self, X):
        raise NotImplementedError

    # -- persistence -----------------------------------------------------
    def _params_to_dict(self):
        raise NotImplementedError

    def _params_from_dict(self, payload):
        raise NotImplementedError

    def save(self, path):
        if self.input_norm is None:
            raise RuntimeError("cannot save an unfitted model")
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        payload = {
            "format_version": MODEL_FORMAT_VERSION,
            "family": self.family,
            "input_dim": self.input_dim,
            "output_dim": self.output_dim,
            "input_norm": self.input_norm.to_dict(),
            "target_norm": self.target_norm.to_dict(),
            "params": self._params_to_dict(),
        }
        tmp = path.with_name(path.name + ".tmp")
        with open(tmp, "w") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")
        tmp.replace(path)
        return path

    @classmethod
    def _from_payload(cls, payload):
        model = cls.__new__(cls)
        Surrogate.__init__(model)
        model.input_dim = payload["input_dim"]
        model.output_dim = payload["output_dim"]
        model.input_norm = Normalizer.from_dict(payload["input_norm"])
        model.target_norm = Normalizer.from_dict(payload["target_norm"])
        model._params_from_dict(payload["params"])
        return model


FAMILIES = {}


def register_family(cls):
    FAMILIES[cls.family] = cls
    return cls


def make_surrogate(family, config=None):
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown model family {family!r}; choose from {sorted(FAMILIES)}") from None
    return cls(config) if config is not None else cls()


def load_model(path):
    with open(path) as fh:
        payload = json.load(fh)
    if "format_version" not in payload:
        raise ValueError(f"model file missing format_version: {path}")
    family = payload.get("family")
    if family not in FAMILIES:
        raise ValueError(f"unknown model family in file: {family!r}")
    return FAMILIES[family]._from_payload(payload)
