"""Gaussian process regression with a squared-exponential kernel.

One shared kernel over the inputs serves every output dimension, so the
predictive standard deviation is a single per-query value in normalized
target units.
"""
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .base import Surrogate, encode_inputs, register_family

MAX_GP_ROWS = 5000
_NOISE_LADDER = (1.0, 10.0, 100.0, 1000.0)


@dataclass(frozen=True)
class GPConfig:
    length_scale: tuple = (1.0,)
    signal_variance: float = 1.0
    noise_variance: float = 1e-8

    def __post_init__(self):
        ls = self.length_scale
        if np.isscalar(ls):
            ls = (float(ls),)
        object.__setattr__(self, "length_scale", tuple(float(v) for v in ls))
        if any(v <= 0 for v in self.length_scale):
            raise ValueError("length_scale entries must be positive")
        if self.signal_variance <= 0 or self.noise_variance <= 0:
            raise ValueError("signal_variance and noise_variance must be positive")

    def scales_for(self, dim):
        """Per-input-dim length-scales, broadcasting a single value."""
        if len(self.length_scale) == dim:
            return np.asarray(self.length_scale)
        if len(self.length_scale) == 1:
            return np.full(dim, self.length_scale[0])
        raise ValueError(
            f"length_scale has {len(self.length_scale)} entries for input dim {dim}")


def se_kernel(A, B, length_scales, signal_variance):
    """k(a, b) = signal_variance * exp(-0.5 * sum_d (a_d - b_d)^2 / ls_d^2)."""
    As = np.asarray(A, dtype=float) / length_scales
    Bs = np.asarray(B, dtype=float) / length_scales
    d2 = (np.sum(As**2, axis=1)[:, None] + np.sum(Bs**2, axis=1)[None, :]
          - 2.0 * As @ Bs.T)
    return signal_variance * np.exp(-0.5 * np.maximum(d2, 0.0))


def cholesky_with_ladder(K, noise_variance):
    """Cholesky of K + noise*I, escalating the noise floor on failure.

    Returns (lower factor, noise actually used)."""
    n = K.shape[0]
    last_err = None
    for mult in _NOISE_LADDER:
        noise = noise_variance * mult
        try:
            L = linalg.cholesky(K + noise * np.eye(n), lower=True)
            return L, noise
        except linalg.LinAlgError as err:
            last_err = err
    raise RuntimeError(
        f"kernel matrix is not positive definite even with noise floor "
        f"{noise_variance * _NOISE_LADDER[-1]}") from last_err


@register_family
class GPSurrogate(Surrogate):
    family = "gp"
    min_fit_rows = 2

    def __init__(self, config=None):
        super().__init__()
        self.config = config or GPConfig()
        self.X = None
        self.Y = None
        self.L = None
        self.alpha = None
        self.noise_used = None

    def _fit_normalized(self, X, Y, seed):
        if X.shape[0] > MAX_GP_ROWS:
            raise ValueError(
                f"gp fit supports at most {MAX_GP_ROWS} transitions "
                f"(cubic cost), got {X.shape[0]}")
        self.X = X
        self.Y = Y
        self._factorize()

    def _factorize(self):
        ls = self.config.scales_for(self.X.shape[1])
        K = se_kernel(self.X, self.X, ls, self.config.signal_variance)
        self.L, self.noise_used = cholesky_with_ladder(K, self.config.noise_variance)
        self.alpha = linalg.cho_solve((self.L, True), self.Y)

    def _predict_normalized(self, X):
        ls = self.config.scales_for(self.X.shape[1])
        Ks = se_kernel(X, self.X, ls, self.config.signal_variance)
        return Ks @ self.alpha

    def _std_normalized(self, X):
        """Predictive standard deviation of the latent function, shared by
        all output dims (normalized target units)."""
        ls = self.config.scales_for(self.X.shape[1])
        Ks = se_kernel(self.X, X, ls, self.config.signal_variance)
        V = linalg.solve_triangular(self.L, Ks, lower=True)
        var = self.config.signal_variance - np.sum(V**2, axis=0)
        return np.sqrt(np.maximum(var, 0.0))

    def predict_std(self, states, actions):
        """Per-output-dim predictive std in physical delta units."""
        states = np.asarray(states, dtype=float)
        single = states.ndim == 1
        if single:
            states = states[None, :]
            actions = np.atleast_1d(np.asarray(actions, dtype=float))[None, :]
        X = encode_inputs(states, actions)
        if X.shape[1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {X.shape[1]}")
        std = self._std_normalized(self.input_norm.transform(X))
        out = std[:, None] * self.target_norm.scale[None, :]
        return out[0] if single else out

    def _params_to_dict(self):
        return {
            "config": {
                "length_scale": list(self.config.length_scale),
                "signal_variance": self.config.signal_variance,
                "noise_variance": self.config.noise_variance,
            },
            "X": self.X.tolist(),
            "Y": self.Y.tolist(),
        }

    def _params_from_dict(self, payload):
        cfg = dict(payload["config"])
        cfg["length_scale"] = tuple(cfg["length_scale"])
        self.config = GPConfig(**cfg)
        self.X = np.asarray(payload["X"], dtype=np.float64)
        self.Y = np.asarray(payload["Y"], dtype=np.float64)
        self._factorize()
