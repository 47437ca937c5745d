"""Fully-connected regression network trained with mini-batch Adam on MSE.

Parameters live in a flat list [W1, b1, W2, b2, ...] so the loss/gradient
pair can be checked against finite differences layer by layer.
"""
from dataclasses import dataclass

import numpy as np

from .base import Surrogate, register_family


@dataclass(frozen=True)
class MLPConfig:
    layers: tuple = (512, 256)
    learning_rate: float = 0.001
    batch_size: int = 64
    epochs: int = 10
    early_stop_delta: float = 0.001
    validation_fraction: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(w) for w in self.layers))
        if any(w < 1 for w in self.layers) or not self.layers:
            raise ValueError("layers must be a non-empty tuple of positive widths")
        if self.learning_rate <= 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("learning_rate, batch_size, epochs must be positive")
        if self.early_stop_delta <= 0:
            raise ValueError("early_stop_delta must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")


def init_params(layer_sizes, rng):
    """He-scaled weights, zero biases, for sizes [d_in, hidden..., d_out]."""
    params = []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        params.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        params.append(np.zeros(fan_out))
    return params


def forward(params, X):
    h = X
    for i in range(0, len(params) - 2, 2):
        h = np.maximum(h @ params[i] + params[i + 1], 0.0)
    return h @ params[-2] + params[-1]


def loss_and_grads(params, X, Y):
    """Mean squared error over all elements and its gradient w.r.t. every
    parameter, via backprop."""
    acts = [X]
    pres = []
    h = X
    for i in range(0, len(params) - 2, 2):
        z = h @ params[i] + params[i + 1]
        pres.append(z)
        h = np.maximum(z, 0.0)
        acts.append(h)
    out = h @ params[-2] + params[-1]
    diff = out - Y
    loss = float(np.mean(diff**2))

    grads = [None] * len(params)
    d = 2.0 * diff / diff.size
    grads[-2] = acts[-1].T @ d
    grads[-1] = d.sum(axis=0)
    for layer in range(len(pres) - 1, -1, -1):
        d = (d @ params[2 * layer + 2].T) * (pres[layer] > 0.0)
        grads[2 * layer] = acts[layer].T @ d
        grads[2 * layer + 1] = d.sum(axis=0)
    return loss, grads


def should_stop(val_history, delta):
    """Stop once validation MSE rises by more than delta above its best."""
    return len(val_history) >= 2 and val_history[-1] > min(val_history[:-1]) + delta


class _Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for i, g in enumerate(grads):
            self.m[i] = b1 * self.m[i] + (1 - b1) * g
            self.v[i] = b2 * self.v[i] + (1 - b2) * g**2
            m_hat = self.m[i] / (1 - b1**self.t)
            v_hat = self.v[i] / (1 - b2**self.t)
            params[i] -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@register_family
class MLPSurrogate(Surrogate):
    family = "mlp"
    min_fit_rows = 100

    def __init__(self, config=None):
        super().__init__()
        self.config = config or MLPConfig()
        self.params = []
        self.val_history = []

    def _fit_normalized(self, X, Y, seed):
        cfg = self.config
        rng = np.random.default_rng(seed)
        sizes = [X.shape[1], *cfg.layers, Y.shape[1]]
        self.params = init_params(sizes, rng)

        n = X.shape[0]
        n_val = max(1, int(round(cfg.validation_fraction * n)))
        perm = rng.permutation(n)
        val_idx, train_idx = perm[:n_val], perm[n_val:]
        Xt, Yt = X[train_idx], Y[train_idx]
        Xv, Yv = X[val_idx], Y[val_idx]

        opt = _Adam(self.params, cfg.learning_rate)
        self.val_history = []
        for epoch in range(cfg.epochs):
            order = rng.permutation(Xt.shape[0])
            for start in range(0, order.size, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                loss, grads = loss_and_grads(self.params, Xt[idx], Yt[idx])
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite training loss {loss} at epoch {epoch}, "
                        f"batch offset {start}; try a lower learning_rate")
                opt.step(self.params, grads)
            val_mse = float(np.mean((forward(self.params, Xv) - Yv) ** 2))
            self.val_history.append(val_mse)
            if should_stop(self.val_history, cfg.early_stop_delta):
                break

    def _predict_normalized(self, X):
        return forward(self.params, X)

    def _params_to_dict(self):
        return {
            "config": {
                "layers": list(self.config.layers),
                "learning_rate": self.config.learning_rate,
                "batch_size": self.config.batch_size,
                "epochs": self.config.epochs,
                "early_stop_delta": self.config.early_stop_delta,
                "validation_fraction": self.config.validation_fraction,
            },
            "weights": [p.tolist() for p in self.params],
            "val_history": list(self.val_history),
        }

    def _params_from_dict(self, payload):
        cfg = dict(payload["config"])
        cfg["layers"] = tuple(cfg["layers"])
        self.config = MLPConfig(**cfg)
        self.params = [np.asarray(p, dtype=np.float64) for p in payload["weights"]]
        self.val_history = list(payload.get("val_history", []))
