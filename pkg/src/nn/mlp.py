"""
Feed-Forward Network Module
Numpy multilayer perceptron with cached forward passes and exact
reverse-mode gradients. Used by the GP mean function, the ensemble
members, and the actor/critic networks.
"""
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

import config
from src.exceptions import ShapeMismatchError


# ─── Activations ─────────────────────────────────────────────────────────────

def _softplus(z):
    return np.logaddexp(0.0, z)


def _silu(z):
    return z * expit(z)


def _silu_grad(z):
    s = expit(z)
    return s * (1.0 + z * (1.0 - s))


def _mish(z):
    return z * np.tanh(_softplus(z))


def _mish_grad(z):
    t = np.tanh(_softplus(z))
    return t + z * (1.0 - t * t) * expit(z)


ACTIVATIONS = {
    "silu": (_silu, _silu_grad),
    "mish": (_mish, _mish_grad),
    "relu": (lambda z: np.maximum(z, 0.0), lambda z: (z > 0).astype(float)),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
    "identity": (lambda z: z, np.ones_like),
}


@dataclass
class Gradients:
    """Parameter gradients keyed like `Mlp.params`, plus the input gradient."""

    params: dict
    inputs: np.ndarray


class Mlp:
    """Fully connected network; the output layer is always linear."""

    def __init__(self, widths, activation="silu", rng: np.random.Generator | None = None):
        widths = [int(w) for w in widths]
        if len(widths) < 2 or min(widths) < 1:
            raise ShapeMismatchError(f"invalid layer widths {widths}")
        n_hidden = len(widths) - 2
        if isinstance(activation, str):
            activation = [activation] * n_hidden
        activation = list(activation)
        if len(activation) != n_hidden:
            raise ShapeMismatchError("need one activation tag per hidden layer")
        for tag in activation:
            if tag not in ACTIVATIONS:
                raise ValueError(f"unknown activation '{tag}', expected one of {config.ACTIVATIONS}")

        self.widths = widths
        self.activations = activation
        rng = rng if rng is not None else np.random.default_rng(0)
        self.params = {}
        for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            self.params[f"W{i}"] = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.params[f"b{i}"] = np.zeros(fan_out)

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1

    @property
    def in_dim(self) -> int:
        return self.widths[0]

    @property
    def out_dim(self) -> int:
        return self.widths[-1]

    def copy(self) -> "Mlp":
        clone = Mlp.__new__(Mlp)
        clone.widths = list(self.widths)
        clone.activations = list(self.activations)
        clone.params = {k: v.copy() for k, v in self.params.items()}
        return clone

    def _as_batch(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.ndim != 2 or batch.shape[1] != self.in_dim:
            raise ShapeMismatchError(
                f"input width {batch.shape[-1] if batch.ndim else 0} != network input {self.in_dim}"
            )
        return batch, single

    def _forward_cache(self, batch):
        cache = []
        a = batch
        for i in range(self.n_layers):
            z = a @ self.params[f"W{i}"] + self.params[f"b{i}"]
            cache.append((a, z))
            if i < self.n_layers - 1:
                a = ACTIVATIONS[self.activations[i]][0](z)
            else:
                a = z
        return a, cache

    def forward(self, x) -> np.ndarray:
        """Output for one row (1-D input) or a batch of rows (2-D input)."""
        batch, single = self._as_batch(x)
        out, _ = self._forward_cache(batch)
        return out[0] if single else out

    __call__ = forward

    def backward(self, x, upstream_grad) -> Gradients:
        """
        Gradients of ⟨upstream_grad, forward(x)⟩ with respect to every
        parameter and to the input. Batched rows are summed.
        """
        batch, single = self._as_batch(x)
        g = np.asarray(upstream_grad, dtype=float)
        g = g[None, :] if g.ndim == 1 else g
        if g.shape != (batch.shape[0], self.out_dim):
            raise ShapeMismatchError(f"upstream gradient shape {g.shape} does not match output")
        _, cache = self._forward_cache(batch)
        grads = {}
        for i in reversed(range(self.n_layers)):
            a_in, z = cache[i]
            if i < self.n_layers - 1:
                g = g * ACTIVATIONS[self.activations[i]][1](z)
            grads[f"W{i}"] = a_in.T @ g
            grads[f"b{i}"] = g.sum(axis=0)
            g = g @ self.params[f"W{i}"].T
        return Gradients(params=grads, inputs=g[0] if single else g)


def polyak_update(target: Mlp, online: Mlp, tau: float) -> None:
    """target ← target + τ·(online − target), in place."""
    for key, value in online.params.items():
        target.params[key] += tau * (value - target.params[key])
