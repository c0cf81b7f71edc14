"""Adam optimizer over dictionaries of numpy parameters."""
import numpy as np

import config


class Adam:
    """Bias-corrected Adam; updates parameter arrays in place."""

    def __init__(
        self,
        lr: float = 1e-3,
        beta1: float = config.ADAM_BETA1,
        beta2: float = config.ADAM_BETA2,
        epsilon: float = config.ADAM_EPSILON,
    ):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.m = {}
        self.v = {}
        self.t = 0

    def step(self, params: dict, grads: dict) -> dict:
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for key, g in grads.items():
            p = params[key]
            if g.shape != p.shape:
                raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for '{key}'")
            if key not in self.m:
                self.m[key] = np.zeros_like(p)
                self.v[key] = np.zeros_like(p)
            self.m[key] = self.beta1 * self.m[key] + (1.0 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[key] / bc1
            v_hat = self.v[key] / bc2
            p -= self.lr * m_hat / (np.sqrt(v_hat) + self.epsilon)
        return params


def adam_step(state: Adam, params: dict, grads: dict) -> dict:
    return state.step(params, grads)
