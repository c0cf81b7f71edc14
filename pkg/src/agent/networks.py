"""
Actor and Critic Networks
Tanh-Gaussian actor emitting (mean, log-std) of a pre-squash Gaussian,
with actions center + scale·tanh(u), and Q-network helpers shared by
SAC and the probabilistic DDPG agent.
"""
import numpy as np

import config
from src.nn import Mlp

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


def log_one_minus_tanh_sq(u):
    """log(1 − tanh²u) without cancellation for large |u|."""
    return 2.0 * (np.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


class TanhGaussianActor:
    def __init__(self, obs_dim: int, action_dim: int, action_low, action_high,
                 hidden=(256, 256), activation: str = "silu", rng=None,
                 log_std_min: float = config.LOG_STD_MIN, log_std_max: float = config.LOG_STD_MAX):
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        low = np.asarray(action_low, dtype=float)
        high = np.asarray(action_high, dtype=float)
        self.center = 0.5 * (high + low)
        self.scale = 0.5 * (high - low)
        self.log_std_min = log_std_min
        self.log_std_max = log_std_max
        self.net = Mlp([obs_dim, *hidden, 2 * action_dim], activation=activation, rng=rng)

    def distribution(self, states):
        """(mean, log_std, mask) where mask is 1 where the log-std is not clipped."""
        raw = self.net(np.atleast_2d(states))
        mean = raw[:, : self.action_dim]
        raw_ls = raw[:, self.action_dim:]
        log_std = np.clip(raw_ls, self.log_std_min, self.log_std_max)
        mask = ((raw_ls >= self.log_std_min) & (raw_ls <= self.log_std_max)).astype(float)
        return mean, log_std, mask

    def squash(self, u):
        return self.center + self.scale * np.tanh(u)

    def deterministic(self, states) -> np.ndarray:
        mean, _, _ = self.distribution(states)
        return self.squash(mean)

    def log_prob_of_noise(self, u, eps, log_std) -> np.ndarray:
        """Density of the squashed action in action space, per row."""
        gauss = np.sum(-0.5 * eps ** 2 - log_std - _HALF_LOG_2PI, axis=1)
        jacobian = np.sum(log_one_minus_tanh_sq(u), axis=1) + np.sum(np.log(self.scale))
        return gauss - jacobian

    def sample(self, states, rng, eps=None):
        """Returns (actions, log_prob, u, eps, mean, log_std, mask)."""
        mean, log_std, mask = self.distribution(states)
        if eps is None:
            eps = rng.standard_normal(mean.shape)
        u = mean + np.exp(log_std) * eps
        return self.squash(u), self.log_prob_of_noise(u, eps, log_std), u, eps, mean, log_std, mask

    def log_prob(self, states, actions) -> np.ndarray:
        """Analytic log-density of given actions (strictly inside the bounds)."""
        mean, log_std, _ = self.distribution(states)
        u = np.arctanh((np.atleast_2d(actions) - self.center) / self.scale)
        eps = (u - mean) / np.exp(log_std)
        return self.log_prob_of_noise(u, eps, log_std)

    def backward(self, states, d_mean, d_log_std, mask):
        """Parameter gradients from upstream gradients on (mean, clipped log-std)."""
        return self.net.backward(np.atleast_2d(states), np.concatenate([d_mean, d_log_std * mask], axis=1)).params


# ─── Critics ─────────────────────────────────────────────────────────────────

def make_critic(obs_dim: int, action_dim: int, hidden=(256, 256), activation: str = "silu", rng=None) -> Mlp:
    return Mlp([obs_dim + action_dim, *hidden, 1], activation=activation, rng=rng)


def q_values(critic: Mlp, states, actions) -> np.ndarray:
    return critic(np.concatenate([np.atleast_2d(states), np.atleast_2d(actions)], axis=1))[:, 0]


def q_action_grad(critic: Mlp, states, actions) -> np.ndarray:
    """dQ/da per row."""
    states = np.atleast_2d(states)
    x = np.concatenate([states, np.atleast_2d(actions)], axis=1)
    return critic.backward(x, np.ones((x.shape[0], 1))).inputs[:, states.shape[1]:]


def critic_regression_step(critic: Mlp, optimizer, states, actions, targets) -> float:
    """One Adam step on mean squared Bellman error; returns the loss before the step."""
    x = np.concatenate([states, actions], axis=1)
    err = critic(x)[:, 0] - targets
    grads = critic.backward(x, (2.0 * err / err.size)[:, None]).params
    optimizer.step(critic.params, grads)
    return float(np.mean(err ** 2))
