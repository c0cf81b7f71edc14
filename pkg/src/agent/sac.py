"""
Soft Actor-Critic
Twin clipped-double Q critics with Polyak-averaged targets, a
reparameterized tanh-Gaussian actor, and automatic entropy tuning toward
a target entropy of −(action dim).
"""
import logging

import numpy as np

import config
from src.agent.networks import (
    TanhGaussianActor, critic_regression_step, make_critic, q_action_grad, q_values,
)
from src.agent.replay_buffer import Transitions
from src.envs.base import EnvSpec
from src.nn import Adam, polyak_update

logger = logging.getLogger(__name__)


class SacAgent:
    name = "sac"

    def __init__(
        self,
        spec: EnvSpec,
        gamma: float = 0.99,
        tau: float = 0.005,
        lr: float = 1e-3,
        hidden=tuple(config.POLICY_HIDDEN),
        activation: str = config.POLICY_ACTIVATION,
        init_alpha: float = config.SAC_INIT_ALPHA,
        seed: int = 0,
    ):
        rng = np.random.default_rng(seed)
        self.obs_dim = spec.obs_dim
        self.action_dim = spec.action_dim
        self.gamma = gamma
        self.tau = tau
        self.actor = TanhGaussianActor(spec.obs_dim, spec.action_dim, spec.action_low, spec.action_high,
                                       hidden, activation, rng)
        self.critics = [make_critic(spec.obs_dim, spec.action_dim, hidden, activation, rng) for _ in range(2)]
        self.target_critics = [critic.copy() for critic in self.critics]
        self.log_alpha = np.array([np.log(init_alpha)])
        self.target_entropy = -float(spec.action_dim)
        self.actor_optimizer = Adam(lr=lr)
        self.critic_optimizers = [Adam(lr=lr) for _ in self.critics]
        self.alpha_optimizer = Adam(lr=lr)
        self.updates = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    def act(self, state, mode: str = "explore", rng=None) -> np.ndarray:
        single = np.ndim(state) == 1
        if mode == "evaluate":
            actions = self.actor.deterministic(state)
        elif mode == "explore":
            actions = self.actor.sample(state, rng)[0]
        else:
            raise ValueError(f"unknown act mode '{mode}'")
        return actions[0] if single else actions

    # ─── Losses ──────────────────────────────────────────────────────────────

    def q_targets(self, batch: Transitions, rng) -> np.ndarray:
        """r + γ·(1 − done)·(min target Q(s', a') − α·log π(a'|s'))."""
        next_actions, next_log_prob = self.actor.sample(batch.next_states, rng)[:2]
        next_q = np.minimum(*(q_values(c, batch.next_states, next_actions) for c in self.target_critics))
        soft_value = next_q - self.alpha * next_log_prob
        return batch.rewards + self.gamma * (1.0 - batch.dones.astype(float)) * soft_value

    def actor_loss_and_grad(self, states, eps):
        """
        mean(α·log π(a|s) − min Q(s, a)) for a = squash(μ + σ·eps), with its
        gradient with respect to the actor parameters.
        """
        states = np.atleast_2d(states)
        actions, log_prob, u, eps, _, log_std, mask = self.actor.sample(states, None, eps=eps)
        q = [q_values(c, states, actions) for c in self.critics]
        use_first = q[0] <= q[1]
        q_min = np.where(use_first, q[0], q[1])
        dq_da = np.where(use_first[:, None],
                         q_action_grad(self.critics[0], states, actions),
                         q_action_grad(self.critics[1], states, actions))
        alpha = self.alpha
        count = states.shape[0]
        loss = float(np.mean(alpha * log_prob - q_min))

        std = np.exp(log_std)
        tanh_u = np.tanh(u)
        da_du = self.actor.scale * (1.0 - tanh_u ** 2)
        dq_du = dq_da * da_du
        d_mean = (alpha * 2.0 * tanh_u - dq_du) / count
        d_log_std = (alpha * (-1.0 + 2.0 * tanh_u * std * eps) - dq_du * std * eps) / count
        return loss, self.actor.backward(states, d_mean, d_log_std, mask), log_prob

    # ─── Update ──────────────────────────────────────────────────────────────

    def update(self, batch: Transitions, rng) -> dict:
        targets = self.q_targets(batch, rng)
        q_loss = sum(
            critic_regression_step(critic, opt, batch.states, batch.actions, targets)
            for critic, opt in zip(self.critics, self.critic_optimizers)
        )

        eps = rng.standard_normal((len(batch), self.action_dim))
        actor_loss, actor_grads, log_prob = self.actor_loss_and_grad(batch.states, eps)
        self.actor_optimizer.step(self.actor.net.params, actor_grads)

        alpha_grad = -np.mean(log_prob + self.target_entropy)
        alpha_loss = float(-self.log_alpha[0] * np.mean(log_prob + self.target_entropy))
        self.alpha_optimizer.step({"log_alpha": self.log_alpha}, {"log_alpha": np.array([alpha_grad])})

        for target, online in zip(self.target_critics, self.critics):
            polyak_update(target, online, self.tau)
        self.updates += 1
        return {"q_loss": q_loss, "actor_loss": actor_loss, "alpha_loss": alpha_loss, "alpha": self.alpha}


def sac_update(agent: SacAgent, batch: Transitions, rng) -> dict:
    return agent.update(batch, rng)
