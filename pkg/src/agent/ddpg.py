"""
DDPG with a Probabilistic Actor
The actor emits a Gaussian over pre-squash actions and exploration samples
from it; the critic regresses onto r + γ·Q_target(s', squash(μ(s'))) and
the actor ascends Q at its mean action. Optional additive exploration
noise is annealed linearly over training.
"""
import logging

import numpy as np

import config
from src.agent.networks import TanhGaussianActor, critic_regression_step, make_critic, q_action_grad, q_values
from src.agent.replay_buffer import Transitions
from src.envs.base import EnvSpec
from src.nn import Adam, polyak_update

logger = logging.getLogger(__name__)


class DdpgAgent:
    name = "ddpg"

    def __init__(
        self,
        spec: EnvSpec,
        gamma: float = 0.9,
        tau: float = 0.005,
        lr: float = 5e-5,
        hidden=tuple(config.POLICY_HIDDEN),
        activation: str = config.POLICY_ACTIVATION,
        explore_noise: bool = False,
        explore_start: float = config.DDPG_EXPLORE_START,
        explore_end: float = config.DDPG_EXPLORE_END,
        seed: int = 0,
    ):
        rng = np.random.default_rng(seed)
        self.obs_dim = spec.obs_dim
        self.action_dim = spec.action_dim
        self.action_low = np.asarray(spec.action_low, dtype=float)
        self.action_high = np.asarray(spec.action_high, dtype=float)
        self.gamma = gamma
        self.tau = tau
        self.actor = TanhGaussianActor(spec.obs_dim, spec.action_dim, spec.action_low, spec.action_high,
                                       hidden, activation, rng)
        self.critic = make_critic(spec.obs_dim, spec.action_dim, hidden, activation, rng)
        self.target_critic = self.critic.copy()
        self.actor_optimizer = Adam(lr=lr)
        self.critic_optimizer = Adam(lr=lr)
        self.explore_noise = explore_noise
        self.explore_start = explore_start
        self.explore_end = explore_end
        self.explore_sigma = explore_start
        self.updates = 0

    def set_progress(self, fraction: float) -> None:
        """Anneal the exploration noise with the fraction of the step budget used."""
        fraction = min(max(fraction, 0.0), 1.0)
        self.explore_sigma = self.explore_start + (self.explore_end - self.explore_start) * fraction

    def act(self, state, mode: str = "explore", rng=None) -> np.ndarray:
        single = np.ndim(state) == 1
        if mode == "evaluate":
            actions = self.actor.deterministic(state)
        elif mode == "explore":
            actions = self.actor.sample(state, rng)[0]
            if self.explore_noise:
                noise = self.explore_sigma * self.actor.scale * rng.standard_normal(actions.shape)
                actions = np.clip(actions + noise, self.action_low, self.action_high)
        else:
            raise ValueError(f"unknown act mode '{mode}'")
        return actions[0] if single else actions

    def q_targets(self, batch: Transitions) -> np.ndarray:
        next_actions = self.actor.deterministic(batch.next_states)
        next_q = q_values(self.target_critic, batch.next_states, next_actions)
        return batch.rewards + self.gamma * (1.0 - batch.dones.astype(float)) * next_q

    def actor_loss_and_grad(self, states):
        """−mean Q(s, squash(μ(s))) and its gradient; the std head gets none."""
        states = np.atleast_2d(states)
        mean, log_std, mask = self.actor.distribution(states)
        actions = self.actor.squash(mean)
        loss = -float(np.mean(q_values(self.critic, states, actions)))
        dq_da = q_action_grad(self.critic, states, actions)
        d_mean = -dq_da * self.actor.scale * (1.0 - np.tanh(mean) ** 2) / states.shape[0]
        return loss, self.actor.backward(states, d_mean, np.zeros_like(log_std), mask)

    def update(self, batch: Transitions, rng=None) -> dict:
        targets = self.q_targets(batch)
        q_loss = critic_regression_step(self.critic, self.critic_optimizer, batch.states, batch.actions, targets)
        actor_loss, grads = self.actor_loss_and_grad(batch.states)
        self.actor_optimizer.step(self.actor.net.params, grads)
        polyak_update(self.target_critic, self.critic, self.tau)
        self.updates += 1
        return {"q_loss": q_loss, "actor_loss": actor_loss}


def ddpg_update(agent: DdpgAgent, batch: Transitions) -> dict:
    return agent.update(batch)
