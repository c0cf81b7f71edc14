"""Common episodic interface shared by every environment."""
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class EnvSpec:
    """Observation/action metadata; `dynamic_idx` lists the modeled components."""

    name: str
    obs_dim: int
    action_dim: int
    dynamic_idx: tuple
    action_low: np.ndarray
    action_high: np.ndarray
    obs_low: np.ndarray
    obs_high: np.ndarray
    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if any(i < 0 or i >= self.obs_dim for i in self.dynamic_idx):
            raise ValueError("dynamic indices must lie in [0, obs_dim)")

    def clip_action(self, action) -> np.ndarray:
        return np.clip(np.asarray(action, dtype=float), self.action_low, self.action_high)

    def clip_obs(self, obs) -> np.ndarray:
        return np.clip(np.asarray(obs, dtype=float), self.obs_low, self.obs_high)


class Environment(ABC):
    """
    Episodic environment. `step_count` counts every real step taken since
    construction and is never reset, so callers can check who interacted.
    """

    spec: EnvSpec

    def __init__(self):
        self.t = 0
        self.step_count = 0
        self._obs = None

    @property
    def observation(self) -> np.ndarray:
        return self._obs.copy()

    def reset(self, rng: np.random.Generator, **overrides) -> np.ndarray:
        self.t = 0
        self._obs = self._reset(rng, **overrides)
        return self.observation

    def step(self, action):
        """Returns (next observation, reward, done)."""
        if self._obs is None:
            raise RuntimeError("reset() must be called before step()")
        action = self.spec.clip_action(action)
        obs, reward = self._step(action)
        self._obs = obs
        self.t += 1
        self.step_count += 1
        return self.observation, float(reward), self.t >= self.spec.horizon

    @abstractmethod
    def _reset(self, rng: np.random.Generator, **overrides) -> np.ndarray:
        ...

    @abstractmethod
    def _step(self, action: np.ndarray):
        ...

    @abstractmethod
    def state_reward(self, obs, action, visited=None) -> float:
        """Reward for arriving at `obs` under `action`."""

    def reward_oracle(self, state, action, next_state, visited=None) -> float:
        """Reward of the transition (state, action) → next_state; never advances the episode."""
        return self.state_reward(next_state, self.spec.clip_action(action), visited)
