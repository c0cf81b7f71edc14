"""
Sparse Two-Link Arm
Kinematic planar arm under joint-velocity control. The distance reward is
paid only within the goal threshold; an optional action penalty is
subtracted.
"""
import numpy as np

import config
from src.envs.base import EnvSpec, Environment


def wrap_angle(theta):
    """Map angles into (−π, π]."""
    return np.pi - np.mod(np.pi - np.asarray(theta, dtype=float), 2.0 * np.pi)


class ArmEnv(Environment):
    """Observation (cosθ₁, sinθ₁, cosθ₂, sinθ₂, goal 2, end effector 2)."""

    def __init__(
        self,
        horizon: int = 150,
        action_penalty: float = 0.0,
        literal_penalty_sign: bool = False,
        link_lengths=config.ARM_LINK_LENGTHS,
        goal_threshold: float = config.ARM_GOAL_THRESHOLD,
        dt: float = config.ARM_DT,
        max_joint_speed: float = config.ARM_MAX_JOINT_SPEED,
    ):
        super().__init__()
        self.action_penalty = action_penalty
        self.literal_penalty_sign = literal_penalty_sign
        self.link_lengths = tuple(float(v) for v in link_lengths)
        self.goal_threshold = goal_threshold
        self.dt = dt
        self.angles = np.zeros(2)
        reach = sum(self.link_lengths)
        low = np.concatenate([np.full(4, -1.0), np.full(4, -reach)])
        self.spec = EnvSpec(
            name="sparse_arm",
            obs_dim=8,
            action_dim=2,
            dynamic_idx=(0, 1, 2, 3, 6, 7),
            action_low=np.full(2, -max_joint_speed),
            action_high=np.full(2, max_joint_speed),
            obs_low=low,
            obs_high=-low,
            horizon=horizon,
        )

    def end_effector(self, angles) -> np.ndarray:
        l1, l2 = self.link_lengths
        t1, t2 = angles
        return np.array([
            l1 * np.cos(t1) + l2 * np.cos(t1 + t2),
            l1 * np.sin(t1) + l2 * np.sin(t1 + t2),
        ])

    def _observe(self, goal) -> np.ndarray:
        t1, t2 = self.angles
        return np.concatenate([
            [np.cos(t1), np.sin(t1), np.cos(t2), np.sin(t2)], goal, self.end_effector(self.angles),
        ])

    def _reset(self, rng, angles=None, goal=None):
        if angles is None:
            angles = rng.uniform(-np.pi, np.pi, size=2)
        self.angles = wrap_angle(angles)
        if goal is None:
            lo, hi = config.ARM_GOAL_RADIUS
            radius = rng.uniform(lo, hi)
            heading = rng.uniform(-np.pi, np.pi)
            goal = radius * np.array([np.cos(heading), np.sin(heading)])
        goal = np.asarray(goal, dtype=float)
        if np.linalg.norm(goal) > sum(self.link_lengths):
            raise ValueError("goal is outside the arm's reach")
        return self._observe(goal)

    def _step(self, action):
        self.angles = wrap_angle(self.angles + action * self.dt)
        obs = self._observe(self._obs[4:6])
        return obs, self.state_reward(obs, action)

    def action_cost(self, action) -> float:
        return float(1.0 - np.exp(-np.sum(np.square(action))))

    def state_reward(self, obs, action, visited=None) -> float:
        obs = np.asarray(obs, dtype=float)
        dist = np.linalg.norm(obs[6:8] - obs[4:6])
        r_dist = float(np.exp(-dist ** 2)) if dist < self.goal_threshold else 0.0
        sign = -1.0 if self.literal_penalty_sign else 1.0
        return r_dist - sign * self.action_penalty * self.action_cost(action)
