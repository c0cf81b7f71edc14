"""
Hallucination Strategies
Each rule turns one joint prediction over (next-state delta, reward) into a
single simulated outcome. All rules are pure functions of their inputs and
the generator they are handed; predictions are never modified.
"""
from dataclasses import dataclass
from typing import Callable

import numpy as np

import config
from src.core import gaussian_condition, truncated_normal_sample
from src.ml.base import JointPrediction


def compose_next_state(state: np.ndarray, delta: np.ndarray, dynamic_idx) -> np.ndarray:
    """s' = s with the dynamic components advanced by `delta`."""
    next_state = np.array(state, dtype=float, copy=True)
    next_state[np.asarray(dynamic_idx, dtype=int)] += delta
    return next_state


def optimistic_reward(pred: JointPrediction, r_min: float, rng, u: float | None = None) -> float:
    """Reward drawn from its predictive marginal above the r_min quantile."""
    return truncated_normal_sample(pred.reward_mean, pred.reward_std, r_min, rng, u=u)


def _conditional_state(pred: JointPrediction, reward: float):
    return gaussian_condition(pred.as_mvnormal(), [pred.reward_index], [reward])


# ─── Strategies ──────────────────────────────────────────────────────────────

def hallucinate_greedy(pred: JointPrediction):
    return pred.state_mean.copy(), pred.reward_mean


def hallucinate_greedy_known_reward(pred: JointPrediction, state, action, reward_oracle, dynamic_idx):
    delta = pred.state_mean.copy()
    return delta, float(reward_oracle(state, action, compose_next_state(state, delta, dynamic_idx)))


def hallucinate_hotgp(pred: JointPrediction, r_min: float, rng, u: float | None = None):
    """Optimistic reward, then the expected next state given that reward."""
    reward = optimistic_reward(pred, r_min, rng, u)
    if pred.reward_std == 0.0:
        return pred.state_mean.copy(), reward
    return _conditional_state(pred, reward).mean, reward


def hallucinate_thompson(pred: JointPrediction, r_min: float, rng, u: float | None = None):
    """Optimistic reward, then a draw from the reward-conditioned state law."""
    reward = optimistic_reward(pred, r_min, rng, u)
    if pred.reward_std == 0.0:
        return pred.as_mvnormal().marginal(np.arange(pred.reward_index)).sample(rng), reward
    return _conditional_state(pred, reward).sample(rng), reward


def hallucinate_optimistic_diagonal(pred: JointPrediction, r_min: float, rng, u: float | None = None):
    """Optimistic reward with the unconditioned mean state."""
    return pred.state_mean.copy(), optimistic_reward(pred, r_min, rng, u)


def hallucinate_mbpo(pred: JointPrediction, rng):
    """Joint draw of (delta, reward) from the full predictive Gaussian."""
    draw = pred.as_mvnormal().sample(rng)
    return draw[:-1], float(draw[-1])


def hucrl_candidates(pred: JointPrediction, beta: float, count: int, rng, eta=None) -> np.ndarray:
    """Candidate deltas μ_s + β·σ_s∘η with η ~ U([−1, 1]) per candidate."""
    if eta is None:
        eta = rng.uniform(-1.0, 1.0, size=(count, pred.reward_index))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    return pred.state_mean[None, :] + beta * pred.state_std[None, :] * eta


def hallucinate_hucrl(pred: JointPrediction, reward_fn: Callable, beta: float, count: int, rng, eta=None):
    """
    Picks the candidate delta with the highest `reward_fn(delta)` and reports
    that score as the reward. Ties go to the earliest candidate.
    """
    if count < 1:
        raise ValueError("H-UCRL needs at least one candidate")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    deltas = hucrl_candidates(pred, beta, count, rng, eta)
    scores = np.array([reward_fn(delta) for delta in deltas])
    best = int(np.argmax(scores))
    return deltas[best].copy(), float(scores[best])


def model_reward_fn(pred: JointPrediction) -> Callable:
    """E[r | Δs = delta] under the joint prediction."""
    state_idx = np.arange(pred.reward_index)

    def score(delta):
        return float(gaussian_condition(pred.as_mvnormal(), state_idx, delta).mean[0])

    return score


def known_reward_fn(reward_oracle, state, action, dynamic_idx, action_fn: Callable | None = None) -> Callable:
    """
    True reward for arriving at s + delta. With `action_fn` the action is
    re-chosen by the policy at the candidate state, otherwise the executed
    action is used.
    """

    def score(delta):
        candidate = compose_next_state(state, delta, dynamic_idx)
        candidate_action = action if action_fn is None else action_fn(candidate)
        return float(reward_oracle(state, candidate_action, candidate))

    return score


# ─── Dispatch ────────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class Strategy:
    """A configured hallucination rule bound to an environment's reward oracle."""

    kind: str
    beta: float = config.HUCRL_BETA
    candidates: int = config.HUCRL_CANDIDATES
    reward_oracle: Callable | None = None
    dynamic_idx: tuple = ()

    def __post_init__(self):
        if self.kind not in config.STRATEGIES:
            raise ValueError(f"unknown strategy '{self.kind}', expected one of {config.STRATEGIES}")
        if self.kind.startswith("hucrl") and (self.beta <= 0 or self.candidates < 1):
            raise ValueError("H-UCRL needs beta > 0 and at least one candidate")
        if self.kind.endswith("known_reward") and self.reward_oracle is None:
            raise ValueError(f"strategy '{self.kind}' needs the environment reward oracle")

    def __call__(self, pred: JointPrediction, r_min: float, rng, state=None, action=None,
                 action_fn: Callable | None = None):
        """Returns (next-state delta, reward)."""
        kind = self.kind
        if kind == "greedy":
            return hallucinate_greedy(pred)
        if kind == "greedy_known_reward":
            return hallucinate_greedy_known_reward(pred, state, action, self.reward_oracle, self.dynamic_idx)
        if kind == "hot_gp":
            return hallucinate_hotgp(pred, r_min, rng)
        if kind == "thompson":
            return hallucinate_thompson(pred, r_min, rng)
        if kind == "optimistic_diagonal":
            return hallucinate_optimistic_diagonal(pred, r_min, rng)
        if kind == "mbpo":
            return hallucinate_mbpo(pred, rng)
        if kind == "hucrl_approx":
            return hallucinate_hucrl(pred, model_reward_fn(pred), self.beta, self.candidates, rng)
        # hucrl_known_reward
        delta, _ = hallucinate_hucrl(
            pred,
            known_reward_fn(self.reward_oracle, state, action, self.dynamic_idx, action_fn),
            self.beta, self.candidates, rng,
        )
        next_state = compose_next_state(state, delta, self.dynamic_idx)
        return delta, float(self.reward_oracle(state, action, next_state))
