"""
Joint Reward-Dynamics Model Interface
Shared plumbing for the GP and ensemble backends: building (input, target)
pairs from transitions, standardization, prediction carriers, held-out
likelihood, and joblib persistence.
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

import joblib
import numpy as np
from scipy.stats import multivariate_normal
from sklearn.preprocessing import StandardScaler

from src.core import MvNormal
from src.exceptions import DegenerateDataError, ModelNotFittedError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class JointPrediction:
    """Predictive N(mean, cov) over (next-state delta, reward); reward is last."""

    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def reward_index(self) -> int:
        return self.mean.size - 1

    @property
    def state_mean(self) -> np.ndarray:
        return self.mean[:-1]

    @property
    def reward_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def reward_std(self) -> float:
        return float(np.sqrt(max(self.cov[-1, -1], 0.0)))

    @property
    def state_std(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov)[:-1], 0.0, None))

    @property
    def state_reward_cov(self) -> np.ndarray:
        return self.cov[:-1, -1]

    def as_mvnormal(self) -> MvNormal:
        return MvNormal(self.mean, self.cov)


def model_inputs(states: np.ndarray, actions: np.ndarray) -> np.ndarray:
    """x = (full observation, action) per row."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    actions = np.atleast_2d(np.asarray(actions, dtype=float))
    if states.shape[0] != actions.shape[0]:
        raise ShapeMismatchError("states and actions differ in row count")
    return np.concatenate([states, actions], axis=1)


def model_targets(states, next_states, rewards, dynamic_idx) -> np.ndarray:
    """y = (delta of dynamic components, reward) per row."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    next_states = np.atleast_2d(np.asarray(next_states, dtype=float))
    deltas = next_states[:, dynamic_idx] - states[:, dynamic_idx]
    return np.concatenate([deltas, np.asarray(rewards, dtype=float).reshape(-1, 1)], axis=1)


class JointModel(ABC):
    """
    Base class for p(Δs, r | s, a). Subclasses implement `_fit_standardized`
    and `_predict_standardized`; this class owns the scalers and the
    conversion back to environment units.
    """

    name = "joint"

    def __init__(self, obs_dim: int, action_dim: int, dynamic_idx):
        self.obs_dim = int(obs_dim)
        self.action_dim = int(action_dim)
        self.dynamic_idx = np.asarray(dynamic_idx, dtype=int)
        self.input_dim = self.obs_dim + self.action_dim
        self.output_dim = self.dynamic_idx.size + 1
        self.x_scaler = StandardScaler()
        self.y_scaler = StandardScaler()
        self.is_fitted = False
        self.metrics = {}

    # ─── Fitting ─────────────────────────────────────────────────────────────

    def fit(self, data, rng: np.random.Generator) -> "JointModel":
        """Fit on every transition of a TransitionBuffer (or Transitions batch)."""
        return self.fit_arrays(data.states, data.actions, data.next_states, data.rewards, rng)

    def fit_arrays(self, states, actions, next_states, rewards, rng: np.random.Generator) -> "JointModel":
        x = model_inputs(states, actions)
        y = model_targets(states, next_states, rewards, self.dynamic_idx)
        if x.shape[0] < 2:
            raise DegenerateDataError(f"need at least 2 transitions to fit, got {x.shape[0]}")
        if x.shape[1] != self.input_dim:
            raise ShapeMismatchError(f"input width {x.shape[1]} != model input {self.input_dim}")
        self.x_scaler.fit(x)
        self.y_scaler.fit(y)
        x, y = self._select_training_rows(x, y, rng)
        self._fit_standardized(self.x_scaler.transform(x), self.y_scaler.transform(y), rng)
        self.is_fitted = True
        return self

    def _select_training_rows(self, x, y, rng):
        return x, y

    @abstractmethod
    def _fit_standardized(self, x: np.ndarray, y: np.ndarray, rng: np.random.Generator) -> None:
        ...

    # ─── Prediction ──────────────────────────────────────────────────────────

    def _require_fitted(self) -> None:
        if not self.is_fitted:
            raise ModelNotFittedError(f"{self.name} model has not been fitted")

    @abstractmethod
    def _predict_standardized(self, x: np.ndarray, **kwargs) -> tuple[np.ndarray, np.ndarray]:
        """Returns (means (n, D), covariances (n, D, D)) in standardized units."""

    def predict_batch(self, states, actions, **kwargs) -> tuple[np.ndarray, np.ndarray]:
        """Means (n, D) and covariances (n, D, D) in environment units."""
        self._require_fitted()
        x = model_inputs(states, actions)
        if x.shape[1] != self.input_dim:
            raise ShapeMismatchError(f"input width {x.shape[1]} != model input {self.input_dim}")
        means, covs = self._predict_standardized(self.x_scaler.transform(x), **kwargs)
        scale = self.y_scaler.scale_
        means = means * scale + self.y_scaler.mean_
        covs = covs * np.outer(scale, scale)
        covs = 0.5 * (covs + np.swapaxes(covs, 1, 2))
        return means, covs

    def predict(self, state, action, **kwargs) -> JointPrediction:
        means, covs = self.predict_batch(np.atleast_2d(state), np.atleast_2d(action), **kwargs)
        return JointPrediction(means[0], covs[0])

    def rollout_kwargs(self, rng) -> dict:
        """Extra keyword arguments for predictions made inside model rollouts."""
        return {}

    # ─── Evaluation ──────────────────────────────────────────────────────────

    def _nll_kwargs(self) -> dict:
        return {}

    def predictive_nll(self, states, actions, next_states, rewards) -> float:
        """Mean negative log-density of held-out targets under the predictive law."""
        self._require_fitted()
        y = model_targets(states, next_states, rewards, self.dynamic_idx)
        means, covs = self.predict_batch(states, actions, **self._nll_kwargs())
        total = 0.0
        for target, mean, cov in zip(y, means, covs):
            total -= multivariate_normal.logpdf(target, mean, cov, allow_singular=True)
        return float(total / len(y))

    # ─── Persistence ─────────────────────────────────────────────────────────

    def save_model(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        joblib.dump(self, path)
        return path

    @staticmethod
    def load_model(path) -> "JointModel":
        return joblib.load(Path(path))
