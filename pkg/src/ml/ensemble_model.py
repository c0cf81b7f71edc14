"""
Probabilistic Ensemble Model
E bootstrapped networks, each emitting a diagonal Gaussian over
(next-state delta, reward). Predictions are either the moment-matched
mixture or a single member's Gaussian.
"""
import logging

import numpy as np

import config
from src.ml.base import JointModel
from src.nn import Adam, GaussianHead, Mlp

logger = logging.getLogger(__name__)


def gaussian_nll_and_grad(raw: np.ndarray, y: np.ndarray, head: GaussianHead):
    """
    Mean over batch and dimensions of 0.5·[(y − μ)²·e^{−logvar} + logvar],
    and its gradient with respect to the raw network output.
    """
    mean, logvar, dlogvar_draw = head.split(raw)
    inv_var = np.exp(-logvar)
    err = y - mean
    loss = 0.5 * np.mean(err ** 2 * inv_var + logvar)
    count = err.size
    d_mean = -err * inv_var / count
    d_logvar = 0.5 * (1.0 - err ** 2 * inv_var) / count
    return float(loss), head.merge_grad(d_mean, d_logvar, dlogvar_draw)


class EnsembleJointModel(JointModel):
    """Ensemble of Gaussian-output MLPs trained on bootstrap resamples."""

    name = "ensemble"

    def __init__(
        self,
        obs_dim: int,
        action_dim: int,
        dynamic_idx,
        ensemble_size: int = config.ENSEMBLE_SIZE,
        hidden=tuple(config.ENSEMBLE_HIDDEN),
        activation: str = config.ENSEMBLE_ACTIVATION,
        epochs: int = config.ENSEMBLE_EPOCHS,
        lr: float = config.ENSEMBLE_LR,
        batch_size: int = config.ENSEMBLE_BATCH_SIZE,
        clamp_logvar: bool = True,
        bootstrap_mode: str = "mean",
        seed: int = 0,
    ):
        super().__init__(obs_dim, action_dim, dynamic_idx)
        if ensemble_size < 1:
            raise ValueError("ensemble_size must be at least 1")
        if bootstrap_mode not in config.BOOTSTRAP_MODES:
            raise ValueError(f"bootstrap_mode must be one of {config.BOOTSTRAP_MODES}")
        self.epochs = int(epochs)
        self.lr = lr
        self.batch_size = int(batch_size)
        self.bootstrap_mode = bootstrap_mode
        self.head = GaussianHead(self.output_dim, clamp=clamp_logvar)
        init_rng = np.random.default_rng(seed)
        widths = [self.input_dim, *hidden, 2 * self.output_dim]
        self.members = [Mlp(widths, activation=activation, rng=init_rng) for _ in range(ensemble_size)]
        self._optimizers = [Adam(lr=lr) for _ in self.members]

    @property
    def ensemble_size(self) -> int:
        return len(self.members)

    def _fit_standardized(self, x, y, rng):
        n = x.shape[0]
        losses = []
        for member, optimizer in zip(self.members, self._optimizers):
            boot = rng.integers(0, n, size=n)
            xb, yb = x[boot], y[boot]
            for _ in range(self.epochs):
                order = rng.permutation(n)
                for start in range(0, n, self.batch_size):
                    idx = order[start:start + self.batch_size]
                    _, d_raw = gaussian_nll_and_grad(member(xb[idx]), yb[idx], self.head)
                    optimizer.step(member.params, member.backward(xb[idx], d_raw).params)
            losses.append(gaussian_nll_and_grad(member(xb), yb, self.head)[0])
        self.metrics = {"n_train": n, "member_nll": [float(v) for v in losses]}
        logger.info("ensemble refit on %d transitions: mean member NLL %.4f", n, float(np.mean(losses)))

    def member_moments(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Member means and variances, each (E, n, D), in standardized units."""
        means, variances = [], []
        for member in self.members:
            mean, logvar, _ = self.head.split(member(x))
            means.append(mean)
            variances.append(np.exp(logvar))
        return np.stack(means), np.stack(variances)

    def _predict_standardized(self, x, bootstrap_mode: str | None = None, rng=None):
        mode = bootstrap_mode or self.bootstrap_mode
        means, variances = self.member_moments(x)
        if mode == "mean":
            mean = means.mean(axis=0)
            total = variances.mean(axis=0) + means.var(axis=0)
        elif mode == "member":
            if rng is None:
                raise ValueError("member bootstrap mode needs a random generator")
            pick = rng.integers(0, self.ensemble_size, size=x.shape[0])
            rows = np.arange(x.shape[0])
            mean = means[pick, rows]
            total = variances[pick, rows]
        else:
            raise ValueError(f"unknown bootstrap mode '{mode}'")
        covs = np.zeros((x.shape[0], self.output_dim, self.output_dim))
        diag = np.arange(self.output_dim)
        covs[:, diag, diag] = total
        return mean, covs

    def rollout_kwargs(self, rng) -> dict:
        return {"rng": rng}

    def _nll_kwargs(self) -> dict:
        return {"bootstrap_mode": "mean"}


def fit_ensemble(model: EnsembleJointModel, data, rng: np.random.Generator) -> EnsembleJointModel:
    return model.fit(data, rng)


def predict_ensemble(model: EnsembleJointModel, state, action, bootstrap_mode: str = "mean", rng=None):
    return model.predict(state, action, bootstrap_mode=bootstrap_mode, rng=rng)
