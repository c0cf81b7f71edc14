"""
Coregionalized Gaussian Process Model
Exact multi-output GP over (next-state delta, reward) with an MLP mean,
a shared Matern-5/2 ARD kernel K and an output-mixing matrix
B = L·Lᵀ + diag(d). The training covariance C = B ⊗ K + σ²·I is handled
through the eigendecompositions of B and K, so nothing of size nD×nD is
ever formed.

Vec convention: residuals are stored as a D×n matrix R (one row per
output) and vec() is row-major, so (A ⊗ M)·vec(R) = vec(A·R·Mᵀ).
"""
import logging

import numpy as np

import config
from src.ml.base import JointModel
from src.ml.kernels import matern52, matern52_log_lengthscale_grads
from src.nn import Adam, Mlp

logger = logging.getLogger(__name__)

_LOG_2PI = np.log(2.0 * np.pi)
COREGIONALIZATIONS = ("full", "diagonal")


class GpJointModel(JointModel):
    """
    Two-stage fit: the mean network is trained by MSE, then the kernel,
    mixing and noise hyperparameters maximize the exact log marginal
    likelihood of the residuals. Both stages warm-start across refits.
    """

    name = "gp"

    def __init__(
        self,
        obs_dim: int,
        action_dim: int,
        dynamic_idx,
        subsample_cap: int = config.GP_SUBSAMPLE_CAP,
        mean_hidden=tuple(config.GP_MEAN_HIDDEN),
        mean_activation: str = config.GP_MEAN_ACTIVATION,
        mean_epochs: int = config.GP_MEAN_EPOCHS,
        mean_lr: float = config.GP_MEAN_LR,
        mean_batch_size: int = config.GP_MEAN_BATCH_SIZE,
        kernel_steps: int = config.GP_KERNEL_STEPS,
        kernel_lr: float = config.GP_KERNEL_LR,
        coregionalization: str = "full",
        noise_floor: float = config.GP_NOISE_FLOOR,
        seed: int = 0,
    ):
        super().__init__(obs_dim, action_dim, dynamic_idx)
        if coregionalization not in COREGIONALIZATIONS:
            raise ValueError(f"coregionalization must be one of {COREGIONALIZATIONS}")
        self.subsample_cap = int(subsample_cap)
        self.mean_epochs = int(mean_epochs)
        self.mean_lr = mean_lr
        self.mean_batch_size = int(mean_batch_size)
        self.kernel_steps = int(kernel_steps)
        self.kernel_lr = kernel_lr
        self.coregionalization = coregionalization
        self.noise_floor = noise_floor

        widths = [self.input_dim, *mean_hidden, self.output_dim]
        self.mean_net = Mlp(widths, activation=mean_activation, rng=np.random.default_rng(seed))
        self.hyper = self.initial_hyperparameters(self.input_dim, self.output_dim, noise_floor)

        self.x_train = None
        self.residuals = None          # D×n
        self._cache = None

    @staticmethod
    def initial_hyperparameters(input_dim: int, output_dim: int, noise_floor: float) -> dict:
        return {
            "log_lengthscales": np.full(input_dim, 0.5 * np.log(input_dim)),
            "log_signal": np.zeros(1),
            # L = 0 is a stationary point of the likelihood in L.
            "coreg_factor": np.sqrt(config.GP_INIT_COREG_DIAG) * np.eye(output_dim),
            "log_coreg_diag": np.full(output_dim, np.log(config.GP_INIT_COREG_DIAG)),
            "raw_noise": np.array([np.log(config.GP_INIT_NOISE - noise_floor)]),
        }

    # ─── Hyperparameter views ────────────────────────────────────────────────

    def _factor_mask(self) -> np.ndarray:
        d = self.output_dim
        return np.eye(d) if self.coregionalization == "diagonal" else np.tril(np.ones((d, d)))

    def coregionalization_matrix(self, hyper: dict | None = None) -> np.ndarray:
        hyper = self.hyper if hyper is None else hyper
        factor = hyper["coreg_factor"] * self._factor_mask()
        return factor @ factor.T + np.diag(np.exp(hyper["log_coreg_diag"]))

    def noise_variance(self, hyper: dict | None = None) -> float:
        hyper = self.hyper if hyper is None else hyper
        return float(self.noise_floor + np.exp(hyper["raw_noise"][0]))

    def lengthscales(self, hyper: dict | None = None) -> np.ndarray:
        hyper = self.hyper if hyper is None else hyper
        return np.exp(hyper["log_lengthscales"])

    def signal_variance(self, hyper: dict | None = None) -> float:
        hyper = self.hyper if hyper is None else hyper
        return float(np.exp(hyper["log_signal"][0]))

    # ─── Fitting ─────────────────────────────────────────────────────────────

    def _select_training_rows(self, x, y, rng):
        n = x.shape[0]
        if n <= self.subsample_cap:
            return x, y
        keep = np.sort(rng.choice(n, size=self.subsample_cap, replace=False))
        return x[keep], y[keep]

    def _fit_standardized(self, x, y, rng):
        mse = self._train_mean(x, y, rng)
        self.x_train = x
        self.residuals = (y - self.mean_net(x)).T
        lml = self.optimize_hyperparameters()
        self._refresh_cache()
        self.metrics = {
            "n_train": int(x.shape[0]),
            "mean_mse": float(mse),
            "log_marginal_likelihood": float(lml),
            "noise_variance": self.noise_variance(),
        }
        logger.info(
            "GP refit on %d transitions: mean MSE %.4f, log marginal likelihood %.3f",
            x.shape[0], mse, lml,
        )

    def _train_mean(self, x, y, rng) -> float:
        """Mini-batch MSE on standardized targets; returns the final full-data MSE."""
        optimizer = Adam(lr=self.mean_lr)
        n = x.shape[0]
        for _ in range(self.mean_epochs):
            order = rng.permutation(n)
            for start in range(0, n, self.mean_batch_size):
                idx = order[start:start + self.mean_batch_size]
                err = self.mean_net(x[idx]) - y[idx]
                upstream = 2.0 * err / err.size
                optimizer.step(self.mean_net.params, self.mean_net.backward(x[idx], upstream).params)
        return float(np.mean((self.mean_net(x) - y) ** 2))

    def log_marginal_likelihood(self, hyper: dict | None = None, x=None, residuals=None) -> float:
        return self.lml_and_grad(hyper, x, residuals, with_grad=False)[0]

    def lml_and_grad(self, hyper: dict | None = None, x=None, residuals=None, with_grad: bool = True):
        """
        Exact log marginal likelihood of vec(R) under N(0, B ⊗ K + σ²I) and its
        gradient with respect to every entry of `hyper`.
        """
        hyper = self.hyper if hyper is None else hyper
        x = self.x_train if x is None else x
        r = self.residuals if residuals is None else residuals
        d_out, n = r.shape
        ell = self.lengthscales(hyper)
        signal = self.signal_variance(hyper)
        noise = self.noise_variance(hyper)
        b = self.coregionalization_matrix(hyper)
        k = matern52(x, x, ell, signal)

        lam, u = np.linalg.eigh(b)
        s, v = np.linalg.eigh(k)
        lam = np.clip(lam, 0.0, None)
        s = np.clip(s, 0.0, None)
        denom = np.outer(lam, s) + noise                   # D×n
        w = 1.0 / denom
        alpha = u @ ((u.T @ r @ v) * w) @ v.T              # C⁻¹ vec(R), as D×n

        lml = -0.5 * np.sum(r * alpha) - 0.5 * np.sum(np.log(denom)) - 0.5 * n * d_out * _LOG_2PI
        if not with_grad:
            return float(lml), None

        grads = {}
        m_k = 0.5 * (alpha.T @ b @ alpha - (v * (lam @ w)) @ v.T)
        grads["log_signal"] = np.array([np.sum(m_k * k)])
        grads["log_lengthscales"] = np.array([
            np.sum(m_k * dk) for dk in matern52_log_lengthscale_grads(x, ell, signal)
        ])

        m_b = 0.5 * (alpha @ k @ alpha.T - (u * (w @ s)) @ u.T)
        grads["coreg_factor"] = 2.0 * (m_b @ (hyper["coreg_factor"] * self._factor_mask())) * self._factor_mask()
        grads["log_coreg_diag"] = np.diag(m_b) * np.exp(hyper["log_coreg_diag"])
        grads["raw_noise"] = np.array([0.5 * (np.sum(alpha ** 2) - np.sum(w)) * (noise - self.noise_floor)])
        return float(lml), grads

    def optimize_hyperparameters(self) -> float:
        """Adam ascent on the log marginal likelihood; a fresh optimizer per refit."""
        optimizer = Adam(lr=self.kernel_lr)
        for _ in range(self.kernel_steps):
            _, grads = self.lml_and_grad()
            candidate = {key: value.copy() for key, value in self.hyper.items()}
            optimizer.step(candidate, {key: -g for key, g in grads.items()})
            if all(np.all(np.isfinite(value)) for value in candidate.values()):
                self.hyper = candidate
            else:
                logger.warning("non-finite hyperparameter step skipped")
        return self.log_marginal_likelihood()

    def _refresh_cache(self) -> None:
        b = self.coregionalization_matrix()
        k = matern52(self.x_train, self.x_train, self.lengthscales(), self.signal_variance())
        lam, u = np.linalg.eigh(b)
        s, v = np.linalg.eigh(k)
        lam = np.clip(lam, 0.0, None)
        s = np.clip(s, 0.0, None)
        w = 1.0 / (np.outer(lam, s) + self.noise_variance())
        alpha = u @ ((u.T @ self.residuals @ v) * w) @ v.T
        self._cache = {"b": b, "lam": lam, "u": u, "v": v, "w": w, "alpha": alpha}

    # ─── Prediction ──────────────────────────────────────────────────────────

    def _predict_standardized(self, x, include_noise: bool = False):
        cache = self._cache
        signal = self.signal_variance()
        ks = matern52(x, self.x_train, self.lengthscales(), signal)      # (q, n)
        means = self.mean_net(x) + (ks @ cache["alpha"].T) @ cache["b"]

        projected = ks @ cache["v"]
        q = (projected ** 2) @ cache["w"].T                               # (q, D)
        lam, u = cache["lam"], cache["u"]
        reduction = np.einsum("ik,qk,jk->qij", u, q * lam ** 2, u)
        covs = signal * cache["b"][None, :, :] - reduction
        if include_noise:
            covs = covs + self.noise_variance() * np.eye(self.output_dim)[None, :, :]
        return means, covs

    def _nll_kwargs(self) -> dict:
        return {"include_noise": True}

    def prior_covariance(self) -> np.ndarray:
        """B·k(x, x) in standardized units; the same at every input."""
        return self.signal_variance() * self.coregionalization_matrix()


def fit_gp(model: GpJointModel, data, rng: np.random.Generator) -> GpJointModel:
    return model.fit(data, rng)


def predict_gp(model: GpJointModel, state, action):
    return model.predict(state, action)
