"""
Oracle Suites
Statistical and finite-difference checks of the numeric core, run by
`app.py selftest`. Each suite returns a SuiteResult; sample sizes are
parameters so the pytest suite can run reduced versions.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from src.agent import DdpgAgent, SacAgent
from src.core import MvNormal, gaussian_condition, make_rng, truncated_normal_sample
from src.core.sampling import truncated_normal_cdf
from src.envs.base import EnvSpec
from src.ml import GpJointModel, JointPrediction, gaussian_nll_and_grad
from src.ml.kernels import matern52
from src.nn import GaussianHead, Mlp
from src.nn.mlp import ACTIVATIONS
from src.strategies import (
    Strategy, hallucinate_greedy, hallucinate_hotgp, hallucinate_hucrl, hallucinate_mbpo,
    hallucinate_optimistic_diagonal, hallucinate_thompson, model_reward_fn,
)

logger = logging.getLogger(__name__)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    failures: list = field(default_factory=list)
    seconds: float = 0.0


def _suite(name: str, check) -> SuiteResult:
    started = time.perf_counter()
    failures = []
    try:
        check(failures)
    except Exception as exc:  # a crashing suite is a failing suite
        failures.append(f"raised {type(exc).__name__}: {exc}")
    result = SuiteResult(name, not failures, failures, time.perf_counter() - started)
    logger.info("suite %s: %s (%.1fs)", name, "pass" if result.passed else "FAIL", result.seconds)
    return result


# ─── Random fixtures ─────────────────────────────────────────────────────────

def random_psd(dim: int, rng, rank: int | None = None) -> np.ndarray:
    factor = rng.normal(size=(dim, rank or dim))
    return factor @ factor.T / (rank or dim) + 0.05 * np.eye(dim)


def random_joint(dim: int, rng) -> MvNormal:
    return MvNormal(rng.normal(size=dim), random_psd(dim, rng))


# ─── Conditioning ────────────────────────────────────────────────────────────

def check_conditioning(failures, joints: int = 50, samples: int = 1_000_000, seed: int = 0,
                       condition=gaussian_condition):
    """Conditional moments against a rejection-window Monte-Carlo oracle."""
    rng = make_rng(seed)
    for case in range(joints):
        dim = int(rng.integers(2, 7))
        joint = random_joint(dim, rng)
        b = int(rng.integers(dim))
        sd_b = np.sqrt(joint.cov[b, b])
        value = joint.mean[b] + sd_b * rng.uniform(-1.0, 1.0)
        cond = condition(joint, [b], [value])
        draws = joint.sample(rng, samples)
        accepted = draws[np.abs(draws[:, b] - value) < 0.01 * sd_b]
        accepted = np.delete(accepted, b, axis=1)
        count = accepted.shape[0]
        if count < 100:
            failures.append(f"case {case}: only {count} accepted draws")
            continue
        mc_mean = accepted.mean(axis=0)
        mc_var = accepted.var(axis=0, ddof=1)
        cond_var = np.diag(cond.cov)
        mean_se = np.sqrt(cond_var / count)
        var_se = cond_var * np.sqrt(2.0 / (count - 1))
        if np.any(np.abs(mc_mean - cond.mean) > 4.0 * mean_se + 1e-12):
            failures.append(f"case {case}: conditional mean off ({mc_mean} vs {cond.mean})")
        if np.any(np.abs(mc_var - cond_var) > 4.0 * var_se + 1e-12):
            failures.append(f"case {case}: conditional variance off ({mc_var} vs {cond_var})")


# ─── Truncated normal ────────────────────────────────────────────────────────

def check_truncated_normal(failures, samples: int = 10_000, seed: int = 1, alpha: float = 0.01):
    """Kolmogorov-Smirnov against the analytic truncated CDF."""
    mu, sigma = 0.3, 1.7
    for i, quantile in enumerate((0.0, 0.3, 0.5, 0.7, 0.9)):
        rng = make_rng(seed + i)
        draws = np.array([truncated_normal_sample(mu, sigma, quantile, rng) for _ in range(samples)])
        result = stats.kstest(draws, lambda x, q=quantile: truncated_normal_cdf(x, mu, sigma, q))
        if result.pvalue < alpha:
            failures.append(f"r_min={quantile}: KS p-value {result.pvalue:.4g}")


# ─── GP equivalence ──────────────────────────────────────────────────────────

def random_gp_instance(rng, n: int, d_out: int, input_dim: int = 2, coregionalization: str = "full"):
    """A GP model with random hyperparameters and a cached random training set."""
    model = GpJointModel(input_dim - 1, 1, np.arange(d_out - 1), mean_hidden=(4,),
                         coregionalization=coregionalization, seed=int(rng.integers(1 << 31)))
    model.hyper = {
        "log_lengthscales": rng.uniform(-0.5, 0.5, size=input_dim),
        "log_signal": np.array([rng.uniform(-0.3, 0.3)]),
        "coreg_factor": np.tril(rng.normal(scale=0.7, size=(d_out, d_out))),
        "log_coreg_diag": rng.uniform(-2.0, 0.0, size=d_out),
        "raw_noise": np.array([rng.uniform(-3.0, -1.0)]),
    }
    model.x_train = rng.normal(size=(n, input_dim))
    model.residuals = rng.normal(size=(d_out, n))
    model._refresh_cache()
    return model


def dense_covariance(model: GpJointModel, hyper=None) -> np.ndarray:
    """C = B ⊗ K + σ²I, formed explicitly (nD × nD)."""
    k = matern52(model.x_train, model.x_train, model.lengthscales(hyper), model.signal_variance(hyper))
    b = model.coregionalization_matrix(hyper)
    return np.kron(b, k) + model.noise_variance(hyper) * np.eye(b.shape[0] * k.shape[0])


def dense_lml(model: GpJointModel, hyper=None) -> float:
    c = dense_covariance(model, hyper)
    r = model.residuals.reshape(-1)
    _, logdet = np.linalg.slogdet(c)
    return float(-0.5 * r @ np.linalg.solve(c, r) - 0.5 * logdet - 0.5 * r.size * np.log(2.0 * np.pi))


def dense_predict(model: GpJointModel, x: np.ndarray):
    """Exact GP posterior over outputs at each row of x, without Kronecker tricks."""
    c = dense_covariance(model)
    alpha = np.linalg.solve(c, model.residuals.reshape(-1))
    b = model.coregionalization_matrix()
    signal = model.signal_variance()
    ks = matern52(x, model.x_train, model.lengthscales(), signal)
    means, covs = [], []
    for row, k_row in zip(x, ks):
        cross = np.kron(b, k_row[None, :])                      # D × nD
        means.append(model.mean_net(row) + cross @ alpha)
        covs.append(signal * b - cross @ np.linalg.solve(c, cross.T))
    return np.array(means), np.array(covs)


def check_gp_equivalence(failures, instances: int = 20, seed: int = 2, fd_instances: int = 3):
    rng = make_rng(seed)
    for case in range(instances):
        n = int(rng.integers(5, 31))
        d_out = int(rng.integers(2, 5))
        model = random_gp_instance(rng, n, d_out)
        queries = np.vstack([rng.normal(size=(3, 2)), model.x_train[:2]])
        fast_mean, fast_cov = model._predict_standardized(queries)
        slow_mean, slow_cov = dense_predict(model, queries)
        if not np.allclose(fast_mean, slow_mean, rtol=0.0, atol=1e-8):
            failures.append(f"case {case}: mean mismatch {np.abs(fast_mean - slow_mean).max():.3g}")
        if not np.allclose(fast_cov, slow_cov, rtol=0.0, atol=1e-6):
            failures.append(f"case {case}: covariance mismatch {np.abs(fast_cov - slow_cov).max():.3g}")
        fast_lml = model.log_marginal_likelihood()
        if abs(fast_lml - dense_lml(model)) > 1e-6 * max(1.0, abs(fast_lml)):
            failures.append(f"case {case}: log marginal likelihood mismatch")

    for case in range(fd_instances):
        for mode in ("full", "diagonal"):
            model = random_gp_instance(rng, 20, 3, coregionalization=mode)
            failures.extend(f"fd {mode} case {case}: {msg}" for msg in lml_gradient_errors(model))


def lml_gradient_errors(model: GpJointModel, step: float = 1e-5, tol: float = 1e-3) -> list:
    """Analytic LML gradients vs central differences of the dense likelihood."""
    _, grads = model.lml_and_grad()
    errors = []
    for key, value in model.hyper.items():
        for index in np.ndindex(value.shape):
            plus = {k: v.copy() for k, v in model.hyper.items()}
            minus = {k: v.copy() for k, v in model.hyper.items()}
            plus[key][index] += step
            minus[key][index] -= step
            numeric = (dense_lml(model, plus) - dense_lml(model, minus)) / (2.0 * step)
            analytic = grads[key][index]
            if abs(analytic - numeric) > tol * max(abs(numeric), 1.0):
                errors.append(f"{key}{list(index)}: analytic {analytic:.6g} vs numeric {numeric:.6g}")
    return errors


# ─── Gradients ───────────────────────────────────────────────────────────────

def _param_fd_errors(params: dict, loss_fn, grads: dict, rng, checks: int = 12,
                     step: float = 1e-6, tol: float = 1e-3, floor: float = 1e-6) -> list:
    """Central differences on a random subset of parameter entries."""
    errors = []
    keys = sorted(params)
    for _ in range(checks):
        key = keys[int(rng.integers(len(keys)))]
        index = tuple(int(rng.integers(s)) for s in params[key].shape)
        original = params[key][index]
        params[key][index] = original + step
        up = loss_fn()
        params[key][index] = original - step
        down = loss_fn()
        params[key][index] = original
        numeric = (up - down) / (2.0 * step)
        analytic = grads[key][index]
        if abs(analytic - numeric) > tol * max(abs(numeric), abs(analytic), floor) + floor:
            errors.append(f"{key}{list(index)}: analytic {analytic:.6g} vs numeric {numeric:.6g}")
    return errors


def toy_spec(obs_dim: int = 3, action_dim: int = 2) -> EnvSpec:
    return EnvSpec("toy", obs_dim, action_dim, tuple(range(obs_dim)), -np.ones(action_dim),
                   np.ones(action_dim), -np.full(obs_dim, 10.0), np.full(obs_dim, 10.0), 10)


def check_gradients(failures, seed: int = 3):
    rng = make_rng(seed)

    for activation in ACTIVATIONS:
        net = Mlp([3, 4, 4, 2], activation=activation, rng=rng)
        x = rng.normal(size=(5, 3))
        upstream = rng.normal(size=(5, 2))
        grads = net.backward(x, upstream).params
        errors = _param_fd_errors(net.params, lambda: float(np.sum(net(x) * upstream)), grads, rng)
        failures.extend(f"mlp[{activation}] {e}" for e in errors)

    head = GaussianHead(2)
    member = Mlp([3, 5, 4], activation="silu", rng=rng)
    x, y = rng.normal(size=(6, 3)), rng.normal(size=(6, 2))
    _, d_raw = gaussian_nll_and_grad(member(x), y, head)
    grads = member.backward(x, d_raw).params
    errors = _param_fd_errors(member.params, lambda: gaussian_nll_and_grad(member(x), y, head)[0], grads, rng)
    failures.extend(f"ensemble nll {e}" for e in errors)

    spec = toy_spec()
    sac = SacAgent(spec, hidden=(2,), activation="tanh", seed=int(rng.integers(1 << 31)))
    states = rng.normal(size=(4, spec.obs_dim))
    eps = rng.normal(size=(4, spec.action_dim))
    _, grads, _ = sac.actor_loss_and_grad(states, eps)
    errors = _param_fd_errors(sac.actor.net.params, lambda: sac.actor_loss_and_grad(states, eps)[0], grads, rng)
    failures.extend(f"sac actor {e}" for e in errors)

    ddpg = DdpgAgent(spec, hidden=(2,), activation="tanh", seed=int(rng.integers(1 << 31)))
    _, grads = ddpg.actor_loss_and_grad(states)
    errors = _param_fd_errors(ddpg.actor.net.params, lambda: ddpg.actor_loss_and_grad(states)[0], grads, rng)
    failures.extend(f"ddpg actor {e}" for e in errors)


# ─── Strategy identities ─────────────────────────────────────────────────────

def check_strategies(failures, draws: int = 10_000, seed: int = 4):
    rng = make_rng(seed)
    dim = 4
    cov = random_psd(dim, rng)
    pred = JointPrediction(rng.normal(size=dim), cov)

    # Optimism off: HOT-GP states average back to the predictive mean.
    states = np.array([hallucinate_hotgp(pred, 0.0, rng)[0] for _ in range(draws)])
    se = states.std(axis=0, ddof=1) / np.sqrt(draws)
    if np.any(np.abs(states.mean(axis=0) - pred.state_mean) > 4.0 * se + 1e-12):
        failures.append("HOT-GP with r_min=0 is biased away from the mean state")

    # Zero state-reward covariance: HOT-GP ≡ optimistic diagonal.
    diag_cov = cov.copy()
    diag_cov[:-1, -1] = diag_cov[-1, :-1] = 0.0
    diag_pred = JointPrediction(pred.mean, diag_cov)
    for i in range(20):
        a = hallucinate_hotgp(diag_pred, 0.6, make_rng(100 + i))
        b = hallucinate_optimistic_diagonal(diag_pred, 0.6, make_rng(100 + i))
        if not (np.allclose(a[0], b[0], atol=1e-10) and a[1] == b[1]):
            failures.append("HOT-GP differs from optimistic diagonal at zero cross-covariance")
            break

    # Zero covariance: every strategy returns the greedy outcome.
    flat = JointPrediction(pred.mean, np.zeros((dim, dim)))
    greedy_state, greedy_reward = hallucinate_greedy(flat)
    outcomes = {
        "hot_gp": hallucinate_hotgp(flat, 0.7, rng),
        "thompson": hallucinate_thompson(flat, 0.7, rng),
        "optimistic_diagonal": hallucinate_optimistic_diagonal(flat, 0.7, rng),
        "mbpo": hallucinate_mbpo(flat, rng),
        "hucrl_approx": Strategy("hucrl_approx")(flat, 0.7, rng),
    }
    for name, (state, reward) in outcomes.items():
        if not (np.allclose(state, greedy_state, atol=1e-9) and abs(reward - greedy_reward) < 1e-9):
            failures.append(f"{name} differs from greedy at zero covariance")

    # H-UCRL without perturbation is greedy.
    state, reward = hallucinate_hucrl(pred, model_reward_fn(pred), 0.0, 5, rng)
    if not (np.allclose(state, pred.state_mean) and abs(reward - pred.reward_mean) < 1e-9):
        failures.append("H-UCRL with beta=0 differs from greedy")


# ─── Runner ──────────────────────────────────────────────────────────────────

SUITES = {
    "conditioning": check_conditioning,
    "truncated_normal": check_truncated_normal,
    "gp_equivalence": check_gp_equivalence,
    "gradients": check_gradients,
    "strategies": check_strategies,
}


def run_suites(names=None) -> list[SuiteResult]:
    names = list(SUITES) if not names else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}, expected some of {list(SUITES)}")
    return [_suite(name, SUITES[name]) for name in names]
