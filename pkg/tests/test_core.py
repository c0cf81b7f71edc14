import logging

import numpy as np
import pytest

from src.core import (
    MvNormal, cholesky, derive_rng, gaussian_condition, make_rng, std_normal_cdf,
    std_normal_quantile, truncated_normal_sample,
)
from src.exceptions import NotPSDError
from src.selftest import check_conditioning, check_truncated_normal, random_joint


# ─── cholesky ────────────────────────────────────────────────────────────────

def test_cholesky_identity():
    assert np.array_equal(cholesky(np.eye(3)), np.eye(3))


def test_cholesky_known_factor():
    m = np.array([[4.0, 2.0], [2.0, 3.0]])
    factor = cholesky(m)
    assert np.allclose(factor, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], atol=1e-12)
    assert np.allclose(factor @ factor.T, m, atol=1e-12)


def test_cholesky_indefinite_raises():
    with pytest.raises(NotPSDError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_not_psd_is_a_linalg_error():
    with pytest.raises(np.linalg.LinAlgError):
        cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_cholesky_escalates_jitter_on_singular_matrix(caplog):
    m = np.ones((2, 2))
    with caplog.at_level(logging.DEBUG, logger="src.core.linalg"):
        factor = cholesky(m)
    assert np.allclose(factor @ factor.T, m, atol=1e-8)
    assert any("jitter" in record.message for record in caplog.records)


@pytest.mark.parametrize("m", [
    np.array([[1e6, 1e6], [1e6, 1e6]]),      # relative start already above the cap
    np.diag([3.0, -5e-5]),                    # ×10 ladder would step over the cap
])
def test_cholesky_tries_the_jitter_cap(m):
    factor = cholesky(m)
    assert np.allclose(factor @ factor.T, m + 1e-4 * np.eye(2), rtol=1e-10, atol=1e-8)


def test_cholesky_fails_only_past_the_cap():
    with pytest.raises(NotPSDError):
        cholesky(np.diag([3.0, -2e-4]))


def test_cholesky_rejects_non_finite_and_asymmetric():
    with pytest.raises(ValueError):
        cholesky(np.array([[np.nan, 0.0], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))


# ─── gaussian_condition ──────────────────────────────────────────────────────

def test_condition_bivariate_arithmetic():
    joint = MvNormal(np.zeros(2), np.array([[1.0, 0.5], [0.5, 1.0]]))
    cond = gaussian_condition(joint, [1], [1.0])
    assert cond.mean[0] == pytest.approx(0.5)
    assert cond.cov[0, 0] == pytest.approx(0.75)


def test_condition_block_diagonal_gives_marginal(rng):
    cov = np.diag([1.0, 2.0, 3.0])
    joint = MvNormal(rng.normal(size=3), cov)
    cond = gaussian_condition(joint, [2], [17.0])
    marginal = joint.marginal([0, 1])
    assert np.allclose(cond.mean, marginal.mean)
    assert np.allclose(cond.cov, marginal.cov)


def test_condition_at_own_mean_keeps_mean():
    joint = MvNormal(np.array([0.3, -1.2]), np.array([[2.0, 0.7], [0.7, 1.5]]))
    cond = gaussian_condition(joint, [1], [-1.2])
    assert cond.mean[0] == pytest.approx(0.3)


def test_condition_keeps_ascending_order():
    joint = MvNormal(np.arange(4.0), np.eye(4))
    cond = gaussian_condition(joint, [1], [0.0])
    assert np.allclose(cond.mean, [0.0, 2.0, 3.0])


def test_condition_rejects_bad_indices():
    joint = MvNormal(np.zeros(2), np.eye(2))
    with pytest.raises(ValueError):
        gaussian_condition(joint, [2], [0.0])


def test_conditioning_never_increases_covariance():
    rng = make_rng(31)
    for _ in range(20):
        dim = int(rng.integers(2, 6))
        joint = random_joint(dim, rng)
        observed = sorted(rng.choice(dim, size=int(rng.integers(1, dim)), replace=False))
        kept = np.setdiff1d(np.arange(dim), observed)
        cond = gaussian_condition(joint, observed, rng.normal(size=len(observed)))
        gap = joint.cov[np.ix_(kept, kept)] - cond.cov
        assert np.linalg.eigvalsh(gap).min() >= -1e-10


def test_conditional_means_average_to_the_marginal_mean():
    rng = make_rng(32)
    joint = random_joint(4, rng)
    observed = [1, 3]
    values = joint.sample(rng, 4000)[:, observed]
    means = np.array([gaussian_condition(joint, observed, v).mean for v in values])
    se = means.std(axis=0, ddof=1) / np.sqrt(len(means))
    assert np.all(np.abs(means.mean(axis=0) - joint.mean[[0, 2]]) < 4.0 * se)


def test_conditioning_monte_carlo_reduced():
    failures = []
    check_conditioning(failures, joints=3, samples=300_000, seed=11)
    assert failures == []


def test_conditioning_suite_catches_sign_flip():
    def flipped(joint, idx, vals):
        good = gaussian_condition(joint, idx, vals)
        a = np.setdiff1d(np.arange(joint.dim), idx)
        return MvNormal(2.0 * joint.mean[a] - good.mean, good.cov)

    failures = []
    check_conditioning(failures, joints=3, samples=300_000, seed=11, condition=flipped)
    assert failures


def test_mvnormal_zero_covariance_samples_the_mean(rng):
    dist = MvNormal(np.array([1.0, -2.0]), np.zeros((2, 2)))
    assert np.array_equal(dist.sample(rng), dist.mean)


def test_mvnormal_rejects_nan():
    with pytest.raises(ValueError):
        MvNormal(np.array([np.nan]), np.eye(1))


# ─── Normal helpers and truncated sampling ──────────────────────────────────

def test_normal_cdf_and_quantile():
    assert std_normal_cdf(0.0) == pytest.approx(0.5)
    assert std_normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
    assert std_normal_quantile(std_normal_cdf(1.234)) == pytest.approx(1.234, abs=1e-10)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, np.nan])
def test_quantile_domain(p):
    with pytest.raises(ValueError):
        std_normal_quantile(p)


def test_truncated_sample_degenerate(rng):
    assert truncated_normal_sample(0.0, 0.0, 0.7, rng) == 0.0


def test_truncated_sample_forced_uniform(rng):
    value = truncated_normal_sample(2.0, 1.0, 0.5, rng, u=0.75)
    assert value == pytest.approx(2.0 + std_normal_quantile(0.75))


def test_truncated_half_normal_mean(rng):
    draws = np.array([truncated_normal_sample(0.0, 1.0, 0.5, rng) for _ in range(100_000)])
    assert draws.mean() == pytest.approx(np.sqrt(2.0 / np.pi), abs=0.01)
    assert draws.min() >= 0.0


def test_truncated_sample_validates():
    with pytest.raises(ValueError):
        truncated_normal_sample(0.0, 1.0, 1.0, make_rng(0))
    with pytest.raises(ValueError):
        truncated_normal_sample(0.0, -1.0, 0.2, make_rng(0))


def test_truncated_ks_reduced():
    failures = []
    check_truncated_normal(failures, samples=2_000, seed=5, alpha=0.001)
    assert failures == []


# ─── Random streams ──────────────────────────────────────────────────────────

def test_derived_streams_are_keyed():
    a = derive_rng(7, "rollout", 3, 1).normal(size=4)
    b = derive_rng(7, "rollout", 3, 1).normal(size=4)
    c = derive_rng(7, "rollout", 3, 2).normal(size=4)
    d = derive_rng(7, "branch", 3, 1).normal(size=4)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    assert not np.allclose(a, d)
