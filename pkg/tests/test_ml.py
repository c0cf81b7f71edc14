import numpy as np
import pytest

from src.agent import TransitionBuffer
from src.core import make_rng
from src.exceptions import DegenerateDataError, ModelNotFittedError
from src.ml import (
    EnsembleJointModel, GpJointModel, JointModel, JointPrediction, fit_ensemble, fit_gp,
    gaussian_nll_and_grad, model_inputs, model_targets, predict_ensemble, predict_gp,
)
from src.nn import GaussianHead
from src.selftest import _param_fd_errors, dense_predict, lml_gradient_errors, random_gp_instance


def maze_like_data(rng, n=40):
    """Point-mass transitions: next position = position + action, reward from distance to origin."""
    buffer = TransitionBuffer(obs_dim=2, action_dim=2)
    for _ in range(n):
        s = rng.uniform(-1.0, 1.0, size=2)
        a = rng.uniform(-0.2, 0.2, size=2)
        s2 = s + a
        buffer.add(s, a, s2, float(np.exp(-np.sum(s2 ** 2))))
    return buffer


# ─── Inputs and targets ──────────────────────────────────────────────────────

def test_targets_are_dynamic_deltas_and_reward():
    states = np.array([[1.0, 2.0, 9.0]])
    next_states = np.array([[1.5, 1.0, 9.0]])
    y = model_targets(states, next_states, [0.25], dynamic_idx=[0, 1])
    assert np.allclose(y, [[0.5, -1.0, 0.25]])
    assert model_inputs(states, np.array([[0.1]])).shape == (1, 4)


def test_prediction_carrier_views():
    pred = JointPrediction(np.array([1.0, 2.0, 3.0]), np.diag([4.0, 9.0, 16.0]))
    assert pred.reward_mean == 3.0
    assert pred.reward_std == 4.0
    assert np.allclose(pred.state_std, [2.0, 3.0])
    assert np.allclose(pred.state_reward_cov, [0.0, 0.0])


# ─── GP: Kronecker algebra against the dense oracle ─────────────────────────

@pytest.mark.parametrize("mode", ["full", "diagonal"])
def test_gp_lml_gradients_match_finite_differences(mode):
    model = random_gp_instance(make_rng(21), 20, 3, coregionalization=mode)
    assert lml_gradient_errors(model) == []


def test_gp_prediction_matches_dense_computation():
    rng = make_rng(22)
    model = random_gp_instance(rng, 30, 3)
    queries = np.vstack([rng.normal(size=(4, 2)), model.x_train[:3]])
    fast_mean, fast_cov = model._predict_standardized(queries)
    slow_mean, slow_cov = dense_predict(model, queries)
    assert np.allclose(fast_mean, slow_mean, rtol=0.0, atol=1e-8)
    assert np.allclose(fast_cov, slow_cov, rtol=0.0, atol=1e-8)


def test_gp_far_input_reverts_to_prior():
    model = random_gp_instance(make_rng(23), 15, 2)
    far = np.full((1, 2), 1e3)
    mean, cov = model._predict_standardized(far)
    assert np.allclose(mean[0], model.mean_net(far[0]), rtol=1e-6)
    assert np.allclose(cov[0], model.prior_covariance(), rtol=1e-6)


def test_gp_interpolates_training_targets_at_noise_floor():
    model = random_gp_instance(make_rng(24), 5, 2)
    model.x_train = np.arange(5.0)[:, None] * np.array([[4.0, 0.0]])
    model.hyper["raw_noise"] = np.array([np.log(1e-12)])
    model._refresh_cache()
    mean, _ = model._predict_standardized(model.x_train)
    targets = model.mean_net(model.x_train) + model.residuals.T
    assert np.allclose(mean, targets, atol=1e-4)


def test_gp_zero_residuals_push_noise_down():
    model = random_gp_instance(make_rng(25), 20, 2)
    model.residuals = np.zeros_like(model.residuals)
    before = model.noise_variance()
    model.kernel_steps = 50
    model.optimize_hyperparameters()
    assert model.noise_variance() < before


def test_gp_hyperparameter_ascent():
    rng = make_rng(26)
    model = GpJointModel(1, 0, [0], mean_hidden=(4,), kernel_steps=40, kernel_lr=0.01)
    x = rng.uniform(-2.0, 2.0, size=(50, 1))
    model.x_train = x
    model.residuals = np.vstack([np.sin(2.0 * x[:, 0]), np.cos(x[:, 0])]) + 0.05 * rng.normal(size=(2, 50))
    start = model.log_marginal_likelihood()
    final = model.optimize_hyperparameters()
    assert final >= start


def test_gp_fit_and_predict_end_to_end(rng):
    data = maze_like_data(rng)
    model = GpJointModel(2, 2, [0, 1], mean_hidden=(16,), mean_epochs=5, kernel_steps=10)
    fit_gp(model, data, rng)
    pred = predict_gp(model, np.array([0.1, 0.2]), np.array([0.05, -0.05]))
    assert pred.mean.shape == (3,)
    assert np.allclose(pred.cov, pred.cov.T)
    assert np.linalg.eigvalsh(pred.cov).min() > -1e-9
    assert model.metrics["n_train"] == 40
    assert np.isfinite(model.predictive_nll(data.states, data.actions, data.next_states, data.rewards))


def test_gp_subsample_cap(rng):
    model = GpJointModel(2, 2, [0, 1], subsample_cap=25, mean_hidden=(8,), mean_epochs=1, kernel_steps=2)
    model.fit(maze_like_data(rng, n=60), rng)
    assert model.x_train.shape[0] == 25


@pytest.mark.parametrize("mode", ["full", "diagonal"])
def test_gp_posterior_never_exceeds_prior(mode):
    rng = make_rng(27)
    model = random_gp_instance(rng, 25, 3, coregionalization=mode)
    queries = np.vstack([rng.normal(size=(10, 2)), model.x_train[:5]])
    _, covs = model._predict_standardized(queries)
    prior = model.prior_covariance()
    for cov in covs:
        assert np.linalg.eigvalsh(prior - cov).min() >= -1e-10


def test_diagonal_coregionalization_has_no_state_reward_coupling(rng):
    model = GpJointModel(2, 2, [0, 1], mean_hidden=(8,), mean_epochs=2, kernel_steps=5,
                         coregionalization="diagonal")
    model.fit(maze_like_data(rng), rng)
    for state in rng.uniform(-1.0, 1.0, size=(5, 2)):
        pred = model.predict(state, np.array([0.1, -0.1]))
        assert np.all(pred.state_reward_cov == 0.0)


def test_gp_predictions_follow_affine_reward_scaling():
    data = maze_like_data(make_rng(28))
    scaled = TransitionBuffer(obs_dim=2, action_dim=2)
    for s, a, s2, r in zip(data.states, data.actions, data.next_states, data.rewards):
        scaled.add(s, a, s2, 3.0 * r - 2.0)

    def fitted(buffer):
        model = GpJointModel(2, 2, [0, 1], mean_hidden=(8,), mean_epochs=2, kernel_steps=5, seed=4)
        return model.fit(buffer, make_rng(6))

    base, moved = fitted(data), fitted(scaled)
    state, action = np.array([0.2, -0.4]), np.array([0.05, 0.1])
    p, q = base.predict(state, action), moved.predict(state, action)
    assert q.reward_mean == pytest.approx(3.0 * p.reward_mean - 2.0, rel=1e-6, abs=1e-8)
    assert q.cov[-1, -1] == pytest.approx(9.0 * p.cov[-1, -1], rel=1e-6)
    assert np.allclose(q.state_reward_cov, 3.0 * p.state_reward_cov, rtol=1e-6, atol=1e-12)
    assert np.allclose(q.state_mean, p.state_mean, rtol=1e-6, atol=1e-10)


def test_scalers_see_every_transition_when_subsampling(rng):
    data = maze_like_data(rng, n=60)
    model = GpJointModel(2, 2, [0, 1], subsample_cap=25, mean_hidden=(8,), mean_epochs=1, kernel_steps=2)
    model.fit(data, rng)
    assert model.x_train.shape[0] == 25
    assert np.allclose(model.x_scaler.mean_, model_inputs(data.states, data.actions).mean(axis=0))
    targets = model_targets(data.states, data.next_states, data.rewards, [0, 1])
    assert np.allclose(model.y_scaler.mean_, targets.mean(axis=0))


def test_gp_requires_fit_and_data(rng):
    model = GpJointModel(2, 2, [0, 1], mean_hidden=(4,))
    with pytest.raises(ModelNotFittedError):
        model.predict(np.zeros(2), np.zeros(2))
    with pytest.raises(DegenerateDataError):
        model.fit(maze_like_data(rng, n=1), rng)


def test_model_roundtrips_through_joblib(rng, tmp_path):
    model = GpJointModel(2, 2, [0, 1], mean_hidden=(8,), mean_epochs=1, kernel_steps=2)
    model.fit(maze_like_data(rng), rng)
    path = model.save_model(tmp_path / "gp.joblib")
    loaded = JointModel.load_model(path)
    state, action = np.array([0.3, -0.3]), np.array([0.1, 0.1])
    assert np.array_equal(loaded.predict(state, action).mean, model.predict(state, action).mean)


# ─── Ensemble ────────────────────────────────────────────────────────────────

def scripted_ensemble(member_means, member_logvars, output_dim=1):
    """Ensemble of constant (input-independent) linear members."""
    model = EnsembleJointModel(1, 0, list(range(output_dim - 1)), ensemble_size=len(member_means),
                               hidden=(), clamp_logvar=False)
    for member, mean, logvar in zip(model.members, member_means, member_logvars):
        member.params["W0"][...] = 0.0
        member.params["b0"][...] = np.concatenate([np.atleast_1d(mean), np.atleast_1d(logvar)])
    return model


def test_ensemble_total_variance():
    model = scripted_ensemble([0.0, 2.0], [0.0, 0.0])
    mean, cov = model._predict_standardized(np.zeros((1, 1)))
    assert mean[0, 0] == pytest.approx(1.0)
    assert cov[0, 0, 0] == pytest.approx(2.0)


def test_ensemble_identical_members_keep_member_variance():
    model = scripted_ensemble([[0.5, 1.0, -1.0]] * 3, [np.log([0.3, 0.4, 0.5])] * 3, output_dim=3)
    _, cov = model._predict_standardized(np.zeros((2, 1)))
    assert np.allclose(np.diagonal(cov[0]), [0.3, 0.4, 0.5])
    assert np.all(cov[:, ~np.eye(3, dtype=bool)] == 0.0)


def test_ensemble_member_mode_needs_rng():
    model = scripted_ensemble([0.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        model._predict_standardized(np.zeros((1, 1)), bootstrap_mode="member")
    mean, _ = model._predict_standardized(np.zeros((50, 1)), bootstrap_mode="member", rng=make_rng(0))
    assert set(np.unique(mean[:, 0])) == {0.0, 2.0}


def test_ensemble_nll_gradient_matches_finite_differences(rng):
    head = GaussianHead(2)
    raw = {"raw": rng.normal(size=(5, 4))}
    y = rng.normal(size=(5, 2))
    _, grad = gaussian_nll_and_grad(raw["raw"], y, head)
    errors = _param_fd_errors(raw, lambda: gaussian_nll_and_grad(raw["raw"], y, head)[0], {"raw": grad},
                              rng, checks=20, step=1e-6, tol=1e-4)
    assert errors == []


def test_ensemble_fit_is_reproducible(rng):
    data = maze_like_data(rng)
    first = EnsembleJointModel(2, 2, [0, 1], ensemble_size=2, hidden=(16,), epochs=3, seed=4)
    second = EnsembleJointModel(2, 2, [0, 1], ensemble_size=2, hidden=(16,), epochs=3, seed=4)
    fit_ensemble(first, data, make_rng(8))
    fit_ensemble(second, data, make_rng(8))
    state, action = np.array([0.2, 0.1]), np.array([0.0, 0.1])
    a = predict_ensemble(first, state, action)
    b = predict_ensemble(second, state, action)
    assert np.array_equal(a.mean, b.mean)
    assert np.array_equal(a.cov, b.cov)


def test_ensemble_collapses_on_repeated_point(rng):
    buffer = TransitionBuffer(obs_dim=1, action_dim=1)
    for _ in range(20):
        buffer.add([0.5], [0.1], [0.8], 0.25)
    model = EnsembleJointModel(1, 1, [0], ensemble_size=2, hidden=(16,), epochs=500, lr=1e-2, seed=1)
    model.fit(buffer, rng)
    pred = model.predict(np.array([0.5]), np.array([0.1]))
    assert np.allclose(pred.mean, [0.3, 0.25], atol=0.1)
    assert np.all(np.diag(pred.cov) < 0.1)
