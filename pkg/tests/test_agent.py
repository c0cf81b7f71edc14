import numpy as np
import pytest
from scipy.stats import chisquare

from src.agent import (
    DdpgAgent, SacAgent, TanhGaussianActor, TransitionBuffer, Transitions, ddpg_update, make_agent,
    q_values, sac_update,
)
from src.agent.networks import log_one_minus_tanh_sq
from src.core import make_rng
from src.nn import Mlp
from src.selftest import _param_fd_errors, toy_spec

SPEC = toy_spec()


def random_batch(rng, size=16, rewards=None, spec=SPEC):
    return Transitions(
        rng.normal(size=(size, spec.obs_dim)),
        rng.uniform(-0.9, 0.9, size=(size, spec.action_dim)),
        rng.normal(size=(size, spec.obs_dim)),
        rng.normal(size=size) if rewards is None else np.asarray(rewards, dtype=float),
        np.zeros(size, dtype=bool),
    )


# ─── Transition buffer ───────────────────────────────────────────────────────

def test_buffer_overwrites_oldest_first():
    buffer = TransitionBuffer(1, 1, capacity=3)
    for i in range(5):
        buffer.add([i], [0.0], [i + 1], float(i))
    assert len(buffer) == 3
    assert np.array_equal(buffer.rewards, [2.0, 3.0, 4.0])
    assert buffer.total_added == 5


def test_unbounded_buffer_grows():
    buffer = TransitionBuffer(2, 1)
    for i in range(3000):
        buffer.add([i, i], [0.0], [i, i], 0.0)
    assert len(buffer) == 3000
    assert buffer.states[-1, 0] == 2999


def test_buffer_sampling(rng):
    buffer = TransitionBuffer(1, 1)
    with pytest.raises(ValueError):
        buffer.sample(4, rng)
    buffer.extend(random_batch(rng, size=5, spec=toy_spec(1, 1)))
    batch = buffer.sample(32, rng)
    assert len(batch) == 32
    assert set(batch.rewards).issubset(set(buffer.rewards))


def test_buffer_sampling_is_uniform():
    buffer = TransitionBuffer(1, 1, capacity=20)
    for i in range(25):
        buffer.add([i], [0.0], [i], 0.0)
    counts = np.bincount(buffer.sample_indices(20_000, make_rng(8)), minlength=len(buffer))
    assert counts.size == 20
    assert chisquare(counts).pvalue > 1e-3


# ─── Actor ───────────────────────────────────────────────────────────────────

def test_log_one_minus_tanh_sq_is_stable():
    u = np.array([-30.0, -1.0, 0.0, 2.0, 30.0])
    expected = np.log(1.0 - np.tanh(u[1:4]) ** 2)
    out = log_one_minus_tanh_sq(u)
    assert np.allclose(out[1:4], expected)
    assert np.all(np.isfinite(out))


def test_actions_stay_within_bounds():
    rng = make_rng(0)
    agent = SacAgent(SPEC, hidden=(16, 16), seed=1)
    states = rng.normal(scale=100.0, size=(10_000, SPEC.obs_dim))
    for mode in ("explore", "evaluate"):
        actions = agent.act(states, mode, rng)
        assert actions.min() >= -1.0 and actions.max() <= 1.0


def test_evaluate_is_deterministic(rng):
    agent = SacAgent(SPEC, hidden=(16,), seed=2)
    state = rng.normal(size=SPEC.obs_dim)
    assert np.array_equal(agent.act(state, "evaluate"), agent.act(state, "evaluate"))


def test_zero_std_explore_equals_evaluate(rng):
    actor = TanhGaussianActor(3, 2, -np.ones(2), np.ones(2), hidden=(8,), rng=rng,
                              log_std_min=-20.0, log_std_max=-20.0)
    states = rng.normal(size=(5, 3))
    assert np.allclose(actor.sample(states, rng)[0], actor.deterministic(states), atol=1e-6)


def test_log_prob_matches_sampled_density(rng):
    actor = TanhGaussianActor(3, 2, np.array([-2.0, 0.0]), np.array([2.0, 1.0]), hidden=(8,), rng=rng,
                              log_std_max=0.0)
    states = rng.normal(size=(6, 3))
    eps = np.clip(rng.standard_normal((6, 2)), -2.0, 2.0)
    actions, log_prob = actor.sample(states, rng, eps=eps)[:2]
    assert np.allclose(actor.log_prob(states, actions), log_prob, atol=1e-6)


def test_unknown_act_mode(rng):
    with pytest.raises(ValueError):
        SacAgent(SPEC, hidden=(4,)).act(np.zeros(SPEC.obs_dim), "greedy", rng)


# ─── SAC ─────────────────────────────────────────────────────────────────────

def test_sac_zero_reward_zero_discount(rng):
    agent = SacAgent(SPEC, gamma=0.0, hidden=(8,), seed=3)
    batch = random_batch(rng, rewards=np.zeros(16))
    assert np.array_equal(agent.q_targets(batch, rng), np.zeros(16))
    expected = sum(float(np.mean(q_values(c, batch.states, batch.actions) ** 2)) for c in agent.critics)
    losses = sac_update(agent, batch, rng)
    assert losses["q_loss"] == pytest.approx(expected)


def test_sac_actor_gradient_matches_finite_differences():
    rng = make_rng(4)
    agent = SacAgent(SPEC, hidden=(2,), activation="tanh", seed=5)
    states = rng.normal(size=(4, SPEC.obs_dim))
    eps = rng.normal(size=(4, SPEC.action_dim))
    _, grads, _ = agent.actor_loss_and_grad(states, eps)
    errors = _param_fd_errors(agent.actor.net.params, lambda: agent.actor_loss_and_grad(states, eps)[0],
                              grads, rng, checks=20)
    assert errors == []


def test_low_entropy_raises_temperature(rng):
    agent = SacAgent(SPEC, hidden=(8,), seed=6)
    agent.actor.log_std_min = agent.actor.log_std_max = -5.0
    before = agent.alpha
    agent.update(random_batch(rng), rng)
    assert agent.alpha > before


def test_sac_targets_drift_by_polyak(rng):
    agent = SacAgent(SPEC, tau=0.05, hidden=(8,), seed=7)
    before = [t.copy() for t in agent.target_critics]
    agent.update(random_batch(rng), rng)
    for old, new, online in zip(before, agent.target_critics, agent.critics):
        for key in new.params:
            assert np.allclose(new.params[key] - old.params[key], 0.05 * (online.params[key] - old.params[key]))


# ─── DDPG ────────────────────────────────────────────────────────────────────

def test_ddpg_zero_discount_targets_are_rewards(rng):
    agent = DdpgAgent(SPEC, gamma=0.0, hidden=(8,))
    batch = random_batch(rng)
    assert np.array_equal(agent.q_targets(batch), batch.rewards)


def test_ddpg_actor_climbs_linear_critic(rng):
    agent = DdpgAgent(SPEC, lr=1e-3, hidden=(8,), seed=8)
    critic = Mlp([SPEC.obs_dim + SPEC.action_dim, 1])
    critic.params["W0"][...] = 0.0
    critic.params["W0"][SPEC.obs_dim:, 0] = [1.0, -2.0]
    agent.critic = critic
    states = rng.normal(size=(16, SPEC.obs_dim))
    before_actions = agent.act(states, "evaluate")
    loss_before, grads = agent.actor_loss_and_grad(states)
    agent.actor_optimizer.step(agent.actor.net.params, grads)
    after_actions = agent.act(states, "evaluate")
    assert agent.actor_loss_and_grad(states)[0] < loss_before
    assert np.mean((after_actions - before_actions) @ np.array([1.0, -2.0])) > 0.0


def test_ddpg_std_head_receives_no_gradient(rng):
    agent = DdpgAgent(SPEC, hidden=(), seed=9)
    _, grads = agent.actor_loss_and_grad(rng.normal(size=(8, SPEC.obs_dim)))
    assert np.all(grads["W0"][:, SPEC.action_dim:] == 0.0)


def test_ddpg_target_drift_is_polyak(rng):
    agent = DdpgAgent(SPEC, tau=0.1, hidden=(8,))
    old = agent.target_critic.copy()
    ddpg_update(agent, random_batch(rng))
    for key, value in agent.target_critic.params.items():
        assert np.allclose(value - old.params[key], 0.1 * (agent.critic.params[key] - old.params[key]))


def test_ddpg_exploration_noise_anneals(rng):
    agent = DdpgAgent(SPEC, hidden=(8,), explore_noise=True)
    assert agent.explore_sigma == pytest.approx(1.0)
    agent.set_progress(0.5)
    assert agent.explore_sigma == pytest.approx(0.55)
    agent.set_progress(2.0)
    assert agent.explore_sigma == pytest.approx(0.1)
    actions = agent.act(rng.normal(size=(100, SPEC.obs_dim)), "explore", rng)
    assert actions.min() >= -1.0 and actions.max() <= 1.0


def test_make_agent():
    assert isinstance(make_agent("sac", SPEC, 0.99, 0.005, 1e-3), SacAgent)
    assert isinstance(make_agent("ddpg", SPEC, 0.9, 0.005, 5e-5), DdpgAgent)
    with pytest.raises(ValueError):
        make_agent("ppo", SPEC, 0.99, 0.005, 1e-3)
