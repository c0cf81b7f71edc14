import numpy as np
import pytest

from src.core import make_rng
from src.exceptions import ShapeMismatchError
from src.nn import Adam, GaussianHead, Mlp, adam_step, polyak_update
from src.selftest import _param_fd_errors


def test_zero_network_outputs_zero(rng):
    net = Mlp([3, 4, 2], rng=rng)
    for value in net.params.values():
        value[...] = 0.0
    assert np.array_equal(net(rng.normal(size=3)), np.zeros(2))


def test_single_affine_layer():
    net = Mlp([1, 1])
    net.params["W0"][...] = 2.0
    net.params["b0"][...] = 1.0
    assert net(np.array([3.0])) == pytest.approx([7.0])


def test_batched_equals_rowwise(rng):
    net = Mlp([3, 5, 5, 2], activation=["mish", "silu"], rng=rng)
    x = rng.normal(size=(6, 3))
    rows = np.array([net(row) for row in x])
    assert np.allclose(net(x), rows)


def test_input_width_checked(rng):
    net = Mlp([3, 2], rng=rng)
    with pytest.raises(ShapeMismatchError):
        net(np.zeros(4))


def test_unknown_activation():
    with pytest.raises(ValueError):
        Mlp([2, 3, 1], activation="gelu")


def test_zero_upstream_gives_zero_gradients(rng):
    net = Mlp([3, 4, 2], rng=rng)
    grads = net.backward(rng.normal(size=(2, 3)), np.zeros((2, 2)))
    assert all(np.all(g == 0.0) for g in grads.params.values())


@pytest.mark.parametrize("activation", ["silu", "mish", "tanh"])
def test_backward_matches_finite_differences(activation):
    rng = make_rng(3)
    net = Mlp([3, 6, 4, 2], activation=activation, rng=rng)
    x = rng.normal(size=(4, 3))
    upstream = rng.normal(size=(4, 2))
    grads = net.backward(x, upstream).params
    errors = _param_fd_errors(net.params, lambda: float(np.sum(net(x) * upstream)), grads, rng,
                              checks=30, step=1e-5, tol=1e-4)
    assert errors == []


def test_linear_mse_closed_form(rng):
    net = Mlp([3, 2], rng=rng)
    x, y = rng.normal(size=3), rng.normal(size=2)
    err = net(x) - y
    grads = net.backward(x, 2.0 * err).params
    assert np.allclose(grads["W0"], np.outer(x, 2.0 * err))
    assert np.allclose(grads["b0"], 2.0 * err)


def test_input_gradient_of_linear_net(rng):
    net = Mlp([3, 1], rng=rng)
    assert np.allclose(net.backward(np.zeros(3), np.ones(1)).inputs, net.params["W0"][:, 0])


# ─── Adam ────────────────────────────────────────────────────────────────────

def test_adam_zero_gradient_keeps_params():
    params = {"w": np.array([1.0, -2.0])}
    adam_step(Adam(lr=0.1), params, {"w": np.zeros(2)})
    assert np.array_equal(params["w"], [1.0, -2.0])


def test_adam_constant_gradient_step_is_lr_times_sign():
    optimizer = Adam(lr=0.01)
    params = {"w": np.zeros(2)}
    grads = {"w": np.array([3.0, -0.5])}
    for _ in range(200):
        before = params["w"].copy()
        optimizer.step(params, grads)
    assert np.allclose(params["w"] - before, [-0.01, 0.01], rtol=1e-5)


def test_adam_counts_steps():
    optimizer = Adam()
    params = {"w": np.zeros(1)}
    for expected in range(1, 4):
        optimizer.step(params, {"w": np.ones(1)})
        assert optimizer.t == expected


def test_adam_fits_sine_with_one_hidden_layer():
    rng = make_rng(3)
    x = np.linspace(-np.pi, np.pi, 128)[:, None]
    y = np.sin(x)
    net = Mlp([1, 32, 1], activation="tanh", rng=rng)
    optimizer = Adam(lr=0.01)
    start = float(np.mean((net(x) - y) ** 2))
    for _ in range(2000):
        err = net(x) - y
        optimizer.step(net.params, net.backward(x, 2.0 * err / len(x)).params)
    final = float(np.mean((net(x) - y) ** 2))
    assert final < 0.05
    assert final < 0.1 * start


def test_adam_shape_mismatch():
    with pytest.raises(ValueError):
        Adam().step({"w": np.zeros(2)}, {"w": np.zeros(3)})


# ─── Heads and target networks ───────────────────────────────────────────────

def test_gaussian_head_bounds(rng):
    head = GaussianHead(2)
    raw = rng.normal(scale=50.0, size=(100, 4))
    mean, logvar, _ = head.split(raw)
    assert np.array_equal(mean, raw[:, :2])
    assert logvar.min() >= head.logvar_min
    assert logvar.max() <= head.logvar_max


def test_gaussian_head_unclamped_passthrough(rng):
    head = GaussianHead(1, clamp=False)
    raw = np.array([[0.2, 40.0]])
    _, logvar, draw = head.split(raw)
    assert logvar[0, 0] == 40.0
    assert draw[0, 0] == 1.0


def test_polyak_identity(rng):
    online = Mlp([2, 3, 1], rng=rng)
    target = Mlp([2, 3, 1], rng=make_rng(99))
    before = {k: v.copy() for k, v in target.params.items()}
    polyak_update(target, online, 0.1)
    for key, value in target.params.items():
        assert np.allclose(value - before[key], 0.1 * (online.params[key] - before[key]))
