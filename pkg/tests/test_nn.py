import json
import math

import numpy as np
import pytest

from blockcast.errors import NonFiniteError, VersionError
from blockcast.nn import (
    AdamState,
    Conv1dParams,
    DenseParams,
    LstmParams,
    adam_init,
    adam_step,
    bce_loss,
    conv1d_backward,
    conv1d_forward,
    conv1d_init,
    dense_backward,
    dense_forward,
    dense_init,
    global_avg_pool,
    global_avg_pool_backward,
    huber_loss,
    load_params,
    lstm_backward,
    lstm_forward,
    lstm_init,
    relu,
    relu_backward,
    save_params,
    sigmoid,
    uniform_init,
)


def fd_grad(fn, arr, h=1e-5):
    """Central finite differences of a scalar function w.r.t. arr entries."""
    g = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + h
        hi = fn()
        arr[idx] = orig - h
        lo = fn()
        arr[idx] = orig
        g[idx] = (hi - lo) / (2.0 * h)
    return g


def max_rel_err(a, b):
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-6)
    return float(np.max(np.abs(a - b) / denom))


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------

def test_relu_and_its_gradient():
    x = np.array([-2.0, 0.0, 3.0])
    np.testing.assert_array_equal(relu(x), [0.0, 0.0, 3.0])
    np.testing.assert_array_equal(relu_backward(np.ones(3), x), [0.0, 0.0, 1.0])


def test_sigmoid_is_stable_at_extreme_inputs():
    x = np.array([-1000.0, -20.0, 0.0, 20.0, 1000.0])
    with np.errstate(over="raise"):
        y = sigmoid(x)
    assert y[0] == 0.0 and y[-1] == 1.0
    assert y[2] == 0.5
    assert np.all(np.diff(y) >= 0)


# ---------------------------------------------------------------------------
# Layer gradients against finite differences
# ---------------------------------------------------------------------------

def test_dense_gradients_match_finite_differences():
    for seed in (0, 1):
        rng = np.random.default_rng(seed)
        p = dense_init(rng, 5, 4)
        p.bias[:] = rng.normal(size=4)
        x = rng.normal(size=(3, 5))
        probe = rng.normal(size=(3, 4))

        def objective():
            y, _ = dense_forward(p, x)
            return float((y * probe).sum())

        y, cache = dense_forward(p, x)
        d_x, grads = dense_backward(p, probe, cache)
        assert max_rel_err(grads["weight"], fd_grad(objective, p.weight)) < 1e-4
        assert max_rel_err(grads["bias"], fd_grad(objective, p.bias)) < 1e-4
        assert max_rel_err(d_x, fd_grad(objective, x)) < 1e-4


def test_lstm_gradients_match_finite_differences():
    rng = np.random.default_rng(2)
    p = lstm_init(rng, 5, 6)
    seq = rng.normal(size=(4, 3, 5))
    probe = rng.normal(size=(4, 3, 6))

    def objective():
        hidden, _, _ = lstm_forward(p, seq)
        return float((hidden * probe).sum())

    hidden, _, cache = lstm_forward(p, seq)
    d_seq, grads = lstm_backward(p, probe, cache)
    assert max_rel_err(grads["w_in"], fd_grad(objective, p.w_in)) < 1e-4
    assert max_rel_err(grads["w_rec"], fd_grad(objective, p.w_rec)) < 1e-4
    assert max_rel_err(grads["bias"], fd_grad(objective, p.bias)) < 1e-4
    assert max_rel_err(d_seq, fd_grad(objective, seq)) < 1e-4


def test_lstm_final_state_gradient_matches_finite_differences():
    # Models read only the last hidden state; the backward path must be
    # exact when every other step gets a zero gradient.
    rng = np.random.default_rng(3)
    p = lstm_init(rng, 4, 5)
    seq = rng.normal(size=(6, 2, 4))
    probe = rng.normal(size=(2, 5))

    def objective():
        _, last, _ = lstm_forward(p, seq)
        return float((last * probe).sum())

    hidden, _, cache = lstm_forward(p, seq)
    d_hidden = np.zeros_like(hidden)
    d_hidden[-1] = probe
    d_seq, grads = lstm_backward(p, d_hidden, cache)
    assert max_rel_err(grads["w_rec"], fd_grad(objective, p.w_rec)) < 1e-4
    assert max_rel_err(d_seq, fd_grad(objective, seq)) < 1e-4


@pytest.mark.parametrize("stride", [1, 2])
def test_conv_gradients_match_finite_differences(stride):
    rng = np.random.default_rng(4 + stride)
    p = conv1d_init(rng, 3, 2, 4, stride=stride)
    p.bias[:] = rng.normal(size=2)
    x = rng.normal(size=(2, 3, 11))
    y, cache = conv1d_forward(p, x)
    probe = rng.normal(size=y.shape)

    def objective():
        out, _ = conv1d_forward(p, x)
        return float((out * probe).sum())

    d_x, grads = conv1d_backward(p, probe, cache)
    assert max_rel_err(grads["weight"], fd_grad(objective, p.weight)) < 1e-4
    assert max_rel_err(grads["bias"], fd_grad(objective, p.bias)) < 1e-4
    assert max_rel_err(d_x, fd_grad(objective, x)) < 1e-4


def test_global_avg_pool_and_gradient():
    x = np.arange(24, dtype=np.float64).reshape(2, 3, 4)
    y, length = global_avg_pool(x)
    assert length == 4
    np.testing.assert_allclose(y, x.mean(axis=2))
    d = global_avg_pool_backward(np.ones((2, 3)), length)
    np.testing.assert_allclose(d, np.full((2, 3, 4), 0.25))


# ---------------------------------------------------------------------------
# Conv details
# ---------------------------------------------------------------------------

def test_conv_output_matches_loop_oracle():
    rng = np.random.default_rng(8)
    p = conv1d_init(rng, 2, 3, 3, stride=2)
    p.bias[:] = rng.normal(size=3)
    x = rng.normal(size=(1, 2, 9))
    y, _ = conv1d_forward(p, x)
    assert y.shape == (1, 3, 4)
    for o in range(3):
        for j in range(4):
            s = j * 2
            want = (x[0, :, s : s + 3] * p.weight[o]).sum() + p.bias[o]
            assert y[0, o, j] == pytest.approx(want, rel=1e-12)


def test_conv_rejects_bad_inputs():
    rng = np.random.default_rng(0)
    p = conv1d_init(rng, 2, 3, 5)
    with pytest.raises(ValueError):
        conv1d_forward(p, np.zeros((1, 2, 4)))  # kernel longer than signal
    with pytest.raises(ValueError):
        conv1d_forward(p, np.zeros((1, 3, 10)))  # wrong channel count
    with pytest.raises(ValueError):
        Conv1dParams(np.zeros((2, 2, 3)), np.zeros(3))
    with pytest.raises(ValueError):
        Conv1dParams(np.zeros((2, 2, 3)), np.zeros(2), stride=0)


# ---------------------------------------------------------------------------
# LSTM details
# ---------------------------------------------------------------------------

def test_lstm_zero_parameters_give_zero_hidden():
    p = LstmParams(3, 4, np.zeros((3, 16)), np.zeros((4, 16)), np.zeros(16))
    hidden, last, _ = lstm_forward(p, np.ones((5, 2, 3)))
    np.testing.assert_array_equal(hidden, np.zeros((5, 2, 4)))
    np.testing.assert_array_equal(last, np.zeros((2, 4)))


def test_lstm_single_step_matches_manual_cell():
    rng = np.random.default_rng(6)
    p = lstm_init(rng, 3, 2)
    x = rng.normal(size=(1, 1, 3))
    h0 = rng.normal(size=(1, 2))
    c0 = rng.normal(size=(1, 2))
    _, last, _ = lstm_forward(p, x, h0=h0, c0=c0)

    a = (x[0] @ p.w_in + h0 @ p.w_rec + p.bias)[0]
    sig = lambda v: 1.0 / (1.0 + np.exp(-v))
    i, f, g, o = sig(a[0:2]), sig(a[2:4]), np.tanh(a[4:6]), sig(a[6:8])
    c = f * c0[0] + i * g
    np.testing.assert_allclose(last[0], o * np.tanh(c), rtol=1e-12)


def test_lstm_input_validation():
    rng = np.random.default_rng(0)
    p = lstm_init(rng, 3, 4)
    with pytest.raises(ValueError):
        lstm_forward(p, np.zeros((2, 3)))  # not 3-D
    with pytest.raises(ValueError):
        lstm_forward(p, np.zeros((2, 1, 5)))  # wrong width
    with pytest.raises(ValueError):
        lstm_forward(p, np.zeros((2, 1, 3)), h0=np.zeros((2, 4)))
    with pytest.raises(ValueError):
        lstm_forward(p, np.zeros((2, 1, 3)), c0=np.zeros((1, 3)))
    with pytest.raises(ValueError):
        LstmParams(3, 4, np.zeros((3, 16)), np.zeros((4, 16)), np.zeros(15))
    hidden, _, cache = lstm_forward(p, np.zeros((2, 1, 3)))
    with pytest.raises(ValueError):
        lstm_backward(p, np.zeros((2, 1, 5)), cache)


# ---------------------------------------------------------------------------
# Losses
# ---------------------------------------------------------------------------

def test_huber_exact_trivial_values():
    loss, grad = huber_loss(np.array([1.0]), np.array([1.0]))
    assert loss == 0.0 and grad[0] == 0.0

    loss, grad = huber_loss(np.array([0.5]), np.array([0.0]), delta=1.0)
    assert abs(loss - 0.125) <= 1e-12
    assert abs(grad[0] - 0.5) <= 1e-12

    loss, grad = huber_loss(np.array([2.0]), np.array([0.0]), delta=1.0)
    assert abs(loss - 1.5) <= 1e-12
    assert abs(grad[0] - 1.0) <= 1e-12


def test_huber_is_continuous_at_the_seam():
    eps = 1e-9
    for delta in (0.5, 1.0, 2.0):
        inside, _ = huber_loss(np.array([delta - eps]), np.array([0.0]), delta)
        outside, _ = huber_loss(np.array([delta + eps]), np.array([0.0]), delta)
        assert abs(inside - outside) <= 1e-8
        _, g_in = huber_loss(np.array([delta - eps]), np.array([0.0]), delta)
        _, g_out = huber_loss(np.array([delta + eps]), np.array([0.0]), delta)
        assert abs(g_in[0] - g_out[0]) <= 1e-8


def test_huber_gradient_matches_finite_differences():
    rng = np.random.default_rng(7)
    target = rng.normal(size=(4, 3))
    # Keep residuals away from the seam so central differences are clean.
    z = rng.uniform(0.1, 0.8, size=(4, 3)) * rng.choice([-1.0, 1.0], size=(4, 3))
    z[0] = 1.4 * np.sign(z[0])  # some entries in the linear zone
    pred = target + z
    _, grad = huber_loss(pred, target, delta=1.0)
    fd = fd_grad(lambda: huber_loss(pred, target, delta=1.0)[0], pred)
    assert max_rel_err(grad, fd) < 1e-4


def test_bce_known_value_and_gradient():
    loss, grad = bce_loss(np.array([0.5]), np.array([1.0]))
    assert loss == pytest.approx(math.log(2.0), rel=1e-15)
    assert grad[0] == pytest.approx(-0.5, rel=1e-15)


def test_bce_perfect_predictions_are_nearly_free():
    loss, grad = bce_loss(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    assert loss <= 1e-6
    assert np.max(np.abs(grad)) <= 1e-6


def test_bce_logit_gradient_matches_finite_differences():
    rng = np.random.default_rng(10)
    logits = rng.normal(size=(3, 5))
    targets = rng.integers(0, 2, size=(3, 5)).astype(np.float64)

    def objective():
        return bce_loss(sigmoid(logits), targets)[0]

    _, grad = bce_loss(sigmoid(logits), targets)
    assert max_rel_err(grad, fd_grad(objective, logits)) < 1e-4


def test_loss_input_validation():
    with pytest.raises(ValueError):
        huber_loss(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        huber_loss(np.zeros(3), np.zeros(3), delta=0.0)
    with pytest.raises(ValueError):
        bce_loss(np.zeros(3), np.zeros(4))
    with pytest.raises(ValueError):
        bce_loss(np.full(3, 0.5), np.array([0.0, 0.3, 1.0]))


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

def test_adam_zero_gradient_leaves_parameters_untouched():
    params = {"w": np.array([1.0, -2.0, 3.0])}
    before = params["w"].copy()
    state = adam_init(params, lr=0.1)
    adam_step(state, params, {"w": np.zeros(3)})
    np.testing.assert_array_equal(params["w"], before)


def test_adam_first_step_size_is_about_lr():
    params = {"w": np.array([0.0])}
    state = adam_init(params, lr=0.01)
    adam_step(state, params, {"w": np.array([5.0])})
    assert params["w"][0] == pytest.approx(-0.01, rel=1e-6)


def test_adam_descends_a_quadratic_bowl():
    # Minimizing 0.5*||w||^2 from (1, 1): the gradient is w itself.
    params = {"w": np.array([1.0, 1.0])}
    state = adam_init(params, lr=0.05)
    for _ in range(100):
        adam_step(state, params, {"w": params["w"].copy()})
    assert float(np.linalg.norm(params["w"])) < 0.1
    assert state.step == 100


def test_adam_validates_keys_shapes_and_finiteness():
    params = {"w": np.zeros(2)}
    state = adam_init(params)
    with pytest.raises(ValueError):
        adam_step(state, params, {"v": np.zeros(2)})
    with pytest.raises(ValueError):
        adam_step(state, params, {"w": np.zeros(3)})
    with pytest.raises(NonFiniteError):
        adam_step(state, params, {"w": np.array([0.0, math.nan])})


def test_adam_state_defaults():
    s = AdamState()
    assert (s.lr, s.beta1, s.beta2, s.eps, s.step) == (1e-3, 0.9, 0.999, 1e-8, 0)


# ---------------------------------------------------------------------------
# Init and checkpoint IO
# ---------------------------------------------------------------------------

def test_uniform_init_bounds_and_determinism():
    a = uniform_init(np.random.default_rng(0), (50, 40), fan_in=16)
    assert np.all(np.abs(a) <= 0.25)
    assert np.std(a) > 0.05
    b = uniform_init(np.random.default_rng(0), (50, 40), fan_in=16)
    np.testing.assert_array_equal(a, b)
    c = uniform_init(np.random.default_rng(1), (50, 40), fan_in=16)
    assert not np.array_equal(a, c)


def test_layer_inits_zero_their_biases():
    rng = np.random.default_rng(0)
    d = dense_init(rng, 4, 3)
    np.testing.assert_array_equal(d.bias, np.zeros(3))
    p = lstm_init(rng, 4, 3)
    np.testing.assert_array_equal(p.bias[3:6], np.ones(3))
    np.testing.assert_array_equal(p.bias[:3], np.zeros(3))
    np.testing.assert_array_equal(p.bias[6:], np.zeros(6))


def test_checkpoint_round_trip_is_bitwise(tmp_path):
    rng = np.random.default_rng(12)
    params = {
        "a.weight": rng.normal(size=(7, 5)) * math.pi,
        "a.bias": rng.normal(size=5),
        "deep.w_in": rng.normal(size=(3, 8)) / 3.0,
    }
    desc = {"kind": "demo", "hidden": 5}
    save_params(tmp_path / "ck.json", desc, params)
    desc2, loaded = load_params(tmp_path / "ck.json")
    assert desc2 == desc
    assert set(loaded) == set(params)
    for name in params:
        np.testing.assert_array_equal(loaded[name], params[name])


def test_checkpoint_version_is_enforced(tmp_path):
    save_params(tmp_path / "ck.json", {}, {"w": np.zeros(2)})
    payload = json.loads((tmp_path / "ck.json").read_text())
    payload["format_version"] = 42
    (tmp_path / "ck.json").write_text(json.dumps(payload))
    with pytest.raises(VersionError):
        load_params(tmp_path / "ck.json")


def test_dense_params_shape_validation():
    with pytest.raises(ValueError):
        DenseParams(np.zeros((3, 2)), np.zeros(3))
