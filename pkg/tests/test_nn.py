"""Neural primitive tests: oracles first, then gradients, then edge cases."""

import numpy as np
import pytest

from voxact import nn
from voxact.errors import (
    InvalidProbability,
    InvalidTarget,
    LengthMismatch,
    NumericError,
    ShapeMismatch,
)

from helpers import conv3d_oracle, fd_gradient, max_rel_err, maxpool3d_oracle


# --------------------------------------------------------------------------
# convolution vs direct-definition oracle
# --------------------------------------------------------------------------

def _random_conv_case(rng):
    n = int(rng.integers(1, 3))
    c_in = int(rng.integers(1, 4))
    c_out = int(rng.integers(1, 4))
    spatial = tuple(int(rng.integers(3, 7)) for _ in range(3))
    kernel = tuple(int(rng.integers(1, min(4, d) + 1)) for d in spatial)
    padding = tuple(int(rng.integers(0, 2)) for _ in range(3))
    x = rng.standard_normal((n, c_in) + spatial)
    w = rng.standard_normal((c_out, c_in) + kernel)
    b = rng.standard_normal(c_out)
    return x, w, b, padding


@pytest.mark.parametrize("method", ["im2col", "fft"])
def test_conv3d_forward_matches_oracle(method):
    rng = np.random.default_rng(20)
    tol = 1e-12 if method == "im2col" else 1e-9
    for _ in range(25):
        x, w, b, padding = _random_conv_case(rng)
        got = nn.conv3d_forward(x, w, b, padding, method=method)
        want = conv3d_oracle(x, w, b, padding)
        assert got.shape == want.shape
        assert np.max(np.abs(got - want)) < tol


def test_conv3d_ones_kernel_counts_window():
    x = np.ones((1, 1, 2, 2, 2))
    w = np.ones((1, 1, 2, 2, 2))
    y = nn.conv3d_forward(x, w, None, (0, 0, 0))
    assert y.shape == (1, 1, 1, 1, 1)
    assert y[0, 0, 0, 0, 0] == 8.0
    y_b = nn.conv3d_forward(x, w, np.array([1.0]), (0, 0, 0))
    assert y_b[0, 0, 0, 0, 0] == 9.0


def test_conv3d_same_padding_preserves_extent():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((1, 2, 5, 6, 7))
    w = rng.standard_normal((3, 2, 3, 5, 3))
    pad = nn.same_padding((3, 5, 3))
    y = nn.conv3d_forward(x, w, None, pad)
    assert y.shape == (1, 3, 5, 6, 7)
    assert np.max(np.abs(y - conv3d_oracle(x, w, None, pad))) < 1e-12


def test_same_padding_rejects_even_kernels():
    with pytest.raises(ValueError):
        nn.same_padding((2, 3, 3))


def test_conv3d_fft_matches_im2col_on_larger_volume():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((2, 3, 14, 14, 14))
    w = rng.standard_normal((4, 3, 7, 7, 5))
    b = rng.standard_normal(4)
    pad = nn.same_padding((7, 7, 5))
    y_ref = nn.conv3d_forward(x, w, b, pad, method="im2col")
    y_fft = nn.conv3d_forward(x, w, b, pad, method="fft")
    assert np.max(np.abs(y_ref - y_fft)) < 1e-9


def test_conv3d_linearity_in_input():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((1, 2, 4, 4, 4))
    w = rng.standard_normal((2, 2, 3, 3, 3))
    y1 = nn.conv3d_forward(x, w, None, (1, 1, 1))
    y2 = nn.conv3d_forward(2.5 * x, w, None, (1, 1, 1))
    assert np.allclose(2.5 * y1, y2, atol=1e-12)


@pytest.mark.parametrize("method", ["im2col", "fft"])
def test_conv3d_backward_matches_finite_differences(method):
    rng = np.random.default_rng(6)
    x = rng.standard_normal((2, 2, 4, 5, 4))
    w = rng.standard_normal((3, 2, 3, 3, 3))
    b = rng.standard_normal(3)
    padding = (1, 0, 1)
    target = rng.standard_normal(
        nn.conv3d_forward(x, w, b, padding, method=method).shape
    )

    def loss():
        y = nn.conv3d_forward(x, w, b, padding, method=method)
        return float(np.sum(y * target))

    grad_x, grad_w, grad_b = nn.conv3d_backward(
        x, w, target, padding, method=method
    )
    assert max_rel_err(grad_x, fd_gradient(loss, x)) < 1e-6
    assert max_rel_err(grad_w, fd_gradient(loss, w)) < 1e-6
    assert max_rel_err(grad_b, fd_gradient(loss, b)) < 1e-6


def test_conv3d_backward_can_skip_input_gradient():
    rng = np.random.default_rng(7)
    x = rng.standard_normal((1, 1, 4, 4, 4))
    w = rng.standard_normal((2, 1, 3, 3, 3))
    go = rng.standard_normal((1, 2, 4, 4, 4))
    grad_x, grad_w, grad_b = nn.conv3d_backward(
        x, w, go, (1, 1, 1), need_grad_x=False
    )
    assert grad_x is None
    assert grad_w.shape == w.shape
    assert grad_b.shape == (2,)


def test_conv3d_shape_validation():
    x = np.zeros((1, 2, 4, 4, 4))
    w = np.zeros((3, 1, 3, 3, 3))  # channel mismatch
    with pytest.raises(ShapeMismatch):
        nn.conv3d_forward(x, w, None, (0, 0, 0))
    w_big = np.zeros((3, 2, 5, 5, 5))  # does not fit unpadded
    with pytest.raises(ShapeMismatch):
        nn.conv3d_forward(x, w_big, None, (0, 0, 0))
    with pytest.raises(ShapeMismatch):
        nn.conv3d_backward(
            x, np.zeros((3, 2, 3, 3, 3)), np.zeros((1, 3, 9, 9, 9)), (0, 0, 0)
        )
    with pytest.raises(ValueError):
        nn.conv3d_forward(x, np.zeros((3, 2, 3, 3, 3)), None, (0, 0, 0), method="nope")


def test_conv3d_preserves_float32():
    rng = np.random.default_rng(8)
    x = rng.standard_normal((1, 1, 6, 6, 6)).astype(np.float32)
    w = rng.standard_normal((2, 1, 3, 3, 3)).astype(np.float32)
    b = np.zeros(2, dtype=np.float32)
    for method in ("im2col", "fft"):
        y = nn.conv3d_forward(x, w, b, (1, 1, 1), method=method)
        assert y.dtype == np.float32


# --------------------------------------------------------------------------
# max pooling
# --------------------------------------------------------------------------

def test_maxpool_matches_oracle():
    rng = np.random.default_rng(9)
    for _ in range(10):
        spatial = tuple(int(rng.integers(2, 8)) for _ in range(3))
        x = rng.standard_normal((2, 2) + spatial)
        y, _ = nn.maxpool3d_forward(x, (2, 2, 2))
        want = maxpool3d_oracle(x, (2, 2, 2), (2, 2, 2))
        assert np.array_equal(y, want)


def test_maxpool_floor_mode_drops_partial_windows():
    x = np.arange(2 * 1 * 5 * 5 * 5, dtype=np.float64).reshape(2, 1, 5, 5, 5)
    y, _ = nn.maxpool3d_forward(x, (2, 2, 2))
    assert y.shape == (2, 1, 2, 2, 2)


def test_maxpool_tie_routes_to_first_position():
    x = np.zeros((1, 1, 2, 2, 2))
    x[0, 0] = 3.0  # every window element equal
    y, cache = nn.maxpool3d_forward(x, (2, 2, 2))
    assert y[0, 0, 0, 0, 0] == 3.0
    grad = nn.maxpool3d_backward(np.ones_like(y), cache)
    expect = np.zeros_like(x)
    expect[0, 0, 0, 0, 0] = 1.0  # earliest window position
    assert np.array_equal(grad, expect)


def test_maxpool_backward_matches_finite_differences():
    rng = np.random.default_rng(10)
    x = rng.standard_normal((2, 2, 4, 6, 4))
    target = rng.standard_normal((2, 2, 2, 3, 2))

    def loss():
        y, _ = nn.maxpool3d_forward(x, (2, 2, 2))
        return float(np.sum(y * target))

    _, cache = nn.maxpool3d_forward(x, (2, 2, 2))
    grad = nn.maxpool3d_backward(target, cache)
    assert max_rel_err(grad, fd_gradient(loss, x)) < 1e-6


def test_maxpool_overlapping_windows_accumulate():
    x = np.array([[[[[1.0, 0.0, 2.0]]]]])  # (1,1,1,1,3)
    y, cache = nn.maxpool3d_forward(x, (1, 1, 2), stride=(1, 1, 1))
    assert np.array_equal(y.ravel(), [1.0, 2.0])
    grad = nn.maxpool3d_backward(np.ones_like(y), cache)
    assert np.array_equal(grad.ravel(), [1.0, 0.0, 1.0])


def test_maxpool_window_too_large_raises():
    with pytest.raises(ShapeMismatch):
        nn.maxpool3d_forward(np.zeros((1, 1, 1, 2, 2)), (2, 2, 2))


# --------------------------------------------------------------------------
# relu and dropout
# --------------------------------------------------------------------------

def test_relu_forward_backward():
    x = np.array([-2.0, -0.0, 0.0, 3.0])
    assert np.array_equal(nn.relu_forward(x), [0.0, 0.0, 0.0, 3.0])
    grad = nn.relu_backward(np.ones(4), x)
    assert np.array_equal(grad, [0.0, 0.0, 0.0, 1.0])


def test_dropout_identity_cases():
    x = np.arange(12.0).reshape(3, 4)
    y, mask = nn.dropout_forward(x, 0.0, training=True)
    assert np.array_equal(y, x) and mask.all()
    y, mask = nn.dropout_forward(x, 0.5, training=False)
    assert np.array_equal(y, x) and mask.all()


def test_dropout_scales_survivors():
    rng = np.random.default_rng(11)
    x = np.ones((200, 50))
    y, mask = nn.dropout_forward(x, 0.25, rng=rng, training=True)
    assert set(np.unique(y)) <= {0.0, 1.0 / 0.75}
    assert np.array_equal(y != 0, mask)
    keep_rate = mask.mean()
    assert abs(keep_rate - 0.75) < 0.02
    # inverted scaling keeps the expectation close to the input
    assert abs(y.mean() - 1.0) < 0.03


def test_dropout_frozen_mask_reuse():
    rng = np.random.default_rng(12)
    x = np.arange(24.0).reshape(4, 6)
    y1, mask = nn.dropout_forward(x, 0.5, rng=rng, training=True)
    y2, mask2 = nn.dropout_forward(x, 0.5, training=True, mask=mask)
    assert np.array_equal(y1, y2)
    assert np.array_equal(mask, mask2)
    grad = nn.dropout_backward(np.ones_like(x), mask, 0.5)
    assert np.array_equal(grad, mask * 2.0)


def test_dropout_probability_validation():
    x = np.zeros(3)
    for bad in (-0.1, 1.0, 1.5):
        with pytest.raises(InvalidProbability):
            nn.dropout_forward(x, bad, training=True)
        with pytest.raises(InvalidProbability):
            nn.dropout_backward(x, np.ones(3, dtype=bool), bad)


# --------------------------------------------------------------------------
# dense
# --------------------------------------------------------------------------

def test_dense_hand_values():
    x = np.array([[3.0]])
    w = np.array([[2.0]])
    b = np.array([1.0])
    assert nn.dense_forward(x, w, b)[0, 0] == 7.0


def test_dense_backward_matches_finite_differences():
    rng = np.random.default_rng(13)
    x = rng.standard_normal((4, 5))
    w = rng.standard_normal((5, 3))
    b = rng.standard_normal(3)
    target = rng.standard_normal((4, 3))

    def loss():
        return float(np.sum(nn.dense_forward(x, w, b) * target))

    grad_x, grad_w, grad_b = nn.dense_backward(x, w, target)
    assert max_rel_err(grad_x, fd_gradient(loss, x)) < 1e-6
    assert max_rel_err(grad_w, fd_gradient(loss, w)) < 1e-6
    assert max_rel_err(grad_b, fd_gradient(loss, b)) < 1e-6


def test_dense_shape_validation():
    with pytest.raises(ShapeMismatch):
        nn.dense_forward(np.zeros((2, 3)), np.zeros((4, 5)), np.zeros(5))
    with pytest.raises(ShapeMismatch):
        nn.dense_forward(np.zeros((2, 3)), np.zeros((3, 5)), np.zeros(4))
    with pytest.raises(ShapeMismatch):
        nn.dense_backward(np.zeros((2, 3)), np.zeros((3, 5)), np.zeros((2, 4)))


# --------------------------------------------------------------------------
# softmax cross-entropy
# --------------------------------------------------------------------------

def test_softmax_known_values():
    probs = nn.softmax(np.array([[0.0, 0.0]]))
    assert np.allclose(probs, [[0.5, 0.5]])
    probs = nn.softmax(np.array([[0.0, np.log(3.0)]]))
    assert np.allclose(probs, [[0.25, 0.75]], atol=1e-12)


def test_softmax_stable_under_large_logits():
    probs = nn.softmax(np.array([[1e4, 1e4 + 1.0]]))
    assert np.all(np.isfinite(probs))
    assert abs(probs.sum() - 1.0) < 1e-12


def test_cross_entropy_known_loss():
    logits = np.array([[0.0, np.log(3.0)]])
    loss, probs, grad = nn.softmax_cross_entropy(logits, np.array([1]))
    assert abs(loss - (-np.log(0.75))) < 1e-12
    assert np.allclose(probs, [[0.25, 0.75]])
    assert np.allclose(grad, [[0.25, -0.25]])


def test_cross_entropy_gradient_matches_finite_differences():
    rng = np.random.default_rng(14)
    logits = rng.standard_normal((5, 4))
    targets = rng.integers(0, 4, size=5)

    def loss():
        return nn.softmax_cross_entropy(logits, targets)[0]

    _, _, grad = nn.softmax_cross_entropy(logits, targets)
    assert max_rel_err(grad, fd_gradient(loss, logits)) < 1e-6


def test_cross_entropy_target_validation():
    logits = np.zeros((2, 3))
    with pytest.raises(InvalidTarget):
        nn.softmax_cross_entropy(logits, np.array([0, 3]))
    with pytest.raises(InvalidTarget):
        nn.softmax_cross_entropy(logits, np.array([-1, 0]))
    with pytest.raises(InvalidTarget):
        nn.softmax_cross_entropy(logits, np.array([0.0, 1.0]))
    with pytest.raises(ShapeMismatch):
        nn.softmax_cross_entropy(logits, np.array([0, 1, 2]))


# --------------------------------------------------------------------------
# SGD
# --------------------------------------------------------------------------

def test_sgd_two_steps_hand_unrolled():
    w = np.array([1.0])
    state = nn.SgdState.zeros_like([w])
    lr, m, wd = 0.1, 0.9, 0.1

    def grad():
        return [np.array([0.5])]

    # step 1: g_eff = 0.5 + 0.1*1.0 = 0.6; v = 0.6; w = 1 - 0.06 = 0.94
    nn.sgd_step([w], grad(), state, lr, m, wd)
    assert np.allclose(w, [0.94], atol=1e-15)
    assert np.allclose(state.velocities[0], [0.6], atol=1e-15)
    # step 2: g_eff = 0.5 + 0.094; v = 0.9*0.6 + 0.594 = 1.134; w -= 0.1134
    nn.sgd_step([w], grad(), state, lr, m, wd)
    assert np.allclose(w, [0.94 - 0.1134], atol=1e-14)


def test_sgd_without_momentum_is_plain_descent():
    w = np.array([2.0, -1.0])
    g = np.array([0.5, 0.25])
    state = nn.SgdState.zeros_like([w])
    nn.sgd_step([w], [g], state, lr=0.1)
    assert np.allclose(w, [1.95, -1.025], atol=1e-15)


def test_sgd_zero_learning_rate_is_noop():
    w = np.array([1.0, 2.0])
    before = w.copy()
    state = nn.SgdState.zeros_like([w])
    nn.sgd_step([w], [np.array([5.0, -3.0])], state, lr=0.0, momentum=0.9)
    assert np.array_equal(w, before)


def test_sgd_length_and_shape_validation():
    w = np.zeros(3)
    state = nn.SgdState.zeros_like([w])
    with pytest.raises(LengthMismatch):
        nn.sgd_step([w], [], state, 0.1)
    with pytest.raises(ShapeMismatch):
        nn.sgd_step([w], [np.zeros(4)], state, 0.1)


# --------------------------------------------------------------------------
# init and misc
# --------------------------------------------------------------------------

def test_glorot_uniform_bounds():
    rng = np.random.default_rng(15)
    w = nn.glorot_uniform((200, 300), 200, 300, rng)
    limit = np.sqrt(6.0 / 500.0)
    assert np.max(np.abs(w)) <= limit
    assert abs(w.mean()) < limit / 10


def test_init_conv_params_shapes_and_zero_bias():
    rng = np.random.default_rng(16)
    w, b = nn.init_conv_params(2, 5, (3, 3, 3), rng)
    assert w.shape == (5, 2, 3, 3, 3)
    assert np.array_equal(b, np.zeros(5))


def test_param_count():
    assert nn.param_count([np.zeros((2, 3)), np.zeros(7)]) == 13


def test_check_finite_raises():
    with pytest.raises(NumericError):
        nn.check_finite(np.array([1.0, np.nan]), "unit test")
    nn.check_finite(np.array([1.0, 2.0]), "unit test")
