"""Dense-tensor neural network primitives on numpy arrays.

Layout conventions:

* activations: (N, C, X, Y, Z) for volumes, (N, F) for flat features
* conv weights: (C_out, C_in, KX, KY, KZ), bias (C_out,)
* dense weights: (F_in, F_out), bias (F_out,)

Convolution here is cross-correlation (no kernel flip), stride 1, with
symmetric zero padding per axis. Two execution paths produce the same
result:

* "im2col": sliding windows flattened into a matrix product; exact
  reference path, used by default for small activations
* "fft": frequency-domain correlation (zero-padded to fast sizes so the
  circular product equals the linear one); much faster when both the
  spatial extent and C_in * prod(kernel) are large

"auto" picks between them per call. Gradients of both paths agree with
finite differences in float64; the FFT path differs from im2col only by
roundoff.

Pooling uses floor semantics: output extent (D - window) // stride + 1,
trailing partial windows dropped, ties broken toward the earliest window
position. Dropout is inverted (survivors scaled by 1/(1-p)) so inference
needs no rescaling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .errors import (
    InvalidProbability,
    InvalidTarget,
    LengthMismatch,
    NumericError,
    ShapeMismatch,
)

# Byte budget for per-chunk scratch buffers (column matrices, spectra).
_SCRATCH_BYTES = 256 * 2**20

# "auto" switches to the FFT path when the reduction axis and the output
# volume are both large; thresholds come from benchmarks on this engine.
_FFT_MIN_REDUCTION = 60
_FFT_MIN_OUT_SPATIAL = 2000


def check_finite(arr: np.ndarray, context: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {context}")


def _chunk_ranges(n: int, per_item_bytes: int):
    step = max(1, min(n, _SCRATCH_BYTES // max(1, per_item_bytes)))
    for start in range(0, n, step):
        yield start, min(n, start + step)


# --------------------------------------------------------------------------
# 3D convolution
# --------------------------------------------------------------------------

def same_padding(kernel: tuple[int, int, int]) -> tuple[int, int, int]:
    """Padding that preserves spatial extent; requires odd kernel sizes."""
    if any(k % 2 == 0 for k in kernel):
        raise ValueError(f"same padding needs odd kernel sizes, got {kernel}")
    return tuple((k - 1) // 2 for k in kernel)


def conv3d_output_shape(
    spatial: tuple[int, int, int],
    kernel: tuple[int, int, int],
    padding: tuple[int, int, int],
) -> tuple[int, int, int]:
    out = tuple(d + 2 * p - k + 1 for d, k, p in zip(spatial, kernel, padding))
    if any(e < 1 for e in out):
        raise ShapeMismatch(
            f"kernel {kernel} with padding {padding} does not fit input {spatial}"
        )
    return out


def _validate_conv_args(x, w, b, padding):
    if x.ndim != 5 or w.ndim != 5:
        raise ShapeMismatch(f"conv expects 5D tensors, got x{x.shape} w{w.shape}")
    if x.shape[1] != w.shape[1]:
        raise ShapeMismatch(f"channel mismatch: input {x.shape[1]}, weights {w.shape[1]}")
    if b is not None and b.shape != (w.shape[0],):
        raise ShapeMismatch(f"bias shape {b.shape} does not match {w.shape[0]} filters")
    if len(padding) != 3 or any(p < 0 for p in padding):
        raise ValueError(f"padding must be three ints >= 0, got {padding}")
    return conv3d_output_shape(x.shape[2:], w.shape[2:], tuple(padding))


def _choose_method(c_in: int, kernel, out_spatial: int) -> str:
    reduction = c_in * int(np.prod(kernel))
    if reduction >= _FFT_MIN_REDUCTION and out_spatial >= _FFT_MIN_OUT_SPATIAL:
        return "fft"
    return "im2col"


def _pad_spatial(x: np.ndarray, padding) -> np.ndarray:
    if not any(padding):
        return x
    px, py, pz = padding
    return np.pad(x, ((0, 0), (0, 0), (px, px), (py, py), (pz, pz)))


def _corr_windows(x_pad: np.ndarray, kernel) -> np.ndarray:
    """(N, C, OX, OY, OZ, KX, KY, KZ) view of all correlation windows."""
    return np.lib.stride_tricks.sliding_window_view(x_pad, kernel, axis=(2, 3, 4))


def _conv_im2col_forward(x_pad, w, out_shape):
    n = x_pad.shape[0]
    c_out = w.shape[0]
    ck = int(np.prod(w.shape[1:]))
    s_out = int(np.prod(out_shape))
    w_mat = w.reshape(c_out, ck).T
    y = np.empty((n, c_out) + out_shape, dtype=x_pad.dtype)
    per_item = s_out * ck * x_pad.dtype.itemsize
    for lo, hi in _chunk_ranges(n, per_item):
        windows = _corr_windows(x_pad[lo:hi], w.shape[2:])
        col = windows.transpose(0, 2, 3, 4, 1, 5, 6, 7).reshape(hi - lo, s_out, ck)
        prod = col @ w_mat
        y[lo:hi] = prod.transpose(0, 2, 1).reshape(hi - lo, c_out, *out_shape)
    return y


def _conv_im2col_grad_w(x_pad, grad_out, kernel):
    n, c_out = grad_out.shape[:2]
    c_in = x_pad.shape[1]
    ck = c_in * int(np.prod(kernel))
    s_out = int(np.prod(grad_out.shape[2:]))
    grad_w_mat = np.zeros((ck, c_out), dtype=np.float64)
    per_item = s_out * ck * x_pad.dtype.itemsize
    for lo, hi in _chunk_ranges(n, per_item):
        windows = _corr_windows(x_pad[lo:hi], kernel)
        col = windows.transpose(0, 2, 3, 4, 1, 5, 6, 7).reshape(hi - lo, s_out, ck)
        go = grad_out[lo:hi].reshape(hi - lo, c_out, s_out).transpose(0, 2, 1)
        grad_w_mat += np.einsum("nsk,nso->ko", col, go, optimize=True)
    grad_w = grad_w_mat.T.reshape(c_out, c_in, *kernel)
    return grad_w.astype(x_pad.dtype, copy=False)


def _conv_im2col_grad_x(grad_out, w, padding, in_spatial):
    # Full correlation of grad_out with the spatially flipped, transposed
    # kernel equals the gradient of correlation wrt its input.
    kernel = w.shape[2:]
    w_t = np.flip(w, axis=(2, 3, 4)).transpose(1, 0, 2, 3, 4)
    full_pad = tuple(k - 1 for k in kernel)
    go_pad = _pad_spatial(np.ascontiguousarray(grad_out), full_pad)
    pad_shape = tuple(d + 2 * p for d, p in zip(in_spatial, padding))
    grad_x_pad = _conv_im2col_forward(go_pad, np.ascontiguousarray(w_t), pad_shape)
    px, py, pz = padding
    dx, dy, dz = in_spatial
    return grad_x_pad[:, :, px:px + dx, py:py + dy, pz:pz + dz]


def _fft_shape(pad_spatial_shape):
    return tuple(scipy.fft.next_fast_len(d) for d in pad_spatial_shape)


def _conv_fft_forward(x_pad, w, out_shape):
    n, c_in = x_pad.shape[:2]
    c_out = w.shape[0]
    s = _fft_shape(x_pad.shape[2:])
    axes = (-3, -2, -1)
    w_hat = scipy.fft.rfftn(w, s=s, axes=axes)
    spec_items = int(np.prod(s[:2])) * (s[2] // 2 + 1)
    per_item = (c_in + c_out) * spec_items * 16
    y = np.empty((n, c_out) + out_shape, dtype=x_pad.dtype)
    ox, oy, oz = out_shape
    for lo, hi in _chunk_ranges(n, per_item):
        x_hat = scipy.fft.rfftn(x_pad[lo:hi], s=s, axes=axes)
        y_hat = np.einsum("ncxyz,ocxyz->noxyz", x_hat, np.conj(w_hat), optimize=True)
        full = scipy.fft.irfftn(y_hat, s=s, axes=axes)
        y[lo:hi] = full[:, :, :ox, :oy, :oz].astype(x_pad.dtype, copy=False)
    return y


def _conv_fft_grad_w(x_pad, grad_out, kernel):
    n, c_in = x_pad.shape[:2]
    c_out = grad_out.shape[1]
    s = _fft_shape(x_pad.shape[2:])
    axes = (-3, -2, -1)
    spec_items = int(np.prod(s[:2])) * (s[2] // 2 + 1)
    per_item = (c_in + c_out) * spec_items * 16
    kx, ky, kz = kernel
    acc = np.zeros((c_out, c_in) + tuple(kernel), dtype=np.float64)
    for lo, hi in _chunk_ranges(n, per_item):
        x_hat = scipy.fft.rfftn(x_pad[lo:hi], s=s, axes=axes)
        go_hat = scipy.fft.rfftn(grad_out[lo:hi], s=s, axes=axes)
        gw_hat = np.einsum("ncxyz,noxyz->ocxyz", x_hat, np.conj(go_hat), optimize=True)
        full = scipy.fft.irfftn(gw_hat, s=s, axes=axes)
        acc += full[:, :, :kx, :ky, :kz]
    return acc.astype(x_pad.dtype, copy=False)


def _conv_fft_grad_x(grad_out, w, padding, in_spatial):
    n = grad_out.shape[0]
    c_out, c_in = w.shape[:2]
    pad_shape = tuple(d + 2 * p for d, p in zip(in_spatial, padding))
    s = _fft_shape(pad_shape)
    axes = (-3, -2, -1)
    w_hat = scipy.fft.rfftn(w, s=s, axes=axes)
    spec_items = int(np.prod(s[:2])) * (s[2] // 2 + 1)
    per_item = (c_in + c_out) * spec_items * 16
    grad_x = np.empty((n, c_in) + in_spatial, dtype=grad_out.dtype)
    px, py, pz = padding
    dx, dy, dz = in_spatial
    for lo, hi in _chunk_ranges(n, per_item):
        go_hat = scipy.fft.rfftn(grad_out[lo:hi], s=s, axes=axes)
        gx_hat = np.einsum("noxyz,ocxyz->ncxyz", go_hat, w_hat, optimize=True)
        full = scipy.fft.irfftn(gx_hat, s=s, axes=axes)
        grad_x[lo:hi] = full[:, :, px:px + dx, py:py + dy, pz:pz + dz].astype(
            grad_out.dtype, copy=False
        )
    return grad_x


def conv3d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray | None,
    padding: tuple[int, int, int],
    method: str = "auto",
) -> np.ndarray:
    """Batched stride-1 cross-correlation with symmetric zero padding."""
    padding = tuple(padding)
    out_shape = _validate_conv_args(x, w, b, padding)
    if method == "auto":
        method = _choose_method(x.shape[1], w.shape[2:], int(np.prod(out_shape)))
    x_pad = _pad_spatial(x, padding)
    if method == "im2col":
        y = _conv_im2col_forward(x_pad, w, out_shape)
    elif method == "fft":
        y = _conv_fft_forward(x_pad, w, out_shape)
    else:
        raise ValueError(f"unknown conv method {method!r}")
    if b is not None:
        y += b.reshape(1, -1, 1, 1, 1)
    return y


def conv3d_backward(
    x: np.ndarray,
    w: np.ndarray,
    grad_out: np.ndarray,
    padding: tuple[int, int, int],
    method: str = "auto",
    need_grad_x: bool = True,
):
    """Gradients of conv3d_forward wrt input, weights, and bias.

    Returns (grad_x, grad_w, grad_b); grad_x is None when need_grad_x is
    False (saves the most expensive product for the first layer).
    """
    padding = tuple(padding)
    out_shape = _validate_conv_args(x, w, None, padding)
    if grad_out.shape != (x.shape[0], w.shape[0]) + out_shape:
        raise ShapeMismatch(
            f"grad_out shape {grad_out.shape} does not match conv output "
            f"{(x.shape[0], w.shape[0]) + out_shape}"
        )
    if method == "auto":
        method = _choose_method(x.shape[1], w.shape[2:], int(np.prod(out_shape)))
    grad_b = grad_out.sum(axis=(0, 2, 3, 4), dtype=np.float64).astype(x.dtype, copy=False)
    x_pad = _pad_spatial(x, padding)
    if method == "im2col":
        grad_w = _conv_im2col_grad_w(x_pad, grad_out, w.shape[2:])
        grad_x = (
            _conv_im2col_grad_x(grad_out, w, padding, x.shape[2:])
            if need_grad_x else None
        )
    elif method == "fft":
        grad_w = _conv_fft_grad_w(x_pad, grad_out, w.shape[2:])
        grad_x = (
            _conv_fft_grad_x(grad_out, w, padding, x.shape[2:])
            if need_grad_x else None
        )
    else:
        raise ValueError(f"unknown conv method {method!r}")
    return grad_x, grad_w, grad_b


# --------------------------------------------------------------------------
# max pooling
# --------------------------------------------------------------------------

@dataclass
class PoolCache:
    input_shape: tuple
    window: tuple[int, int, int]
    stride: tuple[int, int, int]
    argmax: np.ndarray  # (N, C, OX, OY, OZ) flat index into the window


def maxpool3d_forward(
    x: np.ndarray,
    window: tuple[int, int, int] = (2, 2, 2),
    stride: tuple[int, int, int] | None = None,
) -> tuple[np.ndarray, PoolCache]:
    """Floor-mode max pooling; trailing partial windows are dropped."""
    window = tuple(window)
    stride = window if stride is None else tuple(stride)
    if x.ndim != 5:
        raise ShapeMismatch(f"pooling expects a 5D tensor, got {x.shape}")
    if any(w < 1 for w in window) or any(s < 1 for s in stride):
        raise ValueError("window and stride must be >= 1")
    spatial = x.shape[2:]
    out_shape = tuple((d - w) // s + 1 for d, w, s in zip(spatial, window, stride))
    if any(e < 1 for e in out_shape):
        raise ShapeMismatch(f"window {window} does not fit input spatial {spatial}")
    views = np.lib.stride_tricks.sliding_window_view(x, window, axis=(2, 3, 4))
    sx, sy, sz = stride
    views = views[:, :, ::sx, ::sy, ::sz]
    flat_windows = views.reshape(views.shape[:5] + (-1,))
    argmax = flat_windows.argmax(axis=-1)
    y = np.take_along_axis(flat_windows, argmax[..., None], axis=-1)[..., 0]
    cache = PoolCache(input_shape=x.shape, window=window, stride=stride, argmax=argmax)
    return y, cache


def maxpool3d_backward(grad_out: np.ndarray, cache: PoolCache) -> np.ndarray:
    if grad_out.shape != cache.argmax.shape:
        raise ShapeMismatch(
            f"grad_out shape {grad_out.shape} does not match pooled {cache.argmax.shape}"
        )
    n, c = cache.input_shape[:2]
    dx_, dy_, dz_ = cache.input_shape[2:]
    wx, wy, wz = cache.window
    sx, sy, sz = cache.stride
    ox, oy, oz = grad_out.shape[2:]
    # Window-local coordinates of each maximum.
    amax = cache.argmax
    loc_x = amax // (wy * wz)
    loc_y = (amax // wz) % wy
    loc_z = amax % wz
    gx = np.arange(ox).reshape(-1, 1, 1) * sx + loc_x
    gy = np.arange(oy).reshape(1, -1, 1) * sy + loc_y
    gz = np.arange(oz).reshape(1, 1, -1) * sz + loc_z
    flat = (gx * dy_ + gy) * dz_ + gz
    grad_in = np.zeros((n, c, dx_ * dy_ * dz_), dtype=grad_out.dtype)
    ni = np.arange(n).reshape(-1, 1, 1, 1, 1)
    ci = np.arange(c).reshape(1, -1, 1, 1, 1)
    if sx >= wx and sy >= wy and sz >= wz:
        # Non-overlapping windows: targets are unique, direct scatter works.
        grad_in[ni, ci, flat] = grad_out
    else:
        np.add.at(grad_in, (ni, ci, flat), grad_out)
    return grad_in.reshape(cache.input_shape)


# --------------------------------------------------------------------------
# pointwise layers
# --------------------------------------------------------------------------

def relu_forward(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(grad_out: np.ndarray, x: np.ndarray) -> np.ndarray:
    return grad_out * (x > 0)


def dropout_forward(
    x: np.ndarray,
    p: float,
    rng: np.random.Generator | None = None,
    training: bool = True,
    mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Inverted dropout; returns (output, keep mask).

    A precomputed boolean mask may be supplied to freeze the pattern, e.g.
    for finite-difference checks across repeated forward passes.
    """
    if not 0.0 <= p < 1.0:
        raise InvalidProbability(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x, np.ones(x.shape, dtype=bool)
    if mask is None:
        if rng is None:
            raise ValueError("dropout in training mode needs an rng or a mask")
        mask = rng.random(x.shape) >= p
    elif mask.shape != x.shape:
        raise ShapeMismatch(f"mask shape {mask.shape} does not match input {x.shape}")
    scale = np.asarray(1.0 / (1.0 - p), dtype=x.dtype)
    return x * mask * scale, mask


def dropout_backward(grad_out: np.ndarray, mask: np.ndarray, p: float) -> np.ndarray:
    if not 0.0 <= p < 1.0:
        raise InvalidProbability(f"dropout probability must be in [0, 1), got {p}")
    if p == 0.0:
        return grad_out
    scale = np.asarray(1.0 / (1.0 - p), dtype=grad_out.dtype)
    return grad_out * mask * scale


# --------------------------------------------------------------------------
# dense layer
# --------------------------------------------------------------------------

def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
    if x.ndim != 2 or w.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeMismatch(f"dense shapes do not chain: x{x.shape} w{w.shape}")
    if b.shape != (w.shape[1],):
        raise ShapeMismatch(f"bias shape {b.shape} does not match {w.shape[1]} outputs")
    return x @ w + b


def dense_backward(x: np.ndarray, w: np.ndarray, grad_out: np.ndarray):
    if grad_out.shape != (x.shape[0], w.shape[1]):
        raise ShapeMismatch(
            f"grad_out shape {grad_out.shape} does not match dense output "
            f"{(x.shape[0], w.shape[1])}"
        )
    grad_x = grad_out @ w.T
    grad_w = x.T @ grad_out
    grad_b = grad_out.sum(axis=0)
    return grad_x, grad_w, grad_b


# --------------------------------------------------------------------------
# softmax cross-entropy
# --------------------------------------------------------------------------

def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    if logits.ndim != 2:
        raise ShapeMismatch(f"softmax expects (N, K) logits, got {logits.shape}")
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(logits: np.ndarray, targets: np.ndarray):
    """Mean cross-entropy over the batch.

    Returns (loss, probabilities, grad_logits); grad already carries the
    1/N factor so it feeds straight into backprop.
    """
    if logits.ndim != 2:
        raise ShapeMismatch(f"expected (N, K) logits, got {logits.shape}")
    n, k = logits.shape
    targets = np.asarray(targets)
    if targets.shape != (n,):
        raise ShapeMismatch(f"targets shape {targets.shape} does not match batch {n}")
    if targets.dtype.kind not in "iu":
        raise InvalidTarget("targets must be integer class indices")
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= k:
        raise InvalidTarget(f"target outside 0..{k - 1}")
    shifted = logits.astype(np.float64) - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1))
    log_probs = shifted - log_norm[:, None]
    loss = float(-log_probs[np.arange(n), targets].mean())
    probs = np.exp(log_probs)
    grad = probs.copy()
    grad[np.arange(n), targets] -= 1.0
    grad /= n
    return loss, probs.astype(logits.dtype, copy=False), grad.astype(logits.dtype, copy=False)


# --------------------------------------------------------------------------
# initialization and SGD
# --------------------------------------------------------------------------

def glorot_uniform(
    shape: tuple,
    fan_in: int,
    fan_out: int,
    rng: np.random.Generator,
    dtype=np.float64,
) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def init_conv_params(c_in, c_out, kernel, rng, dtype=np.float64):
    k_vol = int(np.prod(kernel))
    w = glorot_uniform(
        (c_out, c_in) + tuple(kernel), c_in * k_vol, c_out * k_vol, rng, dtype
    )
    return w, np.zeros(c_out, dtype=dtype)


def init_dense_params(n_in, n_out, rng, dtype=np.float64):
    w = glorot_uniform((n_in, n_out), n_in, n_out, rng, dtype)
    return w, np.zeros(n_out, dtype=dtype)


@dataclass
class SgdState:
    """Momentum buffers, one per parameter array."""

    velocities: list[np.ndarray]

    @classmethod
    def zeros_like(cls, params: list[np.ndarray]) -> "SgdState":
        return cls([np.zeros_like(p) for p in params])


def sgd_step(
    params: list[np.ndarray],
    grads: list[np.ndarray],
    state: SgdState,
    lr: float,
    momentum: float = 0.0,
    weight_decay: float = 0.0,
) -> None:
    """In-place update: v = m*v + (g + wd*w); w -= lr*v."""
    if not len(params) == len(grads) == len(state.velocities):
        raise LengthMismatch(
            f"{len(params)} params, {len(grads)} grads, "
            f"{len(state.velocities)} velocity buffers"
        )
    for w, g, v in zip(params, grads, state.velocities):
        if w.shape != g.shape or w.shape != v.shape:
            raise ShapeMismatch(
                f"param {w.shape}, grad {g.shape}, velocity {v.shape} disagree"
            )
        g_eff = g + weight_decay * w if weight_decay else g
        v *= momentum
        v += g_eff
        w -= lr * v


def param_count(params: list[np.ndarray]) -> int:
    return int(sum(p.size for p in params))
