"""Shared test oracles: direct-definition convolution and finite differences.

These are deliberately written as straight loops over the mathematical
definitions, independent of the library's execution strategies, so they
can arbitrate correctness.
"""

import numpy as np


def conv3d_oracle(x, w, b, padding):
    """Direct-definition stride-1 correlation: loop every output voxel."""
    n, c_in, dx, dy, dz = x.shape
    c_out, c_in2, kx, ky, kz = w.shape
    assert c_in == c_in2
    px, py, pz = padding
    xp = np.zeros((n, c_in, dx + 2 * px, dy + 2 * py, dz + 2 * pz), dtype=x.dtype)
    xp[:, :, px:px + dx, py:py + dy, pz:pz + dz] = x
    ox, oy, oz = (
        dx + 2 * px - kx + 1,
        dy + 2 * py - ky + 1,
        dz + 2 * pz - kz + 1,
    )
    y = np.zeros((n, c_out, ox, oy, oz), dtype=np.float64)
    for ni in range(n):
        for o in range(c_out):
            for ix in range(ox):
                for iy in range(oy):
                    for iz in range(oz):
                        window = xp[ni, :, ix:ix + kx, iy:iy + ky, iz:iz + kz]
                        y[ni, o, ix, iy, iz] = np.sum(window * w[o])
            if b is not None:
                y[ni, o] += b[o]
    return y


def maxpool3d_oracle(x, window, stride):
    """Direct-definition floor-mode max pooling."""
    n, c, dx, dy, dz = x.shape
    wx, wy, wz = window
    sx, sy, sz = stride
    ox, oy, oz = (dx - wx) // sx + 1, (dy - wy) // sy + 1, (dz - wz) // sz + 1
    y = np.empty((n, c, ox, oy, oz), dtype=x.dtype)
    for ni in range(n):
        for ci in range(c):
            for ix in range(ox):
                for iy in range(oy):
                    for iz in range(oz):
                        block = x[ni, ci,
                                  ix * sx:ix * sx + wx,
                                  iy * sy:iy * sy + wy,
                                  iz * sz:iz * sz + wz]
                        y[ni, ci, ix, iy, iz] = block.max()
    return y


def fd_gradient(loss_fn, arr, h=1e-6):
    """Central finite differences of a scalar function wrt one array."""
    grad = np.zeros_like(arr, dtype=np.float64)
    it = np.nditer(arr, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = arr[idx]
        arr[idx] = orig + h
        hi = loss_fn()
        arr[idx] = orig - h
        lo = loss_fn()
        arr[idx] = orig
        grad[idx] = (hi - lo) / (2.0 * h)
        it.iternext()
    return grad


def max_rel_err(analytic, reference):
    """Max elementwise |a - r| / max(1, |r|)."""
    a = np.asarray(analytic, dtype=np.float64)
    r = np.asarray(reference, dtype=np.float64)
    assert a.shape == r.shape
    denom = np.maximum(1.0, np.abs(r))
    return float(np.max(np.abs(a - r) / denom))
