"""Pure-numpy fallback kernels.

Same call surface as the compiled ``_kernels`` extension.  Reductions go
through BLAS, whose summation order is fixed for a given shape, so the
chunked-vs-batch bit-exactness guarantee holds within this backend too; the
two backends are not bit-identical to each other.
"""

import numpy as np

BACKEND_NAME = "python"


def linear(w, b, x):
    y = w @ x
    y += b
    return y


def gru_step_pre(pre, w_h, h):
    hidden = w_h.shape[1]
    rec = w_h @ h
    z = _sigmoid(pre[:hidden] + rec[:hidden])
    r = _sigmoid(pre[hidden:2 * hidden] + rec[hidden:2 * hidden])
    n = np.tanh(pre[2 * hidden:] + r * rec[2 * hidden:])
    return (1.0 - z) * n + z * h


def gru_step(w_x, w_h, b, x, h):
    pre = w_x @ x
    pre += b
    return gru_step_pre(pre, w_h, h)


def lstm_step(w_x, w_h, b, x, h, c):
    hidden = w_h.shape[1]
    pre = w_x @ x
    pre += b
    pre += w_h @ h
    i = _sigmoid(pre[:hidden])
    f = _sigmoid(pre[hidden:2 * hidden])
    g = np.tanh(pre[2 * hidden:3 * hidden])
    o = _sigmoid(pre[3 * hidden:])
    c_new = f * c + i * g
    h_new = o * np.tanh(c_new)
    return h_new, c_new


def conv1d_valid(x, w2d, b, kernel_size):
    t_out = x.shape[0] - kernel_size + 1
    c_in = x.shape[1]
    out = np.empty((t_out, w2d.shape[0]), dtype=np.float32)
    flat = x.reshape(-1)
    span = kernel_size * c_in
    # One fixed-shape matvec per output position: the same window bytes always
    # produce the same output bits, whether they came from a chunk or a full
    # sequence.
    for t in range(t_out):
        np.matmul(w2d, flat[t * c_in:t * c_in + span], out=out[t])
        out[t] += b
    return out


def weighted_sum(weights, mat):
    return weights @ mat


def _sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))
