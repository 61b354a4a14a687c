# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled float32 kernels.

Every dot product in this module uses the same fixed 4-lane interleaved
accumulation, independent of where the caller sits in a sequence.  That fixed
order is what makes chunked post-net refinement bit-identical to a
full-sequence pass: an output element is always computed from the same window
bytes with the same arithmetic.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport expf, tanhf

cnp.import_array()

BACKEND_NAME = "ext"


cdef inline float fdot(const float* a, const float* b, Py_ssize_t n) nogil:
    # Four independent partial sums, combined as (s0+s1)+(s2+s3); the tail
    # (n % 4) folds into s0.  Fixed semantics, decent ILP without -ffast-math.
    cdef float s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0
    cdef Py_ssize_t i = 0
    while i + 4 <= n:
        s0 += a[i] * b[i]
        s1 += a[i + 1] * b[i + 1]
        s2 += a[i + 2] * b[i + 2]
        s3 += a[i + 3] * b[i + 3]
        i += 4
    while i < n:
        s0 += a[i] * b[i]
        i += 1
    return (s0 + s1) + (s2 + s3)


cdef inline float fsigmoid(float x) nogil:
    return 1.0 / (1.0 + expf(-x))


def linear(const float[:, ::1] w, const float[::1] b, const float[::1] x):
    """y = W x + b for a (out, in) weight matrix."""
    cdef Py_ssize_t out_dim = w.shape[0]
    cdef Py_ssize_t in_dim = w.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=1] y = np.empty(out_dim, dtype=np.float32)
    cdef float[::1] ym = y
    cdef Py_ssize_t o
    with nogil:
        for o in range(out_dim):
            ym[o] = fdot(&w[o, 0], &x[0], in_dim) + b[o]
    return y


def gru_step_pre(const float[::1] pre, const float[:, ::1] w_h, const float[::1] h):
    """One GRU step given precomputed input-side gate values.

    ``pre`` holds W_gate x + b_gate stacked as [z, r, n], each of width H.
    """
    cdef Py_ssize_t hidden = w_h.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=1] out = np.empty(hidden, dtype=np.float32)
    cdef float[::1] om = out
    cdef Py_ssize_t j
    cdef float z, r, n
    with nogil:
        for j in range(hidden):
            z = fsigmoid(pre[j] + fdot(&w_h[j, 0], &h[0], hidden))
            r = fsigmoid(pre[hidden + j] + fdot(&w_h[hidden + j, 0], &h[0], hidden))
            n = tanhf(pre[2 * hidden + j] + r * fdot(&w_h[2 * hidden + j, 0], &h[0], hidden))
            om[j] = (1.0 - z) * n + z * h[j]
    return out


def gru_step(const float[:, ::1] w_x, const float[:, ::1] w_h,
             const float[::1] b, const float[::1] x, const float[::1] h):
    """Standard gated update: z/r sigmoid gates, candidate tanh with reset-scaled
    recurrent term, h' = (1-z)*n + z*h."""
    cdef Py_ssize_t gates = w_x.shape[0]
    cdef Py_ssize_t in_dim = w_x.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=1] pre = np.empty(gates, dtype=np.float32)
    cdef float[::1] pm = pre
    cdef Py_ssize_t g
    with nogil:
        for g in range(gates):
            pm[g] = fdot(&w_x[g, 0], &x[0], in_dim) + b[g]
    return gru_step_pre(pre, w_h, h)


def lstm_step(const float[:, ::1] w_x, const float[:, ::1] w_h, const float[::1] b,
              const float[::1] x, const float[::1] h, const float[::1] c):
    """One LSTM step; gate stacking order is [i, f, g, o]."""
    cdef Py_ssize_t gates = w_x.shape[0]
    cdef Py_ssize_t in_dim = w_x.shape[1]
    cdef Py_ssize_t hidden = w_h.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=1] h_out = np.empty(hidden, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=1] c_out = np.empty(hidden, dtype=np.float32)
    cdef cnp.ndarray[cnp.float32_t, ndim=1] pre = np.empty(gates, dtype=np.float32)
    cdef float[::1] hm = h_out
    cdef float[::1] cm = c_out
    cdef float[::1] pm = pre
    cdef Py_ssize_t g, j
    cdef float ig, fg, gg, og, c_new
    with nogil:
        for g in range(gates):
            pm[g] = fdot(&w_x[g, 0], &x[0], in_dim) + b[g]
        for j in range(hidden):
            ig = fsigmoid(pm[j] + fdot(&w_h[j, 0], &h[0], hidden))
            fg = fsigmoid(pm[hidden + j] + fdot(&w_h[hidden + j, 0], &h[0], hidden))
            gg = tanhf(pm[2 * hidden + j] + fdot(&w_h[2 * hidden + j, 0], &h[0], hidden))
            og = fsigmoid(pm[3 * hidden + j] + fdot(&w_h[3 * hidden + j, 0], &h[0], hidden))
            c_new = fg * c[j] + ig * gg
            cm[j] = c_new
            hm[j] = og * tanhf(c_new)
    return h_out, c_out


def conv1d_valid(const float[:, ::1] x, const float[:, ::1] w2d,
                 const float[::1] b, Py_ssize_t kernel_size):
    """Valid-mode 1-D convolution over a (T, C_in) window.

    ``w2d`` is the (C_out, kernel_size*C_in) flattened kernel; the input window
    rows are contiguous, so each output position reads one flat slab.
    """
    cdef Py_ssize_t t_in = x.shape[0]
    cdef Py_ssize_t c_in = x.shape[1]
    cdef Py_ssize_t c_out = w2d.shape[0]
    cdef Py_ssize_t flat = kernel_size * c_in
    cdef Py_ssize_t t_out = t_in - kernel_size + 1
    cdef cnp.ndarray[cnp.float32_t, ndim=2] y = np.empty((t_out, c_out), dtype=np.float32)
    cdef float[:, ::1] ym = y
    cdef Py_ssize_t t, o
    with nogil:
        for t in range(t_out):
            for o in range(c_out):
                ym[t, o] = fdot(&x[t, 0], &w2d[o, 0], flat) + b[o]
    return y


def weighted_sum(const float[::1] weights, const float[:, ::1] mat):
    """Accumulate sum_j weights[j] * mat[j]; j runs in ascending order."""
    cdef Py_ssize_t n = mat.shape[0]
    cdef Py_ssize_t dim = mat.shape[1]
    cdef cnp.ndarray[cnp.float32_t, ndim=1] out = np.zeros(dim, dtype=np.float32)
    cdef float[::1] om = out
    cdef Py_ssize_t j, d
    cdef float wj
    with nogil:
        for j in range(n):
            wj = weights[j]
            for d in range(dim):
                om[d] += wj * mat[j, d]
    return out
