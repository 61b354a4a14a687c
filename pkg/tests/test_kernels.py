"""Both kernel backends against the float64 reference oracles."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import reference as R
from streamtts import backend

RTOL = 3e-5
ATOL = 3e-6

dims = st.integers(min_value=1, max_value=9)
seeds = st.integers(min_value=0, max_value=2**31 - 1)


def _rng_f32(rng, shape, scale=1.0):
    return (rng.standard_normal(shape) * scale).astype(np.float32)


def close(got, want):
    np.testing.assert_allclose(
        np.asarray(got, dtype=np.float64), want, rtol=RTOL, atol=ATOL)


def test_linear_matches_reference(kernel_mod):
    rng = np.random.default_rng(3)
    w = _rng_f32(rng, (7, 5))
    b = _rng_f32(rng, 7)
    x = _rng_f32(rng, 5)
    close(kernel_mod.linear(w, b, x), R.ref_linear(w, b, x))


def test_gru_zero_params_halves_state(kernel_mod):
    # all-zero weights: z = 0.5, n = 0, so h' = 0.5 * h exactly
    w = np.zeros((3, 1), dtype=np.float32)
    b = np.zeros(3, dtype=np.float32)
    h = np.array([0.8], dtype=np.float32)
    x = np.zeros(1, dtype=np.float32)
    got = kernel_mod.gru_step(w, w, b, x, h)
    assert got[0] == np.float32(0.4)


def test_lstm_zero_params_example(kernel_mod):
    # i = f = o = 0.5, g = 0: c' = 0.5 * c, h' = 0.5 * tanh(c')
    wx = np.zeros((4, 1), dtype=np.float32)
    b = np.zeros(4, dtype=np.float32)
    x = np.zeros(1, dtype=np.float32)
    h = np.zeros(1, dtype=np.float32)
    c = np.ones(1, dtype=np.float32)
    h2, c2 = kernel_mod.lstm_step(wx, wx, b, x, h, c)
    assert c2[0] == np.float32(0.5)
    assert abs(float(h2[0]) - 0.23105857863000487) < 1e-7


def test_gru_step_matches_reference(kernel_mod):
    rng = np.random.default_rng(4)
    wx = _rng_f32(rng, (12, 5), 0.4)
    wh = _rng_f32(rng, (12, 4), 0.4)
    b = _rng_f32(rng, 12, 0.1)
    x = _rng_f32(rng, 5)
    h = _rng_f32(rng, 4, 0.5)
    close(kernel_mod.gru_step(wx, wh, b, x, h), R.ref_gru_step(wx, wh, b, x, h))


def test_gru_step_pre_matches_full_step(kernel_mod):
    rng = np.random.default_rng(5)
    wx = _rng_f32(rng, (9, 4), 0.4)
    wh = _rng_f32(rng, (9, 3), 0.4)
    b = _rng_f32(rng, 9, 0.1)
    x = _rng_f32(rng, 4)
    h = _rng_f32(rng, 3, 0.5)
    pre = np.ascontiguousarray(wx @ x + b, dtype=np.float32)
    close(kernel_mod.gru_step_pre(pre, wh, h), R.ref_gru_step_pre(pre, wh, h))


def test_lstm_step_matches_reference(kernel_mod):
    rng = np.random.default_rng(6)
    wx = _rng_f32(rng, (16, 5), 0.4)
    wh = _rng_f32(rng, (16, 4), 0.4)
    b = _rng_f32(rng, 16, 0.1)
    x = _rng_f32(rng, 5)
    h = _rng_f32(rng, 4, 0.5)
    c = _rng_f32(rng, 4, 0.5)
    got_h, got_c = kernel_mod.lstm_step(wx, wh, b, x, h, c)
    want_h, want_c = R.ref_lstm_step(wx, wh, b, x, h, c)
    close(got_h, want_h)
    close(got_c, want_c)


def test_conv1d_valid_matches_reference(kernel_mod):
    rng = np.random.default_rng(7)
    w = _rng_f32(rng, (3, 5, 2), 0.4)
    b = _rng_f32(rng, 3, 0.1)
    x = _rng_f32(rng, (11, 2))
    w2d = np.ascontiguousarray(w.reshape(3, -1))
    got = kernel_mod.conv1d_valid(x, w2d, b, 5)
    assert got.shape == (7, 3)
    close(got, R.ref_conv1d_valid(x, w, b))


def test_weighted_sum_matches_reference(kernel_mod):
    rng = np.random.default_rng(8)
    w = rng.random(6).astype(np.float32)
    m = _rng_f32(rng, (6, 3))
    close(kernel_mod.weighted_sum(w, m), R.ref_weighted_sum(w, m))


@settings(max_examples=40, deadline=None)
@given(seed=seeds, out_dim=dims, in_dim=dims)
def test_linear_property(seed, out_dim, in_dim):
    rng = np.random.default_rng(seed)
    w = _rng_f32(rng, (out_dim, in_dim))
    b = _rng_f32(rng, out_dim)
    x = _rng_f32(rng, in_dim)
    want = R.ref_linear(w, b, x)
    for name in backend.available_backends():
        close(backend.load_backend(name).linear(w, b, x), want)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, hidden=dims, in_dim=dims)
def test_gru_property(seed, hidden, in_dim):
    rng = np.random.default_rng(seed)
    wx = _rng_f32(rng, (3 * hidden, in_dim), 0.5)
    wh = _rng_f32(rng, (3 * hidden, hidden), 0.5)
    b = _rng_f32(rng, 3 * hidden, 0.1)
    x = _rng_f32(rng, in_dim)
    h = _rng_f32(rng, hidden, 0.5)
    want = R.ref_gru_step(wx, wh, b, x, h)
    for name in backend.available_backends():
        close(backend.load_backend(name).gru_step(wx, wh, b, x, h), want)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, hidden=dims, in_dim=dims)
def test_lstm_property(seed, hidden, in_dim):
    rng = np.random.default_rng(seed)
    wx = _rng_f32(rng, (4 * hidden, in_dim), 0.5)
    wh = _rng_f32(rng, (4 * hidden, hidden), 0.5)
    b = _rng_f32(rng, 4 * hidden, 0.1)
    x = _rng_f32(rng, in_dim)
    h = _rng_f32(rng, hidden, 0.5)
    c = _rng_f32(rng, hidden, 0.5)
    want_h, want_c = R.ref_lstm_step(wx, wh, b, x, h, c)
    for name in backend.available_backends():
        got_h, got_c = backend.load_backend(name).lstm_step(wx, wh, b, x, h, c)
        close(got_h, want_h)
        close(got_c, want_c)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, c_out=dims, c_in=dims,
       k=st.sampled_from([1, 3, 5]), extra=st.integers(0, 12))
def test_conv_property(seed, c_out, c_in, k, extra):
    rng = np.random.default_rng(seed)
    t_len = k + extra
    w = _rng_f32(rng, (c_out, k, c_in), 0.5)
    b = _rng_f32(rng, c_out, 0.1)
    x = _rng_f32(rng, (t_len, c_in))
    w2d = np.ascontiguousarray(w.reshape(c_out, -1))
    want = R.ref_conv1d_valid(x, w, b)
    for name in backend.available_backends():
        got = backend.load_backend(name).conv1d_valid(x, w2d, b, k)
        assert got.shape == (t_len - k + 1, c_out)
        close(got, want)


def test_backends_agree_on_large_gru():
    names = backend.available_backends()
    if len(names) < 2:
        pytest.skip("only one backend built")
    rng = np.random.default_rng(9)
    wx = _rng_f32(rng, (768, 128), 0.1)
    wh = _rng_f32(rng, (768, 256), 0.1)
    b = _rng_f32(rng, 768, 0.1)
    x = _rng_f32(rng, 128)
    h = _rng_f32(rng, 256, 0.5)
    outs = [backend.load_backend(n).gru_step(wx, wh, b, x, h) for n in names]
    # accumulation order differs between backends, so tolerance not bits
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-4, atol=1e-5)
