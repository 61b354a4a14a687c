"""Deterministic float32 building blocks: dense layers, recurrent cells,
1-D convolution, embeddings, and the scalar activations everything else uses.

All operations are pure functions; given the same inputs they return
bit-identical outputs on a given platform and backend.  Inputs and weights
are C-contiguous float32 arrays; outputs are checked for non-finite values.
"""

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels
from .errors import ConfigError, InputError, NumericError

F32 = np.float32


def as_f32(a):
    """Coerce to a C-contiguous float32 array."""
    return np.ascontiguousarray(a, dtype=F32)


def _check_finite(a, what):
    if not np.all(np.isfinite(a)):
        raise NumericError(f"non-finite value produced in {what}")
    return a


@dataclass
class LinearParams:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)

    def __post_init__(self):
        self.weight = as_f32(self.weight)
        self.bias = as_f32(self.bias)
        if self.weight.ndim != 2 or self.bias.ndim != 1:
            raise ConfigError("linear params must be a 2-D weight and 1-D bias")
        if self.weight.shape[0] != self.bias.shape[0]:
            raise ConfigError(
                f"linear bias length {self.bias.shape[0]} does not match "
                f"output dim {self.weight.shape[0]}"
            )

    @property
    def in_dim(self):
        return self.weight.shape[1]

    @property
    def out_dim(self):
        return self.weight.shape[0]


@dataclass
class GruParams:
    """Gated recurrent cell weights, gates stacked [update, reset, candidate]."""

    w_x: np.ndarray  # (3H, in)
    w_h: np.ndarray  # (3H, H)
    bias: np.ndarray  # (3H,)

    def __post_init__(self):
        self.w_x = as_f32(self.w_x)
        self.w_h = as_f32(self.w_h)
        self.bias = as_f32(self.bias)
        hidden = self.w_h.shape[1]
        if self.w_h.shape[0] != 3 * hidden:
            raise ConfigError("GRU recurrent weight must be (3H, H)")
        if self.w_x.shape[0] != 3 * hidden or self.bias.shape[0] != 3 * hidden:
            raise ConfigError("GRU gate stack shapes inconsistent")

    @property
    def hidden(self):
        return self.w_h.shape[1]

    @property
    def in_dim(self):
        return self.w_x.shape[1]


@dataclass
class LstmParams:
    """LSTM weights, gates stacked [input, forget, candidate, output]."""

    w_x: np.ndarray  # (4H, in)
    w_h: np.ndarray  # (4H, H)
    bias: np.ndarray  # (4H,)

    def __post_init__(self):
        self.w_x = as_f32(self.w_x)
        self.w_h = as_f32(self.w_h)
        self.bias = as_f32(self.bias)
        hidden = self.w_h.shape[1]
        if self.w_h.shape[0] != 4 * hidden:
            raise ConfigError("LSTM recurrent weight must be (4H, H)")
        if self.w_x.shape[0] != 4 * hidden or self.bias.shape[0] != 4 * hidden:
            raise ConfigError("LSTM gate stack shapes inconsistent")

    @property
    def hidden(self):
        return self.w_h.shape[1]

    @property
    def in_dim(self):
        return self.w_x.shape[1]


@dataclass
class Conv1dParams:
    weight: np.ndarray  # (C_out, kernel_size, C_in)
    bias: np.ndarray    # (C_out,)
    _weight2d: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.weight = as_f32(self.weight)
        self.bias = as_f32(self.bias)
        if self.weight.ndim != 3:
            raise ConfigError("conv weight must be (C_out, kernel, C_in)")
        if self.kernel_size % 2 == 0:
            raise ConfigError(
                f"kernel size {self.kernel_size} must be odd for symmetric padding"
            )
        if self.bias.shape[0] != self.out_channels:
            raise ConfigError("conv bias length does not match output channels")
        self._weight2d = self.weight.reshape(self.out_channels, -1).copy()

    @property
    def out_channels(self):
        return self.weight.shape[0]

    @property
    def kernel_size(self):
        return self.weight.shape[1]

    @property
    def in_channels(self):
        return self.weight.shape[2]

    @property
    def half(self):
        return (self.kernel_size - 1) // 2

    @property
    def weight2d(self):
        """(C_out, kernel*C_in) layout matching the flattened input window."""
        return self._weight2d


@dataclass
class EmbeddingTable:
    table: np.ndarray  # (vocab, dim)

    def __post_init__(self):
        self.table = as_f32(self.table)
        if self.table.ndim != 2:
            raise ConfigError("embedding table must be 2-D")

    @property
    def vocab_size(self):
        return self.table.shape[0]

    @property
    def dim(self):
        return self.table.shape[1]


def sigmoid(x):
    """Logistic function of a scalar, in [0, 1]."""
    # exp may overflow to inf for large |x|; 1/(1+inf) is the exact 0.0 tail
    with np.errstate(over="ignore"):
        return float(1.0 / (1.0 + np.exp(-np.float64(x))))


def tanh(x):
    return float(np.tanh(np.float64(x)))


def softmax(v):
    """Stable softmax; outputs are positive and sum to 1 within float error."""
    v = as_f32(v)
    if v.size == 0:
        raise InputError("softmax of an empty vector")
    e = np.exp(v - np.max(v))
    return (e / e.sum()).astype(F32)


def relu(v):
    return np.maximum(v, F32(0.0))


def linear_forward(x, p: LinearParams):
    x = as_f32(x)
    if x.shape != (p.in_dim,):
        raise ConfigError(f"linear input dim {x.shape} != ({p.in_dim},)")
    return _check_finite(kernels.linear(p.weight, p.bias, x), "linear_forward")


def gru_cell_step(x, h, p: GruParams):
    x = as_f32(x)
    h = as_f32(h)
    if x.shape != (p.in_dim,) or h.shape != (p.hidden,):
        raise ConfigError("GRU input/state dims do not match params")
    return _check_finite(kernels.gru_step(p.w_x, p.w_h, p.bias, x, h), "gru_cell_step")


def lstm_cell_step(x, h, c, p: LstmParams):
    x = as_f32(x)
    h = as_f32(h)
    c = as_f32(c)
    if x.shape != (p.in_dim,) or h.shape != (p.hidden,) or c.shape != (p.hidden,):
        raise ConfigError("LSTM input/state dims do not match params")
    h_new, c_new = kernels.lstm_step(p.w_x, p.w_h, p.bias, x, h, c)
    _check_finite(h_new, "lstm_cell_step")
    _check_finite(c_new, "lstm_cell_step")
    return h_new, c_new


def conv1d_forward(seq, p: Conv1dParams):
    """Same-padded 1-D convolution over a (T, C_in) sequence.

    Implemented as a valid convolution over a zero-extended copy, so a chunked
    caller that materializes the identical window bytes gets identical output
    bits from the shared valid-mode kernel.
    """
    seq = as_f32(seq)
    if seq.ndim != 2 or seq.shape[1] != p.in_channels:
        raise ConfigError(
            f"conv input channels {seq.shape} do not match C_in={p.in_channels}"
        )
    if seq.shape[0] < 1:
        raise ConfigError("conv input must contain at least one frame")
    padded = np.zeros((seq.shape[0] + 2 * p.half, p.in_channels), dtype=F32)
    padded[p.half:p.half + seq.shape[0]] = seq
    out = kernels.conv1d_valid(padded, p.weight2d, p.bias, p.kernel_size)
    return _check_finite(out, "conv1d_forward")


def conv1d_valid(window, p: Conv1dParams):
    """Valid-mode convolution over an already-materialized window."""
    window = as_f32(window)
    if window.shape[1] != p.in_channels:
        raise ConfigError("conv window channels do not match C_in")
    if window.shape[0] < p.kernel_size:
        raise ConfigError("conv window shorter than the kernel")
    out = kernels.conv1d_valid(window, p.weight2d, p.bias, p.kernel_size)
    return _check_finite(out, "conv1d_valid")


def embedding_lookup(ids, table: EmbeddingTable):
    """Row copies for each id, order preserved."""
    rows = np.empty((len(ids), table.dim), dtype=F32)
    for pos, i in enumerate(ids):
        if not 0 <= int(i) < table.vocab_size:
            raise InputError(
                f"symbol id {i} at position {pos} outside vocabulary "
                f"of size {table.vocab_size}"
            )
        rows[pos] = table.table[int(i)]
    return rows
