"""Convolutional residual refiner with exact chunked evaluation.

The refiner is a stack of 1-D convolutions over the frame axis (tanh between
layers, linear last) whose output is a residual added to the raw decoder
frames.  Because each output frame depends on a bounded input window, any
contiguous span can be refined in isolation: materialize the span plus
half_window frames of context per side (zeros where the sequence ends), run
the stack with valid convolutions, and the result is bit-identical to slicing
a full-sequence pass.  Between layers, rows that correspond to positions
outside the real sequence are forced back to zero; without that, layer biases
would bleed nonzero values into the virtual padding and the equivalence with
per-layer zero padding would break.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, LogicError
from .nn import F32, Conv1dParams, as_f32


@dataclass
class PostnetConfig:
    n_layers: int = 5
    kernel_size: int = 5
    hidden_channels: int = 256
    n_channels: int = 22  # frame feature count, in == out (residual)

    def __post_init__(self):
        if self.n_layers < 1:
            raise ConfigError("postnet needs at least one layer")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ConfigError(
                f"postnet kernel must be odd and positive, got {self.kernel_size}"
            )
        if self.hidden_channels < 1 or self.n_channels < 1:
            raise ConfigError("postnet channel counts must be positive")


def receptive_field(cfg: PostnetConfig):
    """(total, half_window) input span one output frame depends on.

    Each layer widens the window by kernel_size−1, so
    total = n_layers*(kernel_size−1) + 1 and half_window = (total−1)/2.
    """
    total = cfg.n_layers * (cfg.kernel_size - 1) + 1
    return total, (total - 1) // 2


@dataclass
class PostnetParams:
    layers: tuple = field(default=())

    def __post_init__(self):
        self.layers = tuple(self.layers)
        if not self.layers:
            raise ConfigError("postnet has no layers")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if cur.in_channels != prev.out_channels:
                raise ConfigError("postnet conv layers do not chain")
        if self.layers[-1].out_channels != self.layers[0].in_channels:
            raise ConfigError("postnet residual requires out channels == in channels")

    @property
    def n_channels(self):
        return self.layers[0].in_channels

    @property
    def half_window(self):
        return sum(c.half for c in self.layers)

    @property
    def total_receptive(self):
        return 2 * self.half_window + 1

    @classmethod
    def from_layers(cls, layers):
        return cls(layers=tuple(layers))


def params_from_config(cfg: PostnetConfig, tensors):
    """Assemble conv layers from a name->array map (postnet.convN.weight/.bias)."""
    layers = []
    for i in range(1, cfg.n_layers + 1):
        layers.append(
            Conv1dParams(
                weight=tensors[f"postnet.conv{i}.weight"],
                bias=tensors[f"postnet.conv{i}.bias"],
            )
        )
    return PostnetParams.from_layers(layers)


def postnet_forward(frames, params: PostnetParams):
    """Residual for a full sequence; output[t] depends on input[t-half:t+half+1]."""
    frames = as_f32(frames)
    if frames.ndim != 2 or frames.shape[1] != params.n_channels:
        raise ConfigError(
            f"postnet expects (T, {params.n_channels}) frames, got {frames.shape}"
        )
    if frames.shape[0] < 1:
        raise ConfigError("postnet needs at least one frame")
    # Degenerate chunk covering everything; context deficit is all virtual zeros.
    residual = _run_stack(frames, params.half_window, params.half_window, params)
    return residual


def refine_chunk(buffered, left_ctx, right_ctx, params: PostnetParams):
    """Refine the span inside a context-carrying window of raw frames.

    ``buffered`` holds left_ctx + span + right_ctx raw frames.  Context counts
    below half_window are topped up with zero frames; that is only correct
    when the missing frames fall outside the sequence, which the chunk planner
    guarantees.  Returns span frames with the residual already added.
    """
    buffered = as_f32(buffered)
    if buffered.ndim != 2 or buffered.shape[1] != params.n_channels:
        raise ConfigError(
            f"refine_chunk expects (*, {params.n_channels}) frames, got {buffered.shape}"
        )
    half = params.half_window
    if left_ctx < 0 or right_ctx < 0 or left_ctx > half or right_ctx > half:
        raise LogicError(
            f"context counts ({left_ctx}, {right_ctx}) outside [0, {half}]"
        )
    span = buffered.shape[0] - left_ctx - right_ctx
    if span < 1:
        raise LogicError("chunk window contains no span frames")
    residual = _run_stack(buffered, half - left_ctx, half - right_ctx, params)
    refined = buffered[left_ctx:left_ctx + span] + residual
    return np.ascontiguousarray(refined, dtype=F32)


def _run_stack(window, pad_left, pad_right, params: PostnetParams):
    """Valid-convolution cascade over a zero-extended window.

    pad_* count virtual rows prepended/appended to the window; they stand for
    positions outside the sequence.  After every layer the rows still mapping
    to such positions are zeroed so the next layer sees exactly the zero
    padding a per-layer same-padded pass would.
    """
    x = np.zeros(
        (pad_left + window.shape[0] + pad_right, window.shape[1]), dtype=F32
    )
    x[pad_left:pad_left + window.shape[0]] = window

    from .backend import kernels

    shrink = 0
    n = len(params.layers)
    for i, layer in enumerate(params.layers):
        y = kernels.conv1d_valid(x, layer.weight2d, layer.bias, layer.kernel_size)
        if i < n - 1:
            y = np.tanh(y)
        shrink += layer.half
        lo = max(0, pad_left - shrink)
        hi = max(0, pad_right - shrink)
        if lo:
            y[:lo] = 0.0
        if hi:
            y[-hi:] = 0.0
        x = y
    return x
