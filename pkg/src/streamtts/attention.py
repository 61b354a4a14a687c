"""Purely location-based mixture-of-logistics attention.

Alignment weights are CDF differences of K logistic distributions evaluated at
encoder-position bin edges (positions are 1-based, edges at j±0.5).  The state
never reads encoder contents, only its own mixture parameters, and every
component mean moves strictly forward on each update — which is what makes the
alignment monotone for arbitrarily long sequences.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import nn
from .errors import ConfigError, NumericError
from .nn import F32, LinearParams, as_f32

MEAN_BLOCK, SCALE_BLOCK, WEIGHT_BLOCK = 0, 1, 2  # layout of the 3K projection


@dataclass
class AttentionState:
    mu: np.ndarray       # (K,) component positions, strictly increasing over steps
    s: np.ndarray        # (K,) positive scales
    w: np.ndarray        # (K,) mixture weights, sum 1
    context: np.ndarray  # (memory_dim,) last context vector

    def __post_init__(self):
        self.mu = as_f32(self.mu)
        self.s = as_f32(self.s)
        self.w = as_f32(self.w)
        self.context = as_f32(self.context)

    @property
    def n_components(self):
        return self.mu.shape[0]

    def validate(self):
        if not (self.mu.shape == self.s.shape == self.w.shape):
            raise ConfigError("attention state component arrays disagree in length")
        if np.any(self.s <= 0):
            raise ConfigError("attention scales must be positive")
        if np.any(self.w < 0) or abs(float(self.w.sum()) - 1.0) > 1e-6:
            raise ConfigError("mixture weights must be a distribution")
        for a in (self.mu, self.s, self.w, self.context):
            if not np.all(np.isfinite(a)):
                raise NumericError("non-finite attention state")
        return self


@dataclass
class AttentionParams:
    """Two dense layers mapping the attention-RNN state to 3K mixture updates."""

    fc1: LinearParams  # attn_rnn_dim -> ff_dim
    fc2: LinearParams  # ff_dim -> 3K

    def __post_init__(self):
        if self.fc2.in_dim != self.fc1.out_dim:
            raise ConfigError("attention feed-forward layers do not chain")
        if self.fc2.out_dim % 3 != 0:
            raise ConfigError("attention projection output must be 3K")

    @property
    def n_components(self):
        return self.fc2.out_dim // 3


def initial_state(n_components, memory_dim):
    """All component means at 0 (just left of the first position), unit scales,
    uniform weights, zero context."""
    return AttentionState(
        mu=np.zeros(n_components, dtype=F32),
        s=np.ones(n_components, dtype=F32),
        w=np.full(n_components, 1.0 / n_components, dtype=F32),
        context=np.zeros(memory_dim, dtype=F32),
    )


def logistic_cdf(x, mu, s):
    """sigmoid((x - mu) / s); strictly increasing in x."""
    if s <= 0:
        raise ValueError(f"logistic scale must be positive, got {s}")
    return 1.0 / (1.0 + math.exp(-(float(x) - float(mu)) / float(s)))


def compute_alignment(state: AttentionState, n_enc):
    """Alignment weights over encoder positions 1..n_enc.

    Each weight is the mixture probability mass of the unit bin around that
    position.  Evaluated in float64 (rounded to float32 at the end) so the
    telescoping identity sum_j a_j == sum_k w_k (F(N+0.5) - F(0.5)) survives
    long sequences; weights depend only on the state, never on memory values.
    """
    if n_enc < 1:
        raise ConfigError("alignment needs at least one encoder position")
    edges = np.arange(n_enc + 1, dtype=np.float64) + 0.5  # 0.5, 1.5, ..., N+0.5
    acc = np.zeros(n_enc, dtype=np.float64)
    for k in range(state.n_components):
        cdf = _sigmoid64((edges - np.float64(state.mu[k])) / np.float64(state.s[k]))
        acc += np.float64(state.w[k]) * np.diff(cdf)
    return acc.astype(F32)


def compute_context(weights, memory):
    """Context vector sum_j a_j e_j, accumulated in ascending j order."""
    weights = as_f32(weights)
    memory = as_f32(memory)
    if memory.ndim != 2 or weights.shape != (memory.shape[0],):
        raise ConfigError(
            f"alignment length {weights.shape} does not match memory {memory.shape}"
        )
    from .backend import kernels

    return kernels.weighted_sum(weights, memory)


def advance_state(h, prev: AttentionState, p: AttentionParams):
    """Autoregressive mixture update from the attention-RNN state.

    The projection yields (mean-step, log-scale, weight-logit) triples; means
    advance by exp(step) > 0, scales are exp(log-scale), weights a softmax.
    The context is carried unchanged until compute_context runs.
    """
    if p.n_components != prev.n_components:
        raise ConfigError("attention params and state disagree on K")
    hidden = np.tanh(nn.linear_forward(h, p.fc1))
    raw = nn.linear_forward(hidden, p.fc2)
    k = p.n_components
    mu_hat = raw[MEAN_BLOCK * k:(MEAN_BLOCK + 1) * k]
    s_hat = raw[SCALE_BLOCK * k:(SCALE_BLOCK + 1) * k]
    w_hat = raw[WEIGHT_BLOCK * k:(WEIGHT_BLOCK + 1) * k]
    mu = prev.mu + np.exp(mu_hat)
    s = np.exp(s_hat)
    w = nn.softmax(w_hat)
    for a in (mu, s, w):
        if not np.all(np.isfinite(a)):
            raise NumericError("non-finite attention update")
    return AttentionState(mu=mu, s=s, w=w, context=prev.context)


def _sigmoid64(v):
    # exp may overflow to inf for far-left positions; 1/(1+inf) is exactly
    # the 0.0 tail we want, so the warning is suppressed rather than handled
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-v))
