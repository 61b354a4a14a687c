"""Encoder and r-frames-per-step autoregressive decoder.

The encoder embeds phoneme ids, runs a two-layer pre-net and a bidirectional
GRU, and exposes one memory vector per input position.  The decoder consumes
its own previous frame through a pre-net, updates an attention GRU, advances
the monotone mixture attention, then drives two residual LSTMs into frame and
stop projections, emitting r frames per step.

Everything here is deterministic and the decode loop is shared verbatim by
the batch and streaming paths; bit-identical frames in both modes follow from
that rather than from any numeric tolerance.
"""

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import attention, nn, postnet
from .backend import kernels
from .errors import ConfigError, InputError, NumericError
from .nn import F32, as_f32

MAX_R = 10  # frame projection rows cover r*frame_dim up to this r
SUPPORTED_R = (2, 3, 5, 7, 10)  # benchmarked step sizes; any 1..MAX_R loads


@dataclass
class ArchConfig:
    vocab_size: int = 64
    embed_dim: int = 256
    enc_rnn_dim: int = 128   # per direction; memory dim is twice this
    attn_rnn_dim: int = 256
    dec_lstm_dim: int = 512
    n_mixtures: int = 5
    frame_dim: int = 22      # 20 cepstra + pitch period + pitch correlation
    r: int = 5
    max_steps: int = 0       # 0: derive from input length at decode time
    stop_threshold: float = 0.5

    def __post_init__(self):
        if self.frame_dim != 22:
            raise ConfigError(f"frame_dim is pinned to 22, got {self.frame_dim}")
        if not 1 <= self.r <= MAX_R:
            raise ConfigError(f"r must be in 1..{MAX_R}, got {self.r}")
        if self.max_steps < 0:
            raise ConfigError("max_steps must be >= 1, or 0 for the default rule")
        for name in ("vocab_size", "embed_dim", "enc_rnn_dim", "attn_rnn_dim",
                     "dec_lstm_dim", "n_mixtures"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        if not math.isfinite(self.stop_threshold):
            raise ConfigError("stop_threshold must be finite")

    @property
    def memory_dim(self):
        return 2 * self.enc_rnn_dim

    @property
    def prenet_hidden(self):
        return self.embed_dim

    @property
    def prenet_out(self):
        return self.embed_dim // 2

    @property
    def dec_input_dim(self):
        return self.attn_rnn_dim + self.memory_dim

    def resolved_max_steps(self, n_phonemes):
        """Step cap; the default scales with input so toy models always halt."""
        if self.max_steps:
            return self.max_steps
        return max(50, math.ceil(20 * n_phonemes / self.r))

    def to_dict(self):
        return {
            "vocab_size": self.vocab_size, "embed_dim": self.embed_dim,
            "enc_rnn_dim": self.enc_rnn_dim, "attn_rnn_dim": self.attn_rnn_dim,
            "dec_lstm_dim": self.dec_lstm_dim, "n_mixtures": self.n_mixtures,
            "frame_dim": self.frame_dim, "r": self.r,
            "max_steps": self.max_steps, "stop_threshold": self.stop_threshold,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class ModelParams:
    """Typed, shape-checked view over the named weight tensors."""

    arch: ArchConfig
    postnet_cfg: postnet.PostnetConfig
    embedding: nn.EmbeddingTable
    enc_prenet1: nn.LinearParams
    enc_prenet2: nn.LinearParams
    enc_gru_fwd: nn.GruParams
    enc_gru_bwd: nn.GruParams
    dec_prenet1: nn.LinearParams
    dec_prenet2: nn.LinearParams
    attn_gru: nn.GruParams
    attn: attention.AttentionParams
    dec_input_proj: nn.LinearParams
    dec_lstm1: nn.LstmParams
    dec_lstm2: nn.LstmParams
    frame_proj: nn.LinearParams
    stop_proj: nn.LinearParams
    postnet: postnet.PostnetParams

    def __post_init__(self):
        a = self.arch
        checks = [
            (self.embedding.vocab_size == a.vocab_size
             and self.embedding.dim == a.embed_dim, "embedding"),
            (self.enc_prenet1.in_dim == a.embed_dim
             and self.enc_prenet1.out_dim == a.prenet_hidden, "enc_prenet1"),
            (self.enc_prenet2.in_dim == a.prenet_hidden
             and self.enc_prenet2.out_dim == a.prenet_out, "enc_prenet2"),
            (self.enc_gru_fwd.in_dim == a.prenet_out
             and self.enc_gru_fwd.hidden == a.enc_rnn_dim, "enc_gru_fwd"),
            (self.enc_gru_bwd.in_dim == a.prenet_out
             and self.enc_gru_bwd.hidden == a.enc_rnn_dim, "enc_gru_bwd"),
            (self.dec_prenet1.in_dim == a.frame_dim
             and self.dec_prenet1.out_dim == a.prenet_hidden, "dec_prenet1"),
            (self.dec_prenet2.in_dim == a.prenet_hidden
             and self.dec_prenet2.out_dim == a.prenet_out, "dec_prenet2"),
            (self.attn_gru.in_dim == a.prenet_out + a.memory_dim
             and self.attn_gru.hidden == a.attn_rnn_dim, "attn_gru"),
            (self.attn.fc1.in_dim == a.attn_rnn_dim
             and self.attn.n_components == a.n_mixtures, "attn_fc"),
            (self.dec_input_proj.in_dim == a.dec_input_dim
             and self.dec_input_proj.out_dim == a.dec_lstm_dim, "dec_input_proj"),
            (self.dec_lstm1.in_dim == a.dec_lstm_dim
             and self.dec_lstm1.hidden == a.dec_lstm_dim, "dec_lstm1"),
            (self.dec_lstm2.in_dim == a.dec_lstm_dim
             and self.dec_lstm2.hidden == a.dec_lstm_dim, "dec_lstm2"),
            (self.frame_proj.in_dim == a.dec_lstm_dim
             and self.frame_proj.out_dim == MAX_R * a.frame_dim, "frame_proj"),
            (self.stop_proj.in_dim == a.dec_lstm_dim
             and self.stop_proj.out_dim == 1, "stop_proj"),
            (self.postnet.n_channels == a.frame_dim, "postnet"),
        ]
        for ok, name in checks:
            if not ok:
                raise ConfigError(f"tensor dims for '{name}' disagree with config")

    @classmethod
    def from_tensors(cls, arch, postnet_cfg, tensors):
        """Build from a name->array map (the container's tensor table)."""
        lin = lambda n: nn.LinearParams(tensors[n + ".weight"], tensors[n + ".bias"])
        gru = lambda n: nn.GruParams(
            tensors[n + ".w_x"], tensors[n + ".w_h"], tensors[n + ".bias"])
        lstm = lambda n: nn.LstmParams(
            tensors[n + ".w_x"], tensors[n + ".w_h"], tensors[n + ".bias"])
        try:
            return cls(
                arch=arch,
                postnet_cfg=postnet_cfg,
                embedding=nn.EmbeddingTable(tensors["embedding"]),
                enc_prenet1=lin("enc_prenet1"),
                enc_prenet2=lin("enc_prenet2"),
                enc_gru_fwd=gru("enc_gru_fwd"),
                enc_gru_bwd=gru("enc_gru_bwd"),
                dec_prenet1=lin("dec_prenet1"),
                dec_prenet2=lin("dec_prenet2"),
                attn_gru=gru("attn_gru"),
                attn=attention.AttentionParams(
                    fc1=lin("attn_fc1"), fc2=lin("attn_fc2")),
                dec_input_proj=lin("dec_input_proj"),
                dec_lstm1=lstm("dec_lstm1"),
                dec_lstm2=lstm("dec_lstm2"),
                frame_proj=lin("frame_proj"),
                stop_proj=lin("stop_proj"),
                postnet=postnet.params_from_config(postnet_cfg, tensors),
            )
        except KeyError as e:
            raise ConfigError(f"model is missing tensor {e.args[0]!r}") from None


@dataclass
class DecoderState:
    attn_h: np.ndarray
    lstm1_h: np.ndarray
    lstm1_c: np.ndarray
    lstm2_h: np.ndarray
    lstm2_c: np.ndarray
    attention: attention.AttentionState
    prev_frame: np.ndarray
    step_index: int = 0


def initial_decoder_state(params: ModelParams):
    a = params.arch
    return DecoderState(
        attn_h=np.zeros(a.attn_rnn_dim, dtype=F32),
        lstm1_h=np.zeros(a.dec_lstm_dim, dtype=F32),
        lstm1_c=np.zeros(a.dec_lstm_dim, dtype=F32),
        lstm2_h=np.zeros(a.dec_lstm_dim, dtype=F32),
        lstm2_c=np.zeros(a.dec_lstm_dim, dtype=F32),
        attention=attention.initial_state(a.n_mixtures, a.memory_dim),
        prev_frame=np.zeros(a.frame_dim, dtype=F32),  # all-zero go frame
        step_index=0,
    )


def encode(phoneme_ids, params: ModelParams):
    """Memory vectors, one per phoneme.

    The position-parallel work (embedding, pre-net, recurrent input projection)
    runs as whole-sequence matrix products; only the recurrence itself steps
    sequentially.  That keeps encoder cost a shallow O(N) and is what makes
    streaming first-audio latency nearly flat in input length.
    """
    ids = np.asarray(phoneme_ids, dtype=np.int64).reshape(-1)
    if ids.size == 0:
        raise InputError("phoneme id list is empty")
    emb = nn.embedding_lookup(ids, params.embedding)
    x = _bulk_linear(emb, params.enc_prenet1)
    np.maximum(x, 0.0, out=x)
    x = _bulk_linear(x, params.enc_prenet2)
    np.maximum(x, 0.0, out=x)

    n = x.shape[0]
    a = params.arch
    memory = np.empty((n, a.memory_dim), dtype=F32)
    _gru_scan(x, params.enc_gru_fwd, memory[:, :a.enc_rnn_dim], reverse=False)
    _gru_scan(x, params.enc_gru_bwd, memory[:, a.enc_rnn_dim:], reverse=True)
    if not np.all(np.isfinite(memory)):
        raise NumericError("non-finite encoder memory")
    return memory


def _bulk_linear(x, p: nn.LinearParams):
    if x.shape[1] != p.in_dim:
        raise ConfigError(f"linear expects dim {p.in_dim}, got {x.shape[1]}")
    return as_f32(x @ p.weight.T + p.bias)


def _gru_scan(x, p: nn.GruParams, out, reverse):
    # input-side projection for every position at once; recurrence stays scalar
    pre = np.ascontiguousarray(x @ p.w_x.T + p.bias, dtype=F32)
    h = np.zeros(p.hidden, dtype=F32)
    idx = range(x.shape[0] - 1, -1, -1) if reverse else range(x.shape[0])
    for t in idx:
        h = kernels.gru_step_pre(pre[t], p.w_h, h)
        out[t] = h


def decoder_step(state: DecoderState, memory, params: ModelParams):
    """One autoregressive step: r frames, a stop probability, the next state.

    Fixed order: frame pre-net and previous context feed the attention GRU;
    the mixture advances and produces a fresh context; [h ⊕ c] goes through a
    projection and two residual LSTMs; frame and stop projections read the
    final residual output.
    """
    p1 = nn.relu(nn.linear_forward(state.prev_frame, params.dec_prenet1))
    p2 = nn.relu(nn.linear_forward(p1, params.dec_prenet2))
    gru_in = np.concatenate([p2, state.attention.context])
    h = kernels.gru_step(params.attn_gru.w_x, params.attn_gru.w_h,
                         params.attn_gru.bias, gru_in, state.attn_h)

    att = attention.advance_state(h, state.attention, params.attn)
    weights = attention.compute_alignment(att, memory.shape[0])
    ctx = attention.compute_context(weights, memory)
    att = replace(att, context=ctx)

    dec_in = kernels.linear(params.dec_input_proj.weight,
                            params.dec_input_proj.bias,
                            np.concatenate([h, ctx]))
    h1, c1 = kernels.lstm_step(params.dec_lstm1.w_x, params.dec_lstm1.w_h,
                               params.dec_lstm1.bias, dec_in,
                               state.lstm1_h, state.lstm1_c)
    res1 = dec_in + h1
    h2, c2 = kernels.lstm_step(params.dec_lstm2.w_x, params.dec_lstm2.w_h,
                               params.dec_lstm2.bias, res1,
                               state.lstm2_h, state.lstm2_c)
    res2 = res1 + h2

    r, fd = params.arch.r, params.arch.frame_dim
    frames = kernels.linear(params.frame_proj.weight[:r * fd],
                            params.frame_proj.bias[:r * fd],
                            res2).reshape(r, fd)
    stop_logit = kernels.linear(params.stop_proj.weight, params.stop_proj.bias,
                                res2)
    stop_prob = nn.sigmoid(stop_logit[0])
    if not (np.all(np.isfinite(frames)) and math.isfinite(stop_prob)):
        raise NumericError(f"non-finite decoder output at step {state.step_index}")

    new_state = DecoderState(
        attn_h=h, lstm1_h=h1, lstm1_c=c1, lstm2_h=h2, lstm2_c=c2,
        attention=att, prev_frame=frames[-1].copy(),
        step_index=state.step_index + 1,
    )
    return frames, stop_prob, new_state


def should_stop(stop_prob, step_index, cfg: ArchConfig, max_steps=None):
    """Stop strictly above the threshold, or at the step cap."""
    limit = max_steps if max_steps is not None else cfg.max_steps
    return stop_prob > cfg.stop_threshold or (limit and step_index >= limit)


class DecodeRun:
    """Iterator over r-frame blocks, shared by the batch and streaming paths.

    After exhaustion, ``steps`` counts decoder steps taken and ``truncated``
    tells whether the step cap (rather than the stop token) ended the run.
    """

    def __init__(self, memory, params: ModelParams):
        if memory.shape[0] < 1:
            raise InputError("empty encoder memory")
        self.memory = memory
        self.params = params
        self.limit = params.arch.resolved_max_steps(memory.shape[0])
        self.steps = 0
        self.truncated = False
        self.finished = False

    def __iter__(self):
        state = initial_decoder_state(self.params)
        cfg = self.params.arch
        while True:
            frames, stop_prob, state = decoder_step(state, self.memory, self.params)
            self.steps = state.step_index
            stop = should_stop(stop_prob, state.step_index, cfg, self.limit)
            if stop and stop_prob <= cfg.stop_threshold:
                self.truncated = True
            yield frames
            if stop:
                self.finished = True
                return


@dataclass
class BatchResult:
    frames: np.ndarray  # (T, frame_dim) refined output
    steps: int
    truncated: bool
    encoder_s: float
    decode_s: float
    postnet_s: float

    @property
    def total_s(self):
        return self.encoder_s + self.decode_s + self.postnet_s


def run_batch(phoneme_ids, params: ModelParams):
    """Full-sequence synthesis: decode to stop, then refine everything at once.

    This is the reference the streaming engine must match bit for bit.
    """
    t0 = time.perf_counter()
    memory = encode(phoneme_ids, params)
    t1 = time.perf_counter()
    run = DecodeRun(memory, params)
    blocks = list(run)
    raw = np.concatenate(blocks, axis=0)
    t2 = time.perf_counter()
    refined = raw + postnet.postnet_forward(raw, params.postnet)
    t3 = time.perf_counter()
    return BatchResult(
        frames=np.ascontiguousarray(refined, dtype=F32),
        steps=run.steps,
        truncated=run.truncated,
        encoder_s=t1 - t0,
        decode_s=t2 - t1,
        postnet_s=t3 - t2,
    )
