"""Streaming orchestration: decode, buffer, chunked refine, sink.

The decoder appends r-frame blocks to a bounded ring buffer.  Whenever the
buffer holds a full chunk plus half_window lookahead frames (or the decoder
has finished), a chunk is planned, refined with its receptive-field context,
and pushed to the sink — so audio starts after a constant number of decoder
steps no matter how long the sentence is.  Frames older than the context
window of the next chunk are discarded.

Runs either single-threaded (reference mode) or with the decoder on a
producer thread; both modes emit byte-identical frame streams because chunk
spans depend only on (finalized, eos, final length), never on timing.
"""

import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import postnet as postnet_mod
from .errors import ConfigError, LogicError
from .model import DecodeRun, ModelParams, encode
from .nn import F32
from .vocoder import FRAME_SECONDS


@dataclass
class StreamConfig:
    chunk_frames: int = 100
    half_window: int = 10  # post-net half receptive field

    def __post_init__(self):
        if self.chunk_frames < 1:
            raise ConfigError("chunk_frames must be >= 1")
        if self.half_window < 0:
            raise ConfigError("half_window must be >= 0")


def latency_model(cfg: StreamConfig, r):
    """Decoder steps before the first chunk can be refined."""
    if r < 1:
        raise ConfigError("r must be >= 1")
    return -(-(cfg.chunk_frames + cfg.half_window) // r)


@dataclass
class ChunkPlan:
    start: int
    end: int
    left_ctx: int
    right_ctx: int
    is_first: bool
    is_last: bool

    @property
    def span(self):
        return self.end - self.start


@dataclass
class FramesReady:
    frames: np.ndarray  # (span, frame_dim) refined
    start: int
    end: int


@dataclass
class AudioReady:
    samples: np.ndarray  # int16
    sample_rate: int


@dataclass
class Finished:
    stats: "StreamStats"


@dataclass
class StreamStats:
    first_chunk_decoder_steps: int = 0
    steps: int = 0
    total_frames: int = 0
    n_chunks: int = 0
    truncated: bool = False
    threaded: bool = False
    encoder_s: float = 0.0
    latency_acoustic_s: float = 0.0       # entry -> first refined frames
    latency_e2e_s: Optional[float] = None  # entry -> first audio samples
    acoustic_done_s: float = 0.0          # entry -> last refined frames
    total_s: float = 0.0
    max_buffered: int = 0
    audio_samples: int = 0

    @property
    def audio_duration_s(self):
        return self.total_frames * FRAME_SECONDS

    @property
    def rtf_acoustic(self):
        d = self.audio_duration_s
        return self.acoustic_done_s / d if d else float("inf")

    @property
    def rtf_total(self):
        d = self.audio_duration_s
        return self.total_s / d if d else float("inf")


class CollectSink:
    """Accumulates events; handy for tests and file output."""

    def __init__(self):
        self.frame_blocks = []
        self.audio_chunks = []
        self.stats = None

    def push(self, event):
        if isinstance(event, FramesReady):
            self.frame_blocks.append(event.frames)
        elif isinstance(event, AudioReady):
            self.audio_chunks.append(event)
        elif isinstance(event, Finished):
            self.stats = event.stats

    def all_frames(self):
        if not self.frame_blocks:
            return np.zeros((0, 0), dtype=F32)
        return np.concatenate(self.frame_blocks, axis=0)

    def all_samples(self):
        if not self.audio_chunks:
            return np.zeros(0, dtype=np.int16)
        return np.concatenate([c.samples for c in self.audio_chunks])


class FrameBuffer:
    """Bounded ring of raw decoder frames with absolute indexing.

    Retains at most chunk_frames + 2*half_window + r frames: the pending
    chunk, lookahead context, trailing context below ``finalized``, and one
    in-flight decoder block.  ``push`` blocks when full (producer
    backpressure) and raises after EOS.
    """

    def __init__(self, frame_dim, cfg: StreamConfig, r):
        self.cfg = cfg
        self.capacity = cfg.chunk_frames + 2 * cfg.half_window + r
        self._ring = np.zeros((self.capacity, frame_dim), dtype=F32)
        self._cond = threading.Condition()
        self.discard_floor = 0
        self.produced = 0
        self.finalized = 0
        self.eos_seen = False
        self.max_retained = 0
        self.pushes = 0
        self.first_ready_pushes = None
        self._error = None

    def push(self, block):
        block = np.asarray(block, dtype=F32)
        n = block.shape[0]
        with self._cond:
            if self.eos_seen:
                raise LogicError("push after EOS")
            while self.produced + n - self.discard_floor > self.capacity:
                self._raise_if_failed()
                self._cond.wait()
            self._raise_if_failed()
            self._write(self.produced, block)
            self.produced += n
            self.pushes += 1
            self.max_retained = max(self.max_retained,
                                    self.produced - self.discard_floor)
            self._note_ready()
            self._cond.notify_all()

    def mark_eos(self):
        with self._cond:
            if self.eos_seen:
                raise LogicError("EOS marked twice")
            self.eos_seen = True
            self._note_ready()
            self._cond.notify_all()

    def fail(self, exc):
        with self._cond:
            self._error = exc
            self._cond.notify_all()

    def window(self, start, end):
        """Contiguous copy of frames [start, end); they must be retained."""
        with self._cond:
            if start < self.discard_floor or end > self.produced or start >= end:
                raise LogicError(
                    f"window [{start},{end}) outside retained "
                    f"[{self.discard_floor},{self.produced})"
                )
            out = np.empty((end - start, self._ring.shape[1]), dtype=F32)
            s = start % self.capacity
            first = min(end - start, self.capacity - s)
            out[:first] = self._ring[s:s + first]
            if first < end - start:
                out[first:] = self._ring[:end - start - first]
            return out

    def finalize_to(self, end):
        """Consumer bookkeeping: frames below end are refined and emitted."""
        with self._cond:
            if end < self.finalized or end > self.produced:
                raise LogicError(f"finalize_to({end}) outside valid range")
            self.finalized = end
            keep_from = max(0, self.finalized - self.cfg.half_window)
            self.discard_floor = max(self.discard_floor, keep_from)
            self._cond.notify_all()

    def wait_plan(self):
        """Block until a chunk is plannable; None once EOS is fully drained."""
        with self._cond:
            while True:
                self._raise_if_failed()
                plan = plan_next_chunk(self, _locked=True)
                if plan is not None:
                    return plan
                if self.eos_seen and self.finalized >= self.produced:
                    return None
                self._cond.wait()

    def _note_ready(self):
        if self.first_ready_pushes is not None:
            return
        ready = (
            self.produced - self.finalized
            >= self.cfg.chunk_frames + self.cfg.half_window
        ) or (self.eos_seen and self.produced > self.finalized)
        if ready:
            self.first_ready_pushes = self.pushes

    def _raise_if_failed(self):
        if self._error is not None:
            raise self._error

    def _write(self, at, block):
        s = at % self.capacity
        first = min(block.shape[0], self.capacity - s)
        self._ring[s:s + first] = block[:first]
        if first < block.shape[0]:
            self._ring[:block.shape[0] - first] = block[first:]


def plan_next_chunk(buf: FrameBuffer, cfg: StreamConfig = None, *, _locked=False):
    """Next chunk to refine, or None if the buffer lacks lookahead.

    Ready iff a full chunk plus half_window lookahead is buffered, or EOS has
    been seen and unfinalized frames remain.  The span starts at ``finalized``;
    context is half_window per side, clipped at the sequence boundaries.
    """
    cfg = cfg or buf.cfg
    lock = buf._cond if not _locked else None
    if lock:
        lock.acquire()
    try:
        produced, finalized, eos = buf.produced, buf.finalized, buf.eos_seen
    finally:
        if lock:
            lock.release()

    ready = (produced - finalized >= cfg.chunk_frames + cfg.half_window) or (
        eos and produced > finalized
    )
    if not ready:
        return None
    start = finalized
    end = min(start + cfg.chunk_frames, produced)
    return ChunkPlan(
        start=start,
        end=end,
        left_ctx=min(cfg.half_window, start),
        right_ctx=min(cfg.half_window, produced - end),
        is_first=start == 0,
        is_last=eos and end == produced,
    )


def stream_synthesize(phoneme_ids, params: ModelParams, cfg: StreamConfig,
                      sink, vocoder=None, threaded=False):
    """Synthesize with chunked emission; returns StreamStats.

    Emits FramesReady per refined chunk (plus AudioReady when a vocoder is
    given) and a final Finished event.  Concatenated FramesReady payloads are
    bit-identical to run_batch output for the same input.
    """
    t0 = time.perf_counter()
    memory = encode(phoneme_ids, params)
    encoder_s = time.perf_counter() - t0

    run = DecodeRun(memory, params)
    buf = FrameBuffer(params.arch.frame_dim, cfg, params.arch.r)
    stats = StreamStats(threaded=threaded, encoder_s=encoder_s)

    consume = _Consumer(buf, params, sink, vocoder, stats, t0)
    if threaded:
        def produce():
            try:
                for block in run:
                    buf.push(block)
                buf.mark_eos()
            except BaseException as e:  # propagate into the consumer
                buf.fail(e)

        worker = threading.Thread(target=produce, name="decoder", daemon=True)
        worker.start()
        try:
            while True:
                plan = buf.wait_plan()
                if plan is None:
                    break
                consume.process(plan)
        except BaseException as e:
            buf.fail(e)  # unblock a producer stuck in backpressure
            worker.join(timeout=5.0)
            raise
        worker.join()
    else:
        for block in run:
            buf.push(block)
            _drain(buf, consume)
        buf.mark_eos()
        _drain(buf, consume)

    stats.steps = run.steps
    stats.truncated = run.truncated
    stats.first_chunk_decoder_steps = buf.first_ready_pushes or run.steps
    stats.max_buffered = buf.max_retained
    stats.total_s = time.perf_counter() - t0
    sink.push(Finished(stats))
    return stats


def _drain(buf, consume):
    while True:
        plan = plan_next_chunk(buf)
        if plan is None:
            return
        consume.process(plan)


class _Consumer:
    """Refines planned chunks in order and feeds the sink."""

    def __init__(self, buf, params, sink, vocoder, stats, t0):
        self.buf = buf
        self.params = params
        self.sink = sink
        self.vocoder = vocoder
        self.stats = stats
        self.t0 = t0

    def process(self, plan: ChunkPlan):
        window = self.buf.window(plan.start - plan.left_ctx,
                                 plan.end + plan.right_ctx)
        refined = postnet_mod.refine_chunk(
            window, plan.left_ctx, plan.right_ctx, self.params.postnet
        )
        now = time.perf_counter()
        if self.stats.n_chunks == 0:
            self.stats.latency_acoustic_s = now - self.t0
        self.stats.acoustic_done_s = now - self.t0
        self.sink.push(FramesReady(frames=refined, start=plan.start, end=plan.end))
        if self.vocoder is not None:
            chunk = self.vocoder.frames_to_audio(refined)
            if self.stats.latency_e2e_s is None:
                self.stats.latency_e2e_s = time.perf_counter() - self.t0
            self.stats.audio_samples += chunk.samples.shape[0]
            self.sink.push(AudioReady(samples=chunk.samples,
                                      sample_rate=chunk.sample_rate))
        self.stats.n_chunks += 1
        self.stats.total_frames += plan.span
        self.buf.finalize_to(plan.end)
