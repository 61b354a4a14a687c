import threading
import time
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from streamtts import streaming, vocoder
from streamtts.errors import ConfigError, LogicError
from streamtts.model import run_batch
from streamtts.modelio import sentence_ids
from streamtts.streaming import (
    AudioReady,
    ChunkPlan,
    CollectSink,
    FrameBuffer,
    FramesReady,
    StreamConfig,
    StreamStats,
    latency_model,
    plan_next_chunk,
    stream_synthesize,
)

# StreamConfig.half_window must match the refiner's receptive field; the tiny
# postnet fixture has half_window == 3
TINY_CFG = StreamConfig(chunk_frames=8, half_window=3)


def stream_params(tiny_params, steps=30, r=None):
    arch = replace(tiny_params.arch, max_steps=steps, stop_threshold=2.0)
    if r is not None:
        arch = replace(arch, r=r)
    return replace(tiny_params, arch=arch)


def ids_for(tiny_params, n=6):
    return sentence_ids(3, 0, n, tiny_params.arch.vocab_size)


# --- config and latency model ------------------------------------------------

def test_stream_config_validation():
    with pytest.raises(ConfigError):
        StreamConfig(chunk_frames=0)
    with pytest.raises(ConfigError):
        StreamConfig(half_window=-1)


def test_latency_model_values():
    cfg = StreamConfig(chunk_frames=100, half_window=10)
    assert latency_model(cfg, 5) == 22
    assert latency_model(cfg, 1) == 110
    assert latency_model(cfg, 10) == 11
    assert latency_model(cfg, 7) == 16  # ceil(110/7)
    assert latency_model(StreamConfig(chunk_frames=1, half_window=10), 1) == 11
    with pytest.raises(ConfigError):
        latency_model(cfg, 0)


# --- chunk planner -----------------------------------------------------------

def push_frames(buf, n, r, offset=0):
    for i in range(0, n, r):
        block = np.arange(offset + i, offset + i + r, dtype=np.float32)
        buf.push(block.reshape(r, 1))


def test_planner_not_ready_without_lookahead():
    cfg = StreamConfig(chunk_frames=100, half_window=10)
    buf = FrameBuffer(1, cfg, r=5)
    push_frames(buf, 105, 5)
    assert plan_next_chunk(buf) is None  # 105 < chunk + half
    push_frames(buf, 5, 5, offset=105)
    plan = plan_next_chunk(buf)
    assert plan == ChunkPlan(start=0, end=100, left_ctx=0, right_ctx=10,
                             is_first=True, is_last=False)
    assert plan.span == 100
    assert buf.first_ready_pushes == 22  # matches latency_model(cfg, 5)


def test_planner_eos_flush_short_sequence():
    cfg = StreamConfig(chunk_frames=100, half_window=10)
    buf = FrameBuffer(1, cfg, r=5)
    push_frames(buf, 40, 5)
    assert plan_next_chunk(buf) is None
    buf.mark_eos()
    plan = plan_next_chunk(buf)
    assert plan == ChunkPlan(start=0, end=40, left_ctx=0, right_ctx=0,
                             is_first=True, is_last=True)


def test_planner_walks_sequence_230():
    cfg = StreamConfig(chunk_frames=100, half_window=10)
    buf = FrameBuffer(1, cfg, r=5)
    spans = []
    n = 0
    eos = False
    while True:
        plan = plan_next_chunk(buf)
        if plan is None:
            if n < 230:
                push_frames(buf, 5, 5, offset=n)
                n += 5
                if n == 230:
                    buf.mark_eos()
                    eos = True
                continue
            if not eos:
                buf.mark_eos()
                eos = True
                continue
            break
        spans.append((plan.start, plan.end, plan.left_ctx, plan.right_ctx,
                      plan.is_last))
        buf.finalize_to(plan.end)
    assert spans == [
        (0, 100, 0, 10, False),
        (100, 200, 10, 10, False),
        (200, 230, 10, 0, True),
    ]


def test_planner_right_ctx_clipped_only_at_eos():
    cfg = StreamConfig(chunk_frames=10, half_window=3)
    buf = FrameBuffer(1, cfg, r=1)
    push_frames(buf, 12, 1)
    buf.mark_eos()
    plan = plan_next_chunk(buf)
    assert (plan.start, plan.end) == (0, 10)
    assert plan.right_ctx == 2  # only 12 produced; eos makes that final
    assert not plan.is_last


# --- frame buffer ------------------------------------------------------------

def test_buffer_window_absolute_indexing_across_wrap():
    cfg = StreamConfig(chunk_frames=4, half_window=1)
    buf = FrameBuffer(1, cfg, r=2)
    assert buf.capacity == 8
    push_frames(buf, 8, 2)
    np.testing.assert_array_equal(buf.window(0, 8).ravel(), np.arange(8))
    buf.finalize_to(4)  # discard floor moves to 3
    push_frames(buf, 2, 2, offset=8)  # wraps the ring
    np.testing.assert_array_equal(buf.window(5, 10).ravel(), np.arange(5, 10))
    np.testing.assert_array_equal(buf.window(3, 10).ravel(), np.arange(3, 10))


def test_buffer_window_range_checks():
    cfg = StreamConfig(chunk_frames=4, half_window=1)
    buf = FrameBuffer(1, cfg, r=2)
    push_frames(buf, 6, 2)
    buf.finalize_to(4)
    with pytest.raises(LogicError):
        buf.window(2, 4)  # below the discard floor of 3
    with pytest.raises(LogicError):
        buf.window(4, 7)  # beyond produced
    with pytest.raises(LogicError):
        buf.window(4, 4)  # empty


def test_buffer_push_after_eos_rejected():
    buf = FrameBuffer(1, StreamConfig(chunk_frames=4, half_window=1), r=2)
    buf.mark_eos()
    with pytest.raises(LogicError):
        buf.push(np.zeros((2, 1), np.float32))
    with pytest.raises(LogicError):
        buf.mark_eos()


def test_buffer_finalize_range_checks():
    buf = FrameBuffer(1, StreamConfig(chunk_frames=4, half_window=1), r=2)
    push_frames(buf, 4, 2)
    buf.finalize_to(4)
    with pytest.raises(LogicError):
        buf.finalize_to(3)  # backwards
    with pytest.raises(LogicError):
        buf.finalize_to(5)  # beyond produced


def test_buffer_backpressure_blocks_and_releases():
    cfg = StreamConfig(chunk_frames=4, half_window=1)
    buf = FrameBuffer(1, cfg, r=2)  # capacity 8

    def produce():
        push_frames(buf, 10, 2)

    worker = threading.Thread(target=produce, daemon=True)
    worker.start()
    worker.join(timeout=0.3)
    assert worker.is_alive()  # fifth block exceeds capacity and must wait
    assert buf.produced == 8
    buf.finalize_to(4)  # frees room
    worker.join(timeout=2.0)
    assert not worker.is_alive()
    assert buf.produced == 10


def test_buffer_fail_wakes_blocked_producer():
    cfg = StreamConfig(chunk_frames=4, half_window=1)
    buf = FrameBuffer(1, cfg, r=2)
    errors = []

    def produce():
        try:
            push_frames(buf, 12, 2)
        except RuntimeError as e:
            errors.append(e)

    worker = threading.Thread(target=produce, daemon=True)
    worker.start()
    worker.join(timeout=0.3)
    assert worker.is_alive()
    buf.fail(RuntimeError("consumer died"))
    worker.join(timeout=2.0)
    assert not worker.is_alive()
    assert errors and "consumer died" in str(errors[0])


# --- end-to-end streaming ----------------------------------------------------

def test_stream_matches_batch_bitwise(tiny_params):
    params = stream_params(tiny_params, steps=30)  # 60 frames, r=2
    ids = ids_for(tiny_params)
    batch = run_batch(ids, params)
    sink = CollectSink()
    stats = stream_synthesize(ids, params, TINY_CFG, sink)
    got = sink.all_frames()
    assert got.shape == batch.frames.shape
    np.testing.assert_array_equal(got, batch.frames)
    assert stats.steps == batch.steps
    assert stats.total_frames == 60
    assert stats.truncated == batch.truncated


@pytest.mark.parametrize("chunk", [1, 3, 8, 100])
def test_stream_chunk_size_never_changes_frames(tiny_params, chunk):
    params = stream_params(tiny_params, steps=20)
    ids = ids_for(tiny_params)
    want = run_batch(ids, params).frames
    sink = CollectSink()
    stream_synthesize(ids, params,
                      StreamConfig(chunk_frames=chunk, half_window=3), sink)
    np.testing.assert_array_equal(sink.all_frames(), want)


@pytest.mark.parametrize("r", [1, 3, 7, 10])
def test_stream_matches_batch_across_r(tiny_params, r):
    params = stream_params(tiny_params, steps=18, r=r)
    ids = ids_for(tiny_params)
    want = run_batch(ids, params).frames
    sink = CollectSink()
    stream_synthesize(ids, params, TINY_CFG, sink)
    np.testing.assert_array_equal(sink.all_frames(), want)


def test_threaded_stream_identical_to_single(tiny_params):
    params = stream_params(tiny_params, steps=40)
    ids = ids_for(tiny_params)
    single = CollectSink()
    stream_synthesize(ids, params, TINY_CFG, single, threaded=False)
    threaded = CollectSink()
    stats = stream_synthesize(ids, params, TINY_CFG, threaded, threaded=True)
    np.testing.assert_array_equal(single.all_frames(), threaded.all_frames())
    assert stats.threaded


def test_stream_chunks_are_gapless_and_ordered(tiny_params):
    params = stream_params(tiny_params, steps=25)
    ids = ids_for(tiny_params)

    spans = []

    class SpanSink(CollectSink):
        def push(self, event):
            if isinstance(event, FramesReady):
                spans.append((event.start, event.end, event.frames.shape[0]))
            super().push(event)

    stream_synthesize(ids, params, TINY_CFG, SpanSink())
    assert spans[0][0] == 0
    assert spans[-1][1] == 50
    for (s0, e0, n0), (s1, _, _) in zip(spans, spans[1:]):
        assert e0 - s0 == n0
        assert s1 == e0  # contiguous, no gaps or overlap


def test_stream_stats_fields(tiny_params):
    params = stream_params(tiny_params, steps=30)
    ids = ids_for(tiny_params)
    sink = CollectSink()
    stats = stream_synthesize(ids, params, TINY_CFG, sink,
                              vocoder=vocoder.PulseTrainVocoder())
    assert sink.stats is stats  # Finished event carries the same object
    assert stats.total_frames == 60
    assert stats.n_chunks == 8  # ceil(60 / 8)
    assert stats.steps == 30
    assert stats.first_chunk_decoder_steps == 6  # ceil((8 + 3) / 2)
    assert stats.max_buffered <= 8 + 2 * 3 + 2
    assert 0 < stats.latency_acoustic_s <= stats.acoustic_done_s <= stats.total_s
    assert stats.latency_e2e_s >= stats.latency_acoustic_s
    assert stats.audio_samples == 60 * vocoder.SAMPLES_PER_FRAME
    assert stats.audio_duration_s == pytest.approx(0.6)
    assert stats.rtf_acoustic > 0 and stats.rtf_total >= stats.rtf_acoustic


def test_stream_without_vocoder_has_no_e2e_latency(tiny_params):
    params = stream_params(tiny_params, steps=10)
    sink = CollectSink()
    stats = stream_synthesize(ids_for(tiny_params), params, TINY_CFG, sink)
    assert stats.latency_e2e_s is None
    assert stats.audio_samples == 0
    assert not sink.audio_chunks


def test_stream_audio_matches_batch_vocoder_bitwise(tiny_params):
    params = stream_params(tiny_params, steps=30)
    ids = ids_for(tiny_params)
    sink = CollectSink()
    stream_synthesize(ids, params, TINY_CFG, sink,
                      vocoder=vocoder.PulseTrainVocoder())
    batch = run_batch(ids, params)
    want = vocoder.render_all(batch.frames).samples
    np.testing.assert_array_equal(sink.all_samples(), want)


def test_stream_short_input_single_eos_chunk(tiny_params):
    params = stream_params(tiny_params, steps=2)  # 4 frames < chunk
    sink = CollectSink()
    stats = stream_synthesize(ids_for(tiny_params), params, TINY_CFG, sink)
    assert stats.n_chunks == 1
    assert stats.first_chunk_decoder_steps == 2  # eos flush, not the model
    np.testing.assert_array_equal(
        sink.all_frames(), run_batch(ids_for(tiny_params), params).frames)


def test_stream_stop_token_ends_run(tiny_params):
    # threshold 0 trips on the first step; the run is complete, not truncated
    arch = replace(tiny_params.arch, stop_threshold=0.0)
    params = replace(tiny_params, arch=arch)
    sink = CollectSink()
    stats = stream_synthesize(ids_for(tiny_params), params, TINY_CFG, sink)
    assert stats.steps == 1
    assert not stats.truncated
    assert sink.all_frames().shape == (tiny_params.arch.r, 22)


@settings(max_examples=12, deadline=None)
@given(steps=st.integers(1, 35), chunk=st.integers(1, 70),
       threaded=st.booleans())
def test_stream_equivalence_property(tiny_params, steps, chunk, threaded):
    params = stream_params(tiny_params, steps=steps)
    ids = sentence_ids(5, 1, 4, params.arch.vocab_size)
    want = run_batch(ids, params).frames
    sink = CollectSink()
    stats = stream_synthesize(
        ids, params, StreamConfig(chunk_frames=chunk, half_window=3), sink,
        threaded=threaded)
    np.testing.assert_array_equal(sink.all_frames(), want)
    assert stats.max_buffered <= chunk + 2 * 3 + params.arch.r
