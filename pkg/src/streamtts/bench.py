"""Latency/RTF measurement over a synthetic length-swept corpus.

Every (sentence, mode, r, repeat) combination yields one CSV row.  Sentences
come from the deterministic corpus generator; the stop token is disabled and
the step cap pinned so emitted length tracks the requested phoneme count and
r-values stay comparable.  Column order is frozen; downstream tooling parses
it by name.
"""

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .model import ModelParams, run_batch
from .modelio import ModelBundle, sentence_ids
from .streaming import StreamConfig, stream_synthesize
from .vocoder import FRAME_SECONDS, PulseTrainVocoder, render_all

COLUMNS = [
    "sentence_id", "n_phonemes", "audio_duration_s", "mode", "r",
    "chunk_frames", "latency_ms_acoustic", "latency_ms_end_to_end",
    "rtf_acoustic", "rtf_total", "first_chunk_steps", "encoder_ms",
]

FRAMES_PER_PHONEME = 12  # target emitted length per input symbol


@dataclass
class BenchRecord:
    sentence_id: int
    n_phonemes: int
    audio_duration_s: float
    mode: str
    r: int
    chunk_frames: int
    latency_ms_acoustic: float
    latency_ms_end_to_end: float
    rtf_acoustic: float
    rtf_total: float
    first_chunk_steps: int
    encoder_ms: float

    def to_row(self):
        return [
            str(self.sentence_id), str(self.n_phonemes),
            f"{self.audio_duration_s:.6f}", self.mode, str(self.r),
            str(self.chunk_frames), f"{self.latency_ms_acoustic:.6f}",
            f"{self.latency_ms_end_to_end:.6f}", f"{self.rtf_acoustic:.6f}",
            f"{self.rtf_total:.6f}", str(self.first_chunk_steps),
            f"{self.encoder_ms:.6f}",
        ]


class _NullSink:
    """Drops payloads so sink memory churn stays out of the timings."""

    def push(self, event):
        pass


def bench_arch(arch, r, n_phonemes, frames_per_phoneme=FRAMES_PER_PHONEME):
    """Pin emitted length: stop token disabled, step cap hit exactly."""
    steps = max(1, math.ceil(n_phonemes * frames_per_phoneme / r))
    return replace(arch, r=r, stop_threshold=2.0, max_steps=steps)


def measure_stream(ids, params, chunk_frames, half_window, threaded=False):
    cfg = StreamConfig(chunk_frames=chunk_frames, half_window=half_window)
    return stream_synthesize(ids, params, cfg, _NullSink(),
                             vocoder=PulseTrainVocoder(), threaded=threaded)


def measure_batch(ids, params):
    res = run_batch(ids, params)
    t0 = time.perf_counter()
    render_all(res.frames)
    vocode_s = time.perf_counter() - t0
    return res, vocode_s


def record_stream(sid, ids, stats, r, chunk_frames):
    return BenchRecord(
        sentence_id=sid, n_phonemes=len(ids),
        audio_duration_s=stats.audio_duration_s, mode="stream", r=r,
        chunk_frames=chunk_frames,
        latency_ms_acoustic=stats.latency_acoustic_s * 1e3,
        latency_ms_end_to_end=(stats.latency_e2e_s or stats.latency_acoustic_s) * 1e3,
        rtf_acoustic=stats.rtf_acoustic, rtf_total=stats.rtf_total,
        first_chunk_steps=stats.first_chunk_decoder_steps,
        encoder_ms=stats.encoder_s * 1e3,
    )


def record_batch(sid, ids, res, vocode_s, r):
    duration = res.frames.shape[0] * FRAME_SECONDS
    total = res.total_s + vocode_s
    return BenchRecord(
        sentence_id=sid, n_phonemes=len(ids), audio_duration_s=duration,
        mode="batch", r=r, chunk_frames=0,
        latency_ms_acoustic=res.total_s * 1e3,  # no audio before the full pass
        latency_ms_end_to_end=total * 1e3,
        rtf_acoustic=(res.total_s / duration) if duration else float("inf"),
        rtf_total=(total / duration) if duration else float("inf"),
        first_chunk_steps=res.steps,
        encoder_ms=res.encoder_s * 1e3,
    )


def run_bench(bundle: ModelBundle, lengths, modes=("stream", "batch"),
              r_list=(5,), repeats=1, chunk_frames=100, seed=0,
              frames_per_phoneme=FRAMES_PER_PHONEME, jobs=1, threaded=False):
    """All records for the length sweep, ordered deterministically."""
    from .postnet import receptive_field

    half = receptive_field(bundle.postnet)[1]
    tasks = []
    for sid, n in enumerate(lengths):
        ids = sentence_ids(seed, sid, n, bundle.arch.vocab_size)
        for mode in modes:
            for r in r_list:
                for rep in range(repeats):
                    tasks.append((sid, ids, n, mode, r, rep))

    def run_task(task):
        sid, ids, n, mode, r, _rep = task
        arch = bench_arch(bundle.arch, r, n, frames_per_phoneme)
        params = ModelParams.from_tensors(arch, bundle.postnet, bundle.tensors)
        if mode == "stream":
            stats = measure_stream(ids, params, chunk_frames, half, threaded)
            return record_stream(sid, ids, stats, r, chunk_frames)
        res, vocode_s = measure_batch(ids, params)
        return record_batch(sid, ids, res, vocode_s, r)

    if jobs > 1:
        # map preserves task order, so the CSV layout is jobs-independent
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_task, tasks))
    else:
        records = [run_task(t) for t in tasks]
    return records


def write_csv(records, path):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(COLUMNS)
        for rec in records:
            writer.writerow(rec.to_row())
