"""Randomized stream-vs-batch equivalence checking.

Each case decodes one synthetic sentence twice, through the full-sequence
path and through the chunked streaming path, and demands bit-identical
frames.  Case parameters (emitted length, r, chunk size, threading) are drawn
from a seeded generator so failures reproduce exactly.
"""

import math
import random
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .bench import FRAMES_PER_PHONEME
from .model import ModelParams, run_batch
from .modelio import ModelBundle, sentence_ids
from .postnet import receptive_field
from .streaming import CollectSink, StreamConfig, stream_synthesize

LENGTH_RANGE = (1, 1200)        # emitted frames, sampled log-uniform
R_CHOICES = (2, 3, 5, 7, 10)
CHUNK_CHOICES = (1, 10, 100, 250)


@dataclass
class CaseResult:
    index: int
    n_frames: int
    r: int
    chunk: int
    threaded: bool
    max_abs_diff: float
    first_bad_frame: Optional[int]

    @property
    def ok(self):
        return self.first_bad_frame is None


def sample_case(rng):
    """(target_frames, r, chunk) for one case."""
    lo, hi = LENGTH_RANGE
    target = max(lo, round(math.exp(rng.uniform(math.log(lo), math.log(hi)))))
    return target, rng.choice(R_CHOICES), rng.choice(CHUNK_CHOICES)


def run_case(bundle: ModelBundle, index, target_frames, r, chunk,
             threaded=False, half_window=None, corpus_seed=0):
    """Compare one stream decode against the batch oracle, bit for bit."""
    arch = replace(
        bundle.arch, r=r, stop_threshold=2.0,  # sigmoid < 1: never fires
        max_steps=max(1, math.ceil(target_frames / r)),
    )
    params = ModelParams.from_tensors(arch, bundle.postnet, bundle.tensors)
    n_phonemes = max(1, target_frames // FRAMES_PER_PHONEME)
    ids = sentence_ids(corpus_seed, index, n_phonemes, arch.vocab_size)

    batch = run_batch(ids, params).frames
    half = receptive_field(bundle.postnet)[1] if half_window is None else half_window
    cfg = StreamConfig(chunk_frames=chunk, half_window=half)
    sink = CollectSink()
    stream_synthesize(ids, params, cfg, sink, threaded=threaded)
    streamed = sink.all_frames()

    if streamed.shape != batch.shape:
        return CaseResult(index, batch.shape[0], r, chunk, threaded,
                          float("inf"), 0)
    diff = streamed != batch
    if diff.any():
        first = int(np.argwhere(diff.any(axis=1))[0][0])
        max_abs = float(
            np.max(np.abs(streamed.astype(np.float64) - batch.astype(np.float64)))
        )
        return CaseResult(index, batch.shape[0], r, chunk, threaded,
                          max_abs, first)
    return CaseResult(index, batch.shape[0], r, chunk, threaded, 0.0, None)


def run_verify(bundle: ModelBundle, cases, seed=0, half_window=None,
               report=None):
    """All case results; alternates threading to cover both consumer modes."""
    rng = random.Random(seed)
    results = []
    for i in range(cases):
        target, r, chunk = sample_case(rng)
        res = run_case(bundle, i, target, r, chunk, threaded=bool(i % 2),
                       half_window=half_window, corpus_seed=seed)
        results.append(res)
        if report:
            status = "OK" if res.ok else f"FAIL at frame {res.first_bad_frame}"
            report(
                f"case {i:3d}: frames={res.n_frames:5d} r={res.r:2d} "
                f"chunk={res.chunk:3d} threaded={int(res.threaded)} "
                f"max|diff|={res.max_abs_diff:g} {status}"
            )
    return results
