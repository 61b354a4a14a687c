#!/usr/bin/env python3
"""Compare the compiled kernel backend against the numpy fallback.

Micro-benchmarks time each hot kernel at the production model's shapes by
loading both backend modules side by side.  The optional end-to-end mode runs
the full decoder loop in a subprocess per backend (backend choice is an
import-time decision, so it cannot be swapped in-process).

Usage:
    python benchmarks/bench_backends.py [--repeat N] [--e2e]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from streamtts import backend

E2E_SCRIPT = r"""
import time
from streamtts import backend
from streamtts.model import ArchConfig, run_batch
from streamtts.modelio import genmodel, sentence_ids

bundle = genmodel(0)
params = bundle.params()
ids = sentence_ids(0, 0, 20, bundle.arch.vocab_size)
arch = ArchConfig(max_steps=60, stop_threshold=2.0)
params = params.__class__.from_tensors(arch, bundle.postnet, bundle.tensors)
run_batch(ids, params)  # warm-up
t0 = time.perf_counter()
res = run_batch(ids, params)
dt = time.perf_counter() - t0
print(f"{backend.BACKEND},{res.steps / dt:.1f},{res.frames.shape[0] / dt:.1f}")
"""


def model_shaped_cases(rng):
    """(name, per-backend callable factory) at the full model's dimensions."""
    f32 = lambda *s: rng.standard_normal(s).astype(np.float32)

    lin_w, lin_b, lin_x = f32(220, 512), f32(220), f32(512)
    gru_wx, gru_wh = f32(768, 384) * 0.05, f32(768, 256) * 0.05
    gru_b, gru_x, gru_h = f32(768) * 0.05, f32(384), f32(256) * 0.5
    lstm_wx, lstm_wh = f32(2048, 512) * 0.05, f32(2048, 512) * 0.05
    lstm_b, lstm_x = f32(2048) * 0.05, f32(512)
    lstm_h, lstm_c = f32(512) * 0.5, f32(512) * 0.5
    conv_w = (f32(256, 5, 256) * 0.05).reshape(256, -1).copy()
    conv_b, conv_x = f32(256), f32(120, 256)
    ws_w, ws_m = rng.random(1200).astype(np.float32), f32(1200, 256)

    return [
        ("linear 220x512", lambda k: k.linear(lin_w, lin_b, lin_x)),
        ("gru_step 256h", lambda k: k.gru_step(gru_wx, gru_wh, gru_b, gru_x, gru_h)),
        ("lstm_step 512h", lambda k: k.lstm_step(lstm_wx, lstm_wh, lstm_b,
                                                 lstm_x, lstm_h, lstm_c)),
        ("conv1d 256c k5 T120", lambda k: k.conv1d_valid(conv_x, conv_w, conv_b, 5)),
        ("weighted_sum 1200x256", lambda k: k.weighted_sum(ws_w, ws_m)),
    ]


def time_call(fn, repeat):
    fn()  # warm-up
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200,
                    help="timing repetitions per kernel (best-of)")
    ap.add_argument("--e2e", action="store_true",
                    help="also run the full decoder loop per backend")
    args = ap.parse_args(argv)

    names = backend.available_backends()
    mods = {n: backend.load_backend(n) for n in names}
    rng = np.random.default_rng(0)
    cases = model_shaped_cases(rng)

    width = max(len(c[0]) for c in cases)
    header = f"{'kernel':<{width}}  " + "".join(f"{n + ' (us)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'ratio':>9}"
    print(header)
    print("-" * len(header))
    for label, call in cases:
        row = f"{label:<{width}}  "
        times = []
        for n in names:
            k = mods[n]
            t = time_call(lambda: call(k), args.repeat)
            times.append(t)
            row += f"{t * 1e6:>14.1f}"
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.2f}"
        print(row)
    if len(names) == 2:
        print("\nratio > 1: compiled backend is faster for that kernel")

    if args.e2e:
        print("\nend-to-end decoder, 60 steps (r=5, full-size model):")
        print(f"{'backend':<10}{'steps/s':>12}{'frames/s':>12}")
        for n in names:
            env = dict(os.environ, STREAMTTS_BACKEND=n)
            out = subprocess.run([sys.executable, "-c", E2E_SCRIPT], env=env,
                                 capture_output=True, text=True, check=True)
            be, steps_s, frames_s = out.stdout.strip().split(",")
            print(f"{be:<10}{float(steps_s):>12.1f}{float(frames_s):>12.1f}")


if __name__ == "__main__":
    main()
