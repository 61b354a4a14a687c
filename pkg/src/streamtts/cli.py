"""Command line: generate models, synthesize, benchmark, verify equivalence.

Exit codes: 0 success, 1 invalid arguments, 2 model load failure, 3 numeric
failure during synthesis, 4 stream/batch mismatch from verify.
"""

import argparse
import os
import sys
from dataclasses import replace

from . import backend, bench
from .errors import ConfigError, InputError, ModelFormatError, NumericError
from .model import ArchConfig, ModelParams, run_batch
from .modelio import genmodel, load_model, save_model
from .postnet import receptive_field
from .streaming import CollectSink, StreamConfig, stream_synthesize
from .vocoder import PulseTrainVocoder, render_all, write_wav
from .verify import run_verify

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LOAD = 2
EXIT_NUMERIC = 3
EXIT_MISMATCH = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="streamtts",
                description="Streaming acoustic-model inference engine")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genmodel", help="write a deterministic seeded model")
    g.add_argument("--out", required=True, help="container file path")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--vocab-size", type=int, default=64)
    g.add_argument("--r", type=int, default=5, help="frames per decoder step")
    g.set_defaults(func=cmd_genmodel)

    s = sub.add_parser("synth", help="synthesize one utterance")
    s.add_argument("--model", required=True)
    s.add_argument("--phonemes", required=True,
                   help="space-separated ids, or @file containing them")
    s.add_argument("--mode", choices=("stream", "batch"), default="stream")
    s.add_argument("--r", type=int, help="override frames per step")
    s.add_argument("--chunk", type=int, default=100,
                   help="streaming chunk size in frames")
    s.add_argument("--wav", help="write PCM-16 24 kHz audio here")
    s.add_argument("--csv-stats", help="write a one-row stats CSV here")
    s.add_argument("--threaded", action="store_true",
                   help="decode on a producer thread (stream mode)")
    s.add_argument("--stop-threshold", type=float, help="override stop gate")
    s.add_argument("--max-steps", type=int, help="override decoder step cap")
    s.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="latency/RTF sweep over a synthetic corpus")
    b.add_argument("--model", required=True)
    b.add_argument("--lengths", default="10:100:10",
                   help="phoneme counts: start:stop:step (inclusive) or comma list")
    b.add_argument("--modes", default="stream,batch")
    b.add_argument("--r-list", default="5")
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--chunk", type=int, default=100)
    b.add_argument("--frames-per-phoneme", type=int,
                   default=bench.FRAMES_PER_PHONEME)
    b.add_argument("--seed", type=int, default=0, help="corpus seed")
    b.add_argument("--jobs", type=int, default=1,
                   help="parallel sentences (STREAMTTS_THREADS overrides)")
    b.add_argument("--threaded", action="store_true")
    b.add_argument("--out", required=True, help="CSV output path")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="randomized stream==batch bit-exactness")
    v.add_argument("--model", required=True)
    v.add_argument("--cases", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--half-window", type=int, default=None,
                   help="override context half-window (fault injection)")
    v.set_defaults(func=cmd_verify)
    return p


def _load_bundle(path):
    try:
        return load_model(path)
    except (OSError, ModelFormatError) as e:
        print(f"streamtts: cannot load model {path!r}: {e}", file=sys.stderr)
        raise SystemExit(EXIT_LOAD)


def _parse_phonemes(arg):
    text = arg
    if arg.startswith("@"):
        try:
            with open(arg[1:], "r", encoding="utf-8") as f:
                text = f.read()
        except OSError as e:
            raise InputError(f"cannot read phoneme file: {e}")
    ids = []
    for tok in text.split():
        try:
            ids.append(int(tok))
        except ValueError:
            raise InputError(f"phoneme id {tok!r} is not an integer")
    if not ids:
        raise InputError("no phoneme ids given")
    return ids


def _parse_lengths(arg):
    if ":" in arg:
        parts = arg.split(":")
        if len(parts) != 3:
            raise InputError(f"--lengths range must be start:stop:step, got {arg!r}")
        try:
            start, stop, step = (int(x) for x in parts)
        except ValueError:
            raise InputError(f"--lengths must be integers, got {arg!r}")
        if start < 1 or stop < start or step < 1:
            raise InputError(f"--lengths range {arg!r} is not increasing")
        return list(range(start, stop + 1, step))
    try:
        lengths = [int(x) for x in arg.split(",") if x]
    except ValueError:
        raise InputError(f"--lengths must be integers, got {arg!r}")
    if not lengths or any(n < 1 for n in lengths):
        raise InputError("--lengths values must be positive")
    return lengths


def cmd_genmodel(args):
    arch = ArchConfig(vocab_size=args.vocab_size, r=args.r)
    bundle = genmodel(args.seed, arch)
    save_model(bundle, args.out)
    size = os.path.getsize(args.out)
    print(f"wrote {args.out}: {len(bundle.tensors)} tensors, {size} bytes, "
          f"seed={args.seed}")
    return EXIT_OK


def cmd_synth(args):
    bundle = _load_bundle(args.model)
    overrides = {}
    if args.r is not None:
        overrides["r"] = args.r
    if args.stop_threshold is not None:
        overrides["stop_threshold"] = args.stop_threshold
    if args.max_steps is not None:
        overrides["max_steps"] = args.max_steps
    arch = replace(bundle.arch, **overrides) if overrides else bundle.arch
    params = ModelParams.from_tensors(arch, bundle.postnet, bundle.tensors)
    ids = _parse_phonemes(args.phonemes)

    if args.mode == "batch":
        res, vocode_s = bench.measure_batch(ids, params)
        rec = bench.record_batch(0, ids, res, vocode_s, arch.r)
        frames = res.frames
        audio = [render_all(frames)]
        print(f"mode=batch backend={backend.BACKEND} frames={frames.shape[0]} "
              f"steps={res.steps} truncated={res.truncated} "
              f"rtf_acoustic={rec.rtf_acoustic:.4f}")
    else:
        half = receptive_field(bundle.postnet)[1]
        cfg = StreamConfig(chunk_frames=args.chunk, half_window=half)
        sink = CollectSink()
        stats = stream_synthesize(ids, params, cfg, sink,
                                  vocoder=PulseTrainVocoder(),
                                  threaded=args.threaded)
        rec = bench.record_stream(0, ids, stats, arch.r, args.chunk)
        frames = sink.all_frames()
        audio = sink.audio_chunks
        print(f"mode=stream backend={backend.BACKEND} frames={stats.total_frames} "
              f"steps={stats.steps} chunks={stats.n_chunks} "
              f"first_chunk_steps={stats.first_chunk_decoder_steps} "
              f"latency_ms={stats.latency_acoustic_s * 1e3:.2f} "
              f"rtf_acoustic={stats.rtf_acoustic:.4f}")

    if args.wav:
        write_wav(args.wav, audio)
        print(f"wrote {args.wav}")
    if args.csv_stats:
        bench.write_csv([rec], args.csv_stats)
        print(f"wrote {args.csv_stats}")
    return EXIT_OK


def cmd_bench(args):
    bundle = _load_bundle(args.model)
    lengths = _parse_lengths(args.lengths)
    modes = tuple(m for m in args.modes.split(",") if m)
    for m in modes:
        if m not in ("stream", "batch"):
            raise InputError(f"unknown mode {m!r}")
    try:
        r_list = tuple(int(x) for x in args.r_list.split(",") if x)
    except ValueError:
        raise InputError(f"--r-list must be integers, got {args.r_list!r}")
    jobs = int(os.environ.get("STREAMTTS_THREADS", args.jobs))
    records = bench.run_bench(
        bundle, lengths, modes=modes, r_list=r_list, repeats=args.repeats,
        chunk_frames=args.chunk, seed=args.seed,
        frames_per_phoneme=args.frames_per_phoneme, jobs=jobs,
        threaded=args.threaded,
    )
    bench.write_csv(records, args.out)
    print(f"wrote {len(records)} records to {args.out} "
          f"(backend={backend.BACKEND}, jobs={jobs})")
    return EXIT_OK


def cmd_verify(args):
    bundle = _load_bundle(args.model)
    if args.cases < 0:
        raise InputError("--cases must be >= 0")
    if args.cases == 0:
        print("warning: 0 cases requested; nothing verified")
        return EXIT_OK
    results = run_verify(bundle, args.cases, seed=args.seed,
                         half_window=args.half_window, report=print)
    worst = max(results, key=lambda c: c.max_abs_diff)
    bad = [c for c in results if not c.ok]
    print(f"{len(results)} cases, max abs frame difference "
          f"{worst.max_abs_diff:g} (backend={backend.BACKEND})")
    if bad:
        first = bad[0]
        print(f"MISMATCH: case {first.index} differs first at frame "
              f"{first.first_bad_frame}")
        return EXIT_MISMATCH
    print("all cases bit-exact")
    return EXIT_OK


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except SystemExit as e:  # argparse / load failures carry their code
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except (InputError, ConfigError) as e:
        print(f"streamtts: {e}", file=sys.stderr)
        return EXIT_USAGE
    except NumericError as e:
        print(f"streamtts: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
