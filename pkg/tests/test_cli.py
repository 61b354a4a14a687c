import numpy as np
import pytest

from streamtts import bench, cli
from streamtts.modelio import load_model


@pytest.fixture(scope="module")
def gen_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "gen.sttsm"
    assert cli.main(["genmodel", "--out", str(path), "--seed", "3",
                     "--vocab-size", "16", "--r", "7"]) == cli.EXIT_OK
    return str(path)


def test_genmodel_writes_loadable_container(gen_file):
    bundle = load_model(gen_file)
    assert bundle.arch.vocab_size == 16
    assert bundle.arch.r == 7


def test_usage_errors_exit_1(model_file):
    assert cli.main([]) == cli.EXIT_USAGE
    assert cli.main(["synth", "--model", model_file]) == cli.EXIT_USAGE
    assert cli.main(["synth", "--model", model_file, "--phonemes", "1",
                     "--no-such-flag"]) == cli.EXIT_USAGE
    assert cli.main(["frobnicate"]) == cli.EXIT_USAGE


def test_missing_model_exits_2(tmp_path, capsys):
    code = cli.main(["synth", "--model", str(tmp_path / "nope.sttsm"),
                     "--phonemes", "1 2 3"])
    assert code == cli.EXIT_LOAD
    assert "cannot load model" in capsys.readouterr().err


def test_corrupt_model_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.sttsm"
    bad.write_bytes(b"definitely not a model container")
    code = cli.main(["verify", "--model", str(bad), "--cases", "1"])
    assert code == cli.EXIT_LOAD
    assert "bad magic" in capsys.readouterr().err


def test_bad_phonemes_exit_1(model_file, capsys):
    assert cli.main(["synth", "--model", model_file,
                     "--phonemes", "1 two 3"]) == cli.EXIT_USAGE
    assert "not an integer" in capsys.readouterr().err
    assert cli.main(["synth", "--model", model_file,
                     "--phonemes", "  "]) == cli.EXIT_USAGE
    # in-range ids are 0..63 for the default vocabulary
    assert cli.main(["synth", "--model", model_file,
                     "--phonemes", "999"]) == cli.EXIT_USAGE


def test_synth_stream_and_batch_audio_identical(model_file, tmp_path, capsys):
    args = ["--model", model_file, "--phonemes", "1 2 3 4 5",
            "--max-steps", "24", "--stop-threshold", "2.0"]
    wav_s = tmp_path / "s.wav"
    wav_b = tmp_path / "b.wav"
    assert cli.main(["synth", *args, "--mode", "stream",
                     "--wav", str(wav_s)]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "mode=stream" in out and "first_chunk_steps=22" in out
    assert cli.main(["synth", *args, "--mode", "batch",
                     "--wav", str(wav_b)]) == cli.EXIT_OK
    assert "mode=batch" in capsys.readouterr().out
    assert wav_s.read_bytes() == wav_b.read_bytes()


def test_synth_threaded_audio_identical(model_file, tmp_path):
    args = ["--model", model_file, "--phonemes", "7 8 9",
            "--max-steps", "30", "--stop-threshold", "2.0"]
    a = tmp_path / "a.wav"
    b = tmp_path / "b.wav"
    assert cli.main(["synth", *args, "--wav", str(a)]) == cli.EXIT_OK
    assert cli.main(["synth", *args, "--threaded", "--wav", str(b)]) == cli.EXIT_OK
    assert a.read_bytes() == b.read_bytes()


def test_synth_r_override_changes_first_chunk_steps(model_file, capsys):
    args = ["--model", model_file, "--phonemes", "1 2 3",
            "--max-steps", "15", "--stop-threshold", "2.0"]
    assert cli.main(["synth", *args, "--r", "10"]) == cli.EXIT_OK
    assert "first_chunk_steps=11" in capsys.readouterr().out


def test_synth_csv_stats_columns(model_file, tmp_path):
    csv_path = tmp_path / "stats.csv"
    # 24 steps x 5 frames = 120 frames, enough to fill chunk + lookahead
    assert cli.main(["synth", "--model", model_file, "--phonemes", "1 2",
                     "--max-steps", "24", "--stop-threshold", "2.0",
                     "--csv-stats", str(csv_path)]) == cli.EXIT_OK
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == ",".join(bench.COLUMNS)
    assert len(lines) == 2
    row = dict(zip(bench.COLUMNS, lines[1].split(",")))
    assert row["mode"] == "stream"
    assert int(row["first_chunk_steps"]) == 22


def test_synth_phonemes_from_file(model_file, tmp_path, capsys):
    plist = tmp_path / "ids.txt"
    plist.write_text("1 2 3\n4 5\n")
    assert cli.main(["synth", "--model", model_file,
                     "--phonemes", f"@{plist}", "--max-steps", "8",
                     "--stop-threshold", "2.0"]) == cli.EXIT_OK
    assert "steps=8" in capsys.readouterr().out


def test_bench_row_count_and_exit(model_file, tmp_path, capsys):
    out = tmp_path / "bench.csv"
    code = cli.main(["bench", "--model", model_file, "--lengths", "4,8",
                     "--modes", "stream", "--r-list", "5,10",
                     "--repeats", "2", "--out", str(out)])
    assert code == cli.EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert lines[0] == ",".join(bench.COLUMNS)
    assert len(lines) == 1 + 2 * 2 * 2  # lengths x r values x repeats
    assert "wrote 8 records" in capsys.readouterr().out


def test_bench_lengths_range_spec(model_file, tmp_path):
    out = tmp_path / "bench.csv"
    code = cli.main(["bench", "--model", model_file, "--lengths", "2:6:2",
                     "--modes", "batch", "--out", str(out)])
    assert code == cli.EXIT_OK
    rows = out.read_text().strip().splitlines()[1:]
    assert [r.split(",")[1] for r in rows] == ["2", "4", "6"]
    assert all(r.split(",")[5] == "0" for r in rows)  # batch: no chunks


def test_bench_rejects_bad_args(model_file, tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert cli.main(["bench", "--model", model_file, "--modes", "warp",
                     "--out", out]) == cli.EXIT_USAGE
    assert "unknown mode" in capsys.readouterr().err
    assert cli.main(["bench", "--model", model_file, "--lengths", "9:1:2",
                     "--out", out]) == cli.EXIT_USAGE
    assert cli.main(["bench", "--model", model_file, "--lengths", "a,b",
                     "--out", out]) == cli.EXIT_USAGE


def test_bench_threads_env_override(model_file, tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("STREAMTTS_THREADS", "2")
    out = tmp_path / "bench.csv"
    code = cli.main(["bench", "--model", model_file, "--lengths", "3",
                     "--modes", "stream", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert "jobs=2" in capsys.readouterr().out


def test_verify_ok_exit_0(model_file, capsys):
    code = cli.main(["verify", "--model", model_file, "--cases", "2",
                     "--seed", "1"])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "all cases bit-exact" in out
    assert out.count("case ") >= 2


def test_verify_zero_cases_warns(model_file, capsys):
    assert cli.main(["verify", "--model", model_file, "--cases", "0"]) == cli.EXIT_OK
    assert "nothing verified" in capsys.readouterr().out
    assert cli.main(["verify", "--model", model_file, "--cases", "-1"]) \
        == cli.EXIT_USAGE


def test_verify_wrong_half_window_exits_4(model_file, capsys):
    # seed 0's first case spans several chunks, where starved context shows
    code = cli.main(["verify", "--model", model_file, "--cases", "1",
                     "--seed", "0", "--half-window", "9"])
    assert code == cli.EXIT_MISMATCH
    out = capsys.readouterr().out
    assert "MISMATCH" in out and "FAIL" in out
