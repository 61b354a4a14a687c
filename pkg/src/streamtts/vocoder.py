"""Deterministic pulse-train audio stub honoring the acoustic frame contract.

Stands in for a neural vocoder: each 22-feature frame yields exactly 240
samples (10 ms at 24 kHz).  Synthesis is a click train whose period comes from
the frame's pitch feature and whose amplitude comes from cepstral coefficient
0, crossfaded linearly across each frame from the previous frame's amplitude.
The only state carried between calls is the oscillator phase and that previous
amplitude, which is what makes chunked rendering bit-identical to one-shot
rendering.
"""

import wave
from dataclasses import dataclass

import numpy as np

from .errors import InputError

SAMPLE_RATE = 24000
FRAME_SECONDS = 0.01
SAMPLES_PER_FRAME = int(SAMPLE_RATE * FRAME_SECONDS)  # 240

_CLICK_WIDTH = 8        # samples per excitation pulse
_MIN_PERIOD = 16.0      # clamp so degenerate pitch features stay audible-rate
_MAX_PERIOD = 400.0


@dataclass
class AudioChunk:
    samples: np.ndarray  # int16
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int16)


class PulseTrainVocoder:
    """One instance per stream; feed frames in order, partition freely."""

    def __init__(self):
        self._phase = 0.0      # samples until the next pulse onset
        self._prev_amp = 0.0

    def frames_to_audio(self, frames):
        frames = np.asarray(frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise InputError("vocoder expects a non-empty (n, 22) frame block")
        if not np.all(np.isfinite(frames)):
            raise InputError("vocoder given non-finite frames")
        out = np.empty(frames.shape[0] * SAMPLES_PER_FRAME, dtype=np.int16)
        for i in range(frames.shape[0]):
            seg = self._render_frame(frames[i])
            out[i * SAMPLES_PER_FRAME:(i + 1) * SAMPLES_PER_FRAME] = seg
        return AudioChunk(samples=out)

    def _render_frame(self, frame):
        # amplitude from c0, period from the pitch feature; all math in f64 so
        # the result depends only on frame values and carried state
        amp = float(np.clip(np.expm1(np.float64(frame[0])), 0.0, 1.0))
        period = float(
            np.clip(_MIN_PERIOD * np.exp(np.float64(frame[20])), _MIN_PERIOD,
                    _MAX_PERIOD)
        )
        t = np.arange(SAMPLES_PER_FRAME, dtype=np.float64)
        gain = self._prev_amp + (amp - self._prev_amp) * (
            (t + 1.0) / SAMPLES_PER_FRAME
        )

        sig = np.zeros(SAMPLES_PER_FRAME, dtype=np.float64)
        onset = self._phase
        window = np.hanning(_CLICK_WIDTH)
        while onset < SAMPLES_PER_FRAME:
            start = int(np.ceil(onset))
            stop = min(start + _CLICK_WIDTH, SAMPLES_PER_FRAME)
            if stop > start:
                sig[start:stop] += window[:stop - start]
            onset += period
        self._phase = onset - SAMPLES_PER_FRAME
        self._prev_amp = amp

        pcm = np.clip(sig * gain, -1.0, 1.0) * 32767.0
        return pcm.astype(np.int16)


def render_all(frames):
    """One-shot convenience: fresh vocoder over the whole sequence."""
    return PulseTrainVocoder().frames_to_audio(frames)


def write_wav(path, chunks):
    """RIFF/PCM-16 mono file from AudioChunks (or one chunk)."""
    if isinstance(chunks, AudioChunk):
        chunks = [chunks]
    with wave.open(str(path), "wb") as f:
        f.setnchannels(1)
        f.setsampwidth(2)
        f.setframerate(SAMPLE_RATE)
        for c in chunks:
            f.writeframes(np.ascontiguousarray(c.samples, dtype="<i2").tobytes())
