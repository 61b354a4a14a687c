"""Streaming inference engine for an attention-based acoustic model.

Decodes r frames per autoregressive step, refines buffered chunks with a
receptive-field-exact convolutional post-net, and emits audio while the
decoder is still running; streamed output is bit-identical to a
full-sequence pass.
"""

from .backend import BACKEND, available_backends
from .errors import (ConfigError, InputError, LogicError, ModelFormatError,
                     NumericError, StreamTTSError)
from .model import (ArchConfig, BatchResult, ModelParams, decoder_step,
                    encode, run_batch, should_stop)
from .modelio import ModelBundle, genmodel, load_model, save_model
from .postnet import PostnetConfig, postnet_forward, receptive_field, refine_chunk
from .streaming import (ChunkPlan, CollectSink, FrameBuffer, StreamConfig,
                        StreamStats, latency_model, plan_next_chunk,
                        stream_synthesize)
from .vocoder import SAMPLE_RATE, AudioChunk, PulseTrainVocoder, write_wav

__version__ = "0.1.0"

__all__ = [
    "ArchConfig", "AudioChunk", "BACKEND", "BatchResult", "ChunkPlan",
    "CollectSink", "ConfigError", "FrameBuffer", "InputError", "LogicError",
    "ModelBundle", "ModelFormatError", "ModelParams", "NumericError",
    "PostnetConfig", "PulseTrainVocoder", "SAMPLE_RATE", "StreamConfig",
    "StreamStats", "StreamTTSError", "available_backends", "decoder_step",
    "encode", "genmodel", "latency_model", "load_model", "plan_next_chunk",
    "postnet_forward", "receptive_field", "refine_chunk", "run_batch",
    "save_model", "should_stop", "stream_synthesize", "write_wav",
]
