"""Model container, deterministic weight generation, synthetic corpus.

Container layout (little-endian throughout):

    bytes 0..8    magic "SSTTSM01"
    bytes 8..12   uint32 header length H
    bytes 12..12+H  UTF-8 JSON: {"version", "arch", "postnet", "tensors":
                    [{"name", "shape", "offset"}, ...]}  (offset in bytes
                    into the payload)
    rest          raw float32 payload, C order per tensor

Weights come from a splitmix64 stream keyed by (seed XOR fnv1a64(tensor
name)), mapped to uniform(-0.05, 0.05).  The mapping is pure integer
arithmetic, so any implementation in any language reproduces the same bytes.
"""

import json
import struct
from dataclasses import dataclass

import numpy as np

from .errors import ModelFormatError
from .model import MAX_R, ArchConfig, ModelParams
from .postnet import PostnetConfig

MAGIC = b"SSTTSM01"
FORMAT_VERSION = 1

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_FNV_BASIS = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def fnv1a64(name):
    h = _FNV_BASIS
    for byte in name.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


def splitmix64(state):
    """(next_state, output) for one step of the splitmix64 generator."""
    state = (state + _GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def _splitmix_block(state0, count):
    # state_i = state0 + (i+1)*gamma lets the whole stream mix in parallel;
    # uint64 wraparound is the intended mod-2^64 arithmetic
    with np.errstate(over="ignore"):
        i = np.arange(1, count + 1, dtype=np.uint64)
        s = np.uint64(state0 & _MASK) + i * np.uint64(_GAMMA)
        z = (s ^ (s >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def tensor_floats(seed, name, count):
    """The first ``count`` uniform(-0.05, 0.05) float32 values for a tensor."""
    state0 = (seed ^ fnv1a64(name)) & _MASK
    z = _splitmix_block(state0, count)
    u = (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
    return (-0.05 + 0.1 * u).astype(np.float32)


def tensor_layout(arch: ArchConfig, pcfg: PostnetConfig):
    """Ordered (name, shape) list; the container serializes in this order."""
    a = arch
    mem = a.memory_dim

    def lin(name, out_d, in_d):
        return [(name + ".weight", (out_d, in_d)), (name + ".bias", (out_d,))]

    def rnn(name, gates, in_d, hid):
        return [
            (name + ".w_x", (gates * hid, in_d)),
            (name + ".w_h", (gates * hid, hid)),
            (name + ".bias", (gates * hid,)),
        ]

    layout = [("embedding", (a.vocab_size, a.embed_dim))]
    layout += lin("enc_prenet1", a.prenet_hidden, a.embed_dim)
    layout += lin("enc_prenet2", a.prenet_out, a.prenet_hidden)
    layout += rnn("enc_gru_fwd", 3, a.prenet_out, a.enc_rnn_dim)
    layout += rnn("enc_gru_bwd", 3, a.prenet_out, a.enc_rnn_dim)
    layout += lin("dec_prenet1", a.prenet_hidden, a.frame_dim)
    layout += lin("dec_prenet2", a.prenet_out, a.prenet_hidden)
    layout += rnn("attn_gru", 3, a.prenet_out + mem, a.attn_rnn_dim)
    layout += lin("attn_fc1", a.attn_rnn_dim, a.attn_rnn_dim)
    layout += lin("attn_fc2", 3 * a.n_mixtures, a.attn_rnn_dim)
    layout += lin("dec_input_proj", a.dec_lstm_dim, a.dec_input_dim)
    layout += rnn("dec_lstm1", 4, a.dec_lstm_dim, a.dec_lstm_dim)
    layout += rnn("dec_lstm2", 4, a.dec_lstm_dim, a.dec_lstm_dim)
    layout += lin("frame_proj", MAX_R * a.frame_dim, a.dec_lstm_dim)
    layout += lin("stop_proj", 1, a.dec_lstm_dim)
    chans = [pcfg.n_channels] + [pcfg.hidden_channels] * (pcfg.n_layers - 1)
    chans += [pcfg.n_channels]
    for i in range(pcfg.n_layers):
        layout.append(
            (f"postnet.conv{i + 1}.weight",
             (chans[i + 1], pcfg.kernel_size, chans[i]))
        )
        layout.append((f"postnet.conv{i + 1}.bias", (chans[i + 1],)))
    return layout


@dataclass
class ModelBundle:
    arch: ArchConfig
    postnet: PostnetConfig
    tensors: dict

    def params(self):
        return ModelParams.from_tensors(self.arch, self.postnet, self.tensors)


def genmodel(seed, arch: ArchConfig = None, pcfg: PostnetConfig = None):
    """Deterministic model: every tensor drawn from its own keyed stream."""
    arch = arch or ArchConfig()
    pcfg = pcfg or PostnetConfig()
    tensors = {}
    for name, shape in tensor_layout(arch, pcfg):
        count = int(np.prod(shape, dtype=np.int64))
        tensors[name] = tensor_floats(seed, name, count).reshape(shape)
    return ModelBundle(arch=arch, postnet=pcfg, tensors=tensors)


def save_model(bundle: ModelBundle, path):
    entries = []
    payload = bytearray()
    for name, shape in tensor_layout(bundle.arch, bundle.postnet):
        arr = np.ascontiguousarray(bundle.tensors[name], dtype="<f4")
        if tuple(arr.shape) != tuple(shape):
            raise ModelFormatError(
                f"tensor '{name}' has shape {arr.shape}, layout wants {shape}"
            )
        entries.append({"name": name, "shape": list(shape),
                        "offset": len(payload)})
        payload += arr.tobytes()
    header = json.dumps({
        "version": FORMAT_VERSION,
        "arch": bundle.arch.to_dict(),
        "postnet": {
            "n_layers": bundle.postnet.n_layers,
            "kernel_size": bundle.postnet.kernel_size,
            "hidden_channels": bundle.postnet.hidden_channels,
            "n_channels": bundle.postnet.n_channels,
        },
        "tensors": entries,
    }).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", len(header)))
        f.write(header)
        f.write(bytes(payload))


def load_model(path):
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != MAGIC:
        raise ModelFormatError("bad magic")
    if len(blob) < 12:
        raise ModelFormatError("truncated header")
    (hlen,) = struct.unpack("<I", blob[8:12])
    if len(blob) < 12 + hlen:
        raise ModelFormatError("truncated header")
    try:
        header = json.loads(blob[12:12 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"unreadable header: {e}") from None
    if header.get("version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported version {header.get('version')}")

    arch = ArchConfig.from_dict(header["arch"])
    pcfg = PostnetConfig(**header["postnet"])
    payload = blob[12 + hlen:]
    expected = {name: shape for name, shape in tensor_layout(arch, pcfg)}

    tensors = {}
    for entry in header["tensors"]:
        name, shape, off = entry["name"], tuple(entry["shape"]), entry["offset"]
        if name not in expected:
            raise ModelFormatError(f"unexpected tensor '{name}'")
        if shape != tuple(expected[name]):
            raise ModelFormatError(
                f"tensor '{name}' shape {shape} does not match "
                f"architecture {tuple(expected[name])}"
            )
        count = int(np.prod(shape, dtype=np.int64))
        if off < 0 or off + 4 * count > len(payload):
            raise ModelFormatError(f"truncated payload for tensor '{name}'")
        arr = np.frombuffer(payload, dtype="<f4", count=count, offset=off)
        tensors[name] = arr.reshape(shape)
    missing = set(expected) - set(tensors)
    if missing:
        raise ModelFormatError(f"missing tensor '{sorted(missing)[0]}'")
    return ModelBundle(arch=arch, postnet=pcfg, tensors=tensors)


def sentence_ids(seed, index, length, vocab_size):
    """Deterministic synthetic phoneme sequence for bench/verify corpora."""
    state0 = (seed ^ fnv1a64(f"corpus.{index}.{length}")) & _MASK
    z = _splitmix_block(state0, length)
    return (z % np.uint64(vocab_size)).astype(np.int64)
