import numpy as np
import pytest

from streamtts import backend
from streamtts.model import ArchConfig
from streamtts.modelio import genmodel, save_model
from streamtts.postnet import PostnetConfig

# Small dims keep per-test decode cost in the milliseconds; frame_dim and the
# overall wiring stay the same as the full-size configuration.
TINY_ARCH = dict(
    vocab_size=12,
    embed_dim=16,
    enc_rnn_dim=8,
    attn_rnn_dim=16,
    dec_lstm_dim=24,
    n_mixtures=3,
    r=2,
)
TINY_POSTNET = dict(n_layers=3, kernel_size=3, hidden_channels=8)


@pytest.fixture(scope="session")
def tiny_arch():
    return ArchConfig(**TINY_ARCH)


@pytest.fixture(scope="session")
def tiny_pcfg():
    return PostnetConfig(**TINY_POSTNET)


@pytest.fixture(scope="session")
def tiny_bundle(tiny_arch, tiny_pcfg):
    return genmodel(11, arch=tiny_arch, pcfg=tiny_pcfg)


@pytest.fixture(scope="session")
def tiny_params(tiny_bundle):
    return tiny_bundle.params()


@pytest.fixture(scope="session")
def full_bundle():
    return genmodel(0)


@pytest.fixture(scope="session")
def full_params(full_bundle):
    return full_bundle.params()


@pytest.fixture(scope="session")
def model_file(full_bundle, tmp_path_factory):
    path = tmp_path_factory.mktemp("models") / "model.sttsm"
    save_model(full_bundle, str(path))
    return str(path)


@pytest.fixture(params=backend.available_backends())
def kernel_mod(request):
    """Each available kernel backend in turn."""
    return backend.load_backend(request.param)


def rand_f32(rng, shape, scale=1.0):
    return (rng.standard_normal(shape) * scale).astype(np.float32)
