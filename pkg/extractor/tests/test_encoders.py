import numpy as np
import pytest

from szextract.audio import load_audio
from szextract.encoders import EMBED_DIM, SpectralProjectionEncoder, build_encoder, mel_filterbank

from wavegen import noise_wav, sine_wav


@pytest.fixture(scope="module")
def encoder():
    return SpectralProjectionEncoder()


class TestMelFilterbank:
    def test_shape_and_coverage(self):
        bank = mel_filterbank(64, 1025, 48000)
        assert bank.shape == (64, 1025)
        assert (bank >= 0).all()
        # interior bins are covered by at least one filter
        assert (bank[:, 5:-5].sum(axis=0) > 0).all()


class TestSpectralEncoder:
    def test_shape_finite_unit_norm(self, encoder, tmp_path):
        audio = load_audio(sine_wav(tmp_path / "sine.wav"))
        vector = encoder.embed(audio)
        assert vector.shape == (EMBED_DIM,)
        assert vector.dtype == np.float32
        assert np.isfinite(vector).all()
        assert np.linalg.norm(vector) == pytest.approx(1.0, abs=1e-5)

    def test_deterministic_for_same_bytes(self, encoder, tmp_path):
        path = sine_wav(tmp_path / "sine.wav")
        a = encoder.embed(load_audio(path))
        b = encoder.embed(load_audio(path))
        assert np.array_equal(a, b)

    def test_sine_and_noise_are_distinct(self, encoder, tmp_path):
        sine = encoder.embed(load_audio(sine_wav(tmp_path / "sine.wav")))
        noise = encoder.embed(load_audio(noise_wav(tmp_path / "noise.wav")))
        cosine = float(np.dot(sine, noise))
        assert cosine < 0.99

    def test_different_tones_are_distinct(self, encoder, tmp_path):
        a = encoder.embed(load_audio(sine_wav(tmp_path / "a.wav", freq=440.0)))
        b = encoder.embed(load_audio(sine_wav(tmp_path / "b.wav", freq=1760.0)))
        assert float(np.dot(a, b)) < 0.99


class TestRegistry:
    def test_builds_spectral(self):
        assert build_encoder("melproj-v1").name == "melproj-v1"

    def test_clap_requires_checkpoint(self):
        with pytest.raises(ValueError, match="checkpoint"):
            build_encoder("clap")

    def test_unknown_encoder(self):
        with pytest.raises(ValueError, match="unknown"):
            build_encoder("wav2vec")
