"""Audio encoders producing 512-dimensional embeddings.

Two encoders are available:

* ``melproj-v1``: a self-contained spectral encoder: a 64-band log-mel
  summary projected to 512 dimensions through a fixed seeded random
  matrix. No model download, bit-for-bit deterministic; the default for
  offline runs and tests.
* ``clap``: a wrapper around a pretrained contrastive language-audio
  checkpoint via ``transformers``. The checkpoint directory and
  revision are pinned in the job file and echoed into the provenance
  sidecar.

Both consume mono float64 audio at 48 kHz and return finite float32
vectors of dimension 512.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
from scipy.signal import stft

EMBED_DIM = 512
_MEL_BANDS = 64
_NPERSEG = 2048
_PROJECTION_SEED = 0x5A17


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_bands: int, n_fft_bins: int, rate: int) -> np.ndarray:
    """Triangular mel filters over the positive-frequency STFT bins."""
    freqs = np.linspace(0.0, rate / 2.0, n_fft_bins)
    edges = _mel_to_hz(np.linspace(_hz_to_mel(0.0), _hz_to_mel(rate / 2.0), n_bands + 2))
    bank = np.zeros((n_bands, n_fft_bins))
    for b in range(n_bands):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        rising = (freqs - lo) / (mid - lo)
        falling = (hi - freqs) / (hi - mid)
        bank[b] = np.clip(np.minimum(rising, falling), 0.0, None)
    return bank


class SpectralProjectionEncoder:
    """Deterministic log-mel statistics behind a fixed random projection."""

    name = "melproj-v1"

    def __init__(self):
        self._bank = mel_filterbank(_MEL_BANDS, _NPERSEG // 2 + 1, 48000)
        rng = np.random.default_rng(_PROJECTION_SEED)
        features = 3 * _MEL_BANDS
        self._projection = rng.standard_normal((EMBED_DIM, features)) / math.sqrt(features)

    def embed(self, mono_48k: np.ndarray) -> np.ndarray:
        _, _, spec = stft(mono_48k, fs=48000, nperseg=_NPERSEG, noverlap=_NPERSEG // 2)
        power = np.abs(spec) ** 2
        logmel = np.log10(self._bank @ power + 1e-10)
        delta = np.abs(np.diff(logmel, axis=1)) if logmel.shape[1] > 1 else np.zeros_like(logmel)
        features = np.concatenate(
            [logmel.mean(axis=1), logmel.std(axis=1), delta.mean(axis=1)]
        )
        features = (features - features.mean()) / (features.std() + 1e-12)
        vector = self._projection @ features
        norm = np.linalg.norm(vector)
        if norm > 0:
            vector = vector / norm
        return vector.astype(np.float32)


class ClapEncoder:
    """Pretrained contrastive audio-text encoder (inference only)."""

    name = "clap"

    def __init__(self, checkpoint: str | Path, revision: str | None = None):
        try:
            import torch
            from transformers import ClapModel, ClapProcessor
        except ImportError as exc:
            raise RuntimeError(
                "the clap encoder needs the optional 'clap' extra (transformers + torch)"
            ) from exc
        self._torch = torch
        self.checkpoint = str(checkpoint)
        self.revision = revision
        self._model = ClapModel.from_pretrained(self.checkpoint, revision=revision)
        self._model.eval()
        self._processor = ClapProcessor.from_pretrained(self.checkpoint, revision=revision)

    def embed(self, mono_48k: np.ndarray) -> np.ndarray:
        inputs = self._processor(
            audios=mono_48k.astype(np.float32), sampling_rate=48000, return_tensors="pt"
        )
        with self._torch.no_grad():
            vector = self._model.get_audio_features(**inputs)[0].cpu().numpy()
        if vector.shape != (EMBED_DIM,):
            raise RuntimeError(f"encoder returned dimension {vector.shape}, expected {EMBED_DIM}")
        return vector.astype(np.float32)


def build_encoder(name: str, checkpoint: str | None = None, revision: str | None = None):
    if name == SpectralProjectionEncoder.name:
        return SpectralProjectionEncoder()
    if name == ClapEncoder.name:
        if not checkpoint:
            raise ValueError("the clap encoder requires a checkpoint path")
        return ClapEncoder(checkpoint, revision)
    raise ValueError(f"unknown encoder: {name!r}")
