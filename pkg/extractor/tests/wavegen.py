"""Synthetic WAV fixtures for extractor tests (stdlib writer only)."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


def write_wav(path: Path, samples: np.ndarray, rate: int, channels: int = 1) -> Path:
    """Write float samples in [-1, 1] as 16-bit PCM."""
    path = Path(path)
    clipped = np.clip(samples, -1.0, 1.0)
    ints = (clipped * 32767.0).astype("<i2")
    if channels > 1 and ints.ndim == 1:
        ints = np.repeat(ints[:, None], channels, axis=1)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(ints.tobytes())
    return path


def sine_wav(path: Path, seconds: float = 10.0, rate: int = 44100, freq: float = 440.0) -> Path:
    t = np.arange(int(seconds * rate)) / rate
    return write_wav(path, 0.7 * np.sin(2.0 * np.pi * freq * t), rate)


def noise_wav(path: Path, seconds: float = 10.0, rate: int = 22050, seed: int = 7,
              channels: int = 1) -> Path:
    rng = np.random.default_rng(seed)
    samples = 0.5 * rng.uniform(-1.0, 1.0, size=int(seconds * rate))
    return write_wav(path, samples, rate, channels=channels)


def corrupt_wav(path: Path) -> Path:
    Path(path).write_bytes(b"RIFFxxxxWAVEfmt broken")
    return Path(path)


def empty_file(path: Path) -> Path:
    Path(path).write_bytes(b"")
    return Path(path)
