"""WAV decoding and 48 kHz mono preprocessing.

Decodes PCM WAV (8/16/24/32 bit) with the stdlib, averages channels to
mono and resamples to the 48 kHz rate the encoders expect. Decode
problems raise :class:`AudioDecodeError` with a human-readable reason;
jobs record these per file instead of aborting.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

TARGET_RATE = 48000
MIN_DURATION_SECONDS = 1.0


class AudioDecodeError(ValueError):
    pass


def read_wav(path: Path) -> tuple[np.ndarray, int]:
    """Decode a PCM WAV file to float64 samples in [-1, 1].

    Returns (samples, sample_rate) with samples shaped (frames, channels).
    """
    path = Path(path)
    try:
        if path.stat().st_size == 0:
            raise AudioDecodeError("empty file")
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            frames = fh.getnframes()
            raw = fh.readframes(frames)
    except wave.Error as exc:
        raise AudioDecodeError(f"not a decodable WAV file: {exc}") from None
    except EOFError:
        raise AudioDecodeError("truncated WAV file") from None
    if frames == 0:
        raise AudioDecodeError("no audio frames")
    if len(raw) != frames * channels * width:
        raise AudioDecodeError("truncated WAV payload")

    if width == 1:
        data = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 2:
        data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 3:
        as_bytes = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        value = as_bytes[:, 0] | (as_bytes[:, 1] << 8) | (as_bytes[:, 2] << 16)
        value = np.where(value >= 1 << 23, value - (1 << 24), value)
        data = value.astype(np.float64) / float(1 << 23)
    elif width == 4:
        data = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)
    else:
        raise AudioDecodeError(f"unsupported sample width: {width} bytes")
    return data.reshape(-1, channels), rate


def downmix(samples: np.ndarray) -> np.ndarray:
    """Average channels to mono."""
    return samples.mean(axis=1)


def resample_to_target(mono: np.ndarray, rate: int, target: int = TARGET_RATE) -> np.ndarray:
    if rate == target:
        return mono
    g = np.gcd(rate, target)
    return resample_poly(mono, target // g, rate // g)


def load_audio(path: Path) -> np.ndarray:
    """Full preprocessing: decode, duration gate, downmix, resample."""
    samples, rate = read_wav(path)
    duration = samples.shape[0] / rate
    if duration < MIN_DURATION_SECONDS:
        raise AudioDecodeError(f"audio too short: {duration:.3f}s < {MIN_DURATION_SECONDS}s")
    return resample_to_target(downmix(samples), rate)
