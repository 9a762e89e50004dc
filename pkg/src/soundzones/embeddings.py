"""Embedding storage and country-profile construction.

Embeddings are 512-dimensional vectors keyed by (track_id, country).
The on-disk CEMB format is little-endian binary: magic ``CEMB``,
format version u16, dimension u16, record count u64, then per record a
u16-length track_id, a u8-length country code and 512 float32 values.
A text fallback stores one ``track_id<TAB>country<TAB>v1,...,v512``
record per line.

Country profiles are unweighted means over a country's selected tracks;
contrastive rows subtract the GLOBAL profile; standardization z-scores
each column with the population (divisor N) standard deviation.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

import numpy as np

from .charts import is_country_code

EMBED_DIM = 512
CEMB_MAGIC = b"CEMB"
CEMB_VERSION = 1
_HEADER = struct.Struct("<4sHHQ")


class EmbeddingFormatError(ValueError):
    """Raised for malformed embedding files; messages carry a position."""


@dataclass(frozen=True)
class EmbeddingRecord:
    track_id: str
    country: str
    vector: np.ndarray

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float32)
        if vec.shape != (EMBED_DIM,):
            raise ValueError(f"vector must have dimension {EMBED_DIM}, got {vec.shape}")
        if not np.isfinite(vec).all():
            raise ValueError("vector contains non-finite values")
        if not self.track_id:
            raise ValueError("track_id must be non-empty")
        if not is_country_code(self.country):
            raise ValueError(f"invalid country code: {self.country!r}")
        vec.flags.writeable = False
        object.__setattr__(self, "vector", vec)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingRecord):
            return NotImplemented
        return (
            self.track_id == other.track_id
            and self.country == other.country
            and np.array_equal(self.vector, other.vector)
        )


@dataclass(frozen=True)
class CountryProfile:
    """Unweighted mean embedding over one country's selected tracks."""

    country: str
    mean_vector: np.ndarray
    track_count: int

    def __post_init__(self):
        vec = np.asarray(self.mean_vector, dtype=np.float64)
        if vec.shape != (EMBED_DIM,):
            raise ValueError(f"mean_vector must have dimension {EMBED_DIM}")
        if not np.isfinite(vec).all():
            raise ValueError("mean_vector contains non-finite values")
        if self.track_count < 1:
            raise ValueError("track_count must be positive")
        vec.flags.writeable = False
        object.__setattr__(self, "mean_vector", vec)


@dataclass(frozen=True)
class ContrastiveMatrix:
    """Per-country deviation rows from the GLOBAL profile.

    Rows follow ``countries`` order, which must be strictly ascending
    (lexicographic) so every downstream artifact is reproducible.
    """

    countries: tuple[str, ...]
    values: np.ndarray
    standardized: bool

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (len(self.countries), EMBED_DIM):
            raise ValueError(
                f"values must be {len(self.countries)} x {EMBED_DIM}, got {values.shape}"
            )
        if not np.isfinite(values).all():
            raise ValueError("matrix contains non-finite values")
        if any(a >= b for a, b in zip(self.countries, self.countries[1:])):
            raise ValueError("countries must be strictly ascending")
        values.flags.writeable = False
        object.__setattr__(self, "countries", tuple(self.countries))
        object.__setattr__(self, "values", values)


def _read_exact(stream: BinaryIO, size: int, offset: int, what: str) -> bytes:
    data = stream.read(size)
    if len(data) != size:
        raise EmbeddingFormatError(f"byte {offset}: truncated {what}")
    return data


def load_embeddings(stream: BinaryIO) -> list[EmbeddingRecord]:
    """Load CEMB binary or tab-separated text embeddings.

    Records come back in file order. Duplicate (track_id, country) keys,
    dimension mismatches, non-finite values and truncation are errors;
    binary errors name the byte offset, text errors the line number.
    """
    head = stream.read(4)
    if head == CEMB_MAGIC:
        return _load_binary(stream)
    return _load_text(head + stream.read())


def _load_binary(stream: BinaryIO) -> list[EmbeddingRecord]:
    offset = 4
    rest = _read_exact(stream, _HEADER.size - 4, offset, "header")
    version, dim, count = struct.unpack("<HHQ", rest)
    if version != CEMB_VERSION:
        raise EmbeddingFormatError(f"byte 4: unsupported format version {version}")
    if dim != EMBED_DIM:
        raise EmbeddingFormatError(f"byte 6: dimension must be {EMBED_DIM}, got {dim}")
    offset = _HEADER.size
    records: list[EmbeddingRecord] = []
    seen: set[tuple[str, str]] = set()
    for index in range(count):
        start = offset
        (tid_len,) = struct.unpack("<H", _read_exact(stream, 2, offset, "track_id length"))
        offset += 2
        track_id = _read_exact(stream, tid_len, offset, "track_id").decode("utf-8")
        offset += tid_len
        (country_len,) = struct.unpack("<B", _read_exact(stream, 1, offset, "country length"))
        offset += 1
        country = _read_exact(stream, country_len, offset, "country").decode("utf-8")
        offset += country_len
        raw = _read_exact(stream, 4 * EMBED_DIM, offset, "vector")
        offset += 4 * EMBED_DIM
        vector = np.frombuffer(raw, dtype="<f4").astype(np.float32)
        try:
            record = EmbeddingRecord(track_id, country, vector)
        except ValueError as exc:
            raise EmbeddingFormatError(f"byte {start}: record {index}: {exc}") from None
        key = (track_id, country)
        if key in seen:
            raise EmbeddingFormatError(f"byte {start}: duplicate record for {key!r}")
        seen.add(key)
        records.append(record)
    trailing = stream.read(1)
    if trailing:
        raise EmbeddingFormatError(f"byte {offset}: trailing data after {count} records")
    return records


def _load_text(data: bytes) -> list[EmbeddingRecord]:
    records: list[EmbeddingRecord] = []
    seen: set[tuple[str, str]] = set()
    text = data.decode("utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise EmbeddingFormatError(f"line {lineno}: expected 3 tab-separated fields")
        track_id, country, values = parts
        fields = values.split(",")
        if len(fields) != EMBED_DIM:
            raise EmbeddingFormatError(
                f"line {lineno}: dimension must be {EMBED_DIM}, got {len(fields)}"
            )
        try:
            vector = np.array([float(v) for v in fields], dtype=np.float32)
        except ValueError:
            raise EmbeddingFormatError(f"line {lineno}: non-numeric vector entry") from None
        try:
            record = EmbeddingRecord(track_id, country, vector)
        except ValueError as exc:
            raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
        key = (track_id, country)
        if key in seen:
            raise EmbeddingFormatError(f"line {lineno}: duplicate record for {key!r}")
        seen.add(key)
        records.append(record)
    return records


def write_embeddings(records: Sequence[EmbeddingRecord], stream: BinaryIO) -> None:
    """Write records in CEMB binary format, in the given order."""
    stream.write(_HEADER.pack(CEMB_MAGIC, CEMB_VERSION, EMBED_DIM, len(records)))
    for record in records:
        tid = record.track_id.encode("utf-8")
        country = record.country.encode("utf-8")
        stream.write(struct.pack("<H", len(tid)))
        stream.write(tid)
        stream.write(struct.pack("<B", len(country)))
        stream.write(country)
        stream.write(record.vector.astype("<f4").tobytes())


def country_profile(records: Sequence[EmbeddingRecord]) -> CountryProfile:
    """Mean embedding over records that all share one country.

    Uses exact per-dimension summation, so the result is bit-identical
    under any permutation of the records.
    """
    if not records:
        raise ValueError("cannot build a profile from zero records")
    countries = {r.country for r in records}
    if len(countries) > 1:
        raise ValueError(f"records mix countries: {sorted(countries)}")
    n = len(records)
    stacked = np.stack([r.vector for r in records]).astype(np.float64)
    mean = np.array([math.fsum(stacked[:, d]) / n for d in range(EMBED_DIM)])
    return CountryProfile(records[0].country, mean, n)


def contrastive_matrix(
    profiles: Iterable[CountryProfile],
    global_profile: CountryProfile,
    sign: str = "country-minus-global",
) -> ContrastiveMatrix:
    """Stack per-country deviations from the GLOBAL profile.

    Rows are ordered by country code ascending. The default sign is
    country minus global; the opposite convention negates every row,
    which leaves all pairwise distances (and thus clustering) intact.
    """
    if sign not in ("country-minus-global", "global-minus-country"):
        raise ValueError(f"unknown sign convention: {sign!r}")
    if global_profile.country != "GLOBAL":
        raise ValueError("global_profile must have country GLOBAL")
    ordered = sorted(profiles, key=lambda p: p.country)
    if any(p.country == "GLOBAL" for p in ordered):
        raise ValueError("GLOBAL must not appear among the per-country profiles")
    if not ordered:
        raise ValueError("no country profiles given")
    rows = np.stack([p.mean_vector - global_profile.mean_vector for p in ordered])
    if sign == "global-minus-country":
        rows = -rows
    return ContrastiveMatrix(tuple(p.country for p in ordered), rows, standardized=False)


def zscore_columns(values: np.ndarray) -> np.ndarray:
    """Z-score columns with population std; constant columns become 0."""
    values = np.asarray(values, dtype=np.float64)
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    centred = values - mean
    safe = np.where(std == 0.0, 1.0, std)
    result = centred / safe
    result[:, std == 0.0] = 0.0
    return result


def standardize(matrix: ContrastiveMatrix) -> ContrastiveMatrix:
    """Z-score each column of an unstandardized contrastive matrix."""
    if matrix.standardized:
        raise ValueError("matrix is already standardized")
    if len(matrix.countries) < 2:
        raise ValueError("standardization needs at least 2 rows")
    return ContrastiveMatrix(matrix.countries, zscore_columns(matrix.values), standardized=True)
