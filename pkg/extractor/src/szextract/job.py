"""Extraction jobs: manifest in, CEMB out, with per-track caching.

A job file is a flat ``key = value`` document pinning the audio
directory, the manifest, the output path, the cache directory and the
encoder (plus checkpoint/revision for pretrained encoders). Every
unique track is encoded once; duplicate manifest rows reuse the cached
vector, and a warm cache reproduces a cold run bit for bit. Per-file
decode failures are recorded and skipped; the job itself keeps going.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .audio import AudioDecodeError, load_audio
from .cemb import write_records
from .encoders import build_encoder

MANIFEST_HEADER = ["track_id", "country", "filename"]


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestRow:
    track_id: str
    country: str
    filename: str


@dataclass(frozen=True)
class ExtractionJob:
    audio_dir: Path
    manifest: tuple[ManifestRow, ...]
    output: Path
    cache_dir: Path
    encoder: str = "melproj-v1"
    checkpoint: str | None = None
    revision: str | None = None

    @property
    def failures_path(self) -> Path:
        return self.output.with_name(self.output.stem + ".failures.csv")

    @property
    def provenance_path(self) -> Path:
        return self.output.with_name(self.output.stem + ".prov.json")


@dataclass
class JobResult:
    records_written: int
    encoder_calls: int
    cache_hits: int
    failures: list[tuple[str, str]] = field(default_factory=list)


def _valid_country(code: str) -> bool:
    return code == "GLOBAL" or (len(code) == 2 and all("A" <= ch <= "Z" for ch in code))


def parse_manifest(stream) -> tuple[ManifestRow, ...]:
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError("line 1: missing header") from None
    if header != MANIFEST_HEADER:
        raise ManifestError(f"line 1: expected header {','.join(MANIFEST_HEADER)!r}")
    rows: list[ManifestRow] = []
    seen: set[tuple[str, str]] = set()
    for row in reader:
        line = reader.line_num
        if len(row) != 3:
            raise ManifestError(f"line {line}: expected 3 columns, got {len(row)}")
        track_id, country, filename = (v.strip() for v in row)
        if not track_id:
            raise ManifestError(f"line {line}: empty track_id")
        if not _valid_country(country):
            raise ManifestError(f"line {line}: invalid country code {country!r}")
        if not filename:
            raise ManifestError(f"line {line}: empty filename")
        key = (track_id, country)
        if key in seen:
            raise ManifestError(f"line {line}: duplicate (track_id, country) pair {key!r}")
        seen.add(key)
        rows.append(ManifestRow(track_id, country, filename))
    return tuple(rows)


def load_job(path: Path, overrides: dict | None = None) -> ExtractionJob:
    """Read a job file; relative paths resolve against its directory."""
    path = Path(path)
    values: dict = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path.name}:{lineno}: expected 'key = value'")
        key, _, text = line.partition("=")
        key, text = key.strip(), text.strip()
        if key not in ("audio_dir", "manifest", "output", "cache_dir",
                       "encoder", "checkpoint", "revision"):
            raise ValueError(f"{path.name}:{lineno}: unknown job key {key!r}")
        if key in values:
            raise ValueError(f"{path.name}:{lineno}: duplicate key {key!r}")
        values[key] = text
    if overrides:
        values.update({k: str(v) for k, v in overrides.items() if v is not None})
    missing = [k for k in ("audio_dir", "manifest", "output", "cache_dir") if k not in values]
    if missing:
        raise ValueError(f"job file must set: {', '.join(missing)}")

    def respath(text: str) -> Path:
        p = Path(text)
        return p if p.is_absolute() else path.parent / p

    with open(respath(values["manifest"]), "rb") as fh:
        manifest = parse_manifest(fh)
    return ExtractionJob(
        audio_dir=respath(values["audio_dir"]),
        manifest=manifest,
        output=respath(values["output"]),
        cache_dir=respath(values["cache_dir"]),
        encoder=values.get("encoder", "melproj-v1"),
        checkpoint=values.get("checkpoint") or None,
        revision=values.get("revision") or None,
    )


def _cache_file(job: ExtractionJob, track_id: str) -> Path:
    digest = hashlib.sha256(f"{job.encoder}\n{track_id}".encode("utf-8")).hexdigest()[:32]
    return job.cache_dir / f"{digest}.npy"


def run_job(job: ExtractionJob, encoder=None) -> JobResult:
    """Encode every unique track once and emit one record per manifest row."""
    missing = sorted(
        {row.filename for row in job.manifest if not (job.audio_dir / row.filename).is_file()}
    )
    if missing:
        raise ManifestError("manifest references missing audio files: " + ", ".join(missing))
    if encoder is None:
        encoder = build_encoder(job.encoder, job.checkpoint, job.revision)
    job.cache_dir.mkdir(parents=True, exist_ok=True)

    result = JobResult(records_written=0, encoder_calls=0, cache_hits=0)
    vectors: dict[str, np.ndarray | None] = {}
    failed_files: dict[str, str] = {}
    records: list[tuple[str, str, np.ndarray]] = []
    for row in job.manifest:
        if row.track_id in vectors:
            if vectors[row.track_id] is not None:
                result.cache_hits += 1
        else:
            cached = _cache_file(job, row.track_id)
            if cached.is_file():
                vectors[row.track_id] = np.load(cached)
                result.cache_hits += 1
            else:
                try:
                    audio = load_audio(job.audio_dir / row.filename)
                except AudioDecodeError as exc:
                    vectors[row.track_id] = None
                    failed_files.setdefault(row.filename, str(exc))
                    continue
                vector = encoder.embed(audio)
                result.encoder_calls += 1
                np.save(cached, vector)
                vectors[row.track_id] = vector
        vector = vectors[row.track_id]
        if vector is not None:
            records.append((row.track_id, row.country, vector))

    result.failures = sorted(failed_files.items())
    with open(job.output, "wb") as fh:
        write_records(records, fh)
    result.records_written = len(records)

    failure_lines = ["filename,reason"] + [f"{name},{reason}" for name, reason in result.failures]
    job.failures_path.write_text("\n".join(failure_lines) + "\n", encoding="utf-8")
    provenance = {
        "encoder": job.encoder,
        "checkpoint": job.checkpoint,
        "revision": job.revision,
        "sample_rate": 48000,
        "records_written": result.records_written,
        "encoder_calls": result.encoder_calls,
        "cache_hits": result.cache_hits,
        "failure_count": len(result.failures),
    }
    job.provenance_path.write_text(
        json.dumps(provenance, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return result
