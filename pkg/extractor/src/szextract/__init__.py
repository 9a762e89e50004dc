"""Offline audio embedding extraction into CEMB files."""

from .audio import AudioDecodeError, load_audio, read_wav
from .encoders import ClapEncoder, SpectralProjectionEncoder, build_encoder
from .job import ExtractionJob, JobResult, ManifestError, load_job, parse_manifest, run_job

__version__ = "0.1.0"
