"""CEMB writer: the interchange format the analysis toolkit reads.

Little-endian layout: magic ``CEMB``, format version u16 = 1, dimension
u16 = 512, record count u64; each record is a u16-length UTF-8
track_id, a u8-length UTF-8 country code and 512 float32 values.
"""

from __future__ import annotations

import struct
from typing import BinaryIO, Sequence

import numpy as np

MAGIC = b"CEMB"
VERSION = 1
DIM = 512
_HEADER = struct.Struct("<4sHHQ")


def write_records(records: Sequence[tuple[str, str, np.ndarray]], stream: BinaryIO) -> None:
    """Write (track_id, country, vector) triples in order."""
    stream.write(_HEADER.pack(MAGIC, VERSION, DIM, len(records)))
    for track_id, country, vector in records:
        vector = np.asarray(vector, dtype="<f4")
        if vector.shape != (DIM,):
            raise ValueError(f"vector for {track_id!r} has shape {vector.shape}, expected ({DIM},)")
        if not np.isfinite(vector).all():
            raise ValueError(f"vector for {track_id!r} contains non-finite values")
        tid = track_id.encode("utf-8")
        cc = country.encode("utf-8")
        stream.write(struct.pack("<H", len(tid)))
        stream.write(tid)
        stream.write(struct.pack("<B", len(cc)))
        stream.write(cc)
        stream.write(vector.tobytes())
