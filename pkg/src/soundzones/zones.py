"""WVS cultural-zone mapping for country codes.

The eight zones of the World Values Survey cultural map form a closed
enumeration. Country assignments ship as a replaceable CSV data file
(``country,zone`` rows) rather than code, so alternative survey waves or
judgment calls on borderline countries can be swapped in without
touching the library. GLOBAL has no zone by construction.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import BinaryIO, Iterable

from .charts import is_country_code

DEFAULT_MAPPING_RESOURCE = "wvs_zones_2023.csv"


class CultureZone(Enum):
    PROTESTANT_EUROPE = "ProtestantEurope"
    CATHOLIC_EUROPE = "CatholicEurope"
    ENGLISH_SPEAKING = "EnglishSpeaking"
    LATIN_AMERICA = "LatinAmerica"
    CONFUCIAN = "Confucian"
    WEST_SOUTH_ASIA = "WestSouthAsia"
    ORTHODOX_EUROPE = "OrthodoxEurope"
    AFRICAN_ISLAMIC = "AfricanIslamic"


_ZONE_BY_NAME = {zone.value: zone for zone in CultureZone}
# canonical column order for contingency tables and reports
ZONE_ORDER = tuple(CultureZone)


class ZoneMappingError(ValueError):
    """Raised for malformed mapping files or unmapped countries."""


@dataclass(frozen=True)
class CultureMapping:
    entries: dict[str, CultureZone]

    def __post_init__(self):
        for code, zone in self.entries.items():
            if code == "GLOBAL" or not is_country_code(code):
                raise ValueError(f"invalid mappable country code: {code!r}")
            if not isinstance(zone, CultureZone):
                raise ValueError(f"zone for {code} is not a CultureZone")


def load_mapping(stream: BinaryIO) -> CultureMapping:
    """Load a ``country,zone`` CSV; a leading header row is optional."""
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    entries: dict[str, CultureZone] = {}
    reader = csv.reader(text)
    for row in reader:
        line = reader.line_num
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 2:
            raise ZoneMappingError(f"line {line}: expected 2 columns, got {len(row)}")
        code, zone_name = row[0].strip(), row[1].strip()
        if line == 1 and (code, zone_name) == ("country", "zone"):
            continue
        if zone_name not in _ZONE_BY_NAME:
            raise ZoneMappingError(f"line {line}: unknown zone {zone_name!r}")
        if code in entries:
            raise ZoneMappingError(f"line {line}: duplicate country {code!r}")
        if code == "GLOBAL" or not is_country_code(code):
            raise ZoneMappingError(f"line {line}: invalid country code {code!r}")
        entries[code] = _ZONE_BY_NAME[zone_name]
    return CultureMapping(entries)


def save_mapping(mapping: CultureMapping) -> bytes:
    """Serialize a mapping back to CSV (sorted, with header)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["country", "zone"])
    for code in sorted(mapping.entries):
        writer.writerow([code, mapping.entries[code].value])
    return out.getvalue().encode("utf-8")


def load_default_mapping() -> CultureMapping:
    """Load the bundled 2023 WVS cultural-map assignments."""
    data = resources.files("soundzones.data").joinpath(DEFAULT_MAPPING_RESOURCE).read_bytes()
    return load_mapping(io.BytesIO(data))


def map_country(mapping: CultureMapping, code: str) -> CultureZone:
    try:
        return mapping.entries[code]
    except KeyError:
        raise ZoneMappingError(f"country {code!r} is not mapped to any zone") from None


def zone_labels(mapping: CultureMapping, countries: Iterable[str]) -> list[CultureZone]:
    """Zones aligned index-for-index with ``countries``.

    Unmapped codes (including GLOBAL, which has no zone) are collected
    and reported together.
    """
    codes = list(countries)
    missing = [c for c in codes if c not in mapping.entries]
    if missing:
        raise ZoneMappingError(f"countries not mapped to any zone: {', '.join(missing)}")
    return [mapping.entries[c] for c in codes]
