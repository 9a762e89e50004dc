import io

import pytest

from soundzones.zones import (
    CultureZone,
    ZONE_ORDER,
    ZoneMappingError,
    load_default_mapping,
    load_mapping,
    map_country,
    save_mapping,
    zone_labels,
)

# every country named in the cluster-assignment roster that the default
# mapping must cover (ISO alpha-2)
ROSTER = [
    "AR", "CO", "ES", "EC", "CL", "PE",
    "US", "GB", "CA", "DE", "SE", "NL",
    "EG", "SA", "IN",
    "ZW", "UG", "NG", "KE", "ZA",
    "RU", "UA", "PL", "EE",
    "KR", "JP",
    "IT", "PT", "FR", "RO", "TR", "IL",
    "FI", "IS", "IE", "ID",
    "BR", "MX", "GT", "NI", "BO",
]


def stream(text: str) -> io.BytesIO:
    return io.BytesIO(text.encode("utf-8"))


class TestLoadMapping:
    def test_single_row_without_header(self):
        mapping = load_mapping(stream("US,EnglishSpeaking\n"))
        assert mapping.entries == {"US": CultureZone.ENGLISH_SPEAKING}

    def test_header_is_optional(self):
        mapping = load_mapping(stream("country,zone\nUS,EnglishSpeaking\n"))
        assert len(mapping.entries) == 1

    def test_duplicate_country_rejected(self):
        text = "US,EnglishSpeaking\nUS,Confucian\n"
        with pytest.raises(ZoneMappingError, match="line 2.*duplicate"):
            load_mapping(stream(text))

    def test_unknown_zone_rejected(self):
        with pytest.raises(ZoneMappingError, match="line 1.*Nordic"):
            load_mapping(stream("FI,Nordic\n"))

    def test_global_is_unmappable(self):
        with pytest.raises(ZoneMappingError, match="GLOBAL"):
            load_mapping(stream("GLOBAL,Confucian\n"))

    def test_bad_column_count(self):
        with pytest.raises(ZoneMappingError, match="line 1.*columns"):
            load_mapping(stream("US,EnglishSpeaking,extra\n"))

    def test_roundtrip(self):
        original = load_default_mapping()
        again = load_mapping(io.BytesIO(save_mapping(original)))
        assert again == original


class TestDefaultMapping:
    def test_covers_full_roster(self):
        mapping = load_default_mapping()
        missing = [c for c in ROSTER if c not in mapping.entries]
        assert missing == []

    def test_known_assignments(self):
        mapping = load_default_mapping()
        assert map_country(mapping, "KR") is CultureZone.CONFUCIAN
        assert map_country(mapping, "US") is CultureZone.ENGLISH_SPEAKING

    def test_all_eight_zones_used(self):
        mapping = load_default_mapping()
        assert set(mapping.entries.values()) == set(CultureZone)


class TestMapCountry:
    def test_unmapped_code_errors(self):
        mapping = load_default_mapping()
        with pytest.raises(ZoneMappingError, match="ZZ"):
            map_country(mapping, "ZZ")


class TestZoneLabels:
    def test_empty_input(self):
        assert zone_labels(load_default_mapping(), []) == []

    def test_order_preserved(self):
        labels = zone_labels(load_default_mapping(), ["US", "KR"])
        assert labels == [CultureZone.ENGLISH_SPEAKING, CultureZone.CONFUCIAN]

    def test_global_errors(self):
        with pytest.raises(ZoneMappingError, match="GLOBAL"):
            zone_labels(load_default_mapping(), ["US", "GLOBAL"])

    def test_aggregates_all_missing(self):
        with pytest.raises(ZoneMappingError, match="XX.*YY"):
            zone_labels(load_default_mapping(), ["XX", "US", "YY"])

    def test_length_matches(self):
        mapping = load_default_mapping()
        codes = sorted(mapping.entries)[:10]
        assert len(zone_labels(mapping, codes)) == 10


def test_zone_enum_is_closed_and_ordered():
    assert len(CultureZone) == 8
    assert [z.value for z in ZONE_ORDER] == [
        "ProtestantEurope",
        "CatholicEurope",
        "EnglishSpeaking",
        "LatinAmerica",
        "Confucian",
        "WestSouthAsia",
        "OrthodoxEurope",
        "AfricanIslamic",
    ]
