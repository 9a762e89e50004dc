"""Weekly chart ingestion and persistent-track selection.

Charts arrive as CSV with one row per (country, week, track) observation.
A track is considered culturally significant for a country when it stayed
on that country's chart for a minimum number of consecutive weeks; the
top tracks by total views are then kept per country.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import BinaryIO

CHART_HEADER = ["country", "week", "track_id", "title", "artist", "views"]


class ChartFormatError(ValueError):
    """Raised for malformed chart CSV input; messages carry line numbers."""


def is_country_code(code: str) -> bool:
    if code == "GLOBAL":
        return True
    return len(code) == 2 and all("A" <= ch <= "Z" for ch in code)


@dataclass(frozen=True)
class ChartEntry:
    """One weekly chart observation."""

    country: str
    week: int
    track_id: str
    title: str
    artist: str
    views: int

    def __post_init__(self):
        if not is_country_code(self.country):
            raise ValueError(f"invalid country code: {self.country!r}")
        if self.week < 0:
            raise ValueError(f"week must be non-negative, got {self.week}")
        if not self.track_id:
            raise ValueError("track_id must be non-empty")
        if self.views < 0:
            raise ValueError(f"views must be non-negative, got {self.views}")


@dataclass(frozen=True)
class TrackSelection:
    """A track kept for a country, with its chart-persistence summary."""

    country: str
    track_id: str
    total_views: int
    max_run: int

    def __post_init__(self):
        if self.max_run < 1:
            raise ValueError("max_run must be at least 1")


def parse_chart_file(stream: BinaryIO) -> list[ChartEntry]:
    """Parse a chart CSV byte stream into entries, in file order.

    The header must be exactly ``country,week,track_id,title,artist,views``.
    Malformed rows and duplicate (country, week, track_id) keys raise
    :class:`ChartFormatError` naming the offending line.
    """
    text = io.TextIOWrapper(stream, encoding="utf-8", newline="")
    reader = csv.reader(text)
    try:
        header = next(reader)
    except StopIteration:
        raise ChartFormatError("line 1: missing header") from None
    if header != CHART_HEADER:
        raise ChartFormatError(
            f"line 1: expected header {','.join(CHART_HEADER)!r}, got {','.join(header)!r}"
        )
    entries: list[ChartEntry] = []
    seen: set[tuple[str, int, str]] = set()
    for row in reader:
        line = reader.line_num
        if len(row) != len(CHART_HEADER):
            raise ChartFormatError(f"line {line}: expected {len(CHART_HEADER)} columns, got {len(row)}")
        country, week_text, track_id, title, artist, views_text = row
        try:
            week = int(week_text)
        except ValueError:
            raise ChartFormatError(f"line {line}: week is not an integer: {week_text!r}") from None
        try:
            views = int(views_text)
        except ValueError:
            raise ChartFormatError(f"line {line}: views is not an integer: {views_text!r}") from None
        try:
            entry = ChartEntry(country, week, track_id, title, artist, views)
        except ValueError as exc:
            raise ChartFormatError(f"line {line}: {exc}") from None
        key = (entry.country, entry.week, entry.track_id)
        if key in seen:
            raise ChartFormatError(f"line {line}: duplicate chart row for {key!r}")
        seen.add(key)
        entries.append(entry)
    return entries


def longest_consecutive_run(weeks) -> int:
    """Length of the longest run of consecutive integers in ``weeks``."""
    if not weeks:
        raise ValueError("weeks must be non-empty")
    ordered = sorted(set(weeks))
    best = run = 1
    for prev, cur in zip(ordered, ordered[1:]):
        run = run + 1 if cur == prev + 1 else 1
        if run > best:
            best = run
    return best


def select_tracks(
    entries: list[ChartEntry], min_weeks: int = 20, top_n: int = 100
) -> dict[str, list[TrackSelection]]:
    """Select each country's persistent tracks, ranked by total views.

    Per country: keep tracks whose longest consecutive-week run is at
    least ``min_weeks``, order by total views descending (ties broken by
    ascending track_id) and truncate to ``top_n``. Countries whose
    tracks all fail the persistence filter map to an empty list.
    """
    if min_weeks < 1:
        raise ValueError("min_weeks must be at least 1")
    if top_n < 1:
        raise ValueError("top_n must be at least 1")
    weeks: dict[tuple[str, str], set[int]] = {}
    views: dict[tuple[str, str], int] = {}
    for entry in entries:
        key = (entry.country, entry.track_id)
        weeks.setdefault(key, set()).add(entry.week)
        views[key] = views.get(key, 0) + entry.views
    by_country: dict[str, list[TrackSelection]] = {}
    for country, track_id in sorted(weeks):
        by_country.setdefault(country, [])
        run = longest_consecutive_run(weeks[(country, track_id)])
        if run >= min_weeks:
            by_country[country].append(
                TrackSelection(country, track_id, views[(country, track_id)], run)
            )
    for country, selections in by_country.items():
        selections.sort(key=lambda s: (-s.total_views, s.track_id))
        del selections[top_n:]
    return by_country
