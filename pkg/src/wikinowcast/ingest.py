"""Parsing of hourly pageview ("pagecount") log files.

One gzip file per hour, named ``pagecounts-YYYYMMDD-HH0000.gz``. Each line is
a single request-count record::

    project title requests bytes

with exactly four space-separated fields, LF-terminated. Titles arrive
percent-encoded with underscores for spaces and are compared in encoded form
only; nothing here ever decodes them. Articles with zero requests simply do
not appear in the file.

Malformed lines are never fatal: they are counted and skipped so one bad line
cannot poison an hour. A missing or unreadable hour file becomes an all-zero
HourBatch with ``present=False``; downstream aggregation treats the absent
hour as zero traffic.

All returned objects are plain immutable-by-convention values, safe to hand
between threads; hour files are independent, so callers may fan out over
files and merge batches in any order.
"""

from __future__ import annotations

import gzip
import logging
import re
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path
from urllib.parse import quote

from .errors import LineFormatError

logger = logging.getLogger(__name__)

# Punctuation that passes through percent-encoding untouched, matching the
# conventional article-URL form. "%" is deliberately safe so that encoding an
# already-encoded title changes nothing (log files store encoded titles).
TITLE_SAFE_CHARS = "%!$&'()*+,-./:;=@_~"

_COUNT_RE = re.compile(r"[0-9]+")
_FILENAME_RE = re.compile(r"^pagecounts-(\d{4})(\d{2})(\d{2})-(\d{2})0000\.gz$")


@dataclass(frozen=True, order=True)
class HourStamp:
    """One UTC hour. No time-zone conversion happens anywhere in the pipeline."""

    day: date
    hour: int

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")

    def __str__(self) -> str:
        return f"{self.day.isoformat()} {self.hour:02d}:00"

    @property
    def filename(self) -> str:
        return f"pagecounts-{self.day:%Y%m%d}-{self.hour:02d}0000.gz"


@dataclass(frozen=True)
class RawRecord:
    """One parsed log line: (project, encoded title, requests, bytes served)."""

    project: str
    title: str
    requests: int
    bytes: int

    def to_line(self) -> str:
        """Serialize back to the exact on-disk form, LF-terminated."""
        return f"{self.project} {self.title} {self.requests} {self.bytes}\n"


@dataclass(frozen=True)
class HourBatch:
    """Everything ingested from one hour file.

    counts maps (language, encoded title) -> requests for the titles that were
    kept; totals maps language -> total requests over all parsed records in
    that language, kept titles or not. present is False when the hour file was
    missing or unreadable, in which case counts and totals are empty and the
    hour contributes zeros downstream.
    """

    hour: HourStamp
    present: bool
    counts: dict[tuple[str, str], int] = field(default_factory=dict)
    totals: dict[str, int] = field(default_factory=dict)
    rejected_lines: int = 0


def parse_line(line: str) -> RawRecord:
    """Parse one log line into a RawRecord.

    Raises LineFormatError on a wrong field count, empty project or title, or
    non-numeric count fields. The title is kept exactly as it appears; no
    decoding.
    """
    fields = line.rstrip("\n").split(" ")
    if len(fields) != 4:
        raise LineFormatError(f"expected 4 fields, got {len(fields)}: {line!r}")
    project, title, requests, nbytes = fields
    if not project:
        raise LineFormatError(f"empty project field: {line!r}")
    if not title:
        raise LineFormatError(f"empty title field: {line!r}")
    if not _COUNT_RE.fullmatch(requests) or not _COUNT_RE.fullmatch(nbytes):
        raise LineFormatError(f"non-numeric count fields: {line!r}")
    return RawRecord(project, title, int(requests), int(nbytes))


def encode_title(title: str) -> str:
    """Canonical encoded form of an article title.

    Spaces become underscores, then the UTF-8 bytes of anything outside the
    pass-through set are percent-encoded with uppercase hex. Idempotent on its
    own output, so already-encoded titles are left alone.
    """
    if not title:
        raise ValueError("article title must be non-empty")
    return quote(title.replace(" ", "_"), safe=TITLE_SAFE_CHARS)


def hour_file_path(root: Path | str, hour: HourStamp) -> Path:
    return Path(root) / hour.filename


def hour_from_filename(name: str) -> HourStamp:
    """Recover the HourStamp encoded in a pagecount file name."""
    m = _FILENAME_RE.match(name)
    if m is None:
        raise ValueError(f"not a pagecount file name: {name!r}")
    year, month, day, hour = (int(g) for g in m.groups())
    return HourStamp(date(year, month, day), hour)


def iter_hours(start: date, end: date):
    """Yield every HourStamp from start 00:00 through end 23:00 inclusive."""
    if end < start:
        raise ValueError(f"end date {end} before start date {start}")
    d = start
    while d <= end:
        for h in range(24):
            yield HourStamp(d, h)
        d += timedelta(days=1)


def ingest_hour(
    path: Path | str,
    languages: set[str] | frozenset[str],
    watch_titles: set[tuple[str, str]] | None = None,
) -> HourBatch:
    """Ingest one hour file.

    languages is the allow-list of bare language codes; suffixed project codes
    like "en.m" never match it and are skipped entirely. watch_titles, when
    given, restricts the per-title counts to those (language, encoded title)
    pairs; totals always cover every parsed record of an allowed language so
    normalization sees the whole language's traffic.

    A missing or corrupt file yields present=False with empty maps.
    """
    path = Path(path)
    hour = hour_from_filename(path.name)
    counts: dict[tuple[str, str], int] = {}
    totals: dict[str, int] = {}
    rejected = 0
    try:
        with gzip.open(path, "rb") as fh:
            for raw in fh:
                line = raw.decode("latin-1")
                try:
                    rec = parse_line(line)
                except LineFormatError:
                    rejected += 1
                    continue
                lang = rec.project
                if lang not in languages:
                    continue
                totals[lang] = totals.get(lang, 0) + rec.requests
                key = (lang, rec.title)
                if watch_titles is not None and key not in watch_titles:
                    continue
                counts[key] = counts.get(key, 0) + rec.requests
    except FileNotFoundError:
        logger.warning("hour file missing, treated as zero traffic: %s", path)
        return HourBatch(hour=hour, present=False)
    except (OSError, EOFError, gzip.BadGzipFile) as exc:
        logger.warning("hour file unreadable (%s), treated as missing: %s", exc, path)
        return HourBatch(hour=hour, present=False)
    return HourBatch(
        hour=hour, present=True, counts=counts, totals=totals, rejected_lines=rejected
    )


def ingest_range(
    root: Path | str,
    start: date,
    end: date,
    languages: set[str] | frozenset[str],
    watch_titles: set[tuple[str, str]] | None = None,
):
    """Yield an HourBatch for every hour of the inclusive date range."""
    root = Path(root)
    for hour in iter_hours(start, end):
        yield ingest_hour(hour_file_path(root, hour), languages, watch_titles)
