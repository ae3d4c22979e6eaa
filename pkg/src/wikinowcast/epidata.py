"""Official incidence series and candidate-article tables.

Two small text formats come in from the outside world:

* incidence: a CSV with header ``date,value`` (ISO-8601 dates, non-negative
  case counts) plus a key=value context sidecar next to it (same basename,
  ``.context`` extension) naming disease, location, language and reporting
  resolution;
* candidates: a three-column tab-separated table mapping an English article
  name to its local encoded title per language, ``-`` marking a translation
  that does not exist.

Loaders are strict: unsorted, duplicated, gapped or negative rows are errors
that name the offending row, because silently patching official data is how
nowcasts go quietly wrong. Case values are otherwise opaque scalars; nothing
here rescales or differences them.
"""

from __future__ import annotations

import calendar
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import DataFormatError, MissingInputError
from .ingest import encode_title

RESOLUTIONS = ("daily", "weekly", "monthly")

ABSENT_MARKER = "-"

#: Below this many reporting intervals a fit is not meaningful.
MIN_INTERVALS = 8


@dataclass(frozen=True)
class Context:
    """One (disease, location, language) study context."""

    disease: str
    location: str
    language: str
    resolution: str
    start: date
    end: date

    def __post_init__(self):
        if self.resolution not in RESOLUTIONS:
            raise ValueError(f"unknown resolution: {self.resolution!r}")
        if not self.language:
            raise ValueError("context language must be non-empty")
        if self.start >= self.end:
            raise ValueError(f"context start {self.start} not before end {self.end}")


@dataclass(frozen=True)
class IncidenceSeries:
    """Reported case counts on ascending, non-overlapping intervals."""

    context: Context
    starts: tuple[date, ...]
    lengths: tuple[int, ...]
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if not (len(self.starts) == len(self.lengths) == len(arr)):
            raise ValueError("incidence fields must have equal length")
        if len(arr) and arr.min() < 0:
            raise ValueError("case counts must be non-negative")

    def __len__(self) -> int:
        return len(self.values)

    @property
    def interval_starts(self) -> tuple[date, ...]:
        return self.starts

    @property
    def interval_lengths(self) -> tuple[int, ...]:
        return self.lengths


def sidecar_path(csv_path: Path | str) -> Path:
    """Context sidecar next to an incidence CSV: same basename, .context."""
    return Path(csv_path).with_suffix(".context")


def load_context(path: Path | str) -> dict[str, str]:
    """Read a key=value sidecar into a dict. '#' starts a comment line."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path, "context sidecar")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise DataFormatError(f"{path}:{lineno}: expected key = value")
            key, _, value = stripped.partition("=")
            values[key.strip()] = value.strip()
    return values


def save_context(context: Context, path: Path | str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"disease = {context.disease}\n")
        fh.write(f"location = {context.location}\n")
        fh.write(f"language = {context.language}\n")
        fh.write(f"resolution = {context.resolution}\n")
        fh.write(f"start = {context.start.isoformat()}\n")
        fh.write(f"end = {context.end.isoformat()}\n")


def _interval_length(start: date, resolution: str) -> int:
    if resolution == "daily":
        return 1
    if resolution == "weekly":
        return 7
    return calendar.monthrange(start.year, start.month)[1]


def build_intervals(dates: list[date], resolution: str) -> tuple[tuple[date, ...], tuple[int, ...]]:
    """Turn sorted report dates into (starts, lengths) per the resolution rule.

    Daily rows must be consecutive dates, weekly rows 7 days apart anchored at
    the first date in the file (not ISO weeks), monthly rows anchored at month
    starts with the actual month length. Any gap is an error: a nowcast over
    silently missing reporting periods would be misleading.
    """
    if resolution not in RESOLUTIONS:
        raise DataFormatError(f"unknown resolution: {resolution!r}")
    if not dates:
        raise DataFormatError("incidence file has no data rows")
    lengths = []
    for i, d in enumerate(dates):
        if resolution == "monthly" and d.day != 1:
            raise DataFormatError(
                f"row {i + 1}: monthly series must be anchored at month starts, got {d}"
            )
        length = _interval_length(d, resolution)
        if i + 1 < len(dates):
            expected = d + timedelta(days=length)
            nxt = dates[i + 1]
            if nxt == d:
                raise DataFormatError(f"row {i + 2}: duplicate date {d}")
            if nxt < d:
                raise DataFormatError(f"row {i + 2}: dates not ascending at {nxt}")
            if nxt != expected:
                raise DataFormatError(
                    f"row {i + 2}: gap in {resolution} series, expected {expected}, got {nxt}"
                )
        lengths.append(length)
    return tuple(dates), tuple(lengths)


def load_incidence(
    path: Path | str,
    min_intervals: int = MIN_INTERVALS,
    context: Context | None = None,
) -> IncidenceSeries:
    """Load an incidence CSV and its context sidecar.

    The sidecar may omit start/end, in which case the covered range is taken
    from the rows themselves. Pass context to override the sidecar entirely
    (used by tests and the generator).
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path, "incidence CSV")
    dates: list[date] = []
    values: list[float] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "date,value":
            raise DataFormatError(f"{path}: expected header 'date,value', got {header!r}")
        for lineno, line in enumerate(fh, 2):
            row = line.rstrip("\n")
            if not row:
                continue
            parts = row.split(",")
            if len(parts) != 2:
                raise DataFormatError(f"{path}:{lineno}: expected 2 columns: {row!r}")
            try:
                d = date.fromisoformat(parts[0])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad date: {parts[0]!r}") from None
            try:
                v = float(parts[1])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: bad value: {parts[1]!r}") from None
            if not np.isfinite(v) or v < 0:
                raise DataFormatError(
                    f"{path}:{lineno}: case counts must be finite and non-negative: {row!r}"
                )
            dates.append(d)
            values.append(v)

    if context is None:
        side = load_context(sidecar_path(path))
        for key in ("disease", "location", "language", "resolution"):
            if key not in side:
                raise DataFormatError(f"{sidecar_path(path)}: missing key {key!r}")
        resolution = side["resolution"]
        starts, lengths = build_intervals(dates, resolution)
        first = side.get("start")
        last = side.get("end")
        start = date.fromisoformat(first) if first else starts[0]
        end_default = starts[-1] + timedelta(days=lengths[-1])
        end = date.fromisoformat(last) if last else end_default
        context = Context(
            disease=side["disease"],
            location=side["location"],
            language=side["language"],
            resolution=resolution,
            start=start,
            end=end,
        )
    else:
        starts, lengths = build_intervals(dates, context.resolution)

    if len(starts) < min_intervals:
        raise DataFormatError(
            f"{path}: {len(starts)} intervals, need at least {min_intervals} for a fit"
        )
    return IncidenceSeries(context=context, starts=starts, lengths=lengths, values=np.array(values))


def save_incidence(series: IncidenceSeries, path: Path | str, with_sidecar: bool = True) -> None:
    """Write the canonical CSV form (load then save is byte-stable)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("date,value\n")
        for d, v in zip(series.starts, series.values):
            fh.write(f"{d.isoformat()},{float(v)!r}\n")
    if with_sidecar:
        save_context(series.context, sidecar_path(path))


@dataclass(frozen=True)
class Candidate:
    """One English article name with its local titles per language."""

    english: str
    translations: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CandidateSet:
    """Candidate articles for one disease, in file order."""

    disease: str
    candidates: tuple[Candidate, ...]
    languages: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.candidates)

    def for_language(self, language: str) -> dict[str, str]:
        """english name -> local encoded title, omitting absent translations."""
        out: dict[str, str] = {}
        for cand in self.candidates:
            title = cand.translations.get(language)
            if title is not None:
                out[cand.english] = title
        return out

    def titles_for_language(self, language: str) -> set[str]:
        return set(self.for_language(language).values())


def load_candidates(path: Path | str, disease: str = "") -> CandidateSet:
    """Load a tab-separated english/language/local-title candidate table.

    Local titles must already be in canonical encoded form (encoding them
    again must change nothing); '-' records an absent translation. A repeated
    (english, language) pair is an error.
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path, "candidate table")
    order: list[str] = []
    translations: dict[str, dict[str, str]] = {}
    languages: list[str] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            row = line.rstrip("\n")
            if not row or row.startswith("#"):
                continue
            parts = row.split("\t")
            if len(parts) != 3:
                raise DataFormatError(f"{path}:{lineno}: expected 3 tab-separated columns")
            english, language, title = parts
            if not english or not language:
                raise DataFormatError(f"{path}:{lineno}: empty english name or language")
            key = (english, language)
            if key in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate entry for {english!r} in {language!r}"
                )
            seen.add(key)
            if english not in translations:
                translations[english] = {}
                order.append(english)
            if language not in languages:
                languages.append(language)
            if title == ABSENT_MARKER:
                continue
            if not title:
                raise DataFormatError(
                    f"{path}:{lineno}: empty title, use {ABSENT_MARKER!r} for absent"
                )
            if encode_title(title) != title:
                raise DataFormatError(
                    f"{path}:{lineno}: title not in canonical encoded form: {title!r}"
                )
            translations[english][language] = title
    if not order:
        raise DataFormatError(f"{path}: no candidate rows")
    candidates = tuple(Candidate(e, translations[e]) for e in order)
    return CandidateSet(
        disease=disease or path.stem,
        candidates=candidates,
        languages=tuple(sorted(languages)),
    )


def save_candidates(cands: CandidateSet, path: Path | str) -> None:
    """Write the canonical table: entry order, languages sorted, '-' for absent."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for cand in cands.candidates:
            for language in cands.languages:
                title = cand.translations.get(language, ABSENT_MARKER)
                fh.write(f"{cand.english}\t{language}\t{title}\n")
