"""Time-series assembly and the article-major series store.

The ingest layer produces hour-keyed batches; modeling wants one contiguous
series per article. This module owns that transposition plus the small series
algebra the models need: per-hour normalization by language traffic, daily
aggregation, day shifting for forecast offsets, alignment onto incidence
reporting intervals, and alias merging.

Normalized (never raw) series feed all downstream modeling: an article's
hourly fraction is its requests divided by the language's total requests that
hour, which cancels global traffic swings and undercounting. Missing hours
stay zero on both sides and contribute fraction 0.

Persisted form: one tab-separated file per language of (title, date, value)
triples sorted by title then date, plus a JSON manifest with the study range
and the hours that were missing.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .errors import DataFormatError, MissingInputError
from .ingest import HourStamp, ingest_range, iter_hours

logger = logging.getLogger(__name__)

STORE_FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"

RAW = "raw"
NORMALIZED = "normalized"


def _freeze(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError("series values must be one-dimensional")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ArticleSeries:
    """Contiguous hourly series for one (language, encoded title).

    kind is "raw" (request counts, zeros where the article or hour was absent)
    or "normalized" (per-hour fraction of the language's traffic, in [0, 1]).
    """

    language: str
    title: str
    start: HourStamp
    values: np.ndarray
    kind: str = RAW

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        if self.kind not in (RAW, NORMALIZED):
            raise ValueError(f"unknown series kind: {self.kind!r}")
        if len(self.values) and np.min(self.values) < 0:
            raise ValueError("series values must be non-negative")
        if self.kind == NORMALIZED and len(self.values) and np.max(self.values) > 1.0:
            raise ValueError("normalized fractions cannot exceed 1")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class LanguageTotals:
    """Per-hour total requests for one language over a contiguous hour range."""

    language: str
    start: HourStamp
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class DailySeries:
    """Contiguous daily series for one article (one value per UTC date)."""

    language: str
    title: str
    start: date
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def end(self) -> date:
        """Last covered date (inclusive)."""
        return self.start + timedelta(days=len(self.values) - 1)

    def dates(self):
        return [self.start + timedelta(days=i) for i in range(len(self.values))]


@dataclass(frozen=True)
class IntervalSeries:
    """A daily series summed onto reporting intervals.

    Boundaries mirror the incidence template one-to-one. covered[i] is False
    when any constituent date of interval i fell outside the daily series;
    such values are NaN and must be excluded pairwise downstream.
    """

    language: str
    title: str
    starts: tuple[date, ...]
    lengths: tuple[int, ...]
    values: np.ndarray
    covered: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _freeze(self.values))
        cov = np.array(self.covered, dtype=bool)
        cov.setflags(write=False)
        object.__setattr__(self, "covered", cov)
        if not (len(self.starts) == len(self.lengths) == len(self.values) == len(cov)):
            raise ValueError("interval series fields must have equal length")

    def __len__(self) -> int:
        return len(self.values)


def normalize(article: ArticleSeries, totals: LanguageTotals) -> ArticleSeries:
    """Per-hour fraction of the language's traffic going to this article.

    Hours with zero total (missing hours, dead languages) get fraction 0.0.
    The two inputs must describe the same language over the same hour range.
    """
    if article.kind != RAW:
        raise ValueError("normalize expects a raw series")
    if article.language != totals.language:
        raise ValueError(
            f"language mismatch: {article.language!r} vs {totals.language!r}"
        )
    if article.start != totals.start or len(article) != len(totals):
        raise ValueError("article and totals cover different hour ranges")
    out = np.zeros(len(article), dtype=float)
    np.divide(article.values, totals.values, out=out, where=totals.values > 0)
    return ArticleSeries(
        language=article.language,
        title=article.title,
        start=article.start,
        values=out,
        kind=NORMALIZED,
    )


def to_daily(series: ArticleSeries) -> DailySeries:
    """Sum each UTC date's 24 hourly values into one daily value.

    The series must start at hour 00 and cover whole days; ingest always
    builds such series. Missing hours are already zeros, so days with gaps
    just sum what is there.
    """
    if series.start.hour != 0:
        raise ValueError("hourly series must start at hour 00 to aggregate by day")
    if len(series) % 24 != 0:
        raise ValueError("hourly series must cover whole days")
    daily = series.values.reshape(-1, 24).sum(axis=1)
    return DailySeries(
        language=series.language,
        title=series.title,
        start=series.start.day,
        values=daily,
    )


def shift_days(series: DailySeries, offset: int) -> DailySeries:
    """Relabel each value from date t to date t + offset.

    A positive offset moves the series later, so traffic observed on day t is
    matched against incidence offset days in the future (a forecast). Dates
    the shifted series no longer covers are simply absent; alignment drops
    intervals that need them.
    """
    return DailySeries(
        language=series.language,
        title=series.title,
        start=series.start + timedelta(days=int(offset)),
        values=series.values,
    )


def align(series: DailySeries, template) -> IntervalSeries:
    """Sum a daily series onto the template's reporting intervals.

    template is anything with interval_starts and interval_lengths (an
    IncidenceSeries). Intervals only partially covered by the daily series are
    flagged covered=False with a NaN value so accidental use fails loudly.
    """
    starts = tuple(template.interval_starts)
    lengths = tuple(template.interval_lengths)
    if not starts:
        raise ValueError("alignment template has no intervals")
    n = len(series.values)
    values = np.full(len(starts), np.nan)
    covered = np.zeros(len(starts), dtype=bool)
    for i, (s, ln) in enumerate(zip(starts, lengths)):
        first = (s - series.start).days
        last = first + ln
        if first >= 0 and last <= n:
            values[i] = series.values[first:last].sum()
            covered[i] = True
    return IntervalSeries(
        language=series.language,
        title=series.title,
        starts=starts,
        lengths=lengths,
        values=values,
        covered=covered,
    )


def merge_aliases(series_list, title: str | None = None) -> DailySeries:
    """Pointwise sum of same-language daily series under one canonical title.

    Used when traffic for one topic is split across redirect aliases; summing
    first and correlating once recovers the whole signal. All members must
    cover the same date range. title defaults to the first member's.
    """
    series_list = list(series_list)
    if not series_list:
        raise ValueError("merge_aliases needs at least one series")
    head = series_list[0]
    total = np.array(head.values, dtype=float)
    for other in series_list[1:]:
        if other.language != head.language:
            raise ValueError(
                f"cannot merge across languages: {head.language!r} vs {other.language!r}"
            )
        if other.start != head.start or len(other) != len(head):
            raise ValueError("alias series cover different date ranges")
        total += other.values
    return DailySeries(
        language=head.language,
        title=title if title is not None else head.title,
        start=head.start,
        values=total,
    )


@dataclass
class SeriesStore:
    """Article-major store of normalized daily series.

    series maps language -> encoded title -> DailySeries (normalized daily
    fractions over the full study range). The manifest data rides along so a
    persisted store can be audited and reloaded.
    """

    start_date: date
    end_date: date
    languages: tuple[str, ...]
    series: dict[str, dict[str, DailySeries]]
    missing_hours: tuple[HourStamp, ...] = ()
    rejected_lines: int = 0

    @property
    def n_days(self) -> int:
        return (self.end_date - self.start_date).days + 1

    def get(self, language: str, title: str) -> DailySeries | None:
        return self.series.get(language, {}).get(title)

    def get_or_zero(self, language: str, title: str) -> DailySeries:
        """Series for a watched title, or an all-zero series if never seen."""
        found = self.get(language, title)
        if found is not None:
            return found
        return DailySeries(
            language=language,
            title=title,
            start=self.start_date,
            values=np.zeros(self.n_days),
        )

    def add(self, series: DailySeries) -> None:
        if len(series) != self.n_days or series.start != self.start_date:
            raise ValueError("series does not span the store's study range")
        self.series.setdefault(series.language, {})[series.title] = series

    # -- persistence ---------------------------------------------------------

    def save(self, directory: Path | str) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        manifest = {
            "format_version": STORE_FORMAT_VERSION,
            "start_date": self.start_date.isoformat(),
            "end_date": self.end_date.isoformat(),
            "languages": list(self.languages),
            "missing_hours": [str(h) for h in self.missing_hours],
            "rejected_lines": self.rejected_lines,
        }
        with open(directory / MANIFEST_NAME, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        for lang in self.languages:
            path = directory / f"series_{lang}.tsv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                for title in sorted(self.series.get(lang, {})):
                    s = self.series[lang][title]
                    d = s.start
                    for v in s.values:
                        fh.write(f"{title}\t{d.isoformat()}\t{float(v)!r}\n")
                        d += timedelta(days=1)

    @classmethod
    def load(cls, directory: Path | str) -> "SeriesStore":
        directory = Path(directory)
        manifest_path = directory / MANIFEST_NAME
        if not manifest_path.exists():
            raise MissingInputError(manifest_path, "store manifest")
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
        if manifest.get("format_version") != STORE_FORMAT_VERSION:
            raise DataFormatError(
                f"unsupported store format: {manifest.get('format_version')!r}"
            )
        start = date.fromisoformat(manifest["start_date"])
        end = date.fromisoformat(manifest["end_date"])
        n_days = (end - start).days + 1
        missing = []
        for text in manifest["missing_hours"]:
            day_part, hour_part = text.split(" ")
            missing.append(HourStamp(date.fromisoformat(day_part), int(hour_part[:2])))
        store = cls(
            start_date=start,
            end_date=end,
            languages=tuple(manifest["languages"]),
            series={lang: {} for lang in manifest["languages"]},
            missing_hours=tuple(missing),
            rejected_lines=int(manifest["rejected_lines"]),
        )
        for lang in store.languages:
            path = directory / f"series_{lang}.tsv"
            if not path.exists():
                raise MissingInputError(path, "store series file")
            current_title = None
            values: list[float] = []
            expected = start
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, 1):
                    parts = line.rstrip("\n").split("\t")
                    if len(parts) != 3:
                        raise DataFormatError(f"{path}:{lineno}: expected 3 columns")
                    title, day_text, value_text = parts
                    day = date.fromisoformat(day_text)
                    if title != current_title:
                        if current_title is not None:
                            store.add(
                                DailySeries(lang, current_title, start, np.array(values))
                            )
                        current_title = title
                        values = []
                        expected = start
                    if day != expected:
                        raise DataFormatError(
                            f"{path}:{lineno}: dates not contiguous from study start"
                        )
                    values.append(float(value_text))
                    expected = day + timedelta(days=1)
            if current_title is not None:
                if len(values) != n_days:
                    raise DataFormatError(
                        f"{path}: series for {current_title!r} does not span the range"
                    )
                store.add(DailySeries(lang, current_title, start, np.array(values)))
        return store


def build_store(
    root: Path | str,
    start: date,
    end: date,
    languages,
    watch_titles: dict[str, set[str]],
) -> SeriesStore:
    """Ingest an hour-file corpus into a normalized daily store.

    watch_titles maps language -> encoded titles to keep. Watched titles never
    seen in the corpus still get (all-zero) series so downstream candidate
    handling can see and drop them explicitly.
    """
    root = Path(root)
    if not root.exists():
        raise MissingInputError(root, "pagecount corpus directory")
    languages = tuple(languages)
    hours = list(iter_hours(start, end))
    n_hours = len(hours)
    index = {h: i for i, h in enumerate(hours)}

    counts = {
        (lang, title): np.zeros(n_hours)
        for lang, titles in watch_titles.items()
        for title in titles
    }
    totals = {lang: np.zeros(n_hours) for lang in languages}
    watch_pairs = {
        (lang, title) for lang, titles in watch_titles.items() for title in titles
    }

    missing: list[HourStamp] = []
    rejected = 0
    for batch in ingest_range(root, start, end, set(languages), watch_pairs):
        i = index[batch.hour]
        if not batch.present:
            missing.append(batch.hour)
            continue
        rejected += batch.rejected_lines
        for lang, total in batch.totals.items():
            totals[lang][i] = total
        for key, value in batch.counts.items():
            if key in counts:
                counts[key][i] = value

    start_hour = HourStamp(start, 0)
    store = SeriesStore(
        start_date=start,
        end_date=end,
        languages=languages,
        series={lang: {} for lang in languages},
        missing_hours=tuple(missing),
        rejected_lines=rejected,
    )
    for (lang, title), values in counts.items():
        raw = ArticleSeries(lang, title, start_hour, values, kind=RAW)
        lang_totals = LanguageTotals(lang, start_hour, totals[lang])
        store.add(to_daily(normalize(raw, lang_totals)))
    if missing:
        logger.warning(
            "%d of %d hour files missing (%.2f%%), treated as zero traffic",
            len(missing), n_hours, 100.0 * len(missing) / n_hours,
        )
    return store
