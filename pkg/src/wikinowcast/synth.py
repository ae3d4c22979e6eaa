"""Synthetic pageview corpus generation with known ground truth.

The generator emits a complete, pipeline-ready study in one directory: hourly
gzip pagecount files in the exact external format, per-language incidence
CSVs with context sidecars, a candidate table, and a truth sidecar recording
the planted parameters. Because the signal gain, lead and noise are chosen,
the corpus is an oracle: the pipeline run on it must recover the planted lead
within a day and the planted article among the top correlates.

Traffic model, per article and day::

    expectation = background_level * weekly(t) [+ gain * incidence(t + lead)]

plus Gaussian noise, truncated at zero and rounded to integer counts. The
weekly profile is a 7-value multiplicative pattern peaking midweek and
dipping on Sunday, like real online activity. A positive lead means the
article's traffic moves before the official incidence does, so a scan should
peak at that positive offset.

Each language also gets a ballast title ("Main_Page", never a candidate) that
tops every hour up to a smooth language-wide total, standing in for the long
tail of unrelated traffic that dominates real logs and giving normalization a
realistic denominator.

One seeded RNG drawn in a fixed order makes generation bit-for-bit
reproducible, including the gzip bytes (fixed header mtime).
"""

from __future__ import annotations

import configparser
import gzip
import json
import logging
import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .epidata import Context, save_candidates, save_context
from .epidata import Candidate, CandidateSet
from .errors import DataFormatError, MissingInputError
from .ingest import encode_title

logger = logging.getLogger(__name__)

#: Midweek-peaked weekly shape, Monday..Sunday, scaled by the amplitude.
WEEKLY_SHAPE = (0.2, 0.6, 1.0, 0.6, 0.2, -0.6, -1.0)

BALLAST_TITLE = "Main_Page"

#: Synthetic bytes-served per request; arbitrary but deterministic.
BYTES_PER_REQUEST = 512

MAX_LEAD_DAYS = 28


def weekly_factors(amplitude: float) -> np.ndarray:
    """Multiplicative weekday factors, Monday first."""
    if not 0.0 <= amplitude < 1.0:
        raise ValueError(f"weekly amplitude must be in [0, 1), got {amplitude}")
    return 1.0 + amplitude * np.array(WEEKLY_SHAPE)


@dataclass(frozen=True)
class SeasonalCurve:
    """Smooth seasonal incidence: baseline + amplitude * (1 + sin)/2."""

    baseline: float = 50.0
    amplitude: float = 400.0
    period_days: float = 60.0
    phase_days: float = 0.0

    def value(self, day_index) -> np.ndarray:
        i = np.asarray(day_index, dtype=float)
        phase = 2.0 * math.pi * (i - self.phase_days) / self.period_days
        return self.baseline + self.amplitude * 0.5 * (1.0 + np.sin(phase))


@dataclass(frozen=True)
class TabulatedCurve:
    """Incidence taken from user-supplied daily values, clamped at the edges."""

    values: tuple[float, ...]

    def value(self, day_index) -> np.ndarray:
        arr = np.asarray(self.values, dtype=float)
        idx = np.clip(np.asarray(day_index, dtype=int), 0, len(arr) - 1)
        return arr[idx]


@dataclass(frozen=True)
class SignalArticle:
    """A candidate article whose traffic tracks the incidence curve."""

    language: str
    title: str
    gain: float
    lead_days: int
    noise_std: float = 0.0

    def __post_init__(self):
        if not -MAX_LEAD_DAYS <= self.lead_days <= MAX_LEAD_DAYS:
            raise ValueError(
                f"lead must be within +/-{MAX_LEAD_DAYS} days, got {self.lead_days}"
            )
        if not math.isfinite(self.gain):
            raise ValueError("signal gain must be finite")
        if self.noise_std < 0:
            raise ValueError("noise std must be non-negative")


@dataclass(frozen=True)
class RedirectFlip:
    """Move one article's whole traffic stream to another title at a date.

    Days before cut_date land on title_a, days from cut_date on title_b,
    mimicking a redirect reversal. Summing the two series recovers exactly
    the stream an uncut article would have had.
    """

    language: str
    title_a: str
    title_b: str
    cut_date: date


@dataclass(frozen=True)
class SynthSpec:
    """Everything that determines a synthetic corpus, seed included."""

    languages: tuple[str, ...] = ("en",)
    articles_per_language: int = 10
    study_days: int = 60
    start_date: date = date(2012, 1, 1)
    background_level: float = 2000.0
    background_noise_std: float = 100.0
    weekly_amplitude: float = 0.25
    incidence: SeasonalCurve | TabulatedCurve = field(default_factory=SeasonalCurve)
    incidence_resolution: str = "daily"
    disease: str = "synthetic_fever"
    signal_articles: tuple[SignalArticle, ...] = ()
    redirect_flip: RedirectFlip | None = None
    seed: int = 0
    #: Headroom of the language-wide total over the candidates' combined level.
    total_factor: float = 2.0

    def __post_init__(self):
        if not self.languages:
            raise ValueError("at least one language required")
        if self.articles_per_language < 1:
            raise ValueError("need at least one article per language")
        if self.study_days < 1:
            raise ValueError("study_days must be positive")
        if self.background_level <= 0:
            raise ValueError("background_level must be positive")
        if self.background_noise_std < 0:
            raise ValueError("background_noise_std must be non-negative")
        if self.incidence_resolution not in ("daily", "weekly"):
            raise ValueError(
                f"generator supports daily or weekly incidence, got {self.incidence_resolution!r}"
            )
        if self.total_factor < 1.0:
            raise ValueError("total_factor must be at least 1")
        weekly_factors(self.weekly_amplitude)
        for sig in self.signal_articles:
            if sig.language not in self.languages:
                raise ValueError(f"signal article language {sig.language!r} not in spec")
        flip = self.redirect_flip
        if flip is not None:
            if flip.language not in self.languages:
                raise ValueError(f"redirect flip language {flip.language!r} not in spec")
            if flip.title_a == flip.title_b:
                raise ValueError("redirect flip needs two distinct titles")

    @property
    def end_date(self) -> date:
        return self.start_date + timedelta(days=self.study_days - 1)


def english_name(index: int) -> str:
    """English-side candidate name shared across languages."""
    return f"Topic {index:03d}"


def local_title(language: str, index: int) -> str:
    """Per-language encoded candidate title."""
    return encode_title(f"Topic {index:03d} {language}")


def gain_for_snr(snr: float, noise_std: float, incidence_values) -> float:
    """Gain giving the wanted signal-to-noise ratio on daily counts.

    SNR is gain * std(incidence) / noise_std, i.e. the planted signal's
    standard deviation over the article's additive noise level.
    """
    std = float(np.std(np.asarray(incidence_values, dtype=float)))
    if std == 0.0:
        raise ValueError("incidence curve is constant; SNR is undefined")
    if noise_std <= 0:
        raise ValueError("noise_std must be positive to target an SNR")
    return snr * noise_std / std


@dataclass(frozen=True)
class GeneratedCorpus:
    """Paths of everything generate() wrote."""

    root: Path
    pagecounts_dir: Path
    incidence_paths: dict[str, Path]
    candidates_path: Path
    truth_path: Path
    spec: SynthSpec


def _split_hours(day_count: int) -> np.ndarray:
    """Deterministic 24-way split of an integer daily count."""
    base, rem = divmod(int(day_count), 24)
    hours = np.full(24, base, dtype=np.int64)
    hours[:rem] += 1
    return hours


def _daily_counts(spec: SynthSpec) -> dict[str, dict[str, np.ndarray]]:
    """Integer daily counts per language and title, ballast excluded.

    The RNG is consumed in a fixed order (languages as listed, candidate
    indices ascending, one noise block per article) so a spec plus seed pins
    the corpus exactly. A redirect flip only re-labels title_a's stream and
    draws nothing, keeping the flipped and unflipped variants of a spec on
    identical noise.
    """
    n = spec.study_days
    rng = np.random.default_rng(spec.seed)
    day_idx = np.arange(n)
    weekdays = np.array(
        [(spec.start_date + timedelta(days=int(i))).weekday() for i in range(n)]
    )
    w = weekly_factors(spec.weekly_amplitude)[weekdays]
    signals = {(s.language, s.title): s for s in spec.signal_articles}
    out: dict[str, dict[str, np.ndarray]] = {}
    for lang in spec.languages:
        titles = [local_title(lang, i) for i in range(spec.articles_per_language)]
        lang_counts: dict[str, np.ndarray] = {}
        for title in titles:
            expect = spec.background_level * w
            if spec.background_noise_std > 0:
                expect = expect + rng.normal(0.0, spec.background_noise_std, n)
            sig = signals.get((lang, title))
            if sig is not None:
                expect = expect + sig.gain * spec.incidence.value(day_idx + sig.lead_days)
                if sig.noise_std > 0:
                    expect = expect + rng.normal(0.0, sig.noise_std, n)
            lang_counts[title] = np.rint(np.maximum(expect, 0.0)).astype(np.int64)
        flip = spec.redirect_flip
        if flip is not None and flip.language == lang:
            if flip.title_a not in lang_counts:
                raise ValueError(f"redirect flip title {flip.title_a!r} is not a candidate")
            stream = lang_counts[flip.title_a]
            cut = (flip.cut_date - spec.start_date).days
            before = np.where(day_idx < cut, stream, 0)
            after = np.where(day_idx >= cut, stream, 0)
            lang_counts[flip.title_a] = before
            lang_counts[flip.title_b] = after
        out[lang] = lang_counts
    return out


def _ballast_counts(spec: SynthSpec, counts: dict[str, dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    """Daily ballast topping each language up to its smooth total."""
    n = spec.study_days
    weekdays = np.array(
        [(spec.start_date + timedelta(days=int(i))).weekday() for i in range(n)]
    )
    w = weekly_factors(spec.weekly_amplitude)[weekdays]
    target_level = spec.total_factor * spec.articles_per_language * spec.background_level
    out: dict[str, np.ndarray] = {}
    for lang, lang_counts in counts.items():
        target = np.rint(target_level * w).astype(np.int64)
        consumed = np.sum(list(lang_counts.values()), axis=0, dtype=np.int64)
        ballast = target - consumed
        if np.any(ballast < 0):
            logger.warning(
                "language %s: candidate traffic exceeds the total target on %d days; "
                "raise total_factor for controlled totals", lang, int((ballast < 0).sum()),
            )
            ballast = np.maximum(ballast, 0)
        out[lang] = ballast
    return out


def _incidence_rows(spec: SynthSpec) -> tuple[list[date], list[float]]:
    daily = np.asarray(spec.incidence.value(np.arange(spec.study_days)), dtype=float)
    if spec.incidence_resolution == "daily":
        dates = [spec.start_date + timedelta(days=i) for i in range(spec.study_days)]
        return dates, [float(v) for v in daily]
    weeks = spec.study_days // 7
    dates = [spec.start_date + timedelta(days=7 * i) for i in range(weeks)]
    values = [float(daily[7 * i : 7 * i + 7].sum()) for i in range(weeks)]
    return dates, values


def _candidate_set(spec: SynthSpec) -> CandidateSet:
    candidates = [
        Candidate(
            english_name(i),
            {lang: local_title(lang, i) for lang in spec.languages},
        )
        for i in range(spec.articles_per_language)
    ]
    flip = spec.redirect_flip
    if flip is not None:
        candidates.append(Candidate(f"{flip.title_b} (alias)", {flip.language: flip.title_b}))
    return CandidateSet(
        disease=spec.disease,
        candidates=tuple(candidates),
        languages=tuple(sorted(spec.languages)),
    )


def generate(spec: SynthSpec, out_dir: Path | str) -> GeneratedCorpus:
    """Write a complete synthetic study under out_dir.

    Layout: pagecounts/ with one gzip file per hour, incidence_<lang>.csv and
    .context per language, candidates.tsv, truth.json. Fails with an error
    naming the path when out_dir cannot be created or written.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise OSError(f"output directory not writable: {out} ({exc})") from exc

    counts = _daily_counts(spec)
    ballast = _ballast_counts(spec, counts)

    pagecounts_dir = out / "pagecounts"
    pagecounts_dir.mkdir(exist_ok=True)
    for i in range(spec.study_days):
        day = spec.start_date + timedelta(days=i)
        hour_rows: list[list[tuple[str, str, int]]] = [[] for _ in range(24)]
        for lang in spec.languages:
            for title, series in counts[lang].items():
                if series[i] == 0:
                    continue
                for h, c in enumerate(_split_hours(series[i])):
                    if c > 0:
                        hour_rows[h].append((lang, title, int(c)))
            for h, c in enumerate(_split_hours(ballast[lang][i])):
                if c > 0:
                    hour_rows[h].append((lang, BALLAST_TITLE, int(c)))
        for h in range(24):
            rows = sorted(hour_rows[h])
            body = "".join(
                f"{lang} {title} {c} {c * BYTES_PER_REQUEST}\n" for lang, title, c in rows
            )
            name = f"pagecounts-{day:%Y%m%d}-{h:02d}0000.gz"
            with open(pagecounts_dir / name, "wb") as raw:
                with gzip.GzipFile(
                    filename="", mode="wb", fileobj=raw, compresslevel=1, mtime=0
                ) as gz:
                    gz.write(body.encode("ascii"))

    dates, values = _incidence_rows(spec)
    incidence_paths: dict[str, Path] = {}
    for lang in spec.languages:
        csv_path = out / f"incidence_{lang}.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("date,value\n")
            for d, v in zip(dates, values):
                fh.write(f"{d.isoformat()},{v!r}\n")
        context = Context(
            disease=spec.disease,
            location=f"{lang}-region",
            language=lang,
            resolution=spec.incidence_resolution,
            start=spec.start_date,
            end=spec.end_date + timedelta(days=1),
        )
        save_context(context, csv_path.with_suffix(".context"))
        incidence_paths[lang] = csv_path

    candidates_path = out / "candidates.tsv"
    save_candidates(_candidate_set(spec), candidates_path)

    truth = {
        "seed": spec.seed,
        "start_date": spec.start_date.isoformat(),
        "study_days": spec.study_days,
        "languages": list(spec.languages),
        "articles_per_language": spec.articles_per_language,
        "background_level": spec.background_level,
        "background_noise_std": spec.background_noise_std,
        "weekly_amplitude": spec.weekly_amplitude,
        "disease": spec.disease,
        "incidence_resolution": spec.incidence_resolution,
        "incidence_daily": [float(v) for v in spec.incidence.value(np.arange(spec.study_days))],
        "signal_articles": [
            {
                "language": s.language,
                "title": s.title,
                "gain": s.gain,
                "lead_days": s.lead_days,
                "noise_std": s.noise_std,
            }
            for s in spec.signal_articles
        ],
        "redirect_flip": (
            None
            if spec.redirect_flip is None
            else {
                "language": spec.redirect_flip.language,
                "title_a": spec.redirect_flip.title_a,
                "title_b": spec.redirect_flip.title_b,
                "cut_date": spec.redirect_flip.cut_date.isoformat(),
            }
        ),
    }
    truth_path = out / "truth.json"
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2, sort_keys=True)
        fh.write("\n")

    return GeneratedCorpus(
        root=out,
        pagecounts_dir=pagecounts_dir,
        incidence_paths=incidence_paths,
        candidates_path=candidates_path,
        truth_path=truth_path,
        spec=spec,
    )


def _read_daily_curve(path: Path) -> TabulatedCurve:
    """Daily incidence values from a date,value CSV (consecutive dates)."""
    if not path.exists():
        raise MissingInputError(path, "incidence curve CSV")
    values: list[float] = []
    prev: date | None = None
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != "date,value":
            raise DataFormatError(f"{path}: expected header 'date,value'")
        for lineno, line in enumerate(fh, 2):
            row = line.rstrip("\n")
            if not row:
                continue
            day_text, _, value_text = row.partition(",")
            day = date.fromisoformat(day_text)
            if prev is not None and day != prev + timedelta(days=1):
                raise DataFormatError(f"{path}:{lineno}: curve dates must be consecutive")
            prev = day
            values.append(float(value_text))
    if not values:
        raise DataFormatError(f"{path}: no curve values")
    return TabulatedCurve(values=tuple(values))


def spec_from_config(path: Path | str) -> SynthSpec:
    """Build a SynthSpec from the [synth] sections of an INI config file.

    Signal articles live in [signal:NAME] sections (language, title, lead_days,
    noise_std, and either an explicit gain or gain_snr to derive it); an
    optional [redirect_flip] section names title_a, title_b and cut_date.
    """
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path, "generator config")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read(path, encoding="utf-8")
    if not parser.has_section("synth"):
        raise DataFormatError(f"{path}: missing [synth] section")
    synth = parser["synth"]

    languages = tuple(
        lang.strip() for lang in synth.get("languages", "en").split(",") if lang.strip()
    )
    study_days = synth.getint("study_days", 60)
    start = date.fromisoformat(synth.get("start_date", "2012-01-01"))

    if "incidence_csv" in synth:
        curve: SeasonalCurve | TabulatedCurve = _read_daily_curve(
            path.parent / synth["incidence_csv"]
        )
    else:
        curve = SeasonalCurve(
            baseline=synth.getfloat("incidence_baseline", 50.0),
            amplitude=synth.getfloat("incidence_amplitude", 400.0),
            period_days=synth.getfloat("incidence_period_days", 60.0),
            phase_days=synth.getfloat("incidence_phase_days", 0.0),
        )

    background_noise_std = synth.getfloat("background_noise_std", 100.0)
    daily_curve = np.asarray(curve.value(np.arange(study_days)), dtype=float)

    signals = []
    flip = None
    for section in parser.sections():
        if section.startswith("signal:"):
            sig = parser[section]
            for key in ("language", "title"):
                if key not in sig:
                    raise DataFormatError(f"{path}: [{section}] missing {key}")
            noise_std = sig.getfloat("noise_std", 0.0)
            if "gain" in sig:
                gain = sig.getfloat("gain")
            elif "gain_snr" in sig:
                total_noise = math.hypot(background_noise_std, noise_std)
                gain = gain_for_snr(sig.getfloat("gain_snr"), total_noise, daily_curve)
            else:
                raise DataFormatError(f"{path}: [{section}] needs gain or gain_snr")
            signals.append(
                SignalArticle(
                    language=sig["language"],
                    title=sig["title"],
                    gain=gain,
                    lead_days=sig.getint("lead_days", 0),
                    noise_std=noise_std,
                )
            )
        elif section == "redirect_flip":
            f = parser[section]
            for key in ("language", "title_a", "title_b", "cut_date"):
                if key not in f:
                    raise DataFormatError(f"{path}: [redirect_flip] missing {key}")
            flip = RedirectFlip(
                language=f["language"],
                title_a=f["title_a"],
                title_b=f["title_b"],
                cut_date=date.fromisoformat(f["cut_date"]),
            )

    return SynthSpec(
        languages=languages,
        articles_per_language=synth.getint("articles_per_language", 10),
        study_days=study_days,
        start_date=start,
        background_level=synth.getfloat("background_level", 2000.0),
        background_noise_std=background_noise_std,
        weekly_amplitude=synth.getfloat("weekly_amplitude", 0.25),
        incidence=curve,
        incidence_resolution=synth.get("incidence_resolution", "daily"),
        disease=synth.get("disease", "synthetic_fever"),
        signal_articles=tuple(signals),
        redirect_flip=flip,
        seed=synth.getint("seed", 0),
        total_factor=synth.getfloat("total_factor", 2.0),
    )
