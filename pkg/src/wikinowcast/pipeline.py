"""End-to-end orchestration: config file in, report files out.

A run is described by one INI-style config (stdlib configparser syntax).
Relative paths are resolved against the config file's directory::

    [corpus]
    root = synth/pagecounts
    start = 2012-01-01
    end = 2012-04-29
    languages = en, th

    [store]                     ; optional: persist / reuse the built store
    dir = out/store

    [scan]                      ; optional, defaults shown
    offset_min = -28
    offset_max = 28
    top_k = 10

    [output]
    dir = out/reports

    [context:flu-en]            ; one section per study context
    incidence = synth/incidence_en.csv
    candidates = synth/candidates.tsv

    [aliases:en]                ; optional alias merging, canonical = members
    Grippe_merged = Grippe_old, Grippe_new

Exit codes: 0 all contexts completed and at least one non-degenerate model
was fit; 1 invalid or missing input; 2 the run completed but every model at
every offset in every context was degenerate.
"""

from __future__ import annotations

import configparser
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

from . import reports
from .epidata import IncidenceSeries, load_candidates, load_incidence, sidecar_path
from .errors import DataFormatError, MissingInputError
from .modeling import DEFAULT_TOP_K, LagScanResult, lag_scan
from .store import SeriesStore, build_store, merge_aliases
from .transfer import TransferScore, compute_rt

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_DEGENERATE = 2

_NAME_RE = re.compile(r"^[A-Za-z0-9._-]+$")


@dataclass(frozen=True)
class ContextConfig:
    name: str
    incidence_path: Path
    candidates_path: Path


@dataclass
class PipelineConfig:
    corpus_root: Path
    start: date
    end: date
    languages: tuple[str, ...]
    contexts: tuple[ContextConfig, ...]
    output_dir: Path
    store_dir: Path | None = None
    offset_min: int = -28
    offset_max: int = 28
    top_k: int = DEFAULT_TOP_K
    aliases: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(range(self.offset_min, self.offset_max + 1))


def _parser() -> configparser.ConfigParser:
    # keys stay case-sensitive: alias canonical names are article titles
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    return parser


def load_pipeline_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise MissingInputError(path, "pipeline config")
    parser = _parser()
    parser.read(path, encoding="utf-8")
    base = path.parent

    def require(section: str, key: str) -> str:
        if not parser.has_option(section, key):
            raise DataFormatError(f"{path}: missing [{section}] {key}")
        return parser.get(section, key)

    if not parser.has_section("corpus"):
        raise DataFormatError(f"{path}: missing [corpus] section")
    corpus_root = base / require("corpus", "root")
    start = date.fromisoformat(require("corpus", "start"))
    end = date.fromisoformat(require("corpus", "end"))
    if end < start:
        raise DataFormatError(f"{path}: corpus end {end} before start {start}")
    languages = tuple(
        lang.strip() for lang in require("corpus", "languages").split(",") if lang.strip()
    )
    if not languages:
        raise DataFormatError(f"{path}: no languages configured")

    if not parser.has_section("output"):
        raise DataFormatError(f"{path}: missing [output] section")
    output_dir = base / require("output", "dir")

    store_dir = None
    if parser.has_option("store", "dir"):
        store_dir = base / parser.get("store", "dir")

    offset_min = parser.getint("scan", "offset_min", fallback=-28)
    offset_max = parser.getint("scan", "offset_max", fallback=28)
    top_k = parser.getint("scan", "top_k", fallback=DEFAULT_TOP_K)
    if offset_max < offset_min:
        raise DataFormatError(f"{path}: offset_max {offset_max} < offset_min {offset_min}")
    if top_k < 1:
        raise DataFormatError(f"{path}: top_k must be positive")

    contexts = []
    aliases: dict[str, dict[str, tuple[str, ...]]] = {}
    for section in parser.sections():
        if section.startswith("context:"):
            name = section.split(":", 1)[1]
            if not _NAME_RE.match(name):
                raise DataFormatError(
                    f"{path}: context name {name!r} must match {_NAME_RE.pattern}"
                )
            contexts.append(
                ContextConfig(
                    name=name,
                    incidence_path=base / require(section, "incidence"),
                    candidates_path=base / require(section, "candidates"),
                )
            )
        elif section.startswith("aliases:"):
            lang = section.split(":", 1)[1]
            groups: dict[str, tuple[str, ...]] = {}
            for canonical, members in parser.items(section):
                titles = tuple(t.strip() for t in members.split(",") if t.strip())
                if not titles:
                    raise DataFormatError(
                        f"{path}: alias group {canonical!r} has no member titles"
                    )
                groups[canonical] = titles
            aliases[lang] = groups
    if not contexts:
        raise DataFormatError(f"{path}: no [context:NAME] sections")

    return PipelineConfig(
        corpus_root=corpus_root,
        start=start,
        end=end,
        languages=languages,
        contexts=tuple(contexts),
        output_dir=output_dir,
        store_dir=store_dir,
        offset_min=offset_min,
        offset_max=offset_max,
        top_k=top_k,
        aliases=aliases,
    )


@dataclass
class LoadedContext:
    config: ContextConfig
    incidence: IncidenceSeries
    candidates: "object"
    english_by_title: dict[str, str]


def _load_contexts(config: PipelineConfig) -> list[LoadedContext]:
    loaded = []
    for ctx_cfg in config.contexts:
        for p in (ctx_cfg.incidence_path, sidecar_path(ctx_cfg.incidence_path), ctx_cfg.candidates_path):
            if not Path(p).exists():
                raise MissingInputError(p, f"context {ctx_cfg.name}")
        incidence = load_incidence(ctx_cfg.incidence_path)
        language = incidence.context.language
        if language not in config.languages:
            raise DataFormatError(
                f"context {ctx_cfg.name}: language {language!r} not in corpus languages"
            )
        candidates = load_candidates(ctx_cfg.candidates_path, disease=incidence.context.disease)
        by_english = candidates.for_language(language)
        english_by_title = {title: english for english, title in by_english.items()}
        loaded.append(
            LoadedContext(
                config=ctx_cfg,
                incidence=incidence,
                candidates=candidates,
                english_by_title=english_by_title,
            )
        )
    return loaded


def watch_titles_for(config: PipelineConfig, contexts: list[LoadedContext]) -> dict[str, set[str]]:
    """Titles the store must keep: every context's candidates plus alias members."""
    watch: dict[str, set[str]] = {lang: set() for lang in config.languages}
    for ctx in contexts:
        lang = ctx.incidence.context.language
        watch[lang].update(ctx.english_by_title.keys())
    for lang, groups in config.aliases.items():
        if lang not in watch:
            raise DataFormatError(f"alias section for unknown language {lang!r}")
        for members in groups.values():
            watch[lang].update(members)
    return watch


def obtain_store(config: PipelineConfig, contexts: list[LoadedContext]) -> SeriesStore:
    """Load the persisted store when present and matching, else build it."""
    if config.store_dir is not None and (config.store_dir / "manifest.json").exists():
        store = SeriesStore.load(config.store_dir)
        if store.start_date != config.start or store.end_date != config.end:
            raise DataFormatError(
                f"persisted store covers {store.start_date}..{store.end_date}, "
                f"config wants {config.start}..{config.end}; delete {config.store_dir} to rebuild"
            )
        if not set(config.languages) <= set(store.languages):
            raise DataFormatError(
                f"persisted store lacks languages {set(config.languages) - set(store.languages)}"
            )
        return store
    store = build_store(
        config.corpus_root,
        config.start,
        config.end,
        config.languages,
        watch_titles_for(config, contexts),
    )
    _apply_aliases(config, store)
    if config.store_dir is not None:
        store.save(config.store_dir)
    return store


def _apply_aliases(config: PipelineConfig, store: SeriesStore) -> None:
    for lang, groups in config.aliases.items():
        for canonical, members in groups.items():
            series = [store.get_or_zero(lang, title) for title in members]
            store.add(merge_aliases(series, title=canonical))


@dataclass
class PipelineResult:
    exit_code: int
    scans: dict[str, LagScanResult]
    transfers: list[tuple[TransferScore, str, str]]
    report_paths: list[Path]
    store: SeriesStore


def run_pipeline(config: PipelineConfig | Path | str) -> PipelineResult:
    """Ingest, model, and report everything the config names."""
    if not isinstance(config, PipelineConfig):
        config = load_pipeline_config(config)
    if not Path(config.corpus_root).exists():
        raise MissingInputError(config.corpus_root, "pagecount corpus directory")

    contexts = _load_contexts(config)
    store = obtain_store(config, contexts)
    config.output_dir.mkdir(parents=True, exist_ok=True)

    report_paths: list[Path] = []
    scans: dict[str, LagScanResult] = {}
    any_fit = False
    for ctx in contexts:
        language = ctx.incidence.context.language
        daily = {
            title: store.get_or_zero(language, title)
            for title in ctx.english_by_title
        }
        scan = lag_scan(
            daily,
            ctx.incidence,
            offsets=config.offsets,
            k=config.top_k,
            context=ctx.incidence.context,
        )
        scans[ctx.config.name] = scan
        if scan.best_offset is not None:
            any_fit = True
        name = ctx.config.name
        report_paths.append(
            reports.write_lagscan_csv(config.output_dir / f"{name}_lagscan.csv", scan)
        )
        report_paths.append(
            reports.write_summary_csv(
                config.output_dir / f"{name}_summary.csv", scan, ctx.incidence.context
            )
        )
        if 0 in scan.offsets:
            report_paths.append(
                reports.write_nowcast_csv(
                    config.output_dir / f"{name}_nowcast.csv", scan.model_at(0)
                )
            )
        logger.info(
            "context %s: best offset %s, best r^2 %s",
            name, scan.best_offset, scan.best_r_squared,
        )

    transfers = _transfer_scores(config, contexts, scans)
    if transfers:
        report_paths.append(
            reports.write_transfer_csv(config.output_dir / "transferability.csv", transfers)
        )

    exit_code = EXIT_OK if any_fit else EXIT_DEGENERATE
    return PipelineResult(
        exit_code=exit_code,
        scans=scans,
        transfers=transfers,
        report_paths=report_paths,
        store=store,
    )


def _transfer_scores(
    config: PipelineConfig,
    contexts: list[LoadedContext],
    scans: dict[str, LagScanResult],
) -> list[tuple[TransferScore, str, str]]:
    """Transferability for every same-disease context pair, from offset-0 models."""
    rows: list[tuple[TransferScore, str, str]] = []
    by_disease: dict[str, list[LoadedContext]] = {}
    for ctx in contexts:
        by_disease.setdefault(ctx.incidence.context.disease, []).append(ctx)
    for disease in sorted(by_disease):
        group = by_disease[disease]
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                a, b = group[i], group[j]
                scan_a = scans[a.config.name]
                scan_b = scans[b.config.name]
                if 0 not in scan_a.offsets or 0 not in scan_b.offsets:
                    logger.warning(
                        "transferability for %s skipped: offset 0 not scanned", disease
                    )
                    continue
                corrs_a = _english_correlations(a, scan_a)
                corrs_b = _english_correlations(b, scan_b)
                score = compute_rt(
                    corrs_a,
                    corrs_b,
                    disease=disease,
                    languages=(
                        a.incidence.context.language,
                        b.incidence.context.language,
                    ),
                )
                rows.append((score, a.incidence.context.location, b.incidence.context.location))
    return rows


def _english_correlations(ctx: LoadedContext, scan: LagScanResult) -> dict[str, float]:
    model = scan.model_at(0)
    return {
        ctx.english_by_title[title]: r
        for title, r in model.correlations.items()
        if title in ctx.english_by_title
    }
