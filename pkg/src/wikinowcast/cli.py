"""Command-line interface.

One executable, subcommand per pipeline stage::

    wikinowcast synth       --config cfg.ini --out DIR   generate a corpus
    wikinowcast ingest      --config cfg.ini             corpus scan statistics
    wikinowcast build-store --config cfg.ini             build + persist the store
    wikinowcast correlate   --config cfg.ini --context NAME [--offset N]
    wikinowcast fit         --config cfg.ini --context NAME [--offset N]
    wikinowcast lagscan     --config cfg.ini [--context NAME]
    wikinowcast transfer    --config cfg.ini
    wikinowcast report      --config cfg.ini             full run, all reports

Exit codes: 0 success, 1 bad or missing input (the offending file is named),
2 completed but only degenerate models (nothing usable to fit).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import reports
from .errors import (
    DataFormatError,
    DegenerateModelError,
    MissingInputError,
    NoUsableCandidatesError,
)
from .ingest import ingest_range
from .modeling import fit_lag_model
from .pipeline import (
    EXIT_DEGENERATE,
    EXIT_INPUT_ERROR,
    EXIT_OK,
    PipelineConfig,
    _load_contexts,
    load_pipeline_config,
    obtain_store,
    run_pipeline,
)
from .reports import fmt
from .synth import generate, spec_from_config

logger = logging.getLogger(__name__)


def _prepare(config_path: str):
    config = load_pipeline_config(config_path)
    contexts = _load_contexts(config)
    store = obtain_store(config, contexts)
    return config, contexts, store


def _find_context(contexts, name: str):
    for ctx in contexts:
        if ctx.config.name == name:
            return ctx
    raise MissingInputError(name, "no such [context:NAME] in config")


def cmd_synth(args) -> int:
    spec = spec_from_config(args.config)
    corpus = generate(spec, args.out)
    print(f"corpus written under {corpus.root}")
    print(f"  hours: {spec.study_days * 24}  languages: {', '.join(spec.languages)}")
    print(f"  candidates: {corpus.candidates_path}")
    for lang, path in corpus.incidence_paths.items():
        print(f"  incidence[{lang}]: {path}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    config = load_pipeline_config(args.config)
    if not Path(config.corpus_root).exists():
        raise MissingInputError(config.corpus_root, "pagecount corpus directory")
    hours = 0
    missing = 0
    rejected = 0
    totals: dict[str, int] = {lang: 0 for lang in config.languages}
    for batch in ingest_range(
        config.corpus_root, config.start, config.end, set(config.languages), set()
    ):
        hours += 1
        if not batch.present:
            missing += 1
            continue
        rejected += batch.rejected_lines
        for lang, total in batch.totals.items():
            totals[lang] += total
    print(f"hours scanned:  {hours}")
    print(f"hours missing:  {missing} ({100.0 * missing / hours:.2f}%)")
    print(f"lines rejected: {rejected}")
    for lang in config.languages:
        print(f"requests[{lang}]: {totals[lang]}")
    return EXIT_OK


def cmd_build_store(args) -> int:
    config = load_pipeline_config(args.config)
    if config.store_dir is None:
        raise DataFormatError("build-store needs a [store] dir entry in the config")
    config, contexts, store = _prepare(args.config)
    n_series = sum(len(titles) for titles in store.series.values())
    print(f"store written to {config.store_dir}")
    print(f"  study range: {store.start_date} .. {store.end_date}")
    print(f"  series kept: {n_series}")
    print(f"  missing hours: {len(store.missing_hours)}")
    print(f"  rejected lines: {store.rejected_lines}")
    return EXIT_OK


def cmd_correlate(args) -> int:
    config, contexts, store = _prepare(args.config)
    ctx = _find_context(contexts, args.context)
    language = ctx.incidence.context.language
    daily = {t: store.get_or_zero(language, t) for t in ctx.english_by_title}
    model = fit_lag_model(daily, ctx.incidence, args.offset, k=config.top_k)
    if not model.correlations:
        raise NoUsableCandidatesError(
            f"context {args.context}: no usable candidate at offset {args.offset}"
        )
    from .modeling import CorrelationResult

    ranked = [
        CorrelationResult(title=t, r=r, n=model.n_intervals)
        for t, r in sorted(model.correlations.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    ]
    config.output_dir.mkdir(parents=True, exist_ok=True)
    out = config.output_dir / f"{args.context}_correlations_offset{args.offset}.csv"
    reports.write_correlations_csv(out, ranked)
    print(f"correlations written to {out}")
    for res in ranked[: config.top_k]:
        print(f"  {res.r:+.4f}  {res.title}")
    return EXIT_OK


def cmd_fit(args) -> int:
    config, contexts, store = _prepare(args.config)
    ctx = _find_context(contexts, args.context)
    language = ctx.incidence.context.language
    daily = {t: store.get_or_zero(language, t) for t in ctx.english_by_title}
    model = fit_lag_model(daily, ctx.incidence, args.offset, k=config.top_k)
    if model.degenerate:
        print(f"context {args.context}: degenerate model at offset {args.offset}")
        return EXIT_DEGENERATE
    print(f"context {args.context}, offset {model.offset:+d}, "
          f"{model.n_intervals} intervals, r^2 = {fmt(model.r_squared)}")
    for title, coef in zip(model.titles, model.coef):
        print(f"  {fmt(coef):>12}  {title}")
    return EXIT_OK


def cmd_lagscan(args) -> int:
    config, contexts, store = _prepare(args.config)
    if args.context is not None:
        contexts = [_find_context(contexts, args.context)]
    from .modeling import lag_scan

    config.output_dir.mkdir(parents=True, exist_ok=True)
    worst = EXIT_DEGENERATE
    for ctx in contexts:
        language = ctx.incidence.context.language
        daily = {t: store.get_or_zero(language, t) for t in ctx.english_by_title}
        scan = lag_scan(
            daily, ctx.incidence,
            offsets=config.offsets, k=config.top_k, context=ctx.incidence.context,
        )
        name = ctx.config.name
        reports.write_lagscan_csv(config.output_dir / f"{name}_lagscan.csv", scan)
        reports.write_summary_csv(
            config.output_dir / f"{name}_summary.csv", scan, ctx.incidence.context
        )
        if 0 in scan.offsets:
            reports.write_nowcast_csv(
                config.output_dir / f"{name}_nowcast.csv", scan.model_at(0)
            )
        if scan.best_offset is None:
            print(f"{name}: all {len(scan)} offsets degenerate")
        else:
            worst = EXIT_OK
            print(f"{name}: {len(scan)} models, best offset {scan.best_offset:+d}, "
                  f"best r^2 {fmt(scan.best_r_squared)}")
    return worst


def cmd_transfer(args) -> int:
    result = run_pipeline(args.config)
    if not result.transfers:
        print("no same-disease context pair: nothing to score")
        return result.exit_code
    out = None
    for path in result.report_paths:
        if path.name == "transferability.csv":
            out = path
    print(f"transferability written to {out}")
    for score, loc_a, loc_b in result.transfers:
        rt = fmt(score.r_t)
        print(f"  {score.disease}: {loc_a} vs {loc_b}: r_t = {rt} "
              f"({score.shared_count} shared articles)")
    return result.exit_code


def cmd_report(args) -> int:
    result = run_pipeline(args.config)
    for path in result.report_paths:
        print(f"wrote {path}")
    if result.exit_code == EXIT_DEGENERATE:
        print("warning: every model at every offset was degenerate")
    return result.exit_code


def build_arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wikinowcast",
        description="Nowcast and forecast disease incidence from hourly pageview logs.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="INI config file")
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "generate a synthetic corpus from [synth] config")
    p.add_argument("--out", required=True, help="output directory for the corpus")

    add("ingest", cmd_ingest, "scan the corpus and print ingest statistics")
    add("build-store", cmd_build_store, "build and persist the normalized series store")

    p = add("correlate", cmd_correlate, "per-article correlations for one context")
    p.add_argument("--context", required=True)
    p.add_argument("--offset", type=int, default=0)

    p = add("fit", cmd_fit, "fit one model for one context at one offset")
    p.add_argument("--context", required=True)
    p.add_argument("--offset", type=int, default=0)

    p = add("lagscan", cmd_lagscan, "scan all offsets and write model reports")
    p.add_argument("--context", default=None)

    add("transfer", cmd_transfer, "cross-language transferability scores")
    add("report", cmd_report, "full pipeline: store, scans, transfer, plot data")
    return parser


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except MissingInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (NoUsableCandidatesError, DegenerateModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
