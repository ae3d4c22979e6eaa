"""Shared fixtures and builders for the test suite."""

from __future__ import annotations

import gzip
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from wikinowcast.epidata import Context, IncidenceSeries
from wikinowcast.store import DailySeries

# A Monday, so weekday arithmetic in synthetic data is easy to reason about.
START = date(2012, 1, 2)


def write_hour(directory, day: date, hour: int, body: str) -> Path:
    """Write one gzip hour file with the given text content."""
    path = Path(directory) / f"pagecounts-{day:%Y%m%d}-{hour:02d}0000.gz"
    with gzip.open(path, "wb") as fh:
        fh.write(body.encode("latin-1"))
    return path


def make_daily(values, language="en", title="Topic", start=START) -> DailySeries:
    return DailySeries(language=language, title=title, start=start,
                       values=np.asarray(values, dtype=float))


def make_incidence(values, start=START, resolution="daily", language="en",
                   disease="flu", location="testland") -> IncidenceSeries:
    """Incidence series over consecutive intervals of the given resolution."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if resolution == "daily":
        starts = tuple(start + timedelta(days=i) for i in range(n))
        lengths = (1,) * n
    elif resolution == "weekly":
        starts = tuple(start + timedelta(days=7 * i) for i in range(n))
        lengths = (7,) * n
    else:
        raise ValueError(f"unsupported test resolution: {resolution}")
    context = Context(
        disease=disease,
        location=location,
        language=language,
        resolution=resolution,
        start=starts[0],
        end=starts[-1] + timedelta(days=lengths[-1]),
    )
    return IncidenceSeries(context=context, starts=starts, lengths=lengths, values=values)


def write_pipeline_config(path, corpus, *, offset_min=-28, offset_max=28, top_k=10,
                          out_dir=None, store_dir=None, aliases=None,
                          context_names=None) -> Path:
    """Write an INI pipeline config for a generated corpus.

    One [context:NAME] per corpus language by default, named ctx-<lang>.
    All paths are written absolute so the config can live anywhere.
    """
    path = Path(path)
    spec = corpus.spec
    out = Path(out_dir) if out_dir is not None else path.parent / "reports"
    lines = [
        "[corpus]",
        f"root = {corpus.pagecounts_dir}",
        f"start = {spec.start_date.isoformat()}",
        f"end = {spec.end_date.isoformat()}",
        f"languages = {', '.join(spec.languages)}",
        "",
        "[scan]",
        f"offset_min = {offset_min}",
        f"offset_max = {offset_max}",
        f"top_k = {top_k}",
        "",
        "[output]",
        f"dir = {out}",
        "",
    ]
    if store_dir is not None:
        lines += ["[store]", f"dir = {store_dir}", ""]
    names = context_names or {lang: f"ctx-{lang}" for lang in spec.languages}
    for lang, name in names.items():
        lines += [
            f"[context:{name}]",
            f"incidence = {corpus.incidence_paths[lang]}",
            f"candidates = {corpus.candidates_path}",
            "",
        ]
    for lang, groups in (aliases or {}).items():
        lines.append(f"[aliases:{lang}]")
        for canonical, members in groups.items():
            lines.append(f"{canonical} = {', '.join(members)}")
        lines.append("")
    path.write_text("\n".join(lines), encoding="utf-8")
    return path
