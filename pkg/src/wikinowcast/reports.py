"""CSV report emission.

All report files share one float format (6 significant digits) and LF line
endings so that identical runs produce byte-identical files; determinism of
the reports is an acceptance requirement, not a nicety. Degenerate or
unavailable figures are written as "n/a", never as empty cells or NaN.

Selected titles and coefficients are packed into single pipe-joined cells;
"|" cannot occur in an encoded title, so the packing is unambiguous.
"""

from __future__ import annotations

import csv
from pathlib import Path

NOT_AVAILABLE = "n/a"

#: Six significant digits everywhere; reports are summaries, not archives.
FLOAT_FORMAT = ".6g"


def fmt(value) -> str:
    """Fixed-format a float, passing None through as n/a."""
    if value is None:
        return NOT_AVAILABLE
    return format(float(value), FLOAT_FORMAT)


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def write_lagscan_csv(path: Path | str, scan) -> Path:
    """One row per scanned offset: offset, r_squared, titles, coefficients."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["offset", "r_squared", "selected_titles", "coefficients"])
        for model in scan.models:
            if model.degenerate:
                w.writerow([model.offset, NOT_AVAILABLE, "", ""])
            else:
                w.writerow([
                    model.offset,
                    fmt(model.r_squared),
                    "|".join(model.titles),
                    "|".join(fmt(c) for c in model.coef),
                ])
    return path


_SUMMARY_OFFSETS = (0, 7, 14, 28)


def write_summary_csv(path: Path | str, scan, context) -> Path:
    """One-row headline summary: r^2 at 0/7/14/28 days out, best offset, best r^2."""
    path = Path(path)
    offsets = set(scan.offsets)
    row = [context.disease, context.location, context.language, context.resolution]
    for off in _SUMMARY_OFFSETS:
        if off in offsets and not scan.model_at(off).degenerate:
            row.append(fmt(scan.model_at(off).r_squared))
        else:
            row.append(NOT_AVAILABLE)
    row.append(scan.best_offset if scan.best_offset is not None else NOT_AVAILABLE)
    row.append(fmt(scan.best_r_squared))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow([
            "disease", "location", "language", "resolution",
            "r2_offset_0", "r2_offset_7", "r2_offset_14", "r2_offset_28",
            "best_offset", "best_r_squared",
        ])
        w.writerow(row)
    return path


def write_nowcast_csv(path: Path | str, model) -> Path:
    """Plot-ready observed vs estimated series for one fitted model."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["interval_start", "observed", "estimate"])
        if not model.degenerate and model.fitted is not None:
            for start, obs, est in zip(model.interval_starts, model.observed, model.fitted):
                w.writerow([start.isoformat(), fmt(obs), fmt(est)])
    return path


def write_correlations_csv(path: Path | str, results) -> Path:
    """Per-article correlation table (title, r, paired intervals)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["title", "r", "n_intervals"])
        for res in results:
            w.writerow([res.title, fmt(res.r), res.n])
    return path


def write_transfer_csv(path: Path | str, rows) -> Path:
    """Transferability table: rows of (score, location_a, location_b)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = _writer(fh)
        w.writerow(["disease", "location_1", "location_2", "r_t", "shared_articles"])
        for score, loc_a, loc_b in rows:
            w.writerow([
                score.disease,
                loc_a,
                loc_b,
                fmt(score.r_t),
                score.shared_count,
            ])
    return path
