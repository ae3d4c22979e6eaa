"""Build disease nowcast and forecast models from hourly pageview logs.

The pipeline: ingest hourly pagecount files, normalize each watched article's
traffic by its language's hourly total, aggregate to days, align onto official
incidence reporting intervals, rank candidate articles by correlation, fit
no-intercept linear models across a range of day offsets, and score how well a
disease's correlation profile transfers between languages.
"""

from .epidata import (
    Candidate,
    CandidateSet,
    Context,
    IncidenceSeries,
    load_candidates,
    load_incidence,
)
from .errors import (
    DataFormatError,
    DegenerateModelError,
    LineFormatError,
    MissingInputError,
    NoUsableCandidatesError,
    UndefinedCorrelationError,
)
from .estimators import NoInterceptLinearRegression, TopCorrelationSelector
from .ingest import (
    HourBatch,
    HourStamp,
    RawRecord,
    encode_title,
    ingest_hour,
    parse_line,
)
from .modeling import (
    CorrelationResult,
    LagModel,
    LagScanResult,
    OlsFit,
    fit_ols,
    lag_scan,
    pearson,
    pick_best,
    select_articles,
)
from .pipeline import PipelineConfig, PipelineResult, load_pipeline_config, run_pipeline
from .store import (
    ArticleSeries,
    DailySeries,
    IntervalSeries,
    SeriesStore,
    align,
    build_store,
    merge_aliases,
    normalize,
    shift_days,
    to_daily,
)
from .synth import (
    GeneratedCorpus,
    RedirectFlip,
    SeasonalCurve,
    SignalArticle,
    SynthSpec,
    TabulatedCurve,
    gain_for_snr,
    generate,
)
from .transfer import TransferScore, compute_rt

__version__ = "0.1.0"

__all__ = [
    "ArticleSeries",
    "Candidate",
    "CandidateSet",
    "Context",
    "CorrelationResult",
    "DailySeries",
    "DataFormatError",
    "DegenerateModelError",
    "GeneratedCorpus",
    "HourBatch",
    "HourStamp",
    "IncidenceSeries",
    "IntervalSeries",
    "LagModel",
    "LagScanResult",
    "LineFormatError",
    "MissingInputError",
    "NoInterceptLinearRegression",
    "NoUsableCandidatesError",
    "OlsFit",
    "PipelineConfig",
    "PipelineResult",
    "RawRecord",
    "RedirectFlip",
    "SeasonalCurve",
    "SeriesStore",
    "SignalArticle",
    "SynthSpec",
    "TabulatedCurve",
    "TopCorrelationSelector",
    "TransferScore",
    "UndefinedCorrelationError",
    "align",
    "build_store",
    "compute_rt",
    "encode_title",
    "fit_ols",
    "gain_for_snr",
    "generate",
    "ingest_hour",
    "lag_scan",
    "pick_best",
    "load_candidates",
    "load_incidence",
    "load_pipeline_config",
    "merge_aliases",
    "normalize",
    "parse_line",
    "pearson",
    "run_pipeline",
    "select_articles",
    "shift_days",
    "to_daily",
]
