"""Config parsing and the end-to-end run on generated corpora."""

from __future__ import annotations

import dataclasses
from datetime import timedelta
from pathlib import Path

import numpy as np
import pytest

from wikinowcast.errors import DataFormatError, MissingInputError
from wikinowcast.pipeline import (
    EXIT_OK,
    load_pipeline_config,
    run_pipeline,
)
from wikinowcast.synth import (
    RedirectFlip,
    SeasonalCurve,
    SignalArticle,
    SynthSpec,
    gain_for_snr,
    generate,
    local_title,
)

from .conftest import START, write_pipeline_config


def signal_spec(**overrides) -> SynthSpec:
    """One-language corpus with a clear planted lead-2 article."""
    curve = SeasonalCurve(baseline=50.0, amplitude=400.0, period_days=40.0)
    gain = gain_for_snr(5.0, 200.0, curve.value(np.arange(40)))
    base = dict(
        languages=("en",),
        articles_per_language=8,
        study_days=40,
        start_date=START,
        background_level=2000.0,
        background_noise_std=200.0,
        weekly_amplitude=0.10,
        incidence=curve,
        signal_articles=(
            SignalArticle("en", local_title("en", 3), gain, 2, 0.0),
        ),
        seed=7,
    )
    base.update(overrides)
    return SynthSpec(**base)


class TestLoadPipelineConfig:
    def test_full_parse(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(
            tmp_path / "run.ini", corpus, offset_min=-4, offset_max=4, top_k=5,
            store_dir=tmp_path / "store",
            aliases={"en": {"Merged_Title": ("A_title", "B_title")}},
        )
        cfg = load_pipeline_config(cfg_path)
        assert cfg.corpus_root == corpus.pagecounts_dir
        assert cfg.start == START
        assert cfg.end == START + timedelta(days=39)
        assert cfg.languages == ("en",)
        assert cfg.offsets == tuple(range(-4, 5))
        assert cfg.top_k == 5
        assert cfg.store_dir == tmp_path / "store"
        assert [c.name for c in cfg.contexts] == ["ctx-en"]
        assert cfg.contexts[0].incidence_path == corpus.incidence_paths["en"]
        # alias canonical names keep their case
        assert cfg.aliases == {"en": {"Merged_Title": ("A_title", "B_title")}}

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInputError):
            load_pipeline_config(tmp_path / "none.ini")

    @pytest.mark.parametrize("mutate, pattern", [
        (lambda t: t.replace("[corpus]", "[corpse]"), "corpus"),
        (lambda t: t.replace("[context:ctx-en]", "[not-a-context]"), "context"),
        (lambda t: t.replace("offset_max = 4", "offset_max = -9"), "offset"),
        (lambda t: t.replace("top_k = 10", "top_k = 0"), "top_k"),
    ])
    def test_structural_errors(self, tmp_path, mutate, pattern):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus,
                                         offset_min=-4, offset_max=4)
        cfg_path.write_text(mutate(cfg_path.read_text()))
        with pytest.raises(DataFormatError, match=pattern):
            load_pipeline_config(cfg_path)

    def test_end_before_start(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus)
        text = cfg_path.read_text().replace("end = 2012-02-10", "end = 2011-12-01")
        cfg_path.write_text(text)
        with pytest.raises(DataFormatError, match="before start"):
            load_pipeline_config(cfg_path)

    def test_bad_context_name(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus,
                                         context_names={"en": "has space"})
        with pytest.raises(DataFormatError, match="name"):
            load_pipeline_config(cfg_path)

    def test_empty_alias_members(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus)
        cfg_path.write_text(cfg_path.read_text() + "\n[aliases:en]\nCanon =\n")
        with pytest.raises(DataFormatError, match="alias"):
            load_pipeline_config(cfg_path)


class TestRunPipeline:
    def test_end_to_end_recovers_lead(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg = write_pipeline_config(tmp_path / "run.ini", corpus,
                                    offset_min=-4, offset_max=4)
        result = run_pipeline(cfg)
        assert result.exit_code == EXIT_OK
        scan = result.scans["ctx-en"]
        assert len(scan) == 9
        assert scan.best_offset in (1, 2, 3)
        assert scan.best_r_squared >= 0.8
        assert local_title("en", 3) in scan.model_at(scan.best_offset).titles

        out = tmp_path / "reports"
        lagscan_lines = (out / "ctx-en_lagscan.csv").read_text().splitlines()
        assert len(lagscan_lines) == 10  # header + 9 offsets
        nowcast_lines = (out / "ctx-en_nowcast.csv").read_text().splitlines()
        assert len(nowcast_lines) == 41
        assert (out / "ctx-en_summary.csv").exists()
        assert not (out / "transferability.csv").exists()

    def test_zero_only_scan(self, tmp_path):
        spec = signal_spec(signal_articles=(
            SignalArticle("en", local_title("en", 3),
                          gain_for_snr(5.0, 200.0,
                                       SeasonalCurve(50, 400, 40).value(np.arange(40))),
                          0, 0.0),
        ))
        corpus = generate(spec, tmp_path / "corpus")
        cfg = write_pipeline_config(tmp_path / "run.ini", corpus,
                                    offset_min=0, offset_max=0)
        result = run_pipeline(cfg)
        assert result.exit_code == EXIT_OK
        scan = result.scans["ctx-en"]
        assert scan.offsets == (0,)
        summary = (tmp_path / "reports" / "ctx-en_summary.csv").read_text()
        row = summary.splitlines()[1].split(",")
        header = summary.splitlines()[0].split(",")
        assert row[header.index("r2_offset_7")] == "n/a"
        assert row[header.index("best_offset")] == "0"
        assert (tmp_path / "reports" / "ctx-en_nowcast.csv").exists()

    def test_two_contexts_transfer(self, tmp_path):
        curve = SeasonalCurve(baseline=50.0, amplitude=400.0, period_days=40.0)
        gain = gain_for_snr(5.0, 200.0, curve.value(np.arange(40)))
        spec = SynthSpec(
            languages=("aa", "bb"),
            articles_per_language=6,
            study_days=40,
            start_date=START,
            background_level=2000.0,
            background_noise_std=200.0,
            weekly_amplitude=0.10,
            incidence=curve,
            signal_articles=(
                SignalArticle("aa", local_title("aa", 2), gain, 0, 0.0),
                SignalArticle("bb", local_title("bb", 2), gain, 0, 0.0),
            ),
            seed=11,
        )
        corpus = generate(spec, tmp_path / "corpus")
        cfg = write_pipeline_config(tmp_path / "run.ini", corpus,
                                    offset_min=-2, offset_max=2)
        result = run_pipeline(cfg)
        assert result.exit_code == EXIT_OK
        assert set(result.scans) == {"ctx-aa", "ctx-bb"}
        assert len(result.transfers) == 1
        score, loc_a, loc_b = result.transfers[0]
        assert {loc_a, loc_b} == {"aa-region", "bb-region"}
        assert score.shared_count == 6
        assert score.r_t is not None and -1.0 <= score.r_t <= 1.0

        lines = (tmp_path / "reports" / "transferability.csv").read_text().splitlines()
        assert len(lines) == 2
        assert lines[1].split(",")[1:3] == ["aa-region", "bb-region"]

    def test_missing_incidence(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg = write_pipeline_config(tmp_path / "run.ini", corpus,
                                    offset_min=0, offset_max=0)
        corpus.incidence_paths["en"].unlink()
        with pytest.raises(MissingInputError, match="incidence_en"):
            run_pipeline(cfg)

    def test_context_language_not_in_corpus(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus,
                                         offset_min=0, offset_max=0)
        text = cfg_path.read_text().replace("languages = en", "languages = de")
        cfg_path.write_text(text)
        with pytest.raises(DataFormatError, match="language"):
            run_pipeline(cfg_path)

    def test_store_round_trip_survives_corpus_loss(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg = write_pipeline_config(tmp_path / "run.ini", corpus,
                                    offset_min=-4, offset_max=4,
                                    store_dir=tmp_path / "store")
        first = run_pipeline(cfg)
        assert first.exit_code == EXIT_OK
        assert (tmp_path / "store" / "manifest.json").exists()
        snapshots = {
            p: p.read_bytes() for p in sorted((tmp_path / "reports").glob("*.csv"))
        }
        for gz in corpus.pagecounts_dir.glob("*.gz"):
            gz.unlink()
        second = run_pipeline(cfg)
        assert second.exit_code == EXIT_OK
        for p, body in snapshots.items():
            assert p.read_bytes() == body

    def test_store_range_mismatch(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus,
                                         offset_min=0, offset_max=0,
                                         store_dir=tmp_path / "store")
        run_pipeline(cfg_path)
        cfg = load_pipeline_config(cfg_path)
        cfg.end = cfg.end - timedelta(days=1)
        with pytest.raises(DataFormatError, match="delete"):
            run_pipeline(cfg)

    def test_aliases_merge_split_traffic(self, tmp_path):
        curve = SeasonalCurve(baseline=50.0, amplitude=400.0, period_days=40.0)
        gain = gain_for_snr(5.0, 200.0, curve.value(np.arange(40)))
        a_title = local_title("en", 2)
        b_title = "Topic_002_en_moved"
        spec = SynthSpec(
            languages=("en",),
            articles_per_language=6,
            study_days=40,
            start_date=START,
            background_level=2000.0,
            background_noise_std=200.0,
            weekly_amplitude=0.10,
            incidence=curve,
            signal_articles=(SignalArticle("en", a_title, gain, 0, 0.0),),
            redirect_flip=RedirectFlip("en", a_title, b_title, START + timedelta(days=20)),
            seed=13,
        )
        corpus = generate(spec, tmp_path / "corpus")
        merged_title = "Topic_002_en_merged"
        rows = [f"Topic {i:03d}\ten\t{local_title('en', i)}"
                for i in range(6) if i != 2]
        rows += [
            f"Half A\ten\t{a_title}",
            f"Half B\ten\t{b_title}",
            f"Merged\ten\t{merged_title}",
        ]
        corpus.candidates_path.write_text("".join(r + "\n" for r in rows))
        cfg = write_pipeline_config(
            tmp_path / "run.ini", corpus, offset_min=0, offset_max=0,
            aliases={"en": {merged_title: (a_title, b_title)}},
        )
        # merged = A + B exactly, so the design matrix is rank deficient
        with pytest.warns(UserWarning, match="minimum-norm"):
            result = run_pipeline(cfg)
        corrs = result.scans["ctx-en"].model_at(0).correlations
        assert abs(corrs[merged_title]) > abs(corrs[a_title])
        assert abs(corrs[merged_title]) > abs(corrs[b_title])
        assert corrs[merged_title] > 0.8

    def test_accepts_config_object(self, tmp_path):
        corpus = generate(signal_spec(), tmp_path / "corpus")
        cfg_path = write_pipeline_config(tmp_path / "run.ini", corpus,
                                         offset_min=0, offset_max=0)
        cfg = load_pipeline_config(cfg_path)
        result = run_pipeline(cfg)
        assert result.exit_code == EXIT_OK
