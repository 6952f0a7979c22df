"""Estimator-style front doors for the pipeline.

``TemplateBuilder`` behaves like a stateless transformer: ``transform``
maps records to records carrying golden templates. ``SlotSummarizer``
exposes the fill pipeline through ``predict``. Both follow the usual
estimator conventions (keyword-only construction mirrored by
``get_params``/``set_params``, ``fit`` returning ``self``), so they
compose with pipeline and model-selection tooling.
"""

from __future__ import annotations

import dataclasses
from typing import Sequence

from sklearn.base import BaseEstimator, TransformerMixin

from .backends import Backend, ExtractiveBaseline
from .slotfill import SummarizeResult, summarize
from .templater import TemplateBuildReport, build_golden_template
from .types import Config, CorpusRecord
from .validation import check_delta, check_records, check_slack, check_strategy


class TemplateBuilder(BaseEstimator, TransformerMixin):
    """Derive a golden template for every record from its own summary
    and facts.

    Parameters
    ----------
    delta : float, default=0.8
        Minimum similarity for a fact value to claim a summary span.
    slack : int, default=2
        How far a candidate span's token count may differ from the
        value's.
    """

    def __init__(self, delta: float = 0.8, slack: int = 2):
        self.delta = delta
        self.slack = slack

    def fit(self, X=None, y=None):
        """No-op; template building learns nothing from data."""
        check_delta(self.delta)
        check_slack(self.slack)
        return self

    def transform(self, X: Sequence[CorpusRecord]) -> list[CorpusRecord]:
        """Return copies of the records with golden templates attached."""
        records, _ = self.transform_with_reports(X)
        return records

    def transform_with_reports(
        self, X: Sequence[CorpusRecord]
    ) -> tuple[list[CorpusRecord], list[TemplateBuildReport]]:
        """Like ``transform`` but also returns one build report per record."""
        delta = check_delta(self.delta)
        slack = check_slack(self.slack)
        records = check_records(X)
        config = Config(delta=delta, span_window_slack=slack)
        out: list[CorpusRecord] = []
        reports: list[TemplateBuildReport] = []
        for record in records:
            template, report = build_golden_template(
                record.summary, record.facts, config
            )
            unmatched = tuple(
                sorted(set(report.skipped_facts) | set(report.overlap_dropped))
            )
            out.append(
                dataclasses.replace(
                    record, template=template, unmatched_slots=unmatched
                )
            )
            reports.append(report)
        return out, reports


class SlotSummarizer(BaseEstimator):
    """Generate summaries by filling slot templates.

    Each record's own fact set plays the role of external knowledge, and
    its stored template is used when present (``use_golden_template``),
    otherwise the backend is asked to generate one.

    Parameters
    ----------
    strategy : {"discard", "predict", "all_predict"}, default="discard"
        How to combine corrected and predicted slot values.
    delta : float, default=0.8
        Similarity threshold for slot-key correction.
    slack : int, default=2
        Span slack for any template generation the backend performs.
    backend : Backend or None, default=None
        Generation backend; ``None`` selects the extractive baseline.
    use_golden_template : bool, default=True
        Prefer the record's stored template over backend generation.
    recover_markup : bool, default=False
        Parse backend template markup leniently instead of strictly.
    """

    def __init__(
        self,
        strategy: str = "discard",
        delta: float = 0.8,
        slack: int = 2,
        backend: Backend | None = None,
        use_golden_template: bool = True,
        recover_markup: bool = False,
    ):
        self.strategy = strategy
        self.delta = delta
        self.slack = slack
        self.backend = backend
        self.use_golden_template = use_golden_template
        self.recover_markup = recover_markup

    def _config(self) -> Config:
        return Config(
            delta=check_delta(self.delta),
            span_window_slack=check_slack(self.slack),
            strategy=check_strategy(self.strategy),
        )

    def _backend(self) -> Backend:
        if self.backend is not None:
            return self.backend
        return ExtractiveBaseline(delta=check_delta(self.delta))

    def fit(self, X=None, y=None):
        """No-op; validates parameters and returns self."""
        self._config()
        return self

    def predict(self, X: Sequence[CorpusRecord]) -> list[str]:
        """Summaries for the given records, one string each."""
        return [result.summary.text for result in self.predict_detailed(X)]

    def predict_detailed(self, X: Sequence[CorpusRecord]) -> list[SummarizeResult]:
        """Full pipeline artifacts for the given records."""
        config = self._config()
        backend = self._backend()
        records = check_records(X)
        results: list[SummarizeResult] = []
        for record in records:
            template = record.template if self.use_golden_template else None
            results.append(
                summarize(
                    entity=record.entity,
                    documents=record.documents,
                    external=record.facts,
                    backend=backend,
                    config=config,
                    template=template,
                    recover_markup=self.recover_markup,
                )
            )
        return results
