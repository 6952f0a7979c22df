"""Command-line surface for the pipeline.

Subcommands mirror the pipeline stages: build-dataset, make-templates,
fill, evaluate, stats. Every run writes a manifest recording its
configuration, inputs, outputs, and counts. Exit codes: 0 success,
1 usage error, 2 data error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import dataset
from .backends import Backend, ExtractiveBaseline, RemoteBackend
from .errors import BackendError, DataError, SlotsumError
from .estimators import TemplateBuilder
from .evalkit import EvaluationReport, GeneratedOutput, evaluate_corpus
from .slotfill import FillPlan, SlotFill, SummarizeResult, summarize
from .types import Config
from .validation import check_delta, check_ratios, check_slack, check_strategy

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3

BACKEND_URL_ENV = "SLOTSUM_BACKEND_URL"


@dataclass
class RunManifest:
    """What one command run did, for reproducibility audits."""

    command: str
    config: dict
    inputs: dict
    outputs: dict
    started_at: str
    duration_s: float
    counts: dict = field(default_factory=dict)
    seed: int | None = None

    def to_json(self) -> str:
        data = {
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": self.seed,
            "started_at": self.started_at,
            "duration_s": round(self.duration_s, 3),
            "counts": self.counts,
        }
        return json.dumps(data, ensure_ascii=False)


class _Timer:
    def __init__(self, command: str):
        self.command = command
        self.started_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self._t0 = time.perf_counter()

    def manifest(self, **kwargs) -> RunManifest:
        return RunManifest(
            command=self.command,
            started_at=self.started_at,
            duration_s=time.perf_counter() - self._t0,
            **kwargs,
        )


def _write_manifest(manifest: RunManifest, out_path: str) -> None:
    Path(out_path + ".manifest.json").write_text(
        manifest.to_json() + "\n", encoding="utf-8"
    )


def _read_corpus(path: str):
    with open(path, encoding="utf-8") as handle:
        return dataset.read_records(handle)


def _write_corpus(records, path: str) -> int:
    with open(path, "w", encoding="utf-8") as handle:
        return dataset.write_records(records, handle)


def _read_jsonl(path: str) -> list[dict]:
    rows: list[dict] = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path} line {lineno}: invalid JSON: {exc}")
            if not isinstance(data, dict):
                raise DataError(f"{path} line {lineno}: expected a JSON object")
            rows.append(data)
    return rows


def _make_backend(spec: str, delta: float, slack: int) -> Backend:
    """Resolve a --backend flag value, honoring the URL override env var."""
    env_url = os.environ.get(BACKEND_URL_ENV, "").strip()
    if spec == "builtin":
        return ExtractiveBaseline(delta=delta, slack=slack)
    if spec == "remote" or spec.startswith("remote:"):
        url = spec[len("remote:") :] if spec.startswith("remote:") else ""
        if env_url:
            url = env_url
        if not url:
            raise ValueError(
                "remote backend needs an address: --backend remote:URL "
                f"or the {BACKEND_URL_ENV} environment variable"
            )
        return RemoteBackend(url)
    raise ValueError(f"unknown backend {spec!r}; expected builtin or remote:URL")


# ---------------------------------------------------------------------------
# Subcommands


def cmd_build_dataset(args) -> int:
    timer = _Timer("build-dataset")
    ratios = check_ratios([float(r) for r in args.ratios.split(",")])
    threshold = args.threshold
    if not 0 < threshold <= 1:
        raise ValueError(f"--threshold must be in (0, 1], got {threshold}")

    left_rows = _read_jsonl(args.left)
    right_rows = _read_jsonl(args.right)
    try:
        summ_records = [
            dataset.SummSource(
                id=str(row["id"]),
                entity_name=row["entity_name"],
                documents=tuple(row["documents"]),
                summary=row["summary"],
            )
            for row in left_rows
        ]
        fact_records = [
            dataset.FactSource(
                id=str(row["id"]),
                abstract=row["abstract"],
                facts=tuple((f["key"], f["value"]) for f in row["facts"]),
            )
            for row in right_rows
        ]
    except (KeyError, TypeError) as exc:
        raise DataError(f"bad source record: {exc}")

    matches = dataset.match_entries(
        {r.id: r.summary for r in summ_records},
        {r.id: r.abstract for r in fact_records},
        threshold=threshold,
    )
    joined = dataset.join_corpora(summ_records, fact_records, matches)
    labeled = dataset.split_corpus(joined, ratios, seed=args.seed)
    written = _write_corpus(labeled, args.out)

    split_counts: dict[str, int] = {}
    for record in labeled:
        split_counts[record.split] = split_counts.get(record.split, 0) + 1
    manifest = timer.manifest(
        config={"threshold": threshold, "ratios": list(ratios)},
        inputs={"left": args.left, "right": args.right},
        outputs={"corpus": args.out},
        seed=args.seed,
        counts={
            "left": len(summ_records),
            "right": len(fact_records),
            "matched": len(matches),
            "joined": len(joined),
            "written": written,
            **split_counts,
        },
    )
    _write_manifest(manifest, args.out)
    print(f"wrote {written} records to {args.out}")
    return EXIT_OK


def cmd_make_templates(args) -> int:
    timer = _Timer("make-templates")
    records = _read_corpus(args.corpus)
    builder = TemplateBuilder(delta=args.delta, slack=args.slack)
    templated, reports = builder.transform_with_reports(records)
    written = _write_corpus(templated, args.out)

    manifest = timer.manifest(
        config={"delta": args.delta, "slack": args.slack},
        inputs={"corpus": args.corpus},
        outputs={"corpus": args.out},
        counts={
            "records": written,
            "replaced": sum(len(r.replaced) for r in reports),
            "skipped": sum(len(r.skipped_facts) for r in reports),
            "overlap_dropped": sum(len(r.overlap_dropped) for r in reports),
        },
    )
    _write_manifest(manifest, args.out)
    print(f"wrote {written} templated records to {args.out}")
    return EXIT_OK


def _fill_row(record_id: str, result: SummarizeResult) -> dict:
    return {
        "id": record_id,
        "summary": result.summary.text,
        "template": result.template.markup,
        "fills": {
            key: {"value": fill.value, "provenance": fill.provenance}
            for key, fill in result.fill_plan.fills.items()
        },
        "predictions": dict(result.predictions),
        "corrections": {
            key: {
                "value": corr.value,
                "external_key": corr.external_key,
                "score": round(corr.score, 6),
            }
            for key, corr in result.corrections.corrections.items()
        },
        "warnings": list(result.warnings),
    }


def cmd_fill(args) -> int:
    timer = _Timer("fill")
    config = Config(
        delta=check_delta(args.delta),
        span_window_slack=check_slack(args.slack),
        strategy=check_strategy(args.strategy),
    )
    backend = _make_backend(args.backend, config.delta, config.span_window_slack)
    records = _read_corpus(args.corpus)

    rows: list[dict] = []
    warning_count = 0
    for record in records:
        result = summarize(
            entity=record.entity,
            documents=record.documents,
            external=record.facts,
            backend=backend,
            config=config,
            template=record.template,
            recover_markup=args.recover_markup,
        )
        warning_count += len(result.warnings)
        rows.append(_fill_row(record.id, result))

    with open(args.out, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")

    manifest = timer.manifest(
        config={
            "strategy": config.strategy,
            "delta": config.delta,
            "slack": config.span_window_slack,
            "backend": backend.backend_id,
            "recover_markup": bool(args.recover_markup),
        },
        inputs={"corpus": args.corpus},
        outputs={"outputs": args.out},
        counts={"records": len(rows), "warnings": warning_count},
    )
    _write_manifest(manifest, args.out)
    print(f"wrote {len(rows)} filled summaries to {args.out}")
    return EXIT_OK


def _parse_fill_plan(data: dict) -> FillPlan | None:
    fills_data = data.get("fills")
    if fills_data is None:
        return None
    if not isinstance(fills_data, dict):
        raise DataError(f"output {data.get('id')!r}: 'fills' must be an object")
    try:
        fills = {
            key: SlotFill(value=entry["value"], provenance=entry["provenance"])
            for key, entry in fills_data.items()
        }
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"output {data.get('id')!r}: bad fill entry: {exc}")
    return FillPlan(fills)


def cmd_evaluate(args) -> int:
    timer = _Timer("evaluate")
    delta = check_delta(args.delta)
    records = _read_corpus(args.corpus)
    outputs: list[GeneratedOutput] = []
    for row in _read_jsonl(args.outputs):
        if "id" not in row or "summary" not in row:
            raise DataError("every output row needs 'id' and 'summary'")
        outputs.append(
            GeneratedOutput(
                record_id=str(row["id"]),
                summary=row["summary"],
                fill_plan=_parse_fill_plan(row),
            )
        )

    report: EvaluationReport = evaluate_corpus(records, outputs, delta=delta)
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    sys.stdout.write(report.format_table())

    manifest = timer.manifest(
        config={"delta": delta},
        inputs={"corpus": args.corpus, "outputs": args.outputs},
        outputs={"report": args.report},
        counts={"examples": report.example_count},
    )
    _write_manifest(manifest, args.report)
    return EXIT_OK


def cmd_stats(args) -> int:
    timer = _Timer("stats")
    records = _read_corpus(args.corpus)
    report = dataset.corpus_stats(records)
    sys.stdout.write(dataset.format_stats_table(report))

    manifest = timer.manifest(
        config={},
        inputs={"corpus": args.corpus},
        outputs={},
        counts={"examples": report.example_count, "slots": report.slot_count},
    )
    sys.stderr.write(manifest.to_json() + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    data errors, so usage problems exit 1 instead."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="slotsum",
        description="Facts-template summarization pipeline.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("build-dataset", help="join two source corpora into one")
    p.add_argument("--left", required=True, help="summarization-side JSONL")
    p.add_argument("--right", required=True, help="fact-table-side JSONL")
    p.add_argument("--out", required=True, help="output corpus JSONL")
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--ratios", default="0.8,0.1,0.1", help="train,valid,test")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("make-templates", help="attach golden templates")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--delta", type=float, default=0.8)
    p.add_argument("--slack", type=int, default=2)
    p.set_defaults(func=cmd_make_templates)

    p = sub.add_parser("fill", help="generate summaries by slot filling")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--strategy",
        default="discard",
        choices=("discard", "predict", "all_predict"),
    )
    p.add_argument("--backend", default="builtin", help="builtin or remote:URL")
    p.add_argument("--delta", type=float, default=0.8)
    p.add_argument("--slack", type=int, default=2)
    p.add_argument("--recover-markup", action="store_true")
    p.set_defaults(func=cmd_fill)

    p = sub.add_parser("evaluate", help="score generated summaries")
    p.add_argument("--corpus", required=True)
    p.add_argument("--outputs", required=True)
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--delta", type=float, default=0.8)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="print corpus statistics")
    p.add_argument("--corpus", required=True)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except BackendError as exc:
        print(f"slotsum: backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except SlotsumError as exc:
        print(f"slotsum: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"slotsum: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"slotsum: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
