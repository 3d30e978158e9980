"""Command-line interface: extract, clean, stats, index-statutes, predict,
evaluate, report.

Every invocation works under <output_dir>/<run_id>/ with a copy of the config
it ran with; reusing --run-id chains stages into one run directory. Exit
codes: 0 success, 1 run failure, 2 configuration/usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from functools import partial
from pathlib import Path

from . import extraction
from .config import ConfigError, RunConfig, load_config
from .diagnostics import Diagnostics
from .evaluation import SetupEvaluation, assemble_table, evaluate_setup
from .experiments import (SetupId, load_prediction_set, make_setups,
                          render_setup_prompts, run_setup, write_prediction_set)
from .features import derive_features
from .gateway import Gateway, GenerationRequest
from .records import read_corpus, write_jsonl
from .stats import compute_stats, emit_csv, emit_json
from .statutes import StatuteIndex, ingest_statutes

_SETUP_ALIASES = {s.value.lower(): s for s in SetupId}
_SETUP_ALIASES.update({s.value.split("_")[0].lower(): s for s in SetupId})


def _parse_setups(value: str) -> list[SetupId]:
    if value.lower() == "all":
        return list(SetupId)
    chosen = []
    for part in value.split(","):
        key = part.strip().lower()
        if key not in _SETUP_ALIASES:
            raise argparse.ArgumentTypeError(
                f"unknown setup {part!r}; use S1..S6, full names, or 'all'")
        chosen.append(_SETUP_ALIASES[key])
    return chosen


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bailpred",
        description="Bail judgment pipeline: extraction, analytics, prediction, evaluation.")
    parser.add_argument("--config", required=True, help="path to the YAML run config")
    parser.add_argument("--run-id", default=None,
                        help="run directory name under output_dir (default: timestamp)")
    parser.add_argument("--jobs", type=int, default=None, help="override run.jobs")
    parser.add_argument("--json", action="store_true", dest="json_out",
                        help="emit a machine-readable JSON summary on stdout")

    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("extract", help="raw judgment texts -> candidate records + diagnostics")

    p_clean = sub.add_parser("clean", help="candidates -> corpus + discard log")
    p_clean.add_argument("--candidates", default=None, help="candidates JSONL (default: run dir)")

    p_stats = sub.add_parser("stats", help="corpus -> statistics report files")
    p_stats.add_argument("--corpus", default=None, help="corpus JSONL (default: config/run dir)")
    p_stats.add_argument("--include-withdrawn", action="store_true",
                         help="keep withdrawn applications in grant-rate denominators")

    sub.add_parser("index-statutes", help="statute source dir -> persisted index")

    p_predict = sub.add_parser("predict", help="run prediction setups over the corpus")
    p_predict.add_argument("--setup", type=_parse_setups, default=list(SetupId),
                           help="S1..S6, comma list, or 'all' (default)")
    p_predict.add_argument("--corpus", default=None)
    p_predict.add_argument("--dry-run", action="store_true",
                           help="render all prompts without touching any backend")

    p_eval = sub.add_parser("evaluate", help="score prediction sets against the gold corpus")
    p_eval.add_argument("--setup", type=_parse_setups, default=list(SetupId))
    p_eval.add_argument("--corpus", default=None)

    p_report = sub.add_parser("report", help="assemble the per-setup evaluation table")
    p_report.add_argument("--averaging", choices=["macro", "binary-positive-1"],
                          default=None, help="override evaluation.averaging")
    return parser


def _run_dir(config: RunConfig, args) -> Path:
    run_id = args.run_id or time.strftime("%Y%m%dT%H%M%S")
    run_dir = config.output_dir / run_id
    run_dir.mkdir(parents=True, exist_ok=True)
    (run_dir / "config_snapshot.yaml").write_text(config.source_text, encoding="utf-8")
    return run_dir


def _gateway(config: RunConfig, run_dir: Path) -> Gateway:
    return Gateway(cache_dir=config.output_dir / "cache",
                   log_path=run_dir / "gateway_log.jsonl",
                   run_id=run_dir.name)


def _emit(args, summary: dict) -> None:
    if args.json_out:
        print(json.dumps(summary, ensure_ascii=False))
    else:
        for key, value in summary.items():
            print(f"{key}: {value}")


def _corpus_path(config: RunConfig, run_dir: Path, override: str | None) -> Path:
    if override:
        return Path(override)
    if config.corpus_file is not None:
        return config.corpus_file
    return run_dir / "corpus.jsonl"


def _load_records(path: Path, run_dir: Path):
    if not path.exists():
        raise FileNotFoundError(f"corpus not found at {path}; run `clean` first or set corpus.corpus_file")
    records, diagnostics = read_corpus(path)
    if diagnostics.errors:
        diagnostics.write_jsonl(run_dir / "diagnostics" / "load_corpus.jsonl")
    return records


def _load_index(config: RunConfig, diagnostics: Diagnostics) -> StatuteIndex:
    if config.index_file is not None and config.index_file.exists():
        return StatuteIndex.load(config.index_file)
    if config.statute_dir is not None and config.statute_dir.exists():
        diagnostics.warning("predict", "statute index file missing; ingesting sources directly")
        return ingest_statutes(config.statute_dir, diagnostics)
    diagnostics.warning("predict", "no statute sources configured; every lookup will miss")
    return StatuteIndex()


# --- commands -----------------------------------------------------------------

def _iter_raw_files(raw_dir: Path):
    for path in sorted(raw_dir.rglob("*.txt")):
        court = path.parent.name if path.parent != raw_dir else "Unknown"
        yield path.stem, court, path


def cmd_extract(config: RunConfig, args) -> int:
    if config.raw_dir is None or not config.raw_dir.exists():
        print(f"error: corpus.raw_dir missing or not found: {config.raw_dir}", file=sys.stderr)
        return 1
    run_dir = _run_dir(config, args)
    gateway = _gateway(config, run_dir)
    endpoint = config.endpoints["extraction"]
    diagnostics = Diagnostics()
    rows = []
    n_ok = n_failed = 0
    for case_id, court, path in _iter_raw_files(config.raw_dir):
        raw_text = path.read_text(encoding="utf-8")
        try:
            prompt = extraction.build_extraction_prompt(raw_text, config.extraction_budget)
        except (ValueError, extraction.PromptBudgetError) as exc:
            diagnostics.error("extract", str(exc), case_id=case_id)
            rows.append({"case_id": case_id, "court": court, "error": "UnparseableOutput"})
            n_failed += 1
            continue

        extracted = None
        for attempt in range(1 + config.extraction_retries):
            # retries rephrase slightly so they are real requests, not cache hits
            request_prompt = prompt if attempt == 0 else (
                prompt + f"\nAttempt {attempt + 1}: respond with the JSON object only.")
            result = gateway.generate(endpoint, GenerationRequest(
                prompt=request_prompt, max_new_tokens=config.max_new_tokens,
                temperature=config.temperature))
            try:
                extracted = extraction.parse_extraction_output(result.text)
                break
            except extraction.UnparseableOutputError as exc:
                diagnostics.warning("extract", f"attempt {attempt + 1}: {exc}", case_id=case_id)
        if extracted is None:
            rows.append({"case_id": case_id, "court": court, "error": "UnparseableOutput"})
            n_failed += 1
            continue
        rows.append({"case_id": case_id, "court": court,
                     "case": extracted.case_narrative,
                     "outcome": extracted.outcome_text,
                     "reasoning": extracted.reasoning_text,
                     "date_of_arrest": extracted.arrest_text,
                     "date_of_judgement": extracted.judgment_text})
        n_ok += 1

    candidates_path = run_dir / "candidates.jsonl"
    with candidates_path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    diagnostics.write_jsonl(run_dir / "diagnostics" / "extract.jsonl")
    _emit(args, {"command": "extract", "run_dir": str(run_dir),
                 "texts": n_ok + n_failed, "parsed": n_ok, "unparseable": n_failed,
                 "candidates": str(candidates_path)})
    return 0


def cmd_clean(config: RunConfig, args) -> int:
    run_dir = _run_dir(config, args)
    candidates_path = Path(args.candidates) if args.candidates else run_dir / "candidates.jsonl"
    if not candidates_path.exists():
        print(f"error: candidates file not found: {candidates_path}", file=sys.stderr)
        return 1
    diagnostics = Diagnostics()
    kept = []
    discards = []
    with candidates_path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                diagnostics.error("clean", f"malformed candidate line: {exc}", line=lineno)
                continue
            case_id = str(row.get("case_id", f"line-{lineno}"))
            court = str(row.get("court", "Unknown"))
            if row.get("error"):
                decision = extraction.CleanDecision(
                    reason=extraction.DiscardReason.UNPARSEABLE_OUTPUT,
                    warnings=[f"carried from extract: {row['error']}"])
            else:
                extracted = extraction.ExtractedCase(
                    case_narrative=str(row.get("case", "")),
                    outcome_text=str(row.get("outcome", "")),
                    reasoning_text=str(row.get("reasoning", "")),
                    arrest_text=str(row.get("date_of_arrest", "")),
                    judgment_text=str(row.get("date_of_judgement", "")))
                decision = extraction.clean_filter(case_id, court, extracted)
            for warning in decision.warnings:
                diagnostics.warning("clean", warning, case_id=case_id)
            if decision.kept:
                kept.append(decision.record)
            else:
                discards.append({"case_id": case_id, "reason": decision.reason.value})

    corpus_path = run_dir / "corpus.jsonl"
    write_jsonl(kept, corpus_path)
    with (run_dir / "discards.jsonl").open("w", encoding="utf-8") as fh:
        for row in discards:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    reason_counts: dict[str, int] = {}
    for row in discards:
        reason_counts[row["reason"]] = reason_counts.get(row["reason"], 0) + 1
    reason_counts = dict(sorted(reason_counts.items()))
    (run_dir / "discard_summary.json").write_text(
        json.dumps(reason_counts, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    diagnostics.write_jsonl(run_dir / "diagnostics" / "clean.jsonl")
    _emit(args, {"command": "clean", "run_dir": str(run_dir), "kept": len(kept),
                 "discarded": len(discards), **{f"discard_{k}": v for k, v in reason_counts.items()},
                 "corpus": str(corpus_path)})
    return 0


def cmd_stats(config: RunConfig, args) -> int:
    run_dir = _run_dir(config, args)
    records = _load_records(_corpus_path(config, run_dir, args.corpus), run_dir)
    if not records:
        print("error: corpus is empty", file=sys.stderr)
        return 1
    diagnostics = Diagnostics()
    classifier = None
    if "crime_classifier" in config.endpoints:
        gateway = _gateway(config, run_dir)
        endpoint = config.endpoints["crime_classifier"]

        def classifier(text: str) -> str:
            prompt = ("Classify the principal crime in this incident as exactly one of: "
                      "Theft, Murder, Rape, Fraud, Drug, Assault, Kidnapping, "
                      "DomesticViolence, WhiteCollar, SexualAssault, Other.\n\n"
                      f"Incident: {text}\n\nCategory:")
            reply = gateway.generate(endpoint, GenerationRequest(prompt=prompt, max_new_tokens=8))
            return reply.text.strip().splitlines()[0] if reply.text.strip() else ""

    corpus = [(r, derive_features(r, classifier, diagnostics=diagnostics)) for r in records]
    include_withdrawn = args.include_withdrawn or config.include_withdrawn
    report = compute_stats(corpus, include_withdrawn=include_withdrawn)
    emit_json(report, run_dir / "stats.json")
    emit_csv(report, run_dir / "stats_csv")
    diagnostics.write_jsonl(run_dir / "diagnostics" / "stats.jsonl")
    _emit(args, {"command": "stats", "run_dir": str(run_dir), "records": len(records),
                 "overall_grant_rate": round(report.grant_rate_overall.value, 6),
                 "stats_json": str(run_dir / "stats.json")})
    return 0


def cmd_index_statutes(config: RunConfig, args) -> int:
    if config.statute_dir is None or not config.statute_dir.exists():
        print(f"error: statutes.source_dir missing or not found: {config.statute_dir}",
              file=sys.stderr)
        return 1
    run_dir = _run_dir(config, args)
    diagnostics = Diagnostics()
    index = ingest_statutes(config.statute_dir, diagnostics)
    index_path = config.index_file or (config.output_dir / "statute_index.json")
    index.save(index_path)
    diagnostics.write_jsonl(run_dir / "diagnostics" / "index_statutes.jsonl")
    _emit(args, {"command": "index-statutes", "sections": len(index),
                 "warnings": len(diagnostics.warnings), "errors": len(diagnostics.errors),
                 "index": str(index_path)})
    return 0


def cmd_predict(config: RunConfig, args) -> int:
    run_dir = _run_dir(config, args)
    records = _load_records(_corpus_path(config, run_dir, args.corpus), run_dir)
    if not records:
        print("error: corpus is empty", file=sys.stderr)
        return 1
    diagnostics = Diagnostics()
    index = _load_index(config, diagnostics)
    setups = make_setups(config.endpoints)
    jobs = args.jobs or config.jobs
    predictions_dir = run_dir / "predictions"
    predictions_dir.mkdir(parents=True, exist_ok=True)

    if args.dry_run:
        prompts_dir = run_dir / "prompts"
        total = 0
        for sid in args.setup:
            setup_dir = prompts_dir / sid.value
            setup_dir.mkdir(parents=True, exist_ok=True)
            prompts = render_setup_prompts(setups[sid], records, index, config.context_budget)
            for case_id, prompt in prompts.items():
                (setup_dir / f"{case_id}.txt").write_text(prompt, encoding="utf-8")
            total += len(prompts)
        _emit(args, {"command": "predict", "dry_run": True, "run_dir": str(run_dir),
                     "prompts_rendered": total})
        return 0

    gateway = _gateway(config, run_dir)
    any_failed = False
    summary: dict = {"command": "predict", "run_dir": str(run_dir)}
    for sid in args.setup:
        result = run_setup(setups[sid], records, index, gateway,
                           context_budget=config.context_budget,
                           temperature=config.temperature,
                           max_new_tokens=config.max_new_tokens,
                           failure_threshold=config.failure_threshold,
                           jobs=jobs)
        write_prediction_set(result.predictions, predictions_dir / f"{sid.value}.jsonl")
        (predictions_dir / f"{sid.value}_manifest.json").write_text(
            json.dumps(result.manifest, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
        if result.item_errors:
            with (predictions_dir / f"{sid.value}_errors.jsonl").open("w", encoding="utf-8") as fh:
                for row in result.item_errors:
                    fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        summary[sid.value] = f"{len(result.predictions)} predictions, {len(result.item_errors)} errors"
        any_failed = any_failed or result.failed
    diagnostics.write_jsonl(run_dir / "diagnostics" / "predict.jsonl")
    summary["status"] = "failed" if any_failed else "ok"
    _emit(args, summary)
    return 1 if any_failed else 0


def cmd_evaluate(config: RunConfig, args) -> int:
    run_dir = _run_dir(config, args)
    records = _load_records(_corpus_path(config, run_dir, args.corpus), run_dir)
    records_by_id = {r.case_id: r for r in records}
    gateway = _gateway(config, run_dir)
    diagnostics = Diagnostics()
    embedder = partial(gateway.embed, config.endpoints["embedder"])
    judge = None
    if config.geval:
        judge_endpoint = config.endpoints["judge"]

        def judge(explanation, reference, case_summary):
            return gateway.judge(judge_endpoint, explanation, reference,
                                 case_summary, diagnostics=diagnostics)

    evaluations_dir = run_dir / "evaluations"
    evaluations_dir.mkdir(parents=True, exist_ok=True)
    summary: dict = {"command": "evaluate", "run_dir": str(run_dir)}
    n_done = 0
    for sid in args.setup:
        pred_path = run_dir / "predictions" / f"{sid.value}.jsonl"
        if not pred_path.exists():
            continue
        predictions = load_prediction_set(pred_path)
        evaluation = evaluate_setup(sid, predictions, records_by_id, embedder,
                                    bertscore_baseline=config.bertscore_baseline,
                                    judge=judge)
        (evaluations_dir / f"{sid.value}.json").write_text(
            json.dumps(evaluation.to_dict(), ensure_ascii=False, indent=2) + "\n",
            encoding="utf-8")
        with (evaluations_dir / f"{sid.value}_items.jsonl").open("w", encoding="utf-8") as fh:
            for row in evaluation.per_item:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        summary[sid.value] = f"{evaluation.n_items} items"
        n_done += 1
    if n_done == 0:
        print("error: no prediction sets found to evaluate; run `predict` first", file=sys.stderr)
        return 1
    diagnostics.write_jsonl(run_dir / "diagnostics" / "evaluate.jsonl")
    _emit(args, summary)
    return 0


def cmd_report(config: RunConfig, args) -> int:
    run_dir = _run_dir(config, args)
    evaluations_dir = run_dir / "evaluations"
    evaluations = []
    for sid in SetupId:
        path = evaluations_dir / f"{sid.value}.json"
        if path.exists():
            evaluations.append(SetupEvaluation.from_dict(
                json.loads(path.read_text(encoding="utf-8"))))
    if not evaluations:
        print("error: no setup evaluations found; run `evaluate` first", file=sys.stderr)
        return 1
    table = assemble_table(evaluations, averaging=args.averaging or config.averaging)
    table.write_csv(run_dir / "evaluation_table.csv")
    table.write_json(run_dir / "evaluation_table.json")
    _emit(args, {"command": "report", "run_dir": str(run_dir), "rows": len(table.rows),
                 "table_csv": str(run_dir / "evaluation_table.csv")})
    return 0


_COMMANDS = {
    "extract": cmd_extract,
    "clean": cmd_clean,
    "stats": cmd_stats,
    "index-statutes": cmd_index_statutes,
    "predict": cmd_predict,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](config, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
