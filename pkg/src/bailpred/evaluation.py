"""Per-setup scoring of prediction sets and assembly of the final table.

Outcomes are scored against the binary mapping of the gold outcome; the
rationale is scored against the gold reasoning, and predicted bail conditions
against the gold conditions (over the items that have gold conditions at
all). The final table carries eleven metric columns per setup: four outcome,
four reasoning, three conditions (conditions drop ROUGE-L).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import Prediction, SetupId, map_outcome_to_binary
from .metrics import (Embedder, JudgeFn, bertscore, bleu, classification_metrics,
                      geval_evaluate, meteor, rouge_l)
from .records import CaseRecord

METRIC_COLUMNS = [
    "outcome_accuracy", "outcome_precision", "outcome_recall", "outcome_f1",
    "reasoning_rouge_l", "reasoning_bleu", "reasoning_meteor", "reasoning_bertscore",
    "conditions_bleu", "conditions_meteor", "conditions_bertscore",
]


@dataclass
class SetupEvaluation:
    setup_id: SetupId
    n_items: int
    n_conditions_scored: int
    outcome_macro: dict
    outcome_binary: dict
    reasoning_means: dict[str, float]
    conditions_means: dict[str, float]
    per_item: list[dict] = field(default_factory=list)
    geval: dict | None = None

    def to_dict(self) -> dict:
        return {
            "setup": self.setup_id.value,
            "n_items": self.n_items,
            "n_conditions_scored": self.n_conditions_scored,
            "outcome": {"macro": self.outcome_macro, "binary-positive-1": self.outcome_binary},
            "reasoning_means": dict(self.reasoning_means),
            "conditions_means": dict(self.conditions_means),
            "geval": self.geval,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SetupEvaluation":
        return cls(
            setup_id=SetupId(d["setup"]),
            n_items=d["n_items"],
            n_conditions_scored=d["n_conditions_scored"],
            outcome_macro=d["outcome"]["macro"],
            outcome_binary=d["outcome"]["binary-positive-1"],
            reasoning_means=d["reasoning_means"],
            conditions_means=d["conditions_means"],
            geval=d.get("geval"),
        )


def _mean(values: list[float]) -> float:
    return sum(values) / len(values) if values else 0.0


def evaluate_setup(setup_id: SetupId, predictions: list[Prediction],
                   records_by_id: dict[str, CaseRecord], embedder: Embedder, *,
                   bertscore_baseline: float | None = None,
                   judge: JudgeFn | None = None) -> SetupEvaluation:
    """Score one prediction set against the gold corpus.

    Predictions without a matching gold record are ignored (they cannot be
    scored); both macro and binary-positive-1 outcome reports are computed.
    """
    scored = [(p, records_by_id[p.case_id]) for p in predictions
              if p.case_id in records_by_id]
    if not scored:
        raise ValueError(f"{setup_id.value}: no predictions matched gold records")

    pairs = [(p.y_pred, map_outcome_to_binary(r.outcome, r.bail_type)) for p, r in scored]
    outcome_macro = classification_metrics(pairs, "macro")
    outcome_binary = classification_metrics(pairs, "binary-positive-1")

    per_item: list[dict] = []
    reasoning_scores: dict[str, list[float]] = {"rouge_l": [], "bleu": [], "meteor": [],
                                                "bertscore": [], "bertscore_raw": []}
    conditions_scores: dict[str, list[float]] = {"bleu": [], "meteor": [],
                                                 "bertscore": [], "bertscore_raw": []}
    for (pred, record), (y_pred, y_gold) in zip(scored, pairs):
        row = {"case_id": pred.case_id, "y_pred": y_pred, "y_gold": y_gold,
               "confidence": pred.confidence.to_dict()}

        reasoning_bs = bertscore(pred.rationale, record.reasoning, embedder,
                                 baseline=bertscore_baseline)
        row["reasoning"] = {
            "rouge_l": rouge_l(pred.rationale, record.reasoning),
            "bleu": bleu(pred.rationale, record.reasoning),
            "meteor": meteor(pred.rationale, record.reasoning),
            "bertscore": reasoning_bs.f1,
            "bertscore_raw": reasoning_bs.raw_f1,
        }
        for key, value in row["reasoning"].items():
            reasoning_scores[key].append(value)

        if record.bail_conditions:
            cand = pred.bail_conditions or ""
            cond_bs = bertscore(cand, record.bail_conditions, embedder,
                                baseline=bertscore_baseline)
            row["conditions"] = {
                "bleu": bleu(cand, record.bail_conditions),
                "meteor": meteor(cand, record.bail_conditions),
                "bertscore": cond_bs.f1,
                "bertscore_raw": cond_bs.raw_f1,
            }
            for key, value in row["conditions"].items():
                conditions_scores[key].append(value)
        else:
            row["conditions"] = None
        per_item.append(row)

    geval_report = None
    if judge is not None:
        items = [(p.case_id, p.rationale, r.reasoning, r.incident_details)
                 for p, r in scored]
        geval_report = geval_evaluate(items, judge).to_dict()

    return SetupEvaluation(
        setup_id=setup_id,
        n_items=len(scored),
        n_conditions_scored=len(conditions_scores["bleu"]),
        outcome_macro=outcome_macro.to_dict(),
        outcome_binary=outcome_binary.to_dict(),
        reasoning_means={k: _mean(v) for k, v in reasoning_scores.items()},
        conditions_means={k: _mean(v) for k, v in conditions_scores.items()},
        per_item=per_item,
        geval=geval_report,
    )


@dataclass
class EvaluationTable:
    averaging: str
    rows: list[dict]

    def to_dict(self) -> dict:
        return {"averaging": self.averaging, "columns": ["setup"] + METRIC_COLUMNS,
                "rows": self.rows}

    def write_json(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n",
                        encoding="utf-8")

    def write_csv(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["setup"] + METRIC_COLUMNS)
            for row in self.rows:
                writer.writerow([row["setup"]] +
                                [f"{row[c]:.4f}" for c in METRIC_COLUMNS])


def assemble_table(evaluations: list[SetupEvaluation], averaging: str = "macro") -> EvaluationTable:
    """One row per evaluated setup, in setup order, with the 11 metric columns."""
    if not evaluations:
        raise ValueError("assemble_table requires at least one setup evaluation")
    by_id = {e.setup_id: e for e in evaluations}
    rows = []
    for sid in SetupId:
        if sid not in by_id:
            continue
        e = by_id[sid]
        outcome = e.outcome_macro if averaging == "macro" else e.outcome_binary
        rows.append({
            "setup": sid.value,
            "outcome_accuracy": outcome["accuracy"],
            "outcome_precision": outcome["precision"],
            "outcome_recall": outcome["recall"],
            "outcome_f1": outcome["f1"],
            "reasoning_rouge_l": e.reasoning_means["rouge_l"],
            "reasoning_bleu": e.reasoning_means["bleu"],
            "reasoning_meteor": e.reasoning_means["meteor"],
            "reasoning_bertscore": e.reasoning_means["bertscore"],
            "conditions_bleu": e.conditions_means["bleu"],
            "conditions_meteor": e.conditions_means["meteor"],
            "conditions_bertscore": e.conditions_means["bertscore"],
        })
    return EvaluationTable(averaging=averaging, rows=rows)
