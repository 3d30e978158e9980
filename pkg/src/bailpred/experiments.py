"""The six retrieval/fine-tuning setups: prompt assembly, prediction parsing,
binary outcome mapping, and confidence scoring.

Setups vary along exactly two axes: which endpoint answers (base, ft1, ft2)
and whether retrieved statutory context is appended. Prediction prompts
mirror the extraction narrative format minus the outcome, reasoning, and
conditions (never leaked), and demand a leading 0/1 digit so decision-token
probabilities are well defined.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .extraction import outcome_phrase, render_case_narrative
from .gateway import EndpointConfig, Gateway, GatewayError, GenerationRequest, GenerationResult
from .records import BailType, CaseRecord, Outcome
from .statutes import ContextBlock, StatuteIndex, assemble_context

DECISION_TOKENS = ("0", "1")
DEFAULT_FAILURE_THRESHOLD = 0.10


class SetupId(str, Enum):
    S1_VANILLA = "S1_Vanilla"
    S2_VANILLA_CTX = "S2_VanillaCtx"
    S3_FT1 = "S3_FT1"
    S4_FT2 = "S4_FT2"
    S5_FT1_CTX = "S5_FT1Ctx"
    S6_FT2_CTX = "S6_FT2Ctx"


_WITH_CONTEXT = {SetupId.S2_VANILLA_CTX, SetupId.S5_FT1_CTX, SetupId.S6_FT2_CTX}
# Endpoint sharing is structural: S1/S2 -> base, S3/S5 -> ft1, S4/S6 -> ft2.
ENDPOINT_ROLE = {
    SetupId.S1_VANILLA: "base",
    SetupId.S2_VANILLA_CTX: "base",
    SetupId.S3_FT1: "ft1",
    SetupId.S5_FT1_CTX: "ft1",
    SetupId.S4_FT2: "ft2",
    SetupId.S6_FT2_CTX: "ft2",
}


@dataclass(frozen=True)
class ExperimentSetup:
    setup_id: SetupId
    endpoint: EndpointConfig

    @property
    def with_statute_context(self) -> bool:
        return self.setup_id in _WITH_CONTEXT


def make_setups(endpoints: dict[str, EndpointConfig]) -> dict[SetupId, ExperimentSetup]:
    """Bind the six setups to their role endpoints (base/ft1/ft2)."""
    missing = sorted({role for role in ENDPOINT_ROLE.values()} - set(endpoints))
    if missing:
        raise ValueError(f"missing endpoint entries for roles: {', '.join(missing)}")
    return {sid: ExperimentSetup(sid, endpoints[ENDPOINT_ROLE[sid]]) for sid in SetupId}


@dataclass(frozen=True)
class ConfidenceScore:
    p0: float
    p1: float

    def to_dict(self) -> dict:
        return {"p0": self.p0, "p1": self.p1}


def confidence_from_logprobs(logprobs: dict[str, float]) -> ConfidenceScore:
    """Normalize the two decision-token probabilities to sum to 100.

    Log-sum-exp stable, so logprob magnitudes up to the hundreds never
    overflow.
    """
    if "0" not in logprobs or "1" not in logprobs:
        raise ValueError("logprobs must contain entries for both '0' and '1'")
    l0, l1 = logprobs["0"], logprobs["1"]
    m = max(l0, l1)
    e0, e1 = math.exp(l0 - m), math.exp(l1 - m)
    total = e0 + e1
    return ConfidenceScore(p0=100.0 * e0 / total, p1=100.0 * e1 / total)


def map_outcome_to_binary(outcome: Outcome, bail_type: BailType) -> int:
    """Granted/Cancelled -> 1, NotGranted/NotCancelled -> 0, per family."""
    if bail_type in (BailType.REGULAR, BailType.ANTICIPATORY):
        if outcome == Outcome.GRANTED:
            return 1
        if outcome == Outcome.NOT_GRANTED:
            return 0
    else:
        if outcome == Outcome.CANCELLED:
            return 1
        if outcome == Outcome.NOT_CANCELLED:
            return 0
    raise ValueError(f"invalid pairing: {outcome.value} with {bail_type.value}")


# --- prompting ----------------------------------------------------------------

_PROMPT_HEADER = (
    "You are assisting an Indian High Court with a bail application. Decide the "
    "application from the case details below."
)
_PROMPT_DIRECTIVE = (
    "On the first line answer with a single digit: 1 if the application should "
    "succeed, 0 if it should fail (for a cancellation application, 1 means the "
    "earlier bail is cancelled). Then write:\n"
    "REASONING: <the legal reasoning for your decision>\n"
    "CONDITIONS: <conditions to impose if the application succeeds, else None>"
)


def build_prediction_prompt(record: CaseRecord, context: ContextBlock | None = None) -> str:
    """Case narrative plus optional statutory context plus the answer directive.

    The gold outcome, gold reasoning, and gold conditions never enter the
    prompt.
    """
    parts = [_PROMPT_HEADER, "CASE DETAILS:\n" + render_case_narrative(record)]
    if context is not None:
        rendered = context.render()
        parts.append("STATUTORY CONTEXT:\n" + (rendered if rendered else "(no sections retrieved)"))
    parts.append(_PROMPT_DIRECTIVE)
    return "\n\n".join(parts)


def prediction_template_hash() -> str:
    blob = _PROMPT_HEADER + "\n" + _PROMPT_DIRECTIVE
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def prompt_leaks_gold(record: CaseRecord, prompt: str) -> bool:
    """True when the prompt contains the gold outcome phrase or gold reasoning."""
    lowered = prompt.lower()
    if outcome_phrase(record.outcome).lower() in lowered:
        return True
    return record.reasoning.lower() in lowered


# --- prediction parsing ---------------------------------------------------------

class AmbiguousPredictionError(ValueError):
    """Reply from which no 0/1 decision can be read."""


_DIGIT_RE = re.compile(r"(?<!\d)[01](?!\d)")
_REASONING_LABEL_RE = re.compile(r"REASONING\s*:\s*", re.IGNORECASE)
_CONDITIONS_LABEL_RE = re.compile(r"CONDITIONS\s*:\s*", re.IGNORECASE)
# Phrase fallback; negation is checked before affirmation.
_PHRASE_CASCADE = [
    (re.compile(r"bail\s+(?:is\s+|was\s+)?not\s+granted|not\s+granted|reject|dismiss", re.IGNORECASE), 0),
    (re.compile(r"not\s+cancelled", re.IGNORECASE), 0),
    (re.compile(r"cancelled", re.IGNORECASE), 1),
    (re.compile(r"granted|allowed", re.IGNORECASE), 1),
]


def parse_prediction(generation: GenerationResult | str) -> tuple[int, str, str]:
    """Read (label, rationale, conditions) out of a prediction reply.

    The first standalone 0/1 digit is the label; failing that, a phrase
    cascade with negation precedence. Rationale and conditions split on the
    REASONING:/CONDITIONS: labels; a missing conditions section is empty.
    """
    text = generation.text if isinstance(generation, GenerationResult) else generation
    label = None
    label_end = 0
    m = _DIGIT_RE.search(text)
    if m:
        label = int(m.group())
        label_end = m.end()
    else:
        for pattern, value in _PHRASE_CASCADE:
            if pattern.search(text):
                label = value
                break
    if label is None:
        raise AmbiguousPredictionError(f"no decision found in reply: {text[:120]!r}")

    body = text[label_end:]
    conditions = ""
    cond_match = _CONDITIONS_LABEL_RE.search(body)
    if cond_match:
        conditions = body[cond_match.end():].strip()
        body = body[:cond_match.start()]
        if conditions.strip().strip(".").lower() in {"", "none", "n/a"}:
            conditions = ""
    reason_match = _REASONING_LABEL_RE.search(body)
    rationale = (body[reason_match.end():] if reason_match else body).strip()
    if not rationale:
        raise AmbiguousPredictionError("reply carries a decision but no rationale")
    return label, rationale, conditions


# --- running a setup -------------------------------------------------------------

@dataclass(frozen=True)
class Prediction:
    case_id: str
    setup_id: SetupId
    y_pred: int
    rationale: str
    bail_conditions: str
    confidence: ConfidenceScore

    def to_dict(self) -> dict:
        return {"case_id": self.case_id, "setup": self.setup_id.value,
                "y_pred": self.y_pred, "rationale": self.rationale,
                "bail_conditions": self.bail_conditions,
                "confidence": self.confidence.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "Prediction":
        return cls(case_id=d["case_id"], setup_id=SetupId(d["setup"]),
                   y_pred=int(d["y_pred"]), rationale=d["rationale"],
                   bail_conditions=d.get("bail_conditions", ""),
                   confidence=ConfidenceScore(**d["confidence"]))


@dataclass
class RunResult:
    setup_id: SetupId
    predictions: list[Prediction]
    item_errors: list[dict]
    manifest: dict

    @property
    def failed(self) -> bool:
        return self.manifest["status"] == "failed"


def _context_for(record: CaseRecord, index: StatuteIndex, budget: int) -> ContextBlock:
    return assemble_context(list(record.statutes), index, budget)


def render_setup_prompts(setup: ExperimentSetup, records: list[CaseRecord],
                         index: StatuteIndex | None,
                         budget: int) -> dict[str, str]:
    """All prompts a run would send, keyed by case id (used by --dry-run)."""
    prompts = {}
    for record in sorted(records, key=lambda r: r.case_id):
        context = None
        if setup.with_statute_context:
            context = _context_for(record, index or StatuteIndex(), budget)
        prompts[record.case_id] = build_prediction_prompt(record, context)
    return prompts


def run_setup(setup: ExperimentSetup, records: list[CaseRecord],
              index: StatuteIndex | None, gateway: Gateway, *,
              context_budget: int,
              temperature: float = 0.0,
              max_new_tokens: int = 512,
              failure_threshold: float = DEFAULT_FAILURE_THRESHOLD,
              jobs: int = 4) -> RunResult:
    """One prediction per record (or a recorded item error), ordered by case id.

    Item failures never abort the run; the run is marked failed when the item
    error rate exceeds `failure_threshold`.
    """
    if setup.with_statute_context and index is None:
        raise ValueError(f"{setup.setup_id.value} needs a statute index")
    ordered = sorted(records, key=lambda r: r.case_id)
    started = time.time()

    def work(record: CaseRecord):
        context = _context_for(record, index, context_budget) if setup.with_statute_context else None
        prompt = build_prediction_prompt(record, context)
        request = GenerationRequest(prompt=prompt, max_new_tokens=max_new_tokens,
                                    temperature=temperature, want_logprobs=True,
                                    candidate_tokens=DECISION_TOKENS)
        result = gateway.generate(setup.endpoint, request)
        label, rationale, conditions = parse_prediction(result)
        confidence = confidence_from_logprobs(result.decision_logprobs)
        return Prediction(case_id=record.case_id, setup_id=setup.setup_id,
                          y_pred=label, rationale=rationale,
                          bail_conditions=conditions, confidence=confidence)

    predictions: list[Prediction] = []
    item_errors: list[dict] = []
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = [(record.case_id, pool.submit(work, record)) for record in ordered]
        for case_id, future in futures:
            try:
                predictions.append(future.result())
            except (GatewayError, AmbiguousPredictionError, ValueError) as exc:
                item_errors.append({"case_id": case_id, "error": type(exc).__name__,
                                    "message": str(exc)})

    predictions.sort(key=lambda p: p.case_id)
    error_rate = len(item_errors) / len(ordered) if ordered else 0.0
    manifest = {
        "setup": setup.setup_id.value,
        "endpoint": {"id": setup.endpoint.id, "kind": setup.endpoint.kind,
                     "model": setup.endpoint.model},
        "with_statute_context": setup.with_statute_context,
        "prompt_template_hash": prediction_template_hash(),
        "context_budget": context_budget if setup.with_statute_context else None,
        "decoding": {"temperature": temperature, "max_new_tokens": max_new_tokens},
        "n_records": len(ordered),
        "n_predictions": len(predictions),
        "n_item_errors": len(item_errors),
        "error_rate": error_rate,
        "failure_threshold": failure_threshold,
        "status": "failed" if error_rate > failure_threshold else "ok",
        "started_at": started,
        "finished_at": time.time(),
    }
    return RunResult(setup_id=setup.setup_id, predictions=predictions,
                     item_errors=item_errors, manifest=manifest)


def write_prediction_set(predictions: list[Prediction], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for p in predictions:
            fh.write(json.dumps(p.to_dict(), ensure_ascii=False) + "\n")


def load_prediction_set(path: str | Path) -> list[Prediction]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Prediction.from_dict(json.loads(line)))
    return out
