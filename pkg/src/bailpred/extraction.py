"""One-shot extraction prompting, lenient pseudo-JSON parsing, and cleaning rules.

The extraction model is asked to fill a fixed narrative template; everything
here is anchored to that template's sentence stems. Real model output drifts
(single quotes, trailing commas, prose around the fence), so parsing is
deliberately forgiving: the only hard failure is not finding the five
top-level fields at all.
"""

from __future__ import annotations

import ast
import hashlib
import json
import re
import warnings
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from importlib.resources import files

from .records import BailType, CaseRecord, Outcome, StatuteCitation
from .textutil import estimate_tokens

DEFAULT_RAW_TOKEN_BUDGET = 8192

_TARGET_PLACEHOLDER = "< case to be processed >"


class UnparseableOutputError(ValueError):
    """Model output with no recoverable five-field object."""


class NarrativeParseError(ValueError):
    """Narrative text from which no bail type can be recovered."""


class PromptBudgetError(ValueError):
    def __init__(self, estimated: int, budget: int):
        self.estimated = estimated
        self.budget = budget
        super().__init__(
            f"judgment text estimates to {estimated} tokens, over the {budget}-token "
            f"budget; truncate by at least {estimated - budget} tokens before retrying")


class DiscardReason(str, Enum):
    MISSING_INCIDENT = "MissingIncident"
    MISSING_STATUTES = "MissingStatutes"
    MISSING_REASONING = "MissingReasoning"
    MISSING_OUTCOME = "MissingOutcome"
    UNPARSEABLE_OUTPUT = "UnparseableOutput"


_template_cache: str | None = None


def prompt_template() -> str:
    global _template_cache
    if _template_cache is None:
        _template_cache = files("bailpred.assets").joinpath("extraction_prompt.txt").read_text("utf-8")
    return _template_cache


def prompt_template_id() -> str:
    return hashlib.sha256(prompt_template().encode("utf-8")).hexdigest()[:16]


def build_extraction_prompt(raw_text: str,
                            max_raw_tokens: int = DEFAULT_RAW_TOKEN_BUDGET) -> str:
    """Render the one-shot extraction prompt around `raw_text`.

    The budget applies to the judgment text and is inclusive: a text that
    estimates to exactly `max_raw_tokens` still renders.
    """
    if not raw_text.strip():
        raise ValueError("raw judgment text must be non-empty")
    estimated = estimate_tokens(raw_text)
    if estimated > max_raw_tokens:
        raise PromptBudgetError(estimated, max_raw_tokens)
    return prompt_template().replace(_TARGET_PLACEHOLDER, raw_text)


@dataclass(frozen=True)
class ExtractedCase:
    """The five top-level fields of a successfully parsed extraction reply."""
    case_narrative: str
    outcome_text: str
    reasoning_text: str
    arrest_text: str
    judgment_text: str


_FENCE_RE = re.compile(r"```(?:json|python)?\s*(.*?)```", re.DOTALL | re.IGNORECASE)
_TRIPLE_RE = re.compile(r'"""(.*?)"""|\'\'\'(.*?)\'\'\'', re.DOTALL)
_TRAILING_COMMA_RE = re.compile(r",\s*(?=[}\]])")


def _balanced_object(text: str) -> str | None:
    start = text.find("{")
    if start < 0:
        return None
    depth = 0
    for i in range(start, len(text)):
        if text[i] == "{":
            depth += 1
        elif text[i] == "}":
            depth -= 1
            if depth == 0:
                return text[start:i + 1]
    return text[start:]  # unterminated; let the repair passes try anyway


def _repair_for_json(text: str) -> str:
    text = _TRIPLE_RE.sub(lambda m: json.dumps(m.group(1) or m.group(2) or ""), text)
    text = _TRAILING_COMMA_RE.sub("", text)
    return text


def _try_parse_object(candidate: str) -> dict | None:
    for attempt in (candidate, _repair_for_json(candidate)):
        try:
            obj = json.loads(attempt)
            if isinstance(obj, dict):
                return obj
        except Exception:
            pass
    # Python-dict-shaped output: single quotes, triple quotes, None literals.
    # literal_eval compiles its input, so silence escape-sequence warnings
    # that arbitrary model output would otherwise emit.
    for attempt in (candidate, _TRAILING_COMMA_RE.sub("", candidate)):
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                obj = ast.literal_eval(attempt)
            if isinstance(obj, dict):
                return obj
        except Exception:
            pass
    return None


def _coerce_text(value) -> str:
    if value is None:
        return "None"
    if isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return "; ".join(_coerce_text(v) for v in value)
    return str(value)


_FIELD_ALIASES = {
    "case": "case",
    "outcome": "outcome",
    "reasoning": "reasoning",
    "date_of_arrest": "date_of_arrest",
    "date_of_judgement": "date_of_judgement",
    "date_of_judgment": "date_of_judgement",
}
_REQUIRED_FIELDS = ("case", "outcome", "reasoning", "date_of_arrest", "date_of_judgement")


def parse_extraction_output(model_output: str) -> ExtractedCase:
    """Locate and parse the model's pseudo-JSON reply.

    Prefers a fenced block (any prose before it is ignored), falls back to the
    first brace-balanced object. Tolerates single quotes, trailing commas, and
    triple-quoted strings. Raises UnparseableOutputError when no object with
    the five top-level fields can be recovered.
    """
    if not isinstance(model_output, str):
        raise UnparseableOutputError("model output is not text")
    candidates = []
    for m in _FENCE_RE.finditer(model_output):
        inner = m.group(1)
        if "{" in inner:
            obj = _balanced_object(inner)
            if obj:
                candidates.append(obj)
    whole = _balanced_object(model_output)
    if whole:
        candidates.append(whole)
    if not candidates:
        raise UnparseableOutputError("no JSON object found in model output")

    parsed = None
    for candidate in candidates:
        parsed = _try_parse_object(candidate)
        if parsed is not None:
            break
    if parsed is None:
        raise UnparseableOutputError("could not parse any JSON object in model output")

    found: dict[str, str] = {}
    for key, value in parsed.items():
        canonical = _FIELD_ALIASES.get(str(key).strip().lower())
        if canonical and canonical not in found:
            found[canonical] = _coerce_text(value)
    missing = [f for f in _REQUIRED_FIELDS if f not in found]
    if missing:
        raise UnparseableOutputError(f"missing top-level fields: {', '.join(missing)}")
    return ExtractedCase(
        case_narrative=found["case"],
        outcome_text=found["outcome"],
        reasoning_text=found["reasoning"],
        arrest_text=found["date_of_arrest"],
        judgment_text=found["date_of_judgement"],
    )


# --- narrative parsing ------------------------------------------------------

# The past-record stem anchors on its full fixed sentence via lookahead so a
# bare "There are" inside free text cannot hijack the slice boundary.
_STEMS = [
    ("bail_type", re.compile(r"Applicant applied for")),
    ("is_withdrawal", re.compile(r"Is it a withdrawal application\?")),
    ("age", re.compile(r"Age of the accused is")),
    ("health_issues", re.compile(r"Health issues for the accused are")),
    ("past_record", re.compile(r"There are(?=\s+(?:no|some)\s+past criminal records)")),
    ("statutes", re.compile(r"Statutes mentioned in the judge?ment are")),
    ("precedents", re.compile(r"Precedents mentioned in the judge?ment are")),
    ("incident", re.compile(r"Details of the incident are")),
    ("arguments_supporting", re.compile(r"Arguments supporting the bail application are")),
    ("arguments_opposing", re.compile(r"Arguments opposing the bail application are")),
]


@dataclass
class NarrativeFields:
    bail_type: BailType
    is_withdrawal: bool = False
    age: int | None = None
    health_issues: str | None = None
    has_past_record: bool = False
    statutes: list[StatuteCitation] = field(default_factory=list)
    precedents: tuple[str, ...] = ()
    incident_details: str | None = None
    arguments_supporting: str | None = None
    arguments_opposing: str | None = None
    warnings: list[str] = field(default_factory=list)


def _slice_stems(text: str) -> dict[str, str]:
    """Cut the narrative into per-stem value slices.

    Values are free text and may contain periods, so each value runs from the
    end of its stem to the start of the next recognized stem.
    """
    positions = []
    cursor = 0
    for name, stem in _STEMS:
        m = stem.search(text, cursor)
        if m is None:
            continue
        positions.append((name, m.start(), m.end()))
        cursor = m.end()
    slices = {}
    for i, (name, start, value_start) in enumerate(positions):
        end = positions[i + 1][1] if i + 1 < len(positions) else len(text)
        value = text[value_start:end].strip()
        if value.endswith("."):
            value = value[:-1]
        slices[name] = value.strip()
    return slices


def _is_none_value(value: str | None) -> bool:
    return value is None or value.strip().strip(".").lower() in {"", "none", "not provided", "nan", "n/a"}


def parse_case_narrative(case_narrative: str) -> NarrativeFields:
    """Recover structured attributes from the filled narrative template.

    A missing stem leaves the attribute absent with a field-level warning; an
    unrecoverable bail type is a record-level failure.
    """
    if not case_narrative.strip():
        raise NarrativeParseError("empty case narrative")
    slices = _slice_stems(case_narrative)
    warnings = []

    raw_type = slices.get("bail_type", "")
    norm_type = raw_type.lower()
    if "anticipatory" in norm_type:
        bail_type = BailType.ANTICIPATORY
    elif "cancell" in norm_type:
        bail_type = BailType.CANCELLATION
    elif "regular" in norm_type:
        bail_type = BailType.REGULAR
    else:
        raise NarrativeParseError(f"bail type unrecoverable from {raw_type!r}")

    result = NarrativeFields(bail_type=bail_type, warnings=warnings)

    if "is_withdrawal" in slices:
        result.is_withdrawal = slices["is_withdrawal"].strip().lower().startswith("yes")
    else:
        warnings.append("withdrawal sentence absent; assuming not a withdrawal")

    if "age" in slices:
        value = slices["age"]
        if not _is_none_value(value):
            m = re.search(r"\d{1,3}", value)
            if m:
                result.age = int(m.group())
            else:
                warnings.append(f"age not numeric: {value!r}")
    else:
        warnings.append("age sentence absent")

    if "health_issues" in slices:
        if not _is_none_value(slices["health_issues"]):
            result.health_issues = slices["health_issues"]
    else:
        warnings.append("health sentence absent")

    if "past_record" in slices:
        m = re.match(r"\s*(no|some)\b", slices["past_record"], re.IGNORECASE)
        if m:
            result.has_past_record = m.group(1).lower() == "some"
        else:
            warnings.append(f"past-record sentence unrecognized: {slices['past_record']!r}")
    else:
        warnings.append("past-record sentence absent; assuming no record")

    if "statutes" in slices:
        result.statutes = parse_statute_citations(slices["statutes"], warnings)
    else:
        warnings.append("statutes sentence absent")

    if "precedents" in slices:
        result.precedents = _parse_precedents(slices["precedents"])
    else:
        warnings.append("precedents sentence absent")

    for attr, key in [("incident_details", "incident"),
                      ("arguments_supporting", "arguments_supporting"),
                      ("arguments_opposing", "arguments_opposing")]:
        if key in slices:
            if not _is_none_value(slices[key]):
                setattr(result, attr, slices[key])
        else:
            warnings.append(f"{key} sentence absent")
    return result


def _parse_precedents(value: str) -> tuple[str, ...]:
    if _is_none_value(value):
        return ()
    inner = value.strip()
    if inner.startswith("[") and inner.endswith("]"):
        inner = inner[1:-1]
    parts = [p.strip() for p in inner.split(";")]
    return tuple(p for p in parts if p)


_SECTION_ID = r"\d+[A-Za-z]*(?:\([^()\s,]+\))*"
_PROSE_CITATION_RE = re.compile(
    rf"Section\s+(?P<sec>{_SECTION_ID})\s+"
    r"(?P<act>(?:[A-Z][\w.&/'-]*\s+)*?Act(?:,?\s+\d{4})?|[A-Z][\w.&/'-]*)")
_ITEM_RE = re.compile(rf"^Section\s+(?P<sec>{_SECTION_ID})\s+(?P<act>.+)$")


def parse_statute_citations(text: str, warnings: list[str] | None = None) -> list[StatuteCitation]:
    """Parse "Section <id> <act>" items out of a bracketed list or prose.

    Preserves parenthetical sub-clauses in section ids, skips unparseable
    fragments with a warning, and deduplicates exact repeats keeping
    first-seen order.
    """
    if _is_none_value(text):
        return []
    text = text.strip()
    found: list[StatuteCitation] = []
    seen: set[tuple[str, str]] = set()

    def add(section: str, act: str) -> None:
        citation = StatuteCitation(section.strip(), act.strip().rstrip(".,;"))
        key = (citation.section, citation.act)
        if citation.section and citation.act and key not in seen:
            seen.add(key)
            found.append(citation)

    if text.startswith("[") and text.endswith("]"):
        for item in text[1:-1].split(","):
            item = item.strip()
            if not item:
                continue
            m = _ITEM_RE.match(item)
            if m:
                add(m.group("sec"), m.group("act"))
            elif warnings is not None:
                warnings.append(f"unparseable statute item: {item!r}")
        return found

    for m in _PROSE_CITATION_RE.finditer(text):
        add(m.group("sec"), m.group("act"))
    if not found and warnings is not None:
        warnings.append(f"no statute citations recognized in: {text!r}")
    return found


_MONTHS = {name.lower(): i for i, name in enumerate(
    ["January", "February", "March", "April", "May", "June", "July",
     "August", "September", "October", "November", "December"], start=1)}
_MONTHS.update({name[:3].lower(): i for name, i in
                [(k.capitalize(), v) for k, v in _MONTHS.items()]})

_DMY_RE = re.compile(r"^(\d{1,2})[-/.](\d{1,2})[-/.](\d{4})$")
_YMD_RE = re.compile(r"^(\d{4})[-/.](\d{1,2})[-/.](\d{1,2})$")
_D_MONTH_Y_RE = re.compile(r"^(\d{1,2})(?:st|nd|rd|th)?\s+(?:day\s+of\s+)?([A-Za-z]+),?\s+(\d{4})$")
_MONTH_D_Y_RE = re.compile(r"^([A-Za-z]+)\s+(\d{1,2})(?:st|nd|rd|th)?,?\s+(\d{4})$")


def parse_date(text: str, warnings: list[str] | None = None) -> date | None:
    """Parse DD-MM-YYYY, DD/MM/YYYY, "DD Month YYYY", or ISO dates.

    Ambiguous numeric dates read day-first (Indian court convention).
    "not provided"/empty yields None silently; anything else unrecognized
    yields None with a warning, never an error.
    """
    if _is_none_value(text):
        return None
    value = text.strip().strip(".").strip()

    def build(y: int, m: int, d: int) -> date | None:
        try:
            return date(y, m, d)
        except ValueError:
            return None

    parsed = None
    m = _DMY_RE.match(value)
    if m:
        d, mo, y = (int(g) for g in m.groups())
        parsed = build(y, mo, d)
        if parsed is None and d <= 12:
            parsed = build(y, d, mo)  # month-first slip, e.g. 04-31-2020 never valid day-first
    if parsed is None:
        m = _YMD_RE.match(value)
        if m:
            y, mo, d = (int(g) for g in m.groups())
            parsed = build(y, mo, d)
    if parsed is None:
        m = _D_MONTH_Y_RE.match(value)
        if m and m.group(2).lower() in _MONTHS:
            parsed = build(int(m.group(3)), _MONTHS[m.group(2).lower()], int(m.group(1)))
    if parsed is None:
        m = _MONTH_D_Y_RE.match(value)
        if m and m.group(1).lower() in _MONTHS:
            parsed = build(int(m.group(3)), _MONTHS[m.group(1).lower()], int(m.group(2)))
    if parsed is None and warnings is not None:
        warnings.append(f"unrecognized date: {text!r}")
    return parsed


# --- outcome text -----------------------------------------------------------

_OUTCOME_STEM_RE = re.compile(r"The outcome of the case is\s+(.+?)(?:\.|$)", re.IGNORECASE | re.DOTALL)
_CONDITIONS_STEM_RE = re.compile(r"The bail conditions are\s+(.+)$", re.IGNORECASE | re.DOTALL)
_EXACT_PHRASES = [
    ("bail not granted", "not_granted"),
    ("bail not cancelled", "not_cancelled"),
    ("bail granted", "granted"),
    ("bail cancelled", "cancelled"),
]
# Cascade order matters: negation before affirmation. Generic
# application-success wording ("allowed"/"dismissed") gets its own labels so
# it can be read per bail-type family, while explicit granted/cancelled
# wording stays family-strict.
_CASCADE = [
    (re.compile(r"not\s+granted", re.IGNORECASE), "not_granted"),
    (re.compile(r"not\s+cancelled", re.IGNORECASE), "not_cancelled"),
    (re.compile(r"reject|dismiss|refus|declin", re.IGNORECASE), "application_dismissed"),
    (re.compile(r"cancelled", re.IGNORECASE), "cancelled"),
    (re.compile(r"granted", re.IGNORECASE), "granted"),
    (re.compile(r"allowed", re.IGNORECASE), "application_allowed"),
]

_LABEL_TO_OUTCOME = {
    (BailType.REGULAR, "granted"): Outcome.GRANTED,
    (BailType.REGULAR, "not_granted"): Outcome.NOT_GRANTED,
    (BailType.REGULAR, "application_allowed"): Outcome.GRANTED,
    (BailType.REGULAR, "application_dismissed"): Outcome.NOT_GRANTED,
    (BailType.ANTICIPATORY, "granted"): Outcome.GRANTED,
    (BailType.ANTICIPATORY, "not_granted"): Outcome.NOT_GRANTED,
    (BailType.ANTICIPATORY, "application_allowed"): Outcome.GRANTED,
    (BailType.ANTICIPATORY, "application_dismissed"): Outcome.NOT_GRANTED,
    (BailType.CANCELLATION, "cancelled"): Outcome.CANCELLED,
    (BailType.CANCELLATION, "not_cancelled"): Outcome.NOT_CANCELLED,
    (BailType.CANCELLATION, "application_allowed"): Outcome.CANCELLED,
    (BailType.CANCELLATION, "application_dismissed"): Outcome.NOT_CANCELLED,
}


def parse_outcome_text(outcome_text: str) -> tuple[str | None, str | None]:
    """Return (outcome label, bail conditions text or None).

    The label is one of granted/not_granted/cancelled/not_cancelled or None
    when no outcome can be read. Exact template phrases are tried before the
    keyword cascade.
    """
    conditions = None
    m = _CONDITIONS_STEM_RE.search(outcome_text)
    if m:
        value = m.group(1).strip()
        if value.endswith("."):
            value = value[:-1]
        if not _is_none_value(value):
            conditions = value.strip()
        outcome_text = outcome_text[:m.start()]

    label = None
    m = _OUTCOME_STEM_RE.search(outcome_text)
    scope = m.group(1) if m else outcome_text
    lowered = scope.lower()
    for phrase, phrase_label in _EXACT_PHRASES:
        if phrase in lowered:
            label = phrase_label
            break
    if label is None:
        for pattern, cascade_label in _CASCADE:
            if pattern.search(scope):
                label = cascade_label
                break
    return label, conditions


def parse_reasoning_text(reasoning_text: str) -> str | None:
    m = re.search(r"The reasoning for the judge?ment is\s+(.+)$",
                  reasoning_text, re.IGNORECASE | re.DOTALL)
    value = m.group(1) if m else reasoning_text
    value = value.strip()
    if value.endswith("."):
        value = value[:-1]
    return None if _is_none_value(value) else value.strip()


# --- cleaning ----------------------------------------------------------------

@dataclass
class CleanDecision:
    record: CaseRecord | None = None
    reason: DiscardReason | None = None
    warnings: list[str] = field(default_factory=list)

    @property
    def kept(self) -> bool:
        return self.record is not None


def clean_filter(case_id: str, court: str, extracted: ExtractedCase) -> CleanDecision:
    """Apply the discard rules to one parsed candidate.

    Discard when incident details, statutes, reasoning, or a mappable outcome
    are missing (checked in that order, one reason per document). Anything
    non-critical that fails to parse (age, dates) degrades to absent with a
    warning instead.
    """
    try:
        narrative = parse_case_narrative(extracted.case_narrative)
    except NarrativeParseError as exc:
        return CleanDecision(reason=DiscardReason.UNPARSEABLE_OUTPUT, warnings=[str(exc)])
    warnings = list(narrative.warnings)

    reasoning = parse_reasoning_text(extracted.reasoning_text)
    label, conditions = parse_outcome_text(extracted.outcome_text)
    outcome = _LABEL_TO_OUTCOME.get((narrative.bail_type, label)) if label else None
    if label and outcome is None:
        warnings.append(f"outcome {label!r} not valid for {narrative.bail_type.value} application")

    if narrative.incident_details is None:
        return CleanDecision(reason=DiscardReason.MISSING_INCIDENT, warnings=warnings)
    if not narrative.statutes:
        return CleanDecision(reason=DiscardReason.MISSING_STATUTES, warnings=warnings)
    if reasoning is None:
        return CleanDecision(reason=DiscardReason.MISSING_REASONING, warnings=warnings)
    if outcome is None:
        return CleanDecision(reason=DiscardReason.MISSING_OUTCOME, warnings=warnings)

    age = narrative.age
    if age is not None and not 1 <= age <= 150:
        warnings.append(f"age {age} outside [1, 150]; dropped")
        age = None
    arrest = parse_date(extracted.arrest_text, warnings)
    judgment = parse_date(extracted.judgment_text, warnings)
    if arrest is not None and judgment is not None and judgment < arrest:
        warnings.append("judgment date precedes arrest date; both dropped")
        arrest = judgment = None

    record = CaseRecord(
        case_id=case_id,
        court=court,
        bail_type=narrative.bail_type,
        is_withdrawal=narrative.is_withdrawal,
        age=age,
        health_issues=narrative.health_issues,
        has_past_record=narrative.has_past_record,
        statutes=tuple(narrative.statutes),
        precedents=narrative.precedents,
        incident_details=narrative.incident_details,
        arguments_supporting=narrative.arguments_supporting or "",
        arguments_opposing=narrative.arguments_opposing or "",
        outcome=outcome,
        bail_conditions=conditions,
        reasoning=reasoning,
        date_of_arrest=arrest,
        date_of_judgment=judgment,
    ).check()
    return CleanDecision(record=record, warnings=warnings)


def process_model_output(case_id: str, court: str, model_output: str) -> CleanDecision:
    """Full parse-and-clean of one model reply; never raises on bad input."""
    try:
        extracted = parse_extraction_output(model_output)
    except UnparseableOutputError as exc:
        return CleanDecision(reason=DiscardReason.UNPARSEABLE_OUTPUT, warnings=[str(exc)])
    return clean_filter(case_id, court, extracted)


# --- rendering (inverse of the parsers, used for fixtures and training data) --

def render_case_narrative(record: CaseRecord) -> str:
    type_label = {BailType.REGULAR: "Regular-Bail",
                  BailType.ANTICIPATORY: "Anticipatory-Bail",
                  BailType.CANCELLATION: "Bail-Cancellation"}[record.bail_type]
    statutes = "[" + ", ".join(str(c) for c in record.statutes) + "]" if record.statutes else "None"
    precedents = "[" + "; ".join(record.precedents) + "]" if record.precedents else "None"
    sentences = [
        f"Applicant applied for {type_label}.",
        f"Is it a withdrawal application? {'Yes' if record.is_withdrawal else 'No'}.",
        f"Age of the accused is {record.age if record.age is not None else 'not provided'}.",
        f"Health issues for the accused are {record.health_issues or 'None'}.",
        f"There are {'some' if record.has_past_record else 'no'} past criminal records of the accused.",
        f"Statutes mentioned in the judgement are {statutes}.",
        f"Precedents mentioned in the judgement are {precedents}.",
        f"Details of the incident are {record.incident_details}.",
        f"Arguments supporting the bail application are {record.arguments_supporting or 'None'}.",
        f"Arguments opposing the bail application are {record.arguments_opposing or 'None'}.",
    ]
    return " ".join(sentences)


_OUTCOME_PHRASE = {
    Outcome.GRANTED: "Bail granted",
    Outcome.NOT_GRANTED: "Bail not granted",
    Outcome.CANCELLED: "Bail cancelled",
    Outcome.NOT_CANCELLED: "Bail not cancelled",
}


def outcome_phrase(outcome: Outcome) -> str:
    return _OUTCOME_PHRASE[outcome]


def render_extraction_output(record: CaseRecord) -> str:
    """Fill the extraction output schema from a record (fenced JSON block)."""
    payload = {
        "case": render_case_narrative(record),
        "outcome": (f"The outcome of the case is {outcome_phrase(record.outcome)}. "
                    f"The bail conditions are {record.bail_conditions or 'None'}."),
        "reasoning": f"The reasoning for the judgement is {record.reasoning}.",
        "date_of_arrest": record.date_of_arrest.isoformat() if record.date_of_arrest else "not provided",
        "date_of_judgement": record.date_of_judgment.isoformat() if record.date_of_judgment else "not provided",
    }
    return "```json\n" + json.dumps(payload, ensure_ascii=False, indent=2) + "\n```"
