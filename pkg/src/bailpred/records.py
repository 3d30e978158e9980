"""Typed data model for bail cases plus JSONL persistence.

One `CaseRecord` per decided bail application. Records in a corpus file have
already survived cleaning, so the four critical fields (incident details,
statutes, reasoning, outcome) are mandatory here; everything the source
judgment may omit is Optional.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterator

from .diagnostics import Diagnostics


class BailType(str, Enum):
    REGULAR = "Regular"
    ANTICIPATORY = "Anticipatory"
    CANCELLATION = "Cancellation"


class Outcome(str, Enum):
    GRANTED = "Granted"
    NOT_GRANTED = "NotGranted"
    CANCELLED = "Cancelled"
    NOT_CANCELLED = "NotCancelled"


class AgeGroup(str, Enum):
    UNDER_18 = "Under18"
    A18_TO_30 = "A18to30"
    A30_TO_50 = "A30to50"
    A50_TO_65 = "A50to65"
    A65_PLUS = "A65plus"


class CrimeCategory(str, Enum):
    THEFT = "Theft"
    MURDER = "Murder"
    RAPE = "Rape"
    FRAUD = "Fraud"
    DRUG = "Drug"
    ASSAULT = "Assault"
    KIDNAPPING = "Kidnapping"
    DOMESTIC_VIOLENCE = "DomesticViolence"
    WHITE_COLLAR = "WhiteCollar"
    SEXUAL_ASSAULT = "SexualAssault"
    OTHER = "Other"


# Outcomes that count as the "granted" analogue of each bail-type family.
_GRANT_FAMILY = {BailType.REGULAR: Outcome.GRANTED, BailType.ANTICIPATORY: Outcome.GRANTED,
                 BailType.CANCELLATION: Outcome.CANCELLED}
_FAMILY_OUTCOMES = {
    BailType.REGULAR: {Outcome.GRANTED, Outcome.NOT_GRANTED},
    BailType.ANTICIPATORY: {Outcome.GRANTED, Outcome.NOT_GRANTED},
    BailType.CANCELLATION: {Outcome.CANCELLED, Outcome.NOT_CANCELLED},
}


class InvalidRecordError(ValueError):
    """A CaseRecord violating its invariants."""


@dataclass(frozen=True)
class StatuteCitation:
    section: str
    act: str

    def __str__(self) -> str:
        return f"Section {self.section} {self.act}"

    def validate(self) -> list[str]:
        problems = []
        if not self.section:
            problems.append("citation section is empty")
        if not self.act:
            problems.append("citation act is empty")
        return problems


@dataclass(frozen=True)
class CaseRecord:
    case_id: str
    court: str
    bail_type: BailType
    is_withdrawal: bool
    statutes: tuple[StatuteCitation, ...]
    incident_details: str
    arguments_supporting: str
    arguments_opposing: str
    outcome: Outcome
    reasoning: str
    has_past_record: bool = False
    age: int | None = None
    health_issues: str | None = None
    precedents: tuple[str, ...] = ()
    bail_conditions: str | None = None
    date_of_arrest: date | None = None
    date_of_judgment: date | None = None

    def validate(self) -> list[str]:
        problems = []
        if self.outcome not in _FAMILY_OUTCOMES[self.bail_type]:
            problems.append(
                f"outcome {self.outcome.value} invalid for bail type {self.bail_type.value}")
        if self.age is not None and not 1 <= self.age <= 150:
            problems.append(f"age {self.age} outside [1, 150]")
        if (self.date_of_arrest is not None and self.date_of_judgment is not None
                and self.date_of_judgment < self.date_of_arrest):
            problems.append("date_of_judgment precedes date_of_arrest")
        if not self.incident_details:
            problems.append("incident_details is empty")
        if not self.statutes:
            problems.append("statutes list is empty")
        if not self.reasoning:
            problems.append("reasoning is empty")
        for c in self.statutes:
            problems.extend(c.validate())
        return problems

    def check(self) -> "CaseRecord":
        problems = self.validate()
        if problems:
            raise InvalidRecordError(f"{self.case_id}: " + "; ".join(problems))
        return self

    @property
    def granted_equivalent(self) -> bool:
        """True when the outcome is the grant analogue for this bail type."""
        return self.outcome == _GRANT_FAMILY[self.bail_type]

    def to_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "court": self.court,
            "bail_type": self.bail_type.value,
            "is_withdrawal": self.is_withdrawal,
            "age": self.age,
            "health_issues": self.health_issues,
            "has_past_record": self.has_past_record,
            "statutes": [{"section": c.section, "act": c.act} for c in self.statutes],
            "precedents": list(self.precedents),
            "incident_details": self.incident_details,
            "arguments_supporting": self.arguments_supporting,
            "arguments_opposing": self.arguments_opposing,
            "outcome": self.outcome.value,
            "bail_conditions": self.bail_conditions,
            "reasoning": self.reasoning,
            "date_of_arrest": self.date_of_arrest.isoformat() if self.date_of_arrest else None,
            "date_of_judgment": self.date_of_judgment.isoformat() if self.date_of_judgment else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CaseRecord":
        def _date(v):
            return date.fromisoformat(v) if v else None

        return cls(
            case_id=str(d["case_id"]),
            court=str(d["court"]),
            bail_type=BailType(d["bail_type"]),
            is_withdrawal=bool(d["is_withdrawal"]),
            age=d.get("age"),
            health_issues=d.get("health_issues"),
            has_past_record=bool(d.get("has_past_record", False)),
            statutes=tuple(StatuteCitation(str(s["section"]), str(s["act"]))
                           for s in d.get("statutes", [])),
            precedents=tuple(d.get("precedents") or ()),
            incident_details=str(d["incident_details"]),
            arguments_supporting=str(d.get("arguments_supporting") or ""),
            arguments_opposing=str(d.get("arguments_opposing") or ""),
            outcome=Outcome(d["outcome"]),
            bail_conditions=d.get("bail_conditions"),
            reasoning=str(d["reasoning"]),
            date_of_arrest=_date(d.get("date_of_arrest")),
            date_of_judgment=_date(d.get("date_of_judgment")),
        ).check()


@dataclass(frozen=True)
class DerivedFeatures:
    crime_category: CrimeCategory
    custody_days: int | None = None
    age_group: AgeGroup | None = None


def record_to_json(record: CaseRecord) -> str:
    return json.dumps(record.to_dict(), ensure_ascii=False)


def write_jsonl(records, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record_to_json(record) + "\n")


def load_corpus(path: str | Path, diagnostics: Diagnostics | None = None) -> Iterator[CaseRecord]:
    """Yield records from a JSONL corpus in file order.

    Malformed or invariant-violating lines are reported to `diagnostics` with
    their 1-based line number and skipped, never silently dropped.
    """
    path = Path(path)
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield CaseRecord.from_dict(json.loads(line))
            except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
                diagnostics.error("load_corpus", f"malformed record: {exc}", line=lineno)


def read_corpus(path: str | Path) -> tuple[list[CaseRecord], Diagnostics]:
    diagnostics = Diagnostics()
    records = list(load_corpus(path, diagnostics))
    return records, diagnostics
