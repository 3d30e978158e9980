"""Derived per-case features: custody duration, age group, crime category.

Crime classification prefers a configured LLM classifier when one is given and
falls back to the shipped keyword table (a versioned TSV asset legal experts
can amend without touching code).
"""

from __future__ import annotations

import re
from importlib.resources import files
from pathlib import Path
from typing import Callable

from .diagnostics import Diagnostics
from .records import AgeGroup, CaseRecord, CrimeCategory, DerivedFeatures

CrimeClassifier = Callable[[str], str]

_CATEGORY_BY_NORM = {c.value.lower(): c for c in CrimeCategory}
# Looser spellings an LLM classifier might return.
_CATEGORY_SYNONYMS = {
    "domestic violence": CrimeCategory.DOMESTIC_VIOLENCE,
    "white collar": CrimeCategory.WHITE_COLLAR,
    "white-collar": CrimeCategory.WHITE_COLLAR,
    "sexual assault": CrimeCategory.SEXUAL_ASSAULT,
    "narcotics": CrimeCategory.DRUG,
    "drugs": CrimeCategory.DRUG,
}


class KeywordTable:
    """Ordered (pattern, category) rules; first match wins."""

    def __init__(self, rules: list[tuple[re.Pattern, CrimeCategory]]):
        self.rules = rules

    @classmethod
    def load(cls, path: str | Path | None = None) -> "KeywordTable":
        if path is None:
            text = files("bailpred.assets").joinpath("crime_keywords.tsv").read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        rules = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            try:
                pattern, category = line.split("\t")
            except ValueError as exc:
                raise ValueError(f"keyword table line {lineno}: expected <pattern>\\t<category>") from exc
            rules.append((re.compile(pattern.strip(), re.IGNORECASE),
                          CrimeCategory(category.strip())))
        return cls(rules)

    def classify(self, text: str) -> CrimeCategory:
        for pattern, category in self.rules:
            if pattern.search(text):
                return category
        return CrimeCategory.OTHER


_DEFAULT_TABLE: KeywordTable | None = None


def default_keyword_table() -> KeywordTable:
    global _DEFAULT_TABLE
    if _DEFAULT_TABLE is None:
        _DEFAULT_TABLE = KeywordTable.load()
    return _DEFAULT_TABLE


def map_category_label(label: str) -> CrimeCategory | None:
    norm = label.strip().lower().rstrip(".")
    if norm in _CATEGORY_BY_NORM:
        return _CATEGORY_BY_NORM[norm]
    return _CATEGORY_SYNONYMS.get(norm)


def classify_crime(incident_details: str,
                   classifier: CrimeClassifier | None = None,
                   table: KeywordTable | None = None,
                   diagnostics: Diagnostics | None = None) -> CrimeCategory:
    """Map incident text to a crime category.

    A configured classifier's answer is mapped onto the enum; anything it
    returns outside the enum, or any classifier failure, falls back to the
    keyword table with a warning. Unmatched text is Other.
    """
    if not incident_details:
        raise ValueError("incident_details must be non-empty")
    table = table or default_keyword_table()
    if classifier is not None:
        try:
            label = classifier(incident_details)
        except Exception as exc:
            if diagnostics is not None:
                diagnostics.warning("classify_crime",
                                    f"classifier failed ({exc}); keyword fallback used")
            return table.classify(incident_details)
        category = map_category_label(label)
        if category is not None:
            return category
        if diagnostics is not None:
            diagnostics.warning("classify_crime",
                                f"classifier label {label!r} not a known category; keyword fallback used")
        return table.classify(incident_details)
    return table.classify(incident_details)


def age_group_of(age: int) -> AgeGroup:
    if age < 18:
        return AgeGroup.UNDER_18
    if age < 30:
        return AgeGroup.A18_TO_30
    if age < 50:
        return AgeGroup.A30_TO_50
    if age < 65:
        return AgeGroup.A50_TO_65
    return AgeGroup.A65_PLUS


def derive_features(record: CaseRecord,
                    classifier: CrimeClassifier | None = None,
                    table: KeywordTable | None = None,
                    diagnostics: Diagnostics | None = None) -> DerivedFeatures:
    """Pure derivation: custody days from date difference, age group from age,
    crime category from incident text. Absent inputs yield absent outputs."""
    custody_days = None
    if record.date_of_arrest is not None and record.date_of_judgment is not None:
        custody_days = (record.date_of_judgment - record.date_of_arrest).days
    age_group = age_group_of(record.age) if record.age is not None else None
    category = classify_crime(record.incident_details, classifier, table, diagnostics)
    return DerivedFeatures(crime_category=category, custody_days=custody_days,
                           age_group=age_group)
