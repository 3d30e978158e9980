"""Statute ingestion and citation-lookup retrieval under a token budget.

Retrieval here is resolution of explicitly cited provisions, not similarity
search: cases carry statute lists, so the context block is built by looking
each citation up in an act/section index and packing the section bodies in
citation order until the budget is reached.

Source format: plain-text files where each section starts with a header line

    ## <ACT> | <SECTION_ID> | <HEADING>

(heading may be empty) followed by the section body until the next header.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .diagnostics import Diagnostics
from .records import StatuteCitation
from .textutil import estimate_tokens, split_sentences

DEFAULT_CONTEXT_BUDGET = 2048

_HEADER_RE = re.compile(r"^##\s*(?P<act>[^|]+?)\s*\|\s*(?P<sec>[^|]+?)\s*(?:\|\s*(?P<head>.*?)\s*)?$")

# Common act-name variants, normalized -> canonical normalized key.
_DEFAULT_ALIASES = {
    "crpc": "crpc",
    "codeofcriminalprocedure": "crpc",
    "criminalprocedurecode": "crpc",
    "ipc": "ipc",
    "indianpenalcode": "ipc",
    "ndpsact": "narcoticdrugsandpsychotropicsubstancesact",
    "scstact": "scheduledcastesandscheduledtribes(preventionofatrocities)act",
}


class ResolutionStatus(str, Enum):
    EXACT = "Exact"
    FUZZY = "Fuzzy"
    MISS = "Miss"


@dataclass(frozen=True)
class StatuteSection:
    act: str
    section_id: str
    body: str
    heading: str | None = None
    source: str = ""

    def to_dict(self) -> dict:
        return {"act": self.act, "section_id": self.section_id, "heading": self.heading,
                "body": self.body, "source": self.source}


def _norm(text: str) -> str:
    return re.sub(r"[\s.]+", "", text).casefold()


def _strip_subclause(section_norm: str) -> str | None:
    """Drop the last parenthetical group: 506(1)(b) -> 506(1) -> 506."""
    m = re.match(r"^(.*)\([^()]*\)$", section_norm)
    return m.group(1) if m else None


class StatuteIndex:
    """Immutable-after-ingest lookup of sections by normalized (act, section)."""

    def __init__(self, aliases: dict[str, str] | None = None):
        self._sections: dict[tuple[str, str], StatuteSection] = {}
        self.aliases = dict(_DEFAULT_ALIASES)
        if aliases:
            self.aliases.update({_norm(k): _norm(v) for k, v in aliases.items()})

    def __len__(self) -> int:
        return len(self._sections)

    def _act_key(self, act: str) -> str:
        norm = _norm(act)
        return self.aliases.get(norm, norm)

    def key_of(self, act: str, section_id: str) -> tuple[str, str]:
        return (self._act_key(act), _norm(section_id))

    def add(self, section: StatuteSection, diagnostics: Diagnostics | None = None) -> None:
        key = self.key_of(section.act, section.section_id)
        if key in self._sections and diagnostics is not None:
            diagnostics.warning(
                "ingest_statutes",
                f"duplicate section {section.act} {section.section_id} "
                f"({section.source} replaces {self._sections[key].source})")
        self._sections[key] = section

    def sections(self) -> list[StatuteSection]:
        return [self._sections[k] for k in sorted(self._sections)]

    def resolve(self, citation: StatuteCitation) -> tuple[StatuteSection | None, ResolutionStatus]:
        """Exact normalized match first; then parent sections of a cited
        sub-clause (Fuzzy); otherwise Miss. Deterministic for a fixed index."""
        act_key = self._act_key(citation.act)
        sec_norm = _norm(citation.section)
        hit = self._sections.get((act_key, sec_norm))
        if hit is not None:
            return hit, ResolutionStatus.EXACT
        parent = _strip_subclause(sec_norm)
        while parent:
            hit = self._sections.get((act_key, parent))
            if hit is not None:
                return hit, ResolutionStatus.FUZZY
            parent = _strip_subclause(parent)
        return None, ResolutionStatus.MISS

    def to_json(self) -> str:
        payload = {
            "aliases": {k: v for k, v in sorted(self.aliases.items())},
            "sections": [s.to_dict() for s in self.sections()],
        }
        return json.dumps(payload, ensure_ascii=False, indent=2)

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "StatuteIndex":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        index = cls()
        index.aliases.update(payload.get("aliases", {}))
        for s in payload.get("sections", []):
            index.add(StatuteSection(act=s["act"], section_id=s["section_id"],
                                     body=s["body"], heading=s.get("heading"),
                                     source=s.get("source", "")))
        return index


def parse_statute_file(text: str, source: str,
                       diagnostics: Diagnostics | None = None) -> list[StatuteSection]:
    sections = []
    current: dict | None = None
    body_lines: list[str] = []

    def flush():
        if current is None:
            return
        body = "\n".join(body_lines).strip()
        if body:
            sections.append(StatuteSection(act=current["act"], section_id=current["sec"],
                                           heading=current["head"] or None,
                                           body=body, source=source))
        elif diagnostics is not None:
            diagnostics.warning("ingest_statutes",
                                f"{source}: section {current['act']} {current['sec']} has empty body; skipped")

    for line in text.splitlines():
        if line.startswith("##"):
            m = _HEADER_RE.match(line)
            if m:
                flush()
                current = {"act": m.group("act"), "sec": m.group("sec"),
                           "head": (m.group("head") or "").strip()}
                body_lines = []
                continue
            if diagnostics is not None:
                diagnostics.warning("ingest_statutes", f"{source}: malformed header {line!r}")
            continue
        if current is not None:
            body_lines.append(line)
    flush()
    return sections


def ingest_statutes(directory: str | Path,
                    diagnostics: Diagnostics | None = None,
                    aliases: dict[str, str] | None = None) -> StatuteIndex:
    """Index every delimited section under `directory` (*.txt, sorted order).

    Duplicate (act, section) pairs: last one wins with a warning. A file with
    no recognizable sections is reported and skipped; ingestion continues.
    """
    directory = Path(directory)
    index = StatuteIndex(aliases=aliases)
    for path in sorted(directory.glob("*.txt")):
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            if diagnostics is not None:
                diagnostics.error("ingest_statutes", f"unreadable file {path.name}: {exc}")
            continue
        sections = parse_statute_file(text, path.name, diagnostics)
        if not sections:
            if diagnostics is not None:
                diagnostics.error("ingest_statutes", f"{path.name}: no recognizable sections")
            continue
        for section in sections:
            index.add(section, diagnostics)
    return index


@dataclass(frozen=True)
class ContextEntry:
    citation: StatuteCitation
    text: str
    status: ResolutionStatus
    truncated: bool = False

    def render(self) -> str:
        if not self.text:
            return ""
        return f"{self.citation} [{self.status.value}]\n{self.text}"


@dataclass(frozen=True)
class ContextBlock:
    entries: tuple[ContextEntry, ...]
    token_estimate: int
    budget: int

    def render(self) -> str:
        return "\n\n".join(e.render() for e in self.entries if e.text)

    def to_dict(self) -> dict:
        return {
            "token_estimate": self.token_estimate,
            "budget": self.budget,
            "entries": [{"citation": str(e.citation), "status": e.status.value,
                         "truncated": e.truncated, "chars": len(e.text)}
                        for e in self.entries],
        }


def _entry_text(section: StatuteSection) -> str:
    if section.heading:
        return f"{section.heading}. {section.body}" if not section.body.startswith(section.heading) else section.body
    return section.body


def assemble_context(citations: list[StatuteCitation], index: StatuteIndex,
                     budget: int = DEFAULT_CONTEXT_BUDGET) -> ContextBlock:
    """Pack resolved section texts in citation order within `budget` tokens.

    A section that would overflow is cut back to a sentence boundary with an
    ellipsis marker; once nothing more fits, later citations keep their
    resolution status but carry empty text. Misses always carry empty text.
    The token estimate covers exactly what `render()` emits and never exceeds
    the budget.
    """
    if budget <= 0:
        raise ValueError("context token budget must be positive")
    entries: list[ContextEntry] = []
    used = 0
    for citation in citations:
        section, status = index.resolve(citation)
        if section is None:
            entries.append(ContextEntry(citation, "", status))
            continue
        full = _entry_text(section)
        candidate = ContextEntry(citation, full, status)
        cost = estimate_tokens(candidate.render())
        if used + cost <= budget:
            entries.append(candidate)
            used += cost
            continue
        truncated = _truncate_entry(citation, status, full, budget - used)
        if truncated is not None:
            entries.append(truncated)
            used += estimate_tokens(truncated.render())
        else:
            entries.append(ContextEntry(citation, "", status))
    return ContextBlock(entries=tuple(entries), token_estimate=used, budget=budget)


def _truncate_entry(citation: StatuteCitation, status: ResolutionStatus,
                    text: str, remaining: int) -> ContextEntry | None:
    """Longest sentence-prefix of `text` fitting in `remaining` tokens, with
    an ellipsis marker appended; None when not even one sentence fits."""
    if remaining <= 0:
        return None
    sentences = split_sentences(text)
    best = None
    kept: list[str] = []
    for sentence in sentences:
        trial = ContextEntry(citation, " ".join(kept + [sentence]).strip() + " […]",
                             status, truncated=True)
        if estimate_tokens(trial.render()) <= remaining:
            kept.append(sentence)
            best = trial
        else:
            break
    return best
