"""Structured warnings/errors emitted alongside pipeline outputs as JSONL."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Diagnostic:
    level: str          # "warning" | "error"
    stage: str          # pipeline stage that raised it, e.g. "load_corpus"
    message: str
    case_id: str | None = None
    line: int | None = None

    def to_dict(self) -> dict:
        d = {"level": self.level, "stage": self.stage, "message": self.message}
        if self.case_id is not None:
            d["case_id"] = self.case_id
        if self.line is not None:
            d["line"] = self.line
        return d


@dataclass
class Diagnostics:
    """Collector passed through parsing/loading code paths.

    Keeps diagnostics in arrival order; `write_jsonl` persists them next to
    the stage's main output.
    """

    items: list[Diagnostic] = field(default_factory=list)

    def warning(self, stage: str, message: str, *, case_id: str | None = None,
                line: int | None = None) -> None:
        self.items.append(Diagnostic("warning", stage, message, case_id, line))
        logger.debug("warning[%s]: %s", stage, message)

    def error(self, stage: str, message: str, *, case_id: str | None = None,
              line: int | None = None) -> None:
        self.items.append(Diagnostic("error", stage, message, case_id, line))
        logger.debug("error[%s]: %s", stage, message)

    def extend(self, other: "Diagnostics") -> None:
        self.items.extend(other.items)

    @property
    def warnings(self) -> list[Diagnostic]:
        return [d for d in self.items if d.level == "warning"]

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.items if d.level == "error"]

    def write_jsonl(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as fh:
            for d in self.items:
                fh.write(json.dumps(d.to_dict(), ensure_ascii=False) + "\n")
