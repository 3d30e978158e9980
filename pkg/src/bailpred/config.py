"""Run configuration: one YAML file, flags override config, env vars override
secrets only (endpoint API keys are named by `api_key_env`, never stored).

See config.example.yaml in the repository root for the documented schema.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .gateway import EndpointConfig
from .statutes import DEFAULT_CONTEXT_BUDGET

REQUIRED_ENDPOINT_ROLES = ("extraction", "base", "ft1", "ft2", "embedder", "judge")
AVERAGING_MODES = ("macro", "binary-positive-1")


class ConfigError(ValueError):
    """Invalid or incomplete run configuration."""


@dataclass
class RunConfig:
    raw_dir: Path | None
    corpus_file: Path | None
    statute_dir: Path | None
    index_file: Path | None
    context_budget: int
    extraction_budget: int
    extraction_retries: int
    endpoints: dict[str, EndpointConfig]
    temperature: float
    max_new_tokens: int
    averaging: str
    bertscore_baseline: float | None
    geval: bool
    include_withdrawn: bool
    output_dir: Path
    failure_threshold: float
    jobs: int
    source_text: str = ""
    source_path: Path | None = None
    extras: dict = field(default_factory=dict)

    def validate(self) -> None:
        problems = []
        if self.context_budget <= 0:
            problems.append("context.token_budget must be > 0")
        if self.extraction_budget <= 0:
            problems.append("extraction.raw_token_budget must be > 0")
        if self.extraction_retries < 0:
            problems.append("extraction.retries_on_unparseable must be >= 0")
        for role in REQUIRED_ENDPOINT_ROLES:
            if role not in self.endpoints:
                problems.append(f"endpoints.{role} is missing")
        if self.averaging not in AVERAGING_MODES:
            problems.append(f"evaluation.averaging must be one of {AVERAGING_MODES}")
        if not 0 <= self.failure_threshold <= 1:
            problems.append("run.failure_rate_threshold must be in [0, 1]")
        if self.jobs < 1:
            problems.append("run.jobs must be >= 1")
        for endpoint in self.endpoints.values():
            if endpoint.kind not in ("mock", "http"):
                problems.append(f"endpoints.{endpoint.id}.kind must be mock or http")
            if endpoint.kind == "http" and not endpoint.base_url:
                problems.append(f"endpoints.{endpoint.id} needs base_url for kind http")
        if problems:
            raise ConfigError("; ".join(problems))


def _path_or_none(value, base: Path) -> Path | None:
    if value is None:
        return None
    p = Path(str(value))
    return p if p.is_absolute() else base / p


def load_config(path: str | Path) -> RunConfig:
    """Parse and validate the YAML config. Relative paths resolve against the
    config file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a mapping, got {type(raw).__name__}")

    base = path.parent
    corpus = raw.get("corpus") or {}
    statutes = raw.get("statutes") or {}
    context = raw.get("context") or {}
    extraction = raw.get("extraction") or {}
    decoding = raw.get("decoding") or {}
    evaluation = raw.get("evaluation") or {}
    run = raw.get("run") or {}

    endpoints = {}
    for role, spec in (raw.get("endpoints") or {}).items():
        if not isinstance(spec, dict):
            raise ConfigError(f"endpoints.{role} must be a mapping")
        endpoints[role] = EndpointConfig.from_dict(role, spec)

    try:
        config = RunConfig(
            raw_dir=_path_or_none(corpus.get("raw_dir"), base),
            corpus_file=_path_or_none(corpus.get("corpus_file"), base),
            statute_dir=_path_or_none(statutes.get("source_dir"), base),
            index_file=_path_or_none(statutes.get("index_file"), base),
            context_budget=int(context.get("token_budget", DEFAULT_CONTEXT_BUDGET)),
            extraction_budget=int(extraction.get("raw_token_budget", 8192)),
            extraction_retries=int(extraction.get("retries_on_unparseable", 1)),
            endpoints=endpoints,
            temperature=float(decoding.get("temperature", 0.0)),
            max_new_tokens=int(decoding.get("max_new_tokens", 512)),
            averaging=str(evaluation.get("averaging", "macro")),
            bertscore_baseline=(None if evaluation.get("bertscore_baseline") is None
                                else float(evaluation["bertscore_baseline"])),
            geval=bool(evaluation.get("geval", False)),
            include_withdrawn=bool(evaluation.get("include_withdrawn", False)),
            output_dir=_path_or_none(run.get("output_dir", "out"), base),
            failure_threshold=float(run.get("failure_rate_threshold", 0.1)),
            jobs=int(run.get("jobs", 4)),
            source_text=text,
            source_path=path,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad config value: {exc}") from exc
    config.validate()
    return config
