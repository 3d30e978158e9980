"""Uniform client for generation (with decision-token logprobs), embeddings,
and rubric-based judge scoring, over HTTP or a deterministic offline mock.

Wire contract for HTTP endpoints is an OpenAI-style chat/completions and
embeddings shape with two extensions (documented in the README): per-token
top logprobs at the first generated position, and token-level embedding
vectors. The mock backend is a pure function of the request, which makes
every pipeline stage replayable byte-for-byte without any network.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path

from .diagnostics import Diagnostics
from .textutil import tokenize

logger = logging.getLogger(__name__)

LOGPROB_FLOOR = math.log(1e-9)

MOCK_OUTCOME_MARKER = re.compile(r"OUTCOME:([01])")
MOCK_ECHO_MARKER = "REASONING-ECHO["
MOCK_EMBED_DIM = 16


class GatewayError(Exception):
    """Base class for gateway failures."""


class TransportError(GatewayError):
    """Timeout or connection-level failure; retryable."""


class BackendReplyError(GatewayError):
    """Malformed backend reply; fatal for the request."""


class RetryExhaustedError(GatewayError):
    """Transient failures persisted past the configured retry budget."""


class JudgeReplyError(GatewayError):
    """Judge reply from which no scores could be parsed."""


@dataclass(frozen=True)
class EndpointConfig:
    id: str
    kind: str = "mock"                  # "mock" | "http"
    base_url: str | None = None
    base_url_env: str | None = None     # env var overriding base_url when set
    model: str | None = None
    api_key_env: str | None = None
    timeout_s: float = 120.0
    max_retries: int = 2
    max_in_flight: int = 4

    def resolved_base_url(self) -> str | None:
        if self.base_url_env:
            return os.environ.get(self.base_url_env) or self.base_url
        return self.base_url

    @classmethod
    def from_dict(cls, endpoint_id: str, d: dict) -> "EndpointConfig":
        return cls(
            id=endpoint_id,
            kind=d.get("kind", "mock"),
            base_url=d.get("base_url"),
            base_url_env=d.get("base_url_env"),
            model=d.get("model"),
            api_key_env=d.get("api_key_env"),
            timeout_s=float(d.get("timeout_s", 120.0)),
            max_retries=int(d.get("max_retries", 2)),
            max_in_flight=int(d.get("max_in_flight", 4)),
        )


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_new_tokens: int = 512
    temperature: float = 0.0
    want_logprobs: bool = False
    candidate_tokens: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.max_new_tokens < 1:
            raise ValueError("max_new_tokens must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")

    def to_dict(self) -> dict:
        return {"prompt": self.prompt, "max_new_tokens": self.max_new_tokens,
                "temperature": self.temperature, "want_logprobs": self.want_logprobs,
                "candidate_tokens": list(self.candidate_tokens) if self.candidate_tokens else None}


@dataclass(frozen=True)
class GenerationResult:
    text: str
    decision_logprobs: dict[str, float] | None = None
    usage: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"text": self.text, "decision_logprobs": self.decision_logprobs,
                "usage": dict(self.usage)}

    @classmethod
    def from_dict(cls, d: dict) -> "GenerationResult":
        return cls(text=d["text"], decision_logprobs=d.get("decision_logprobs"),
                   usage=dict(d.get("usage") or {}))


@dataclass(frozen=True)
class JudgeVerdict:
    factual_accuracy: int
    completeness_coverage: int
    clarity_coherence: int
    overall: int
    rationale: str

    def to_dict(self) -> dict:
        return {"factual_accuracy": self.factual_accuracy,
                "completeness_coverage": self.completeness_coverage,
                "clarity_coherence": self.clarity_coherence,
                "overall": self.overall, "rationale": self.rationale}


# --- judge rubric -------------------------------------------------------------

JUDGE_SENTINEL = "score each criterion on a scale from 1 to 10"

_JUDGE_TEMPLATE = """You are an experienced legal evaluator reviewing machine-written \
explanations for bail decisions.

Assess the CANDIDATE EXPLANATION against the REFERENCE EXPLANATION in the \
context of the CASE SUMMARY. Reason step by step about each criterion before \
deciding its score, then {sentinel} (integers only):

1. Factual accuracy: are the facts, statutes, and outcomes stated in the \
candidate consistent with the case and the reference?
2. Completeness & coverage: does the candidate cover the material grounds \
the reference covers?
3. Clarity & coherence: is the candidate well organized, unambiguous, and \
logically connected?

CASE SUMMARY:
{case_summary}

REFERENCE EXPLANATION:
{reference}

CANDIDATE EXPLANATION:
{explanation}

After your analysis, finish with exactly these five lines:
FACTUAL ACCURACY: <1-10>
COMPLETENESS & COVERAGE: <1-10>
CLARITY & COHERENCE: <1-10>
OVERALL: <1-10>
RATIONALE: <one short paragraph>
"""


def render_judge_prompt(explanation: str, reference: str, case_summary: str) -> str:
    return _JUDGE_TEMPLATE.format(sentinel=JUDGE_SENTINEL, case_summary=case_summary,
                                  reference=reference, explanation=explanation)


_JUDGE_SCORE_RES = {
    "factual_accuracy": re.compile(r"factual\s*accuracy\W*?(-?\d+)", re.IGNORECASE),
    "completeness_coverage": re.compile(r"completeness\s*(?:&|and)?\s*coverage\W*?(-?\d+)", re.IGNORECASE),
    "clarity_coherence": re.compile(r"clarity\s*(?:&|and)?\s*coherence\W*?(-?\d+)", re.IGNORECASE),
    "overall": re.compile(r"overall\W*?(-?\d+)", re.IGNORECASE),
}
_JUDGE_RATIONALE_RE = re.compile(r"RATIONALE:\s*(.+)$", re.IGNORECASE | re.DOTALL)


def parse_judge_reply(text: str, diagnostics: Diagnostics | None = None) -> JudgeVerdict:
    scores = {}
    for name, pattern in _JUDGE_SCORE_RES.items():
        m = pattern.search(text)
        if not m:
            raise JudgeReplyError(f"judge reply missing {name} score")
        value = int(m.group(1))
        clamped = min(10, max(1, value))
        if clamped != value and diagnostics is not None:
            diagnostics.warning("judge", f"{name} score {value} clamped to {clamped}")
        scores[name] = clamped
    m = _JUDGE_RATIONALE_RE.search(text)
    rationale = m.group(1).strip() if m else ""
    return JudgeVerdict(rationale=rationale, **scores)


# --- backends -----------------------------------------------------------------

def _stable_hash(text: str) -> int:
    return int.from_bytes(hashlib.sha256(text.encode("utf-8")).digest()[:8], "big")


def _mock_token_vector(token: str) -> list[float]:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    raw = [(b - 127.5) / 127.5 for b in digest[:MOCK_EMBED_DIM]]
    norm = math.sqrt(sum(x * x for x in raw)) or 1.0
    return [x / norm for x in raw]


def _balanced_echo(prompt: str) -> str | None:
    start = prompt.find(MOCK_ECHO_MARKER)
    if start < 0:
        return None
    depth = 1
    i = start + len(MOCK_ECHO_MARKER)
    begin = i
    while i < len(prompt):
        if prompt[i] == "[":
            depth += 1
        elif prompt[i] == "]":
            depth -= 1
            if depth == 0:
                return prompt[begin:i]
        i += 1
    return prompt[begin:]


class MockBackend:
    """Deterministic stand-in for a model server; pure function of the request.

    Generation contract: a prompt containing "OUTCOME:<0|1>" makes the reply
    start with that digit at probability 0.9 (logprobs reflect it); without a
    marker the digit is the parity of a stable prompt hash. The segment
    between "REASONING-ECHO[" and its balancing "]" is echoed as the
    rationale; judge-rubric prompts get scores proportional to the unigram
    overlap between candidate and reference sections.
    """

    def __init__(self, latency_s: float = 0.0):
        self.latency_s = latency_s
        self.calls = 0
        self.max_in_flight_seen = 0
        self._in_flight = 0
        self._lock = threading.Lock()

    def _enter(self):
        with self._lock:
            self.calls += 1
            self._in_flight += 1
            self.max_in_flight_seen = max(self.max_in_flight_seen, self._in_flight)

    def _exit(self):
        with self._lock:
            self._in_flight -= 1

    def generate(self, request: GenerationRequest) -> GenerationResult:
        self._enter()
        try:
            if self.latency_s:
                time.sleep(self.latency_s)
            prompt = request.prompt
            if JUDGE_SENTINEL in prompt:
                return GenerationResult(text=self._judge_reply(prompt))

            m = MOCK_OUTCOME_MARKER.search(prompt)
            digit = m.group(1) if m else str(_stable_hash(prompt) % 2)
            echo = _balanced_echo(prompt)
            if echo is None:
                echo = ("REASONING: Decision follows from the incident, the arguments "
                        "advanced by both sides, and the statutes invoked.\n"
                        "CONDITIONS: As considered appropriate by the court.")
            text = f"{digit}\n{echo}"

            logprobs = None
            if request.want_logprobs or request.candidate_tokens:
                chosen = {digit: math.log(0.9), ("1" if digit == "0" else "0"): math.log(0.1)}
                wanted = request.candidate_tokens or ("0", "1")
                logprobs = {tok: chosen.get(tok, LOGPROB_FLOOR) for tok in wanted}
            usage = {"prompt_tokens": len(prompt.split()), "completion_tokens": len(text.split())}
            return GenerationResult(text=text, decision_logprobs=logprobs, usage=usage)
        finally:
            self._exit()

    def _judge_reply(self, prompt: str) -> str:
        def section(label: str, stop_labels: list[str]) -> str:
            start = prompt.find(label)
            if start < 0:
                return ""
            start += len(label)
            end = len(prompt)
            for stop in stop_labels:
                idx = prompt.find(stop, start)
                if 0 <= idx < end:
                    end = idx
            return prompt[start:end]

        reference = section("REFERENCE EXPLANATION:", ["CANDIDATE EXPLANATION:"])
        candidate = section("CANDIDATE EXPLANATION:", ["After your analysis"])
        ref_tokens = set(tokenize(reference))
        cand_tokens = set(tokenize(candidate))
        overlap = len(ref_tokens & cand_tokens) / len(ref_tokens) if ref_tokens else 0.0
        score = 1 + round(9 * overlap)
        return (f"FACTUAL ACCURACY: {score}\n"
                f"COMPLETENESS & COVERAGE: {score}\n"
                f"CLARITY & COHERENCE: {score}\n"
                f"OVERALL: {score}\n"
                f"RATIONALE: Unigram overlap with the reference is {overlap:.2f}.")

    def embed(self, texts: list[str]) -> list[list[list[float]]]:
        self._enter()
        try:
            if self.latency_s:
                time.sleep(self.latency_s)
            return [[_mock_token_vector(tok) for tok in tokenize(text)] for text in texts]
        finally:
            self._exit()


class HttpBackend:
    """OpenAI-style chat/completions + embeddings client (see README for the
    logprobs and token-embedding extensions)."""

    def __init__(self, endpoint: EndpointConfig):
        if not endpoint.resolved_base_url():
            raise ValueError(f"endpoint {endpoint.id} has kind=http but no base_url")
        self.endpoint = endpoint

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.endpoint.api_key_env:
            key = os.environ.get(self.endpoint.api_key_env)
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        import requests

        url = self.endpoint.resolved_base_url().rstrip("/") + path
        try:
            response = requests.post(url, json=payload, headers=self._headers(),
                                     timeout=self.endpoint.timeout_s)
        except requests.RequestException as exc:
            raise TransportError(f"{self.endpoint.id}: {exc}") from exc
        if response.status_code >= 500:
            raise TransportError(f"{self.endpoint.id}: server error {response.status_code}")
        if response.status_code != 200:
            raise BackendReplyError(f"{self.endpoint.id}: HTTP {response.status_code}: {response.text[:500]}")
        try:
            return response.json()
        except ValueError as exc:
            raise BackendReplyError(f"{self.endpoint.id}: non-JSON reply") from exc

    def generate(self, request: GenerationRequest) -> GenerationResult:
        payload = {
            "model": self.endpoint.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "max_tokens": request.max_new_tokens,
            "temperature": request.temperature,
        }
        if request.want_logprobs or request.candidate_tokens:
            payload["logprobs"] = True
            payload["top_logprobs"] = 20
        reply = self._post("/chat/completions", payload)
        try:
            choice = reply["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendReplyError(f"{self.endpoint.id}: malformed completion reply") from exc

        logprobs = None
        if request.want_logprobs or request.candidate_tokens:
            top = {}
            try:
                content = choice.get("logprobs") or {}
                first = (content.get("content") or [{}])[0]
                for item in first.get("top_logprobs") or []:
                    top[item["token"]] = float(item["logprob"])
            except (KeyError, TypeError, ValueError) as exc:
                raise BackendReplyError(f"{self.endpoint.id}: malformed logprobs block") from exc
            wanted = request.candidate_tokens or tuple(top)
            logprobs = {tok: top.get(tok, LOGPROB_FLOOR) for tok in wanted}
        usage = reply.get("usage") or {}
        return GenerationResult(text=text, decision_logprobs=logprobs,
                                usage={k: int(v) for k, v in usage.items() if isinstance(v, (int, float))})

    def embed(self, texts: list[str]) -> list[list[list[float]]]:
        payload = {"model": self.endpoint.model, "input": texts, "encoding": "token_vectors"}
        reply = self._post("/embeddings", payload)
        try:
            return [item["token_embeddings"] for item in reply["data"]]
        except (KeyError, TypeError) as exc:
            raise BackendReplyError(f"{self.endpoint.id}: embeddings reply lacks token_embeddings") from exc


class Gateway:
    """Shared client enforcing per-endpoint in-flight windows, bounded retries
    on transport failures, a response cache keyed by (endpoint id, request
    hash), and a request/response run log (JSONL) sufficient to re-run
    evaluation without re-querying any backend."""

    def __init__(self, cache_dir: str | Path | None = None,
                 log_path: str | Path | None = None,
                 run_id: str = "adhoc"):
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.log_path = Path(log_path) if log_path else None
        self.run_id = run_id
        self._backends: dict[str, object] = {}
        self._semaphores: dict[str, threading.BoundedSemaphore] = {}
        self._lock = threading.Lock()

    def backend_for(self, endpoint: EndpointConfig):
        with self._lock:
            backend = self._backends.get(endpoint.id)
            if backend is None:
                backend = MockBackend() if endpoint.kind == "mock" else HttpBackend(endpoint)
                self._backends[endpoint.id] = backend
                self._semaphores[endpoint.id] = threading.BoundedSemaphore(endpoint.max_in_flight)
            return backend

    # -- cache / log helpers

    def _request_hash(self, endpoint: EndpointConfig, op: str, payload: dict) -> str:
        canonical = json.dumps({"endpoint": endpoint.id, "model": endpoint.model,
                                "op": op, "payload": payload}, sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def _cache_path(self, endpoint: EndpointConfig, request_hash: str) -> Path | None:
        if self.cache_dir is None:
            return None
        return self.cache_dir / endpoint.id / f"{request_hash}.json"

    def _cache_get(self, path: Path | None) -> dict | None:
        if path is None or not path.exists():
            return None
        try:
            return json.loads(path.read_text(encoding="utf-8"))["response"]
        except (ValueError, KeyError):
            logger.warning("unreadable cache entry %s; ignoring", path)
            return None

    def _cache_put(self, path: Path | None, request: dict, response: dict) -> None:
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"request": request, "response": response},
                                   ensure_ascii=False) + "\n", encoding="utf-8")

    def _log(self, endpoint: EndpointConfig, op: str, request_hash: str,
             request: dict, response: dict, cached: bool) -> None:
        if self.log_path is None:
            return
        entry = {"run_id": self.run_id, "endpoint": endpoint.id, "op": op,
                 "request_hash": request_hash, "cached": cached,
                 "time": time.time(), "request": request, "response": response}
        with self._lock:
            self.log_path.parent.mkdir(parents=True, exist_ok=True)
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    def _with_retries(self, endpoint: EndpointConfig, call):
        attempts = endpoint.max_retries + 1
        last: Exception | None = None
        for attempt in range(attempts):
            try:
                with self._semaphores[endpoint.id]:
                    return call()
            except TransportError as exc:
                last = exc
                logger.warning("transient failure on %s (attempt %d/%d): %s",
                               endpoint.id, attempt + 1, attempts, exc)
        raise RetryExhaustedError(f"{endpoint.id}: {attempts} attempts failed: {last}")

    # -- operations

    def generate(self, endpoint: EndpointConfig, request: GenerationRequest) -> GenerationResult:
        backend = self.backend_for(endpoint)
        request_dict = request.to_dict()
        request_hash = self._request_hash(endpoint, "generate", request_dict)
        cache_path = self._cache_path(endpoint, request_hash)
        cached = self._cache_get(cache_path)
        if cached is not None:
            self._log(endpoint, "generate", request_hash, request_dict, cached, cached=True)
            return GenerationResult.from_dict(cached)
        result = self._with_retries(endpoint, lambda: backend.generate(request))
        if request.candidate_tokens:
            missing = [t for t in request.candidate_tokens
                       if t not in (result.decision_logprobs or {})]
            if missing:
                raise BackendReplyError(
                    f"{endpoint.id}: logprobs missing candidates {missing}")
        self._cache_put(cache_path, request_dict, result.to_dict())
        self._log(endpoint, "generate", request_hash, request_dict, result.to_dict(), cached=False)
        return result

    def embed(self, endpoint: EndpointConfig, texts: list[str]) -> list[list[list[float]]]:
        if not texts:
            raise ValueError("embed requires at least one text")
        backend = self.backend_for(endpoint)
        request_dict = {"texts": texts}
        request_hash = self._request_hash(endpoint, "embed", request_dict)
        cache_path = self._cache_path(endpoint, request_hash)
        cached = self._cache_get(cache_path)
        if cached is not None:
            self._log(endpoint, "embed", request_hash, request_dict, cached, cached=True)
            return cached["vectors"]
        vectors = self._with_retries(endpoint, lambda: backend.embed(texts))
        dims = {len(v) for seq in vectors for v in seq}
        if len(dims) > 1:
            raise BackendReplyError(f"{endpoint.id}: inconsistent embedding dimensions {sorted(dims)}")
        self._cache_put(cache_path, request_dict, {"vectors": vectors})
        # vectors are logged in full: the run log alone must be able to replay
        # metric computation without touching any backend again
        self._log(endpoint, "embed", request_hash, request_dict,
                  {"vectors": vectors}, cached=False)
        return vectors

    def judge(self, endpoint: EndpointConfig, explanation: str, reference: str,
              case_summary: str, diagnostics: Diagnostics | None = None) -> JudgeVerdict:
        if not (explanation and reference and case_summary):
            raise ValueError("judge requires non-empty explanation, reference, and case summary")
        prompt = render_judge_prompt(explanation, reference, case_summary)
        request = GenerationRequest(prompt=prompt, max_new_tokens=512, temperature=0.0)
        result = self.generate(endpoint, request)
        try:
            return parse_judge_reply(result.text, diagnostics)
        except JudgeReplyError:
            retry_prompt = prompt + "\nRemember: finish with the five labelled score lines only."
            retry = self.generate(endpoint, GenerationRequest(prompt=retry_prompt,
                                                              max_new_tokens=512, temperature=0.0))
            return parse_judge_reply(retry.text, diagnostics)
