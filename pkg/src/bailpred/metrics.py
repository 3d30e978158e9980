"""Outcome classification metrics and reference-based generation metrics.

All lexical metrics share one pinned tokenization (textutil.tokenize) and are
pure functions. Formula choices that matter:

* ROUGE-L is the LCS F-measure with beta = 1 (harmonic mean of P and R).
* BLEU uses clipped n-gram precisions for n = 1..4 with add-1 smoothing on
  numerator and denominator for n >= 2 only; rationales are short, so
  unsmoothed BLEU-4 would collapse to 0 for most items.
* METEOR aligns exact matches first, then Porter-stem matches (no WordNet
  stage), with alpha = 0.9, beta = 3, gamma = 0.5.
* BERTScore is greedy max-cosine matching in both directions over per-token
  vectors from the configured embedder; an optional baseline b rescales every
  value to (x - b) / (1 - b), which can go negative.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from .gateway import JudgeVerdict
from .porter import stem
from .textutil import tokenize

logger = logging.getLogger(__name__)

Embedder = Callable[[list[str]], list[list[list[float]]]]
JudgeFn = Callable[[str, str, str], JudgeVerdict]

METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5


# --- classification -----------------------------------------------------------

@dataclass(frozen=True)
class ClassificationReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    mode: str
    tp: int
    fp: int
    tn: int
    fn: int
    warnings: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"accuracy": self.accuracy, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "mode": self.mode,
                "confusion": {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}}


def _safe_div(num: float, den: float, label: str, warnings: list[str]) -> float:
    if den == 0:
        warnings.append(f"{label} has zero denominator; defined as 0")
        return 0.0
    return num / den


def classification_metrics(pairs: list[tuple[int, int]], mode: str = "macro") -> ClassificationReport:
    """Exact confusion-matrix arithmetic over (y_pred, y_gold) pairs.

    mode "binary-positive-1" reports P/R/F1 of class 1; mode "macro" averages
    the per-class values unweighted. Zero-denominator metrics are 0 with a
    warning.
    """
    if not pairs:
        raise ValueError("classification_metrics requires at least one pair")
    if mode not in ("macro", "binary-positive-1"):
        raise ValueError(f"unknown averaging mode: {mode}")
    for y_pred, y_gold in pairs:
        if y_pred not in (0, 1) or y_gold not in (0, 1):
            raise ValueError(f"labels must be 0/1, got ({y_pred}, {y_gold})")

    tp = sum(1 for p, g in pairs if p == 1 and g == 1)
    fp = sum(1 for p, g in pairs if p == 1 and g == 0)
    tn = sum(1 for p, g in pairs if p == 0 and g == 0)
    fn = sum(1 for p, g in pairs if p == 0 and g == 1)
    accuracy = (tp + tn) / len(pairs)
    warnings: list[str] = []

    def prf(tp_, fp_, fn_, cls):
        p = _safe_div(tp_, tp_ + fp_, f"class-{cls} precision", warnings)
        r = _safe_div(tp_, tp_ + fn_, f"class-{cls} recall", warnings)
        f = _safe_div(2 * p * r, p + r, f"class-{cls} f1", warnings)
        return p, r, f

    p1, r1, f1_1 = prf(tp, fp, fn, 1)
    if mode == "binary-positive-1":
        precision, recall, f1 = p1, r1, f1_1
    else:
        p0, r0, f1_0 = prf(tn, fn, fp, 0)  # class 0: predicted-0 correctness
        precision = (p0 + p1) / 2
        recall = (r0 + r1) / 2
        f1 = (f1_0 + f1_1) / 2

    for w in warnings:
        logger.warning("classification_metrics: %s", w)
    return ClassificationReport(accuracy=accuracy, precision=precision, recall=recall,
                                f1=f1, mode=mode, tp=tp, fp=fp, tn=tn, fn=fn,
                                warnings=tuple(warnings))


# --- lexical metrics ------------------------------------------------------------

def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """LCS-based F-measure over word tokens (beta = 1)."""
    cand, ref = tokenize(candidate), tokenize(reference)
    if not cand or not ref:
        logger.warning("rouge_l: empty after tokenization; scoring 0")
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    p = lcs / len(cand)
    r = lcs / len(ref)
    return 2 * p * r / (p + r)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate: str, reference: str, max_n: int = 4) -> float:
    """Smoothed sentence BLEU with brevity penalty."""
    cand, ref = tokenize(candidate), tokenize(reference)
    if not cand:
        return 0.0
    log_sum = 0.0
    for n in range(1, max_n + 1):
        cand_ngrams = _ngrams(cand, n)
        ref_ngrams = _ngrams(ref, n)
        matches = sum(min(count, ref_ngrams[gram]) for gram, count in cand_ngrams.items())
        total = sum(cand_ngrams.values())
        if n == 1:
            if matches == 0:
                return 0.0
            precision = matches / total
        else:
            precision = (matches + 1) / (total + 1)
        log_sum += math.log(precision)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return bp * math.exp(log_sum / max_n)


def _meteor_alignment(cand: list[str], ref: list[str]) -> list[tuple[int, int]]:
    """Greedy two-stage alignment: exact matches first, then Porter stems.

    Each candidate token takes the earliest still-unmatched reference token;
    deterministic by construction.
    """
    matched_ref: set[int] = set()
    pairs: list[tuple[int, int]] = []
    for i, tok in enumerate(cand):
        for j, ref_tok in enumerate(ref):
            if j not in matched_ref and ref_tok == tok:
                matched_ref.add(j)
                pairs.append((i, j))
                break
    matched_cand = {i for i, _ in pairs}
    cand_stems = [stem(t) for t in cand]
    ref_stems = [stem(t) for t in ref]
    for i, tok_stem in enumerate(cand_stems):
        if i in matched_cand:
            continue
        for j, ref_stem in enumerate(ref_stems):
            if j not in matched_ref and ref_stem == tok_stem:
                matched_ref.add(j)
                pairs.append((i, j))
                break
    return sorted(pairs)


def _chunk_count(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for i, j in pairs:
        if prev is None or i != prev[0] + 1 or j != prev[1] + 1:
            chunks += 1
        prev = (i, j)
    return chunks


def meteor(candidate: str, reference: str) -> float:
    """Exact+stem METEOR with fragmentation penalty (no synonym stage)."""
    cand, ref = tokenize(candidate), tokenize(reference)
    if not cand or not ref:
        return 0.0
    pairs = _meteor_alignment(cand, ref)
    m = len(pairs)
    if m == 0:
        return 0.0
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = precision * recall / (METEOR_ALPHA * precision + (1 - METEOR_ALPHA) * recall)
    chunks = _chunk_count(pairs)
    penalty = METEOR_GAMMA * (chunks / m) ** METEOR_BETA
    return fmean * (1 - penalty)


# --- BERTScore -------------------------------------------------------------------

@dataclass(frozen=True)
class BertScoreResult:
    precision: float
    recall: float
    f1: float
    raw_precision: float
    raw_recall: float
    raw_f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "raw_precision": self.raw_precision, "raw_recall": self.raw_recall,
                "raw_f1": self.raw_f1}


def _cosine(a: list[float], b: list[float]) -> float:
    dot = sum(x * y for x, y in zip(a, b))
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(y * y for y in b))
    if na == 0 or nb == 0:
        return 0.0
    return dot / (na * nb)


def bertscore(candidate: str, reference: str, embedder: Embedder,
              baseline: float | None = None) -> BertScoreResult:
    """Greedy max-cosine matching in both directions over token vectors."""
    vectors = embedder([candidate, reference])
    if len(vectors) != 2:
        raise ValueError("embedder must return one vector sequence per input text")
    cand_vecs, ref_vecs = vectors
    if not cand_vecs or not ref_vecs:
        logger.warning("bertscore: empty token sequence; scoring 0")
        p = r = f = 0.0
    else:
        sims = [[_cosine(cv, rv) for rv in ref_vecs] for cv in cand_vecs]
        p = sum(max(row) for row in sims) / len(cand_vecs)
        r = sum(max(sims[i][j] for i in range(len(cand_vecs)))
                for j in range(len(ref_vecs))) / len(ref_vecs)
        f = 2 * p * r / (p + r) if (p + r) else 0.0

    if baseline is None:
        return BertScoreResult(p, r, f, p, r, f)
    rescale = lambda x: (x - baseline) / (1 - baseline)
    return BertScoreResult(rescale(p), rescale(r), rescale(f), p, r, f)


# --- judge-based evaluation -------------------------------------------------------

@dataclass
class GEvalReport:
    verdicts: dict[str, JudgeVerdict] = field(default_factory=dict)
    failures: dict[str, str] = field(default_factory=dict)

    @property
    def n_failures(self) -> int:
        return len(self.failures)

    def means(self) -> dict[str, float]:
        if not self.verdicts:
            return {}
        keys = ("factual_accuracy", "completeness_coverage", "clarity_coherence", "overall")
        n = len(self.verdicts)
        return {k: sum(getattr(v, k) for v in self.verdicts.values()) / n for k in keys}

    def to_dict(self) -> dict:
        return {"means": self.means(), "n_scored": len(self.verdicts),
                "n_failures": self.n_failures,
                "verdicts": {cid: v.to_dict() for cid, v in sorted(self.verdicts.items())},
                "failures": dict(sorted(self.failures.items()))}


def geval_evaluate(items: list[tuple[str, str, str, str]], judge: JudgeFn) -> GEvalReport:
    """Score each (case_id, explanation, reference, case_summary) with the judge.

    Item-level judge failures are recorded and excluded from the aggregate
    means; the run continues.
    """
    report = GEvalReport()
    for case_id, explanation, reference, case_summary in items:
        try:
            report.verdicts[case_id] = judge(explanation, reference, case_summary)
        except Exception as exc:
            report.failures[case_id] = f"{type(exc).__name__}: {exc}"
            logger.warning("judge failed for %s: %s", case_id, exc)
    return report
