"""Shared text helpers: metric tokenization, token-count estimation, sentence splitting.

The tokenizer below is the single pinned tokenization for all lexical metrics:
lowercase, split on Unicode whitespace, strip leading/trailing punctuation from
each piece. Scores depend on it, so it lives in one place.
"""

from __future__ import annotations

import math
import re

_EDGE_PUNCT = re.compile(r"^\W+|\W+$", re.UNICODE)
_WORDISH = re.compile(r"\w+|[^\w\s]", re.UNICODE)
_SENT_END = re.compile(r"(?<=[.!?])\s+")


def tokenize(text: str) -> list[str]:
    """Metric tokenizer: lowercase, whitespace split, edge punctuation stripped."""
    out = []
    for piece in text.lower().split():
        word = _EDGE_PUNCT.sub("", piece)
        if word:
            out.append(word)
    return out


def estimate_tokens(text: str) -> int:
    """Cheap model-token estimate: word+punctuation count x 1.3, rounded up.

    Exact tokenizers are backend-specific; this heuristic is the contract for
    all context budgeting in this package.
    """
    n = len(_WORDISH.findall(text))
    return math.ceil(n * 1.3)


def split_sentences(text: str) -> list[str]:
    """Naive sentence split on ./!/? followed by whitespace. Good enough for
    truncating statute bodies at a sentence boundary."""
    parts = [p for p in _SENT_END.split(text) if p.strip()]
    return parts if parts else ([text] if text.strip() else [])
