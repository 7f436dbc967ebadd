"""Tokenization and a small tf-idf retrieval index over knowledge units.

tf is the raw in-document count and idf(t) = ln(N / (1 + df(t))) + 1, so
all vector components are non-negative and cosine scores land in [0, 1].
The stopword list is a fixed snapshot shipped with the package.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _load_stopwords() -> frozenset[str]:
    text = resources.files("kgmatch.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(
        line.strip() for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


STOPWORDS = _load_stopwords()


class Tokenizer:
    """Lowercase alphanumeric-run tokenizer with stopword removal."""

    def __init__(self, stopwords: frozenset[str] = STOPWORDS):
        self.stopwords = stopwords

    def tokenize(self, text: str) -> list[str]:
        return [t for t in _TOKEN_RE.findall(text.lower()) if t not in self.stopwords]


@dataclass
class TfIdfIndex:
    doc_count: int
    postings: dict[str, list[tuple[int, int]]]  # term -> [(doc_id, tf)], sorted by doc_id
    doc_norms: dict[int, float]
    id_map: dict[int, object]
    tokenizer: Tokenizer = field(default_factory=Tokenizer)

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        return math.log(self.doc_count / (1 + df)) + 1.0


def build_index(
    docs: list[tuple[int, str]],
    tokenizer: Tokenizer | None = None,
    id_map: dict[int, object] | None = None,
) -> TfIdfIndex:
    """Index a list of (doc_id, text) documents; doc_ids must be unique."""
    tokenizer = tokenizer or Tokenizer()
    seen: set[int] = set()
    postings: dict[str, list[tuple[int, int]]] = {}
    doc_tfs: dict[int, Counter] = {}
    for doc_id, text in docs:
        if doc_id in seen:
            raise ValueError(f"duplicate doc_id: {doc_id}")
        seen.add(doc_id)
        doc_tfs[doc_id] = Counter(tokenizer.tokenize(text))

    for doc_id, _ in docs:
        for term, tf in doc_tfs[doc_id].items():
            postings.setdefault(term, []).append((doc_id, tf))
    for plist in postings.values():
        plist.sort(key=lambda p: p[0])

    n = len(docs)
    doc_norms: dict[int, float] = {}
    for doc_id, tfs in doc_tfs.items():
        total = 0.0
        for term, tf in tfs.items():
            w = tf * (math.log(n / (1 + len(postings[term]))) + 1.0)
            total += w * w
        doc_norms[doc_id] = math.sqrt(total)

    return TfIdfIndex(
        doc_count=n,
        postings=postings,
        doc_norms=doc_norms,
        id_map=id_map or {},
        tokenizer=tokenizer,
    )


def score_all(index: TfIdfIndex, query: str) -> dict[int, float]:
    """Cosine similarity of the query against every doc with a shared term."""
    q_tf = Counter(index.tokenizer.tokenize(query))
    if not q_tf:
        return {}
    q_weights = {t: tf * index.idf(t) for t, tf in q_tf.items()}
    q_norm = math.sqrt(sum(w * w for w in q_weights.values()))
    if q_norm == 0.0:
        return {}
    scores: dict[int, float] = {}
    for term, q_w in q_weights.items():
        idf = index.idf(term)
        for doc_id, tf in index.postings.get(term, ()):
            scores[doc_id] = scores.get(doc_id, 0.0) + q_w * tf * idf
    out: dict[int, float] = {}
    for doc_id, dot in scores.items():
        d_norm = index.doc_norms[doc_id]
        if d_norm > 0.0 and dot > 0.0:
            out[doc_id] = dot / (q_norm * d_norm)
    return out


def score_top_k(index: TfIdfIndex, query: str, k: int) -> list[tuple[int, float]]:
    """Top-k docs by cosine score, descending; ties broken by ascending doc_id.

    Zero-score documents are excluded, so the result may hold fewer than k
    entries; an all-stopword query yields [].
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    scores = score_all(index, query)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]
