"""Instance-conditioned WikiHow subgraphs.

Three steps per instance: retrieve a relevant article title by tf-idf,
read externally produced dependency parses (goal, title, and each
paragraph sentence), then build a graph whose nodes are content lemmas
shared by at least two parses and whose edges are the dependency arcs
between those lemmas, weighted by arc occurrence count.

Parsing itself is out of core; parses arrive in a 10-column
parse-exchange file (CoNLL-style), grouped by (instance_id, source).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .kg_store import ConceptNode, EdgeGraph, RelationEdge
from .text_index import TfIdfIndex, build_index, score_top_k

CONTENT_POS_PREFIXES = ("N", "V", "J")
CONTENT_POS = {"NOUN", "VERB", "ADJ"}


class ParseFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WikiHowArticle:
    article_id: str
    title: str
    paragraph: str

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError(f"{self.article_id}: empty title")


@dataclass(frozen=True)
class ParseToken:
    index: int  # 1-based
    surface: str
    lemma: str
    pos: str
    head: int  # 0 = root
    deprel: str


@dataclass(frozen=True)
class ParsedSentence:
    tokens: tuple[ParseToken, ...]

    def __post_init__(self):
        n = len(self.tokens)
        roots = 0
        for tok in self.tokens:
            if not 0 <= tok.head <= n:
                raise ParseFormatError(f"head index {tok.head} out of range")
            if tok.head == 0:
                roots += 1
        if n and roots != 1:
            raise ParseFormatError(f"expected exactly one root, found {roots}")

    def arcs(self):
        """(head_token, dependent_token, deprel) for every non-root arc."""
        for tok in self.tokens:
            if tok.head > 0:
                yield self.tokens[tok.head - 1], tok, tok.deprel


def _is_content(pos: str) -> bool:
    return pos in CONTENT_POS or pos[:1] in CONTENT_POS_PREFIXES


def load_articles(path: str | Path) -> list[WikiHowArticle]:
    articles = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            articles.append(WikiHowArticle(
                article_id=str(rec["article_id"]),
                title=rec["title"],
                paragraph=rec.get("paragraph", ""),
            ))
    return articles


def build_title_index(articles: list[WikiHowArticle]) -> TfIdfIndex:
    return build_index(
        [(i, a.title) for i, a in enumerate(articles)],
        id_map={i: a for i, a in enumerate(articles)},
    )


def retrieve_titles(index: TfIdfIndex, goal: str, k: int = 1) -> list[tuple[WikiHowArticle, float]]:
    """Top-k articles by tf-idf similarity between the goal and titles."""
    return [(index.id_map[doc_id], score) for doc_id, score in score_top_k(index, goal, k)]


def read_parse_exchange(path: str | Path) -> dict[tuple[str, str], list[ParsedSentence]]:
    """Read a parse-exchange file into {(instance_id, source): sentences}.

    Token lines carry 10 tab-separated columns (index, surface, lemma, POS,
    -, -, head, deprel, -, -); blank lines separate sentences; comment
    headers "# instance = ID" / "# source = goal|title|para-N" key groups.
    """
    groups: dict[tuple[str, str], list[ParsedSentence]] = {}
    instance_id: str | None = None
    source: str | None = None
    current: list[ParseToken] = []

    def flush():
        nonlocal current
        if current:
            if instance_id is None or source is None:
                raise ParseFormatError("token block before instance/source headers")
            groups.setdefault((instance_id, source), []).append(
                ParsedSentence(tuple(current))
            )
            current = []

    with Path(path).open(encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                flush()
                continue
            if line.startswith("#"):
                flush()
                key, _, value = line.lstrip("# ").partition("=")
                key, value = key.strip(), value.strip()
                if key == "instance":
                    instance_id = value
                elif key == "source":
                    source = value
                continue
            cols = line.split("\t")
            if len(cols) < 8:
                raise ParseFormatError(f"expected >=8 columns, got {len(cols)}: {line!r}")
            current.append(ParseToken(
                index=int(cols[0]),
                surface=cols[1],
                lemma=cols[2].lower(),
                pos=cols[3],
                head=int(cols[6]),
                deprel=cols[7],
            ))
    flush()
    return groups


def build_instance_graph(parses: list[list[ParsedSentence]],
                         source_name: str = "wikihow") -> EdgeGraph:
    """Combine per-source parses into one concept graph.

    Nodes are content lemmas (noun/verb/adjective) occurring in at least
    two of the input parses; edges are dependency arcs whose endpoints are
    both concept nodes, labeled with the dependency relation and weighted
    by arc occurrence count across all parses.
    """
    occurrence: dict[str, set[int]] = {}
    for parse_idx, sentences in enumerate(parses):
        for sentence in sentences:
            for tok in sentence.tokens:
                if _is_content(tok.pos):
                    occurrence.setdefault(tok.lemma, set()).add(parse_idx)
    concept_lemmas = sorted(l for l, where in occurrence.items() if len(where) >= 2)
    lemma_to_id = {lemma: i for i, lemma in enumerate(concept_lemmas)}
    nodes = [ConceptNode(i, lemma, lemma) for i, lemma in enumerate(concept_lemmas)]

    weights: dict[tuple[int, str, int], int] = {}
    for sentences in parses:
        for sentence in sentences:
            for head_tok, dep_tok, deprel in sentence.arcs():
                if head_tok.lemma in lemma_to_id and dep_tok.lemma in lemma_to_id:
                    key = (lemma_to_id[head_tok.lemma], deprel, lemma_to_id[dep_tok.lemma])
                    weights[key] = weights.get(key, 0) + 1

    edges = [
        RelationEdge(h, rel, t, float(w))
        for (h, rel, t), w in sorted(weights.items())
    ]
    graph = EdgeGraph(nodes=nodes, edges=edges, source_name=source_name)
    graph.rebuild_adjacency()
    return graph


def instance_graph_from_file(path: str | Path, instance_id: str,
                             source_name: str = "wikihow") -> EdgeGraph:
    """Build the graph for one instance from a parse-exchange file,
    treating each source group (goal, title, para-i) as one input parse."""
    groups = read_parse_exchange(path)
    sources = sorted(src for (iid, src) in groups if iid == instance_id)
    parses = [groups[(instance_id, src)] for src in sources]
    return build_instance_graph(parses, source_name=source_name)
