"""Phase 1 (identify): extract per-candidate knowledge items.

For each multiple-choice instance and candidate answer, knowledge is
pulled from a pair corpus or an edge graph under a (conditioning x shape
x filter) configuration, and instances are tagged by how many of their
candidates received knowledge (CS-X).

All randomness is derived from an explicit seed, per (instance,
candidate), so results are identical regardless of worker count.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

from .kg_store import EdgeGraph, EventInferencePair, PairCorpus, RelationEdge
from .lexical import LexicalResource, load_lexical_resource, load_relation_phrases, relation_phrase
from .text_index import TfIdfIndex, Tokenizer, build_index, score_all, score_top_k

CONDITIONINGS = ("QC", "A")
SHAPES = ("pair", "path", "subgraph")
FILTERS = ("HQ", "HR")


@dataclass(frozen=True)
class TaskInstance:
    instance_id: str
    question: str  # context and question concatenated, per task convention
    candidates: tuple[str, ...]
    gold_index: int

    def __post_init__(self):
        if not 2 <= len(self.candidates) <= 3:
            raise ValueError(f"{self.instance_id}: expected 2 or 3 candidates")
        if not 0 <= self.gold_index < len(self.candidates):
            raise ValueError(f"{self.instance_id}: gold_index out of range")


@dataclass(frozen=True)
class ExtractionConfig:
    conditioning: str = "QC"
    shape: str = "pair"
    filter: str = "HQ"
    pool_size: int = 50
    atomic_subgraph_cap: int = 3
    edge_subgraph_cap: int = 5

    def __post_init__(self):
        if self.conditioning not in CONDITIONINGS:
            raise ValueError(f"bad conditioning: {self.conditioning}")
        if self.shape not in SHAPES:
            raise ValueError(f"bad shape: {self.shape}")
        if self.filter not in FILTERS:
            raise ValueError(f"bad filter: {self.filter}")
        if self.pool_size < 1 or self.atomic_subgraph_cap < 1 or self.edge_subgraph_cap < 1:
            raise ValueError("pool_size and subgraph caps must be positive")


@dataclass(frozen=True)
class KnowledgeItem:
    shape: str  # pair | triple | path | subgraph
    score: float
    rendered: str
    provenance: tuple = ()  # (source_name, internal ids...)
    elements: tuple[str, ...] = ()  # path elements, when shape == "path"


@dataclass
class ExtractionResult:
    instance_id: str
    per_candidate: list[KnowledgeItem | None]
    config: ExtractionConfig

    @property
    def subset_tag(self) -> str:
        return f"CS-{sum(1 for item in self.per_candidate if item is not None)}"


def _sentence(text: str) -> str:
    text = text.strip()
    if text and text[-1] not in ".!?":
        text += "."
    return text


def _despace(lemma: str) -> str:
    return lemma.replace("_", " ")


class PairStore:
    """A pair corpus plus its retrieval index over "event inference" documents."""

    def __init__(self, corpus: PairCorpus, tokenizer: Tokenizer | None = None):
        self.corpus = corpus
        self.tokenizer = tokenizer or Tokenizer()
        self.index = build_index(
            [(p.pair_id, p.text) for p in corpus.pairs],
            tokenizer=self.tokenizer,
            id_map={p.pair_id: p for p in corpus.pairs},
        )
        # content-lemma sets per pair, for concept links between pairs
        self._lemma_sets = {p.pair_id: frozenset(self.tokenizer.tokenize(p.text)) for p in corpus.pairs}
        self._lemma_to_pairs: dict[str, list[int]] = {}
        for p in corpus.pairs:
            for lemma in sorted(self._lemma_sets[p.pair_id]):
                self._lemma_to_pairs.setdefault(lemma, []).append(p.pair_id)

    def pair(self, pair_id: int) -> EventInferencePair:
        return self.corpus.pairs[pair_id]

    def lemmas(self, pair_id: int) -> frozenset[str]:
        return self._lemma_sets[pair_id]

    def pairs_sharing_lemma(self, pair_id: int) -> set[int]:
        linked: set[int] = set()
        for lemma in self._lemma_sets[pair_id]:
            linked.update(self._lemma_to_pairs.get(lemma, ()))
        linked.discard(pair_id)
        return linked


class EdgeStore:
    """An edge graph plus the token-level concept matching used for linking."""

    def __init__(self, graph: EdgeGraph, tokenizer: Tokenizer | None = None,
                 resource: LexicalResource | None = None):
        self.graph = graph
        self.tokenizer = tokenizer or Tokenizer()
        self.resource = resource or load_lexical_resource()
        self.relation_phrases = load_relation_phrases()

    def concept_lemmas(self, text: str) -> frozenset[str]:
        """Tokenized, stopword-filtered, lemmatized tokens of a text."""
        return frozenset(self.resource.lemma(t) for t in self.tokenizer.tokenize(text))

    def node_matches(self, node_lemma: str, text_lemmas: frozenset[str]) -> bool:
        """A node matches a text when every underscore-joined part's lemma
        occurs among the text's content lemmas."""
        parts = node_lemma.split("_")
        return all(self.resource.lemma(p) in text_lemmas for p in parts)

    def matching_node_lemmas(self, text_lemmas: frozenset[str]) -> list[str]:
        return sorted(
            n.lemma for n in self.graph.nodes if self.node_matches(n.lemma, text_lemmas)
        )

    def render_triple(self, head: str, relation: str, tail: str) -> str:
        phrase = relation_phrase(relation, self.relation_phrases)
        return f"{_despace(head)} {phrase} {_despace(tail)}"


@dataclass(frozen=True)
class ScoredEdge:
    edge: RelationEdge
    head_lemma: str
    tail_lemma: str
    anchor: str  # the answer-side endpoint lemma
    score: float


# --------------------------------------------------------------------------
# Conditioning
# --------------------------------------------------------------------------

def extract_atomic_pool(store: PairStore, conditioning: str, question: str,
                        answer: str, pool_size: int) -> list[tuple[int, float]]:
    """Scored (pair_id, score) pool for one candidate answer.

    A: top pool_size pairs by tf-idf against the answer alone.
    QC: retrieve top pool_size pairs against question+answer, then re-rank
    that pool by tf-idf against the answer (zero-score pairs dropped).
    """
    if conditioning == "A":
        return score_top_k(store.index, answer, pool_size)
    retrieved = score_top_k(store.index, f"{question} {answer}", pool_size)
    answer_scores = score_all(store.index, answer)
    reranked = [
        (pid, answer_scores[pid]) for pid, _ in retrieved if answer_scores.get(pid, 0.0) > 0.0
    ]
    reranked.sort(key=lambda e: (-e[1], e[0]))
    return reranked


def extract_edge_triples(store: EdgeStore, conditioning: str, question: str,
                         answer: str) -> list[ScoredEdge]:
    """Edges linking the answer (A) or bridging question and answer (QC).

    Score is the edge weight; order is weight descending, then head lemma,
    then tail lemma, then relation label.
    """
    answer_lemmas = store.concept_lemmas(answer)
    question_lemmas = store.concept_lemmas(question)
    out: list[ScoredEdge] = []
    for edge in store.graph.edges:
        head = store.graph.lemma(edge.head)
        tail = store.graph.lemma(edge.tail)
        head_in_a = store.node_matches(head, answer_lemmas)
        tail_in_a = store.node_matches(tail, answer_lemmas)
        if conditioning == "A":
            if head_in_a or tail_in_a:
                anchor = head if head_in_a else tail
                out.append(ScoredEdge(edge, head, tail, anchor, edge.weight))
        else:
            head_in_q = store.node_matches(head, question_lemmas)
            tail_in_q = store.node_matches(tail, question_lemmas)
            if head_in_q and tail_in_a:
                out.append(ScoredEdge(edge, head, tail, tail, edge.weight))
            elif tail_in_q and head_in_a:
                out.append(ScoredEdge(edge, head, tail, head, edge.weight))
    out.sort(key=lambda s: (-s.score, s.head_lemma, s.tail_lemma, s.edge.relation))
    return out


# --------------------------------------------------------------------------
# Shapes (each returns the candidate's ranked item list; rank 1 first)
# --------------------------------------------------------------------------

def _pair_item(store: PairStore, pair_id: int, score: float) -> KnowledgeItem:
    pair = store.pair(pair_id)
    return KnowledgeItem(
        shape="pair",
        score=score,
        rendered=f"{_sentence(pair.event)} {pair.inference}",
        provenance=(store.corpus.source_name, pair_id),
    )


def _triple_item(store: EdgeStore, scored: ScoredEdge) -> KnowledgeItem:
    return KnowledgeItem(
        shape="triple",
        score=scored.score,
        rendered=store.render_triple(scored.head_lemma, scored.edge.relation, scored.tail_lemma),
        provenance=(store.graph.source_name, scored.edge.head, scored.edge.tail, scored.edge.relation),
    )


def pair_or_triple_items(pool, kg_kind: str, seed: int, store) -> list[KnowledgeItem]:
    """Ranked pair/triple items.  ATOMIC keeps pool (score) order; edge
    graphs draw at random, so the ranking is a seeded shuffle of the pool
    and rank 1 is the random selection."""
    if not pool:
        return []
    if kg_kind == "atomic":
        return [_pair_item(store, pid, score) for pid, score in pool]
    order = list(range(len(pool)))
    random.Random(seed).shuffle(order)
    return [_triple_item(store, pool[i]) for i in order]


def path_items_atomic(store: PairStore, conditioning: str, question: str,
                      answer: str, pool_size: int) -> list[KnowledgeItem]:
    """All linked (question-pool pair, answer-pool pair) path combinations,
    ranked by combined score descending, ties by ascending pair ids.

    A link exists when the two pairs share a content lemma.  Under QC the
    partner pool is the question-conditioned retrieval; under A the answer
    pool may link to any corpus pair (scored against the answer).
    """
    answer_pool = extract_atomic_pool(store, conditioning, question, answer, pool_size)
    if not answer_pool:
        return []
    items: list[tuple[float, int, int, KnowledgeItem]] = []
    if conditioning == "QC":
        question_pool = score_top_k(store.index, question, pool_size)
        partner: list[tuple[int, float]] = question_pool
        candidates = {pid: s for pid, s in partner}
        for a_id, a_score in answer_pool:
            linked = store.pairs_sharing_lemma(a_id)
            for q_id in linked:
                if q_id in candidates:
                    items.append(_path_entry(store, q_id, candidates[q_id], a_id, a_score))
    else:
        answer_scores = score_all(store.index, answer)
        for a_id, a_score in answer_pool:
            for q_id in store.pairs_sharing_lemma(a_id):
                q_score = answer_scores.get(q_id, 0.0)
                items.append(_path_entry(store, q_id, q_score, a_id, a_score))
    items.sort(key=lambda e: (-e[0], e[1], e[2]))
    return [item for _, _, _, item in items]


def _path_entry(store: PairStore, q_id: int, q_score: float, a_id: int,
                a_score: float) -> tuple[float, int, int, KnowledgeItem]:
    q, a = store.pair(q_id), store.pair(a_id)
    elements = (q.event, q.inference, a.event, a.inference)
    item = KnowledgeItem(
        shape="path",
        score=q_score + a_score,
        rendered=". ".join(elements),
        provenance=(store.corpus.source_name, q_id, a_id),
        elements=elements,
    )
    return (item.score, q_id, a_id, item)


def path_items_wikihow(store: EdgeStore, conditioning: str, question: str,
                       answer: str) -> list[KnowledgeItem]:
    """Two-edge graph walks, ranked by total edge weight.

    QC: question word -> question word -> answer word.
    A:  answer word -> any neighbor -> any neighbor.
    Edges are traversed in either direction; the three nodes are distinct.
    """
    graph = store.graph
    # undirected weight/relation view; max weight wins per unordered pair
    link: dict[tuple[str, str], tuple[float, str]] = {}
    for edge in graph.edges:
        h, t = graph.lemma(edge.head), graph.lemma(edge.tail)
        for a, b in ((h, t), (t, h)):
            cur = link.get((a, b))
            if cur is None or edge.weight > cur[0]:
                link[(a, b)] = (edge.weight, edge.relation)
    neighbors: dict[str, list[str]] = {}
    for (a, b) in link:
        neighbors.setdefault(a, []).append(b)
    for lst in neighbors.values():
        lst.sort()

    q_nodes = store.matching_node_lemmas(store.concept_lemmas(question))
    a_nodes = store.matching_node_lemmas(store.concept_lemmas(answer))
    q_set, a_set = set(q_nodes), set(a_nodes)

    paths: list[tuple[float, tuple[str, str, str]]] = []
    if conditioning == "QC":
        starts, mids_filter, ends_filter = q_nodes, q_set, a_set
    else:
        starts, mids_filter, ends_filter = a_nodes, None, None
    for w1 in starts:
        for w2 in neighbors.get(w1, ()):
            if w2 == w1 or (mids_filter is not None and w2 not in mids_filter):
                continue
            for w3 in neighbors.get(w2, ()):
                if w3 in (w1, w2) or (ends_filter is not None and w3 not in ends_filter):
                    continue
                total = link[(w1, w2)][0] + link[(w2, w3)][0]
                paths.append((total, (w1, w2, w3)))
    paths.sort(key=lambda p: (-p[0], p[1]))
    items = []
    for total, nodes in paths:
        items.append(KnowledgeItem(
            shape="path",
            score=total,
            rendered=". ".join(_despace(n) for n in nodes),
            provenance=(graph.source_name,) + nodes,
            elements=nodes,
        ))
    return items


def subgraph_items_atomic(store: PairStore, pool: list[tuple[int, float]],
                          cap: int) -> list[KnowledgeItem]:
    """Successive cap-sized chunks of the scored pool, each merged into one
    subgraph item (rank 1 is the top-cap chunk)."""
    items = []
    for start in range(0, len(pool), cap):
        chunk = pool[start:start + cap]
        rendered = "; ".join(
            f"{_sentence(store.pair(pid).event)} {store.pair(pid).inference}" for pid, _ in chunk
        )
        items.append(KnowledgeItem(
            shape="subgraph",
            score=sum(s for _, s in chunk),
            rendered=rendered,
            provenance=(store.corpus.source_name,) + tuple(pid for pid, _ in chunk),
        ))
    return items


def subgraph_items_edge(store: EdgeStore, pool: list[ScoredEdge], cap: int) -> list[KnowledgeItem]:
    """One item per anchor concept, ranked by 1-hop edge count (ties by
    anchor lemma); each keeps its top-cap edges by weight."""
    by_anchor: dict[str, list[ScoredEdge]] = {}
    for scored in pool:
        by_anchor.setdefault(scored.anchor, []).append(scored)
    anchors = sorted(by_anchor, key=lambda a: (-len(by_anchor[a]), a))
    items = []
    for anchor in anchors:
        edges = sorted(
            by_anchor[anchor],
            key=lambda s: (-s.score, s.head_lemma, s.tail_lemma, s.edge.relation),
        )[:cap]
        rendered = "; ".join(
            store.render_triple(s.head_lemma, s.edge.relation, s.tail_lemma) for s in edges
        )
        items.append(KnowledgeItem(
            shape="subgraph",
            score=sum(s.score for s in edges),
            rendered=rendered,
            provenance=(store.graph.source_name, anchor)
            + tuple((s.edge.head, s.edge.tail, s.edge.relation) for s in edges),
        ))
    return items


# --------------------------------------------------------------------------
# Filtering and subsets
# --------------------------------------------------------------------------

def apply_filter(per_candidate_items: list[list[KnowledgeItem]],
                 filter: str) -> list[KnowledgeItem | None]:
    """HR keeps each candidate's rank-1 item.  HQ assigns items globally in
    descending score (ties: candidate index, then rank) so that no two
    candidates keep the same rendered knowledge text."""
    if filter == "HR":
        return [items[0] if items else None for items in per_candidate_items]
    entries = []
    for cand_idx, items in enumerate(per_candidate_items):
        for rank, item in enumerate(items):
            entries.append((-item.score, cand_idx, rank, item))
    entries.sort(key=lambda e: e[:3])
    assigned: list[KnowledgeItem | None] = [None] * len(per_candidate_items)
    claimed: set[str] = set()
    for _, cand_idx, _, item in entries:
        if assigned[cand_idx] is not None or item.rendered in claimed:
            continue
        assigned[cand_idx] = item
        claimed.add(item.rendered)
    return assigned


def split_subsets(results: list[ExtractionResult]) -> dict[str, list[str]]:
    """Map CS-X tag -> instance ids.  Every instance lands in exactly one tag."""
    subsets: dict[str, list[str]] = {}
    for result in results:
        subsets.setdefault(result.subset_tag, []).append(result.instance_id)
    return subsets


# --------------------------------------------------------------------------
# Per-instance extraction driver
# --------------------------------------------------------------------------

def candidate_seed(seed: int, instance_id: str, cand_idx: int) -> int:
    digest = hashlib.sha256(f"{seed}|{instance_id}|{cand_idx}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def shaped_items(store, kg_kind: str, config: ExtractionConfig, question: str,
                 answer: str, seed: int) -> list[KnowledgeItem]:
    """The ranked knowledge item list for one candidate under one config."""
    if kg_kind == "atomic":
        if config.shape == "path":
            return path_items_atomic(store, config.conditioning, question, answer, config.pool_size)
        pool = extract_atomic_pool(store, config.conditioning, question, answer, config.pool_size)
        if config.shape == "pair":
            return pair_or_triple_items(pool, "atomic", seed, store)
        return subgraph_items_atomic(store, pool, config.atomic_subgraph_cap)
    if config.shape == "path":
        return path_items_wikihow(store, config.conditioning, question, answer)
    pool = extract_edge_triples(store, config.conditioning, question, answer)
    if config.shape == "pair":
        return pair_or_triple_items(pool, "edge", seed, store)
    return subgraph_items_edge(store, pool, config.edge_subgraph_cap)


def extract_instance(store, kg_kind: str, instance: TaskInstance,
                     config: ExtractionConfig, seed: int) -> ExtractionResult:
    per_candidate_items = [
        shaped_items(store, kg_kind, config, instance.question, answer,
                     candidate_seed(seed, instance.instance_id, j))
        for j, answer in enumerate(instance.candidates)
    ]
    return ExtractionResult(
        instance_id=instance.instance_id,
        per_candidate=apply_filter(per_candidate_items, config.filter),
        config=config,
    )


def extract_dataset(store, kg_kind: str, instances: list[TaskInstance],
                    config: ExtractionConfig, seed: int, jobs: int = 1) -> list[ExtractionResult]:
    """Extract every instance; output order follows input order regardless
    of worker count."""
    if jobs <= 1 or len(instances) < 2:
        return [extract_instance(store, kg_kind, inst, config, seed) for inst in instances]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(extract_instance, store, kg_kind, inst, config, seed)
            for inst in instances
        ]
        return [f.result() for f in futures]


# --------------------------------------------------------------------------
# Line-delimited I/O
# --------------------------------------------------------------------------

def load_task_file(path: str | Path) -> list[TaskInstance]:
    instances = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            instances.append(TaskInstance(
                instance_id=str(rec["instance_id"]),
                question=rec["question"],
                candidates=tuple(rec["candidates"]),
                gold_index=int(rec["gold_index"]),
            ))
    return instances


def result_record(result: ExtractionResult) -> dict:
    return {
        "instance_id": result.instance_id,
        "config": asdict(result.config),
        "per_candidate": [
            None if item is None else {
                "present": True,
                "shape": item.shape,
                "rendered": item.rendered,
                "score": item.score,
                "provenance": list(item.provenance),
            }
            for item in result.per_candidate
        ],
        "subset_tag": result.subset_tag,
    }


def write_results(results: list[ExtractionResult], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for result in results:
            fh.write(json.dumps(result_record(result), ensure_ascii=False, sort_keys=True) + "\n")


def load_results(path: str | Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
