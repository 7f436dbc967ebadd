"""Load and hold the two kinds of knowledge graphs in memory.

Two backends:
  * PairCorpus  -- event-inference pairs under one of nine inference
    dimensions (ATOMIC-style), read from a normalized 3-column TSV.
  * EdgeGraph   -- labeled, weighted concept-to-concept edges
    (ConceptNet/WikiHow-style), read from an assertions CSV dump or a
    plain edge TSV.

Loaded stores are immutable after loading and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

# The nine admissible inference dimensions.
DIMENSIONS = (
    "xWant", "xNeed", "xIntent", "xReact", "xEffect", "xAttr",
    "oWant", "oReact", "oEffect",
)
_DIMENSION_SET = frozenset(DIMENSIONS)


class KgFormatError(ValueError):
    """Raised when an input file cannot be interpreted as the claimed format."""


def parse_dimension(value: str) -> str:
    """Validate an inference dimension label; raises ValueError otherwise."""
    if value not in _DIMENSION_SET:
        raise ValueError(f"unknown inference dimension: {value!r}")
    return value


@dataclass(frozen=True)
class EventInferencePair:
    pair_id: int
    event: str
    dimension: str
    inference: str

    @property
    def text(self) -> str:
        """The retrieval document for this pair: event and inference joined."""
        return f"{self.event} {self.inference}"


@dataclass
class PairCorpus:
    pairs: list[EventInferencePair]
    source_name: str
    skipped: int = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


@dataclass(frozen=True)
class ConceptNode:
    node_id: int
    lemma: str
    surface: str


@dataclass(frozen=True)
class RelationEdge:
    head: int
    relation: str
    tail: int
    weight: float = 1.0


@dataclass
class EdgeGraph:
    nodes: list[ConceptNode]
    edges: list[RelationEdge]
    source_name: str
    lemma_to_id: dict[str, int] = field(default_factory=dict)
    outgoing: dict[int, list[RelationEdge]] = field(default_factory=dict)
    incoming: dict[int, list[RelationEdge]] = field(default_factory=dict)

    def node(self, node_id: int) -> ConceptNode:
        return self.nodes[node_id]

    def lemma(self, node_id: int) -> str:
        return self.nodes[node_id].lemma

    def rebuild_adjacency(self) -> None:
        self.lemma_to_id = {n.lemma: n.node_id for n in self.nodes}
        self.outgoing = {n.node_id: [] for n in self.nodes}
        self.incoming = {n.node_id: [] for n in self.nodes}
        for edge in self.edges:
            self.outgoing[edge.head].append(edge)
            self.incoming[edge.tail].append(edge)


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def load_pair_corpus(path: str | Path, format: str = "normalized-tsv") -> PairCorpus:
    """Read a normalized event<TAB>dimension<TAB>inference TSV into a PairCorpus.

    Rows whose dimension label does not parse are counted and skipped.
    More than 50% skipped rows signals wrong-format input and raises.
    """
    if format != "normalized-tsv":
        raise KgFormatError(f"unsupported pair corpus format: {format!r}")
    path = Path(path)
    pairs: list[EventInferencePair] = []
    skipped = 0
    total = 0
    with path.open(encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            total += 1
            fields = line.split("\t")
            if len(fields) != 3:
                skipped += 1
                continue
            event, dimension, inference = (_normalize_ws(f) for f in fields)
            if dimension not in _DIMENSION_SET or not event or not inference:
                skipped += 1
                continue
            pairs.append(EventInferencePair(len(pairs), event, dimension, inference))
    if total == 0:
        logger.warning("pair corpus %s is empty", path)
    elif skipped > total / 2:
        raise KgFormatError(
            f"{path}: {skipped}/{total} rows skipped; not a normalized pair TSV?"
        )
    if skipped:
        logger.info("pair corpus %s: skipped %d of %d rows", path, skipped, total)
    return PairCorpus(pairs=pairs, source_name=path.name, skipped=skipped)


def _concept_from_uri(uri: str) -> tuple[str, str] | None:
    """Split a ConceptNet concept URI into (language, lemma); None if malformed."""
    parts = uri.split("/")
    # /c/en/keep or /c/en/get_rid/v/...
    if len(parts) < 4 or parts[1] != "c":
        return None
    return parts[2], parts[3].lower()


def _relation_from_uri(uri: str) -> str:
    parts = uri.split("/")
    return parts[2] if len(parts) >= 3 and parts[1] == "r" else uri


def load_edge_graph(path: str | Path, format: str = "edge-tsv") -> EdgeGraph:
    """Load a labeled edge graph from an assertions CSV or an edge TSV.

    Non-English assertions are filtered, URI prefixes stripped, concepts
    lowercased (underscores kept as phrase joiners), nodes deduplicated by
    lemma.  Duplicate edges keep the maximum weight.
    """
    path = Path(path)
    raw_edges: list[tuple[str, str, str, float]] = []
    if format == "assertions-csv":
        with path.open(encoding="utf-8") as fh:
            for row in csv.reader(fh, delimiter="\t"):
                if len(row) < 4:
                    continue
                rel = _relation_from_uri(row[1])
                head = _concept_from_uri(row[2])
                tail = _concept_from_uri(row[3])
                if head is None or tail is None:
                    continue
                if head[0] != "en" or tail[0] != "en":
                    continue
                weight = 1.0
                if len(row) >= 5 and row[4]:
                    try:
                        weight = float(json.loads(row[4]).get("weight", 1.0))
                    except (json.JSONDecodeError, TypeError, ValueError):
                        weight = 1.0
                raw_edges.append((head[1], rel, tail[1], weight))
    elif format == "edge-tsv":
        with path.open(encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                fields = line.split("\t")
                if len(fields) < 3:
                    continue
                head, rel, tail = fields[0].strip().lower(), fields[1].strip(), fields[2].strip().lower()
                if not head or not tail:
                    continue
                weight = 1.0
                if len(fields) >= 4 and fields[3].strip():
                    weight = float(fields[3])
                raw_edges.append((head, rel, tail, weight))
    else:
        raise KgFormatError(f"unsupported edge graph format: {format!r}")

    if not raw_edges:
        raise KgFormatError(f"{path}: no edges after filtering")

    nodes: list[ConceptNode] = []
    lemma_to_id: dict[str, int] = {}

    def node_id(lemma: str) -> int:
        if lemma not in lemma_to_id:
            lemma_to_id[lemma] = len(nodes)
            nodes.append(ConceptNode(len(nodes), lemma, lemma))
        return lemma_to_id[lemma]

    # Deduplicate by (head, relation, tail); keep max weight.
    best: dict[tuple[int, str, int], float] = {}
    order: list[tuple[int, str, int]] = []
    for head, rel, tail, weight in raw_edges:
        key = (node_id(head), rel, node_id(tail))
        if key not in best:
            best[key] = weight
            order.append(key)
        elif weight > best[key]:
            best[key] = weight
    edges = [RelationEdge(h, r, t, best[(h, r, t)]) for h, r, t in order]

    graph = EdgeGraph(nodes=nodes, edges=edges, source_name=path.name)
    graph.rebuild_adjacency()
    return graph


def lookup_concepts(graph: EdgeGraph, lemmas: list[str]) -> list[int]:
    """Node ids for the lemmas present in the graph, in input order; misses omitted."""
    return [graph.lemma_to_id[l] for l in lemmas if l in graph.lemma_to_id]


def convert_atomic_csv(in_path: str | Path, out_path: str | Path) -> int:
    """Flatten ATOMIC's native CSV (event + per-dimension JSON lists) into
    the normalized 3-column TSV the loader reads.  Returns rows written.
    """
    in_path, out_path = Path(in_path), Path(out_path)
    written = 0
    with in_path.open(encoding="utf-8", newline="") as fh, \
            out_path.open("w", encoding="utf-8") as out:
        reader = csv.DictReader(fh)
        dim_cols = [c for c in (reader.fieldnames or []) if c in _DIMENSION_SET]
        if not dim_cols:
            raise KgFormatError(f"{in_path}: no inference dimension columns found")
        event_col = "event" if "event" in (reader.fieldnames or []) else (reader.fieldnames or [""])[0]
        for row in reader:
            event = _normalize_ws(row.get(event_col, ""))
            if not event:
                continue
            for dim in dim_cols:
                cell = row.get(dim) or "[]"
                try:
                    inferences = json.loads(cell)
                except json.JSONDecodeError:
                    continue
                for inference in inferences:
                    inference = _normalize_ws(str(inference))
                    if not inference:
                        continue
                    out.write(f"{event}\t{dim}\t{inference}\n")
                    written += 1
    return written
