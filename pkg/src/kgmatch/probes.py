"""Probe construction from an event-inference pair corpus.

Three families, each in a QA and a masked-LM (MLM) flavor:
  * relational     -- which inference dimension does an inference belong to,
                      pitting two dimensions against each other;
  * agent-patient  -- is the inference about PersonX or about others;
  * concept        -- the salient concept of the event or inference versus
                      its antonym.

Train/dev splits mirror the corpus's own split; regeneration from the
same corpus and lexical resource is byte-identical.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

from .kg_store import PairCorpus
from .lexical import LexicalResource

logger = logging.getLogger(__name__)

MASK = "[MASK]"

# Fixed dimension -> statement verb mapping.
VERB_MAP = {
    "xWant": "wants", "xNeed": "needs", "xIntent": "intends",
    "xReact": "feels", "xEffect": "effect", "xAttr": "is",
    "oWant": "wants", "oReact": "feels", "oEffect": "effect",
}

# Plural-stripped verb forms for agent-patient MLM prompts, so neither
# class gets a grammatical hint.
BASE_VERB = {
    "wants": "want", "needs": "need", "intends": "intend",
    "feels": "feel", "effect": "effect", "is": "is",
}

# Dimension bases that exist for both PersonX and others.
AGENT_PATIENT_BASES = ("Want", "Effect", "React")

# Canonical pairing orders, as laid out in the probe size report.
X_DIMS = ("xWant", "xEffect", "xReact", "xIntent", "xNeed", "xAttr")
O_DIMS = ("oWant", "oEffect", "oReact")


@dataclass(frozen=True)
class Probe:
    probe_id: str
    family: str
    format: str  # QA | MLM
    prompt: str
    candidates: tuple[str, str]
    gold_index: int
    source: tuple[int, ...]

    def __post_init__(self):
        if len(self.candidates) != 2 or self.gold_index not in (0, 1):
            raise ValueError("probes are two-candidate items")
        masks = self.prompt.count(MASK)
        if self.format == "MLM" and masks != 1:
            raise ValueError("MLM prompt must hold the mask exactly once")
        if self.format == "QA" and masks != 0:
            raise ValueError("QA prompt must not hold the mask")


def _sentence(text: str) -> str:
    text = text.strip()
    if text and text[-1] not in ".!?":
        text += "."
    return text


def _clause(text: str) -> str:
    return text.strip().rstrip(".!?").strip()


def person_token(dimension: str) -> str:
    return "PersonX" if dimension.startswith("x") else "others"


def _usable(pair) -> bool:
    return pair.inference.strip().lower() != "none"


def _scope(dimension: str) -> str:
    return dimension[0]


# --------------------------------------------------------------------------
# Relational probes
# --------------------------------------------------------------------------

def gen_relational(corpus: PairCorpus, dim_a: str, dim_b: str,
                   format: str, balance: bool = False) -> list[Probe]:
    """One probe per (event, inference) pair under dim_a or dim_b.

    QA states the event and asks "What happens next?" with the inference
    rendered under each of the two dimension verbs; MLM masks the verb.
    """
    if dim_a == dim_b:
        raise ValueError("relational probes need two distinct dimensions")
    if _scope(dim_a) != _scope(dim_b):
        raise ValueError(f"incompatible person scopes: {dim_a} vs {dim_b}")
    family = f"relational:{dim_a}_vs_{dim_b}"
    person = person_token(dim_a)
    verbs = (VERB_MAP[dim_a], VERB_MAP[dim_b])
    probes = []
    for pair in corpus.pairs:
        if pair.dimension not in (dim_a, dim_b) or not _usable(pair):
            continue
        gold = 0 if pair.dimension == dim_a else 1
        inference = _clause(pair.inference)
        if format == "QA":
            prompt = f"{_sentence(pair.event)} What happens next?"
            candidates = tuple(f"{person} {verb} {inference}" for verb in verbs)
        else:
            prompt = f"{_sentence(pair.event)} {person} {MASK} {inference}."
            candidates = verbs
        probes.append(Probe(
            probe_id=f"rel-{dim_a}-{dim_b}-{format.lower()}-{pair.pair_id}",
            family=family, format=format, prompt=prompt,
            candidates=candidates, gold_index=gold, source=(pair.pair_id,),
        ))
    if balance:
        probes = _downsample_balanced(probes)
    return probes


def _downsample_balanced(probes: list[Probe]) -> list[Probe]:
    """Keep the first n probes of each gold class, n = minority class size."""
    per_class = {0: [p for p in probes if p.gold_index == 0],
                 1: [p for p in probes if p.gold_index == 1]}
    n = min(len(per_class[0]), len(per_class[1]))
    keep = set(id(p) for cls in per_class.values() for p in cls[:n])
    return [p for p in probes if id(p) in keep]


# --------------------------------------------------------------------------
# Agent-patient probes
# --------------------------------------------------------------------------

def gen_agent_patient(corpus: PairCorpus, dim: str, format: str) -> list[Probe]:
    """Is the inference assigned to PersonX or to others?

    `dim` is a dimension base with both variants (Want, React, Effect).
    MLM prompts use the plural-stripped verb for both classes.
    """
    base = dim.lstrip("xo") if dim[:1] in "xo" and dim[1:2].isupper() else dim
    if base not in AGENT_PATIENT_BASES:
        raise ValueError(f"dimension {dim!r} has no agent/patient variant pair")
    x_dim, o_dim = f"x{base}", f"o{base}"
    verb = VERB_MAP[x_dim]
    probes = []
    for pair in corpus.pairs:
        if pair.dimension not in (x_dim, o_dim) or not _usable(pair):
            continue
        gold = 0 if pair.dimension == x_dim else 1
        inference = _clause(pair.inference)
        if format == "QA":
            prompt = f"{_sentence(pair.event)} Who {verb} {inference}?"
        else:
            prompt = f"{_sentence(pair.event)} {MASK} {BASE_VERB[verb]} {inference}."
        probes.append(Probe(
            probe_id=f"ap-{base}-{format.lower()}-{pair.pair_id}",
            family=f"agent_patient:{base}", format=format, prompt=prompt,
            candidates=("PersonX", "others"), gold_index=gold,
            source=(pair.pair_id,),
        ))
    return probes


# --------------------------------------------------------------------------
# Concept probes
# --------------------------------------------------------------------------

_WORD_RE = re.compile(r"[A-Za-z0-9]+")


def salient_concept(text: str, resource: LexicalResource) -> tuple[str, str, str] | None:
    """(surface, lemma, antonym) for the most salient concept of a text.

    First non-auxiliary verb whose lemma has an antonym in the resource,
    else the first such noun; None when nothing qualifies.
    """
    tokens = _WORD_RE.findall(text)
    for wanted in ("VERB", "NOUN"):
        for surface in tokens:
            pos = resource.pos_tag(surface)
            if pos != wanted or (wanted == "VERB" and resource.is_auxiliary(surface)):
                continue
            lemma = resource.lemma(surface)
            antonym = resource.antonym(lemma)
            if antonym is not None:
                return surface, lemma, antonym
    return None


def _swap(text: str, surface: str, replacement: str) -> str:
    return re.sub(rf"\b{re.escape(surface)}\b", replacement, text, count=1)


def gen_concept(corpus: PairCorpus, target: str, format: str,
                resource: LexicalResource) -> list[Probe]:
    """Salient-concept-versus-antonym probes over the event or inference.

    Pairs whose target text holds no antonym-bearing concept are skipped;
    the skip count is logged.  Candidate concepts are lemmatized so the
    ground truth and the antonym compete on equal footing.
    """
    if target not in ("event", "inference"):
        raise ValueError(f"bad concept target: {target!r}")
    probes = []
    skipped = 0
    for pair in corpus.pairs:
        if not _usable(pair):
            skipped += 1
            continue
        person = person_token(pair.dimension)
        verb = VERB_MAP[pair.dimension]
        inference = _clause(pair.inference)
        target_text = pair.event if target == "event" else inference
        concept = salient_concept(target_text, resource)
        if concept is None:
            skipped += 1
            continue
        surface, lemma, antonym = concept
        statement = f"{person} {verb} {inference}"
        if target == "event":
            gold_clause = _clause(_swap(pair.event, surface, lemma))
            alt_clause = _clause(_swap(pair.event, surface, antonym))
            if format == "QA":
                prompt = f"{_sentence(statement)} What happened?"
                candidates = (gold_clause, alt_clause)
            else:
                masked = _swap(pair.event, surface, MASK)
                prompt = f"{_sentence(masked)} {_sentence(statement)}"
                candidates = (lemma, antonym)
        else:
            masked_statement = f"{person} {verb} {_swap(inference, surface, MASK)}"
            gold_clause = f"{person} {verb} {_swap(inference, surface, lemma)}"
            alt_clause = f"{person} {verb} {_swap(inference, surface, antonym)}"
            if format == "QA":
                prompt = f"{_sentence(pair.event)} What happens next?"
                candidates = (gold_clause, alt_clause)
            else:
                prompt = f"{_sentence(pair.event)} {_sentence(masked_statement)}"
                candidates = (lemma, antonym)
        probes.append(Probe(
            probe_id=f"con-{target}-{format.lower()}-{pair.pair_id}",
            family=f"concept:{target}", format=format, prompt=prompt,
            candidates=candidates, gold_index=0, source=(pair.pair_id,),
        ))
    if skipped:
        logger.info("concept/%s %s: skipped %d pairs without an antonym-bearing concept",
                    target, format, skipped)
    return probes


# --------------------------------------------------------------------------
# Suite emission
# --------------------------------------------------------------------------

def relational_pairings() -> list[tuple[str, str]]:
    pairs = []
    for dims in (X_DIMS, O_DIMS):
        for i, a in enumerate(dims):
            for b in dims[i + 1:]:
                pairs.append((a, b))
    return pairs


def probe_record(probe: Probe) -> dict:
    return {
        "probe_id": probe.probe_id,
        "family": probe.family,
        "format": probe.format,
        "prompt": probe.prompt,
        "candidates": list(probe.candidates),
        "gold_index": probe.gold_index,
        "source": list(probe.source),
    }


def write_probes(probes: list[Probe], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for probe in probes:
            fh.write(json.dumps(probe_record(probe), ensure_ascii=False, sort_keys=True) + "\n")


def load_probes(path: str | Path) -> list[Probe]:
    probes = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            probes.append(Probe(
                probe_id=rec["probe_id"], family=rec["family"],
                format=rec["format"], prompt=rec["prompt"],
                candidates=tuple(rec["candidates"]),
                gold_index=rec["gold_index"], source=tuple(rec["source"]),
            ))
    return probes


def emit_probe_suite(
    corpora: dict[str, PairCorpus],  # split name -> corpus, e.g. train/dev
    out_dir: str | Path,
    resource: LexicalResource,
    formats: tuple[str, ...] = ("QA", "MLM"),
    balance: bool = False,
) -> dict[str, dict[str, int]]:
    """Write one probe file per family/pairing/format/split and return the
    size report {split: {type label: probe count}}."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report: dict[str, dict[str, int]] = {split: {} for split in corpora}

    def emit(split, corpus, label, slug, fmt, probes):
        write_probes(probes, out_dir / f"{slug}.{fmt.lower()}.{split}.jsonl")
        report[split][f"{label} [{fmt}]"] = len(probes)

    for split, corpus in corpora.items():
        for dim_a, dim_b in relational_pairings():
            label = f"{dim_a} vs {dim_b}"
            slug = f"relational_{dim_a}_vs_{dim_b}"
            for fmt in formats:
                emit(split, corpus, label, slug, fmt,
                     gen_relational(corpus, dim_a, dim_b, fmt, balance=balance))
        for base in AGENT_PATIENT_BASES:
            label = f"x{base} vs o{base}"
            slug = f"agent_patient_{base}"
            for fmt in formats:
                emit(split, corpus, label, slug, fmt,
                     gen_agent_patient(corpus, base, fmt))
        for target in ("inference", "event"):
            slug = f"concept_{target}"
            for fmt in formats:
                emit(split, corpus, target, slug, fmt,
                     gen_concept(corpus, target, fmt, resource))
    return report


def format_size_report(report: dict[str, dict[str, int]]) -> str:
    """Plain-text size table in the probe size report layout."""
    lines = []
    for split, sizes in report.items():
        lines.append(f"Probe sizes ({split})")
        lines.append(f"{'Type':<36} Data Size")
        for label, count in sizes.items():
            lines.append(f"{label:<36} {count}")
        lines.append("")
    return "\n".join(lines)
