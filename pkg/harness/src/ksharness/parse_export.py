"""One-shot dependency parse export in the toolkit's parse-exchange format.

The output is a 10-column, CoNLL-like file grouped by ``# instance =`` /
``# source =`` headers with blank lines between sentences.  Parses come
from a deliberately simple heuristic parser (first main verb is the root,
everything hangs off it): graph construction downstream only consumes
content-word arcs, so approximate attachments are acceptable and the
export stays dependency-free.  Sentences the heuristics cannot handle are
skipped with a log entry.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

_SENT_RE = re.compile(r"[^.?!]+[.?!]?")
_WORD_RE = re.compile(r"[A-Za-z0-9']+|[^\sA-Za-z0-9']")

_DETERMINERS = {"a", "an", "the", "this", "that", "these", "those"}
_PREPOSITIONS = {"in", "on", "at", "to", "of", "for", "with", "from", "by",
                 "into", "over", "under", "about", "after", "before"}
_PRONOUNS = {"i", "you", "he", "she", "it", "we", "they", "your", "his",
             "her", "its", "their", "my", "our"}
_AUXILIARIES = {"is", "are", "was", "were", "be", "been", "being", "am",
                "do", "does", "did", "have", "has", "had", "will", "would",
                "can", "could", "should", "may", "might", "must"}
_CONJUNCTIONS = {"and", "or", "but", "so", "if", "when", "while", "then"}
_COMMON_VERBS = {
    "add", "boil", "bring", "buy", "check", "clean", "close", "cook", "cut",
    "drain", "dry", "fill", "find", "fold", "get", "give", "go", "heat",
    "hold", "keep", "let", "make", "mix", "open", "paint", "place", "pour",
    "press", "pull", "push", "put", "remove", "rinse", "rub", "set", "stir",
    "take", "turn", "use", "wait", "wash", "wipe",
}


@dataclass
class _Word:
    surface: str
    lemma: str
    pos: str


def _lemmatize(word: str) -> str:
    if len(word) > 4 and word.endswith("ies"):
        return word[:-3] + "y"
    if len(word) > 3 and word.endswith("ing"):
        stem = word[:-3]
        return stem + "e" if stem and stem[-1] in "aiouv" else stem
    if len(word) > 3 and word.endswith("ed"):
        return word[:-2]
    if len(word) > 2 and word.endswith("s") and not word.endswith("ss"):
        return word[:-1]
    return word


def _tag(word: str, position: int) -> str:
    lower = word.lower()
    if not lower[0].isalnum():
        return "PUNCT"
    if lower in _DETERMINERS:
        return "DET"
    if lower in _PREPOSITIONS:
        return "ADP"
    if lower in _PRONOUNS:
        return "PRON"
    if lower in _AUXILIARIES:
        return "AUX"
    if lower in _CONJUNCTIONS:
        return "CCONJ"
    lemma = _lemmatize(lower)
    if lemma in _COMMON_VERBS:
        return "VERB"
    # imperative how-to text: a sentence-initial content word is a verb
    if position == 0:
        return "VERB"
    if lower.endswith("ly"):
        return "ADV"
    return "NOUN"


def parse_sentence(text: str) -> list[tuple[int, _Word, int, str]]:
    """(index, word, head, deprel) rows; exactly one root.  Raises
    ValueError when there is nothing to parse."""
    surfaces = _WORD_RE.findall(text)
    if not any(s[0].isalnum() for s in surfaces):
        raise ValueError("no words")
    words = []
    content_seen = 0
    for surface in surfaces:
        pos = _tag(surface, content_seen)
        if pos not in ("PUNCT",):
            content_seen += 1
        words.append(_Word(surface, _lemmatize(surface.lower()), pos))

    root = next((i for i, w in enumerate(words) if w.pos == "VERB"), None)
    if root is None:
        root = next(i for i, w in enumerate(words) if w.pos != "PUNCT")

    rows = []
    seen_obj = False
    for i, word in enumerate(words):
        if i == root:
            rows.append((i + 1, word, 0, "root"))
            continue
        if word.pos == "NOUN" and i > root and not seen_obj:
            deprel = "obj"
            seen_obj = True
        elif word.pos == "NOUN":
            deprel = "obl" if i > root else "nsubj"
        elif word.pos == "PRON":
            deprel = "nsubj" if i < root else "obj"
        else:
            deprel = {"DET": "det", "ADP": "case", "AUX": "aux",
                      "CCONJ": "cc", "ADV": "advmod", "PUNCT": "punct",
                      "VERB": "conj"}.get(word.pos, "dep")
        rows.append((i + 1, word, root + 1, deprel))
    return rows


def _write_sentence(fh, rows) -> None:
    for index, word, head, deprel in rows:
        fh.write(f"{index}\t{word.surface}\t{word.lemma}\t{word.pos}"
                 f"\t_\t_\t{head}\t{deprel}\t_\t_\n")


def _write_source(fh, text: str, source: str, where: str) -> None:
    fh.write(f"# source = {source}\n")
    wrote = False
    for match in _SENT_RE.finditer(text):
        sentence = match.group().strip()
        if not sentence:
            continue
        try:
            rows = parse_sentence(sentence)
        except ValueError as exc:
            log.warning("skipping sentence in %s: %s (%s)", where, sentence, exc)
            continue
        if wrote:
            fh.write("\n")
        _write_sentence(fh, rows)
        wrote = True


def export_parses(records: list[dict], out_path: str | Path) -> Path:
    """Parse each record's goal, title and paragraphs into one exchange file.

    A record is {"instance_id", "goal", "title"?, "paragraphs"?: [...]}.
    """
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(f"# instance = {rec['instance_id']}\n")
            _write_source(fh, rec["goal"], "goal", rec["instance_id"])
            fh.write("\n")
            if rec.get("title"):
                _write_source(fh, rec["title"], "title", rec["instance_id"])
                fh.write("\n")
            for i, para in enumerate(rec.get("paragraphs", []), 1):
                if not para.strip():
                    continue
                _write_source(fh, para, f"para-{i}", rec["instance_id"])
                fh.write("\n")
    return out_path


def load_text_records(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records
