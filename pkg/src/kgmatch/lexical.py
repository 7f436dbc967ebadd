"""Shipped lexical resource: lemma, antonym and coarse POS lookup tables.

The tables are versioned TSV snapshots derived offline from a public
lexical database; nothing here queries an external service.  Unknown
surfaces lemmatize to themselves (lowercased) and carry no POS.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

# Auxiliary verbs never count as salient concepts.
AUXILIARY_VERBS = frozenset(
    "be am is are was were been being have has had do does did "
    "will would shall should can could may might must".split()
)


def _read_tsv(name: str, path: str | Path | None = None) -> dict[str, str]:
    if path is not None:
        text = Path(path).read_text("utf-8")
    else:
        text = resources.files("kgmatch.data").joinpath(name).read_text("utf-8")
    table: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        key, _, value = line.partition("\t")
        key, value = key.strip(), value.strip()
        if key and key not in table:  # first entry wins
            table[key] = value
    return table


@dataclass
class LexicalResource:
    lemmas: dict[str, str] = field(default_factory=dict)
    antonyms: dict[str, str] = field(default_factory=dict)
    pos: dict[str, str] = field(default_factory=dict)

    def lemma(self, surface: str) -> str:
        surface = surface.lower()
        return self.lemmas.get(surface, surface)

    def antonym(self, lemma: str) -> str | None:
        return self.antonyms.get(lemma)

    def pos_tag(self, surface: str) -> str | None:
        return self.pos.get(surface.lower())

    def is_auxiliary(self, surface: str) -> bool:
        return surface.lower() in AUXILIARY_VERBS


def load_lexical_resource(
    lemma_path: str | Path | None = None,
    antonym_path: str | Path | None = None,
    pos_path: str | Path | None = None,
) -> LexicalResource:
    """Load the shipped snapshot tables, or override any of them by path."""
    return LexicalResource(
        lemmas=_read_tsv("lemmas.tsv", lemma_path),
        antonyms=_read_tsv("antonyms.tsv", antonym_path),
        pos=_read_tsv("pos.tsv", pos_path),
    )


def load_relation_phrases() -> dict[str, str]:
    """Relation label -> linearization phrase used when rendering triples."""
    return _read_tsv("relation_phrases.tsv")


def relation_phrase(relation: str, table: dict[str, str]) -> str:
    """Phrase for a relation label; unknown labels split on camel case."""
    if relation in table:
        return table[relation]
    words: list[str] = []
    current = ""
    for ch in relation:
        if ch.isupper() and current:
            words.append(current)
            current = ch
        else:
            current += ch
    if current:
        words.append(current)
    return " ".join(w.lower() for w in words) or relation
