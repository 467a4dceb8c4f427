"""WordNet-like lexical-semantic hierarchies of word senses.

Each language holds a single-rooted hierarchy of synsets linked by genus
(hypernym) references; every non-root synset records the differentia that
set it apart from its genus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

from .core import FormatError, validate_identifier

__all__ = [
    "CatalogueEntry",
    "LexicalSemanticResource",
    "Synset",
    "hypernym_path",
    "load_lexsem",
    "resolve_sense",
]


@dataclass(frozen=True)
class Synset:
    id: str
    language: str
    lemmas: tuple[str, ...]
    gloss: str = ""
    genus: str | None = None
    differentia: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.lemmas:
            raise ValueError(f"synset {self.id}: lemma list is empty")


@dataclass(frozen=True)
class CatalogueEntry:
    language: str
    domain: str
    root: str


@dataclass(frozen=True)
class LexicalSemanticResource:
    id: str
    hierarchies: Mapping[str, Mapping[str, Synset]]
    catalogue: tuple[CatalogueEntry, ...] = ()

    def language(self, tag: str) -> Mapping[str, Synset]:
        if tag not in self.hierarchies:
            raise ValueError(f"resource {self.id}: language {tag!r} not present")
        return self.hierarchies[tag]

    def root_of(self, tag: str) -> Synset:
        roots = [s for s in self.language(tag).values() if s.genus is None]
        if len(roots) != 1:
            raise ValueError(f"language {tag!r} has {len(roots)} roots")
        return roots[0]


_RESOURCE_KEYS = {"id", "languages", "catalogue"}
_LANGUAGE_KEYS = {"synsets"}
_SYNSET_KEYS = {"id", "lemmas", "gloss", "genus", "differentia"}
_CATALOGUE_KEYS = {"language", "domain", "root"}


def load_lexsem(document: str | bytes) -> LexicalSemanticResource:
    """Load a lexical-semantic resource, verifying acyclicity per language."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"lexsem: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise FormatError("lexsem: top level must be a JSON object")
    unknown = sorted(set(data) - _RESOURCE_KEYS)
    if unknown:
        raise FormatError(f"lexsem: unknown keys {unknown}")
    if "id" not in data:
        raise FormatError("lexsem: missing key 'id'")

    resource_id = validate_identifier(data["id"]).value
    hierarchies: dict[str, dict[str, Synset]] = {}
    for tag, language_raw in data.get("languages", {}).items():
        bad = sorted(set(language_raw) - _LANGUAGE_KEYS)
        if bad:
            raise FormatError(f"language {tag}: unknown keys {bad}")
        synsets: dict[str, Synset] = {}
        for raw in language_raw.get("synsets", []):
            bad = sorted(set(raw) - _SYNSET_KEYS)
            if bad:
                raise FormatError(f"language {tag}: unknown synset keys {bad}")
            synset = Synset(
                id=validate_identifier(raw["id"]).value,
                language=tag,
                lemmas=tuple(raw["lemmas"]),
                gloss=raw.get("gloss", ""),
                genus=raw.get("genus"),
                differentia=tuple(raw.get("differentia", [])),
            )
            if synset.id in synsets:
                raise FormatError(f"language {tag}: duplicate synset id {synset.id!r}")
            for lemma in synset.lemmas:
                if lemma != lemma.lower():
                    raise FormatError(
                        f"language {tag}: lemma {lemma!r} of {synset.id} is not lowercase"
                    )
            synsets[synset.id] = synset
        _check_hierarchy(tag, synsets)
        hierarchies[tag] = synsets

    catalogue: list[CatalogueEntry] = []
    for raw in data.get("catalogue", []):
        bad = sorted(set(raw) - _CATALOGUE_KEYS)
        if bad:
            raise FormatError(f"catalogue: unknown keys {bad}")
        entry = CatalogueEntry(raw["language"], raw["domain"], raw["root"])
        if entry.language not in hierarchies:
            raise FormatError(f"catalogue references unknown language {entry.language!r}")
        if entry.root not in hierarchies[entry.language]:
            raise FormatError(f"catalogue references unknown root {entry.root!r}")
        catalogue.append(entry)

    return LexicalSemanticResource(resource_id, hierarchies, tuple(catalogue))


def _check_hierarchy(tag: str, synsets: Mapping[str, Synset]) -> None:
    for synset in synsets.values():
        if synset.genus is not None and synset.genus not in synsets:
            raise FormatError(
                f"language {tag}: synset {synset.id} has dangling genus {synset.genus!r}"
            )
        if synset.genus is not None and not synset.differentia:
            raise FormatError(
                f"language {tag}: non-root synset {synset.id} has empty differentia"
            )

    # Cycle detection with member reporting.
    state: dict[str, int] = {}  # 0 visiting, 1 done
    for start in synsets:
        if state.get(start) == 1:
            continue
        trail: list[str] = []
        current: str | None = start
        while current is not None and state.get(current) != 1:
            if state.get(current) == 0:
                members = sorted(trail[trail.index(current):])
                raise FormatError(f"language {tag}: genus cycle {{{', '.join(members)}}}")
            state[current] = 0
            trail.append(current)
            current = synsets[current].genus
        for node in trail:
            state[node] = 1

    roots = [s.id for s in synsets.values() if s.genus is None]
    if synsets and len(roots) != 1:
        raise FormatError(f"language {tag}: expected exactly one root, found {sorted(roots)}")


def resolve_sense(
    resource: LexicalSemanticResource, lemma: str, language: str
) -> Synset:
    """First-sense lookup: the matching synset with the smallest id wins."""
    synsets = resource.language(language)
    needle = lemma.lower()
    matches = sorted(
        (s for s in synsets.values() if needle in s.lemmas), key=lambda s: s.id
    )
    if not matches:
        raise ValueError(f"lemma {lemma!r} not found in language {language!r}")
    return matches[0]


def hypernym_path(resource: LexicalSemanticResource, synset_id: str) -> list[Synset]:
    """Genus chain from the synset up to its language root (inclusive)."""
    holders = [
        tag for tag, synsets in resource.hierarchies.items() if synset_id in synsets
    ]
    if not holders:
        raise ValueError(f"unknown synset {synset_id!r}")
    if len(holders) > 1:
        raise ValueError(f"synset {synset_id!r} is ambiguous across languages {holders}")
    synsets = resource.hierarchies[holders[0]]
    path = [synsets[synset_id]]
    while path[-1].genus is not None:
        path.append(synsets[path[-1].genus])
    return path
