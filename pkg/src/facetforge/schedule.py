"""Faceted classification schedules and their quality linter.

A schedule is a base class plus facet categories, each holding one or more
arrays (sibling groups) of concepts.  ``lint_schedule`` checks the structural
quality rules IC1-IC5, CH1, VP1, NP1 and NP2; every rule is a fixed,
conservative formalization so that findings are stable test targets.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterator, Mapping

from .core import (
    Finding,
    FormatError,
    Label,
    finding,
    sort_findings,
    validate_identifier,
)

__all__ = [
    "INDICATORS",
    "Characteristic",
    "ClassificationSchedule",
    "Concept",
    "FacetCategory",
    "LintConfig",
    "children",
    "full_notation",
    "lint_schedule",
    "load_schedule",
    "resolve_notation",
]

INDICATORS = (",", ";", ":", ".", "'")

_WORD_RE = re.compile(r"[A-Za-z0-9]+")


@dataclass(frozen=True)
class Characteristic:
    """A characteristic of division; schedules reference these by name."""

    name: str
    description: str = ""


@dataclass(frozen=True)
class Concept:
    """One concept in a schedule.

    ``notation`` is the concept's own segment; its full notation is the
    concatenation of segments from its array root down to it.
    ``characteristic_value`` is absent only for the schedule base.
    """

    id: str
    notation: str
    label: Label
    characteristic_value: tuple[str, str] | None = None
    parent: str | None = None
    sought: bool = True
    residual: bool = False
    ordinal: int = 0

    def __post_init__(self) -> None:
        if not self.notation:
            raise ValueError(f"concept {self.id!r}: notation is empty")


@dataclass(frozen=True)
class FacetCategory:
    """A facet category: one letter code, one indicator, one concept forest."""

    code: str
    indicator: str
    characteristic: str
    concepts: tuple[Concept, ...] = ()

    def __post_init__(self) -> None:
        if len(self.code) != 1 or not self.code.isalpha():
            raise ValueError(f"category code must be a single letter: {self.code!r}")
        if self.indicator not in INDICATORS:
            raise ValueError(f"category {self.code}: indicator {self.indicator!r} not allowed")

    def roots(self) -> list[Concept]:
        return [c for c in self.concepts if c.parent is None]

    def children_of(self, concept_id: str) -> list[Concept]:
        return [c for c in self.concepts if c.parent == concept_id]


@dataclass(frozen=True)
class ClassificationSchedule:
    id: str
    base: Concept
    succession: tuple[str, ...]
    categories: tuple[FacetCategory, ...] = ()
    reticence_stoplist: tuple[str, ...] = ()
    characteristics: tuple[Characteristic, ...] = ()

    def __post_init__(self) -> None:
        described = [c.name for c in self.characteristics]
        if len(set(described)) != len(described):
            raise ValueError(f"schedule {self.id}: duplicate characteristic description")
        unknown = sorted(set(described) - set(self.succession))
        if unknown:
            raise ValueError(
                f"schedule {self.id}: characteristics {unknown} not in succession"
            )

    def characteristic(self, name: str) -> Characteristic:
        """The description record for a succession entry (empty by default)."""
        if name not in self.succession:
            raise ValueError(f"schedule {self.id}: unknown characteristic {name!r}")
        for item in self.characteristics:
            if item.name == name:
                return item
        return Characteristic(name)

    def category(self, code: str) -> FacetCategory:
        for category in self.categories:
            if category.code == code:
                return category
        raise ValueError(f"schedule {self.id}: unknown category {code!r}")

    def find_concept(self, concept_id: str) -> tuple[FacetCategory | None, Concept]:
        if concept_id == self.base.id:
            return None, self.base
        for category in self.categories:
            for concept in category.concepts:
                if concept.id == concept_id:
                    return category, concept
        raise ValueError(f"schedule {self.id}: unknown concept {concept_id!r}")


def _path_to_root(category: FacetCategory, concept: Concept) -> list[Concept]:
    """Concepts from the array root down to *concept* (inclusive)."""
    by_id = {c.id: c for c in category.concepts}
    path = [concept]
    seen = {concept.id}
    while path[0].parent is not None:
        parent = by_id.get(path[0].parent)
        if parent is None or parent.id in seen:
            raise ValueError(
                f"category {category.code}: broken parent chain at {path[0].id!r}"
            )
        seen.add(parent.id)
        path.insert(0, parent)
    return path


def full_notation(category: FacetCategory, concept: Concept) -> str:
    """Concatenated notation segments from the array root to *concept*."""
    return "".join(c.notation for c in _path_to_root(category, concept))


def concept_path(category: FacetCategory, concept: Concept) -> str:
    return category.code + "/" + "/".join(c.id for c in _path_to_root(category, concept))


# ---------------------------------------------------------------------------
# Loading


_SCHEDULE_KEYS = {"id", "base", "succession", "stoplist", "categories"}
_BASE_KEYS = {"id", "notation", "label"}
_CATEGORY_KEYS = {"code", "indicator", "characteristic", "concepts"}
_CONCEPT_KEYS = {"id", "notation", "label", "value", "parent", "sought", "residual", "ordinal"}


def _parse_json(document: str | bytes, what: str) -> dict:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"{what}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise FormatError(f"{what}: top level must be a JSON object")
    return data


def _check_keys(obj: Mapping, allowed: set[str], where: str) -> None:
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise FormatError(f"{where}: unknown keys {unknown}")


def _require(obj: Mapping, key: str, where: str):
    if key not in obj:
        raise FormatError(f"{where}: missing key {key!r}")
    return obj[key]


def _check_notation(notation: str, where: str) -> None:
    if not isinstance(notation, str) or not notation:
        raise FormatError(f"{where}: notation must be non-empty text")
    for char in notation:
        if char.isspace() or char in INDICATORS:
            raise FormatError(f"{where}: notation {notation!r} contains reserved {char!r}")


def load_schedule(document: str | bytes) -> ClassificationSchedule:
    """Load and fully resolve a schedule from its JSON file format."""
    data = _parse_json(document, "schedule")
    _check_keys(data, _SCHEDULE_KEYS, "schedule")

    schedule_id = validate_identifier(_require(data, "id", "schedule")).value
    base_raw = _require(data, "base", "schedule")
    _check_keys(base_raw, _BASE_KEYS, "schedule base")
    base = Concept(
        id=validate_identifier(_require(base_raw, "id", "base")).value,
        notation=_require(base_raw, "notation", "base"),
        label=Label(_require(base_raw, "label", "base")),
    )
    _check_notation(base.notation, "base")

    succession = tuple(_require(data, "succession", "schedule"))
    if len(set(succession)) != len(succession):
        raise FormatError("schedule: duplicate characteristic in succession")
    stoplist = tuple(str(word).lower() for word in data.get("stoplist", []))

    categories: list[FacetCategory] = []
    seen_ids = {base.id}
    seen_codes: set[str] = set()
    seen_indicators: set[str] = set()
    for cat_raw in data.get("categories", []):
        _check_keys(cat_raw, _CATEGORY_KEYS, "category")
        code = _require(cat_raw, "code", "category")
        where = f"category {code}"
        indicator = _require(cat_raw, "indicator", where)
        characteristic = _require(cat_raw, "characteristic", where)
        if code in seen_codes:
            raise FormatError(f"{where}: duplicate category code")
        if indicator in seen_indicators:
            raise FormatError(f"{where}: indicator {indicator!r} already used")
        if characteristic not in succession:
            raise FormatError(f"{where}: characteristic {characteristic!r} not in succession")
        seen_codes.add(code)
        seen_indicators.add(indicator)

        concepts: list[Concept] = []
        local_ids: set[str] = set()
        for concept_raw in cat_raw.get("concepts", []):
            _check_keys(concept_raw, _CONCEPT_KEYS, where)
            concept_id = validate_identifier(_require(concept_raw, "id", where)).value
            if concept_id in seen_ids:
                raise FormatError(f"{where}: duplicate concept id {concept_id!r}")
            seen_ids.add(concept_id)
            local_ids.add(concept_id)
            notation = _require(concept_raw, "notation", f"{where}/{concept_id}")
            _check_notation(notation, f"{where}/{concept_id}")
            concepts.append(
                Concept(
                    id=concept_id,
                    notation=notation,
                    label=Label(_require(concept_raw, "label", f"{where}/{concept_id}")),
                    characteristic_value=(
                        characteristic,
                        _require(concept_raw, "value", f"{where}/{concept_id}"),
                    ),
                    parent=concept_raw.get("parent"),
                    sought=bool(concept_raw.get("sought", True)),
                    residual=bool(concept_raw.get("residual", False)),
                    ordinal=int(_require(concept_raw, "ordinal", f"{where}/{concept_id}")),
                )
            )
        for concept in concepts:
            if concept.parent is not None and concept.parent not in local_ids:
                raise FormatError(f"{where}: dangling reference {concept.parent!r}")
        category = FacetCategory(code, indicator, characteristic, tuple(concepts))
        _check_category_shape(category)
        categories.append(category)

    return ClassificationSchedule(
        id=schedule_id,
        base=base,
        succession=succession,
        categories=tuple(categories),
        reticence_stoplist=stoplist,
    )


def _check_category_shape(category: FacetCategory) -> None:
    """Reject parent cycles and ambiguous sibling segments at load time.

    Sibling segments must be prefix-free: longest-match resolution is exact
    only under that restriction, and class-number parsing relies on it.
    """
    for concept in category.concepts:
        _path_to_root(category, concept)  # raises on cycles
    for siblings in _arrays(category):
        segments = [c.notation for c in siblings]
        if len(set(segments)) != len(segments):
            raise FormatError(f"category {category.code}: duplicate sibling notation")
        for a in segments:
            for b in segments:
                if a != b and b.startswith(a):
                    raise FormatError(
                        f"category {category.code}: sibling notations {a!r} and {b!r}"
                        " are not prefix-free"
                    )


def _arrays(category: FacetCategory) -> Iterator[list[Concept]]:
    """Sibling groups of a category in stored order, root array first."""
    yield category.roots()
    for concept in category.concepts:
        kids = category.children_of(concept.id)
        if kids:
            yield kids


# ---------------------------------------------------------------------------
# Linting


@dataclass(frozen=True)
class LintConfig:
    """Rule toggles for :func:`lint_schedule`.

    ``exhaustive_arrays`` is a set of array paths declared exhaustive; ``None``
    declares every array exhaustive, which silences IC3 by default (the
    shipped fixtures carry no residual children).
    """

    enabled: frozenset[str] | None = None
    exhaustive_arrays: frozenset[str] | None = None

    def rule_enabled(self, code: str) -> bool:
        return self.enabled is None or code in self.enabled


def _array_path(category: FacetCategory, parent: Concept | None) -> str:
    if parent is None:
        return category.code
    return concept_path(category, parent)


def _is_subsequence(needle: list[str], haystack: tuple[str, ...]) -> bool:
    position = 0
    for item in needle:
        while position < len(haystack) and haystack[position] != item:
            position += 1
        if position == len(haystack):
            return False
        position += 1
    return True


def lint_schedule(
    schedule: ClassificationSchedule, config: LintConfig | None = None
) -> list[Finding]:
    """Apply the structural quality rules; returns canonical-ordered findings."""
    config = config or LintConfig()
    findings: list[Finding] = []

    for category in schedule.categories:
        for parent, siblings in _sibling_groups(category):
            path = _array_path(category, parent)
            _lint_array(category, path, siblings, config, findings)
        _lint_chains(schedule, category, config, findings)

    if config.rule_enabled("VP1"):
        _lint_reticence(schedule, findings)
    if config.rule_enabled("NP1"):
        _lint_synonym(schedule, findings)
    if config.rule_enabled("NP2"):
        _lint_homonym(schedule, findings)

    return sort_findings(findings)


def _sibling_groups(
    category: FacetCategory,
) -> Iterator[tuple[Concept | None, list[Concept]]]:
    yield None, category.roots()
    for concept in category.concepts:
        kids = category.children_of(concept.id)
        if kids:
            yield concept, kids


def _lint_array(
    category: FacetCategory,
    path: str,
    siblings: list[Concept],
    config: LintConfig,
    findings: list[Finding],
) -> None:
    if not siblings:
        return

    if config.rule_enabled("IC1"):
        names = {c.characteristic_value[0] for c in siblings if c.characteristic_value}
        if len(names) > 1:
            findings.append(
                finding("IC1", path, f"array mixes characteristics {sorted(names)}")
            )

    if config.rule_enabled("IC3"):
        exhaustive = config.exhaustive_arrays is None or path in config.exhaustive_arrays
        if not exhaustive and not any(c.residual for c in siblings):
            findings.append(
                finding("IC3", path, "array not exhaustive and has no residual child")
            )

    if config.rule_enabled("IC4"):
        seen_values: dict[str, str] = {}
        seen_labels: dict[str, str] = {}
        for concept in siblings:
            if concept.characteristic_value:
                value = concept.characteristic_value[1]
                if value in seen_values:
                    findings.append(
                        finding(
                            "IC4",
                            path,
                            f"value {value!r} shared by {seen_values[value]!r} and {concept.id!r}",
                        )
                    )
                else:
                    seen_values[value] = concept.id
            label_key = concept.label.text.strip().lower()
            if label_key in seen_labels:
                findings.append(
                    finding(
                        "IC4",
                        path,
                        f"label {concept.label.text!r} shared by"
                        f" {seen_labels[label_key]!r} and {concept.id!r}",
                    )
                )
            else:
                seen_labels[label_key] = concept.id

    if config.rule_enabled("IC5"):
        ordinals = [c.ordinal for c in siblings]
        if ordinals != sorted(ordinals):
            findings.append(finding("IC5", path, f"ordinals stored as {ordinals}"))


def _lint_chains(
    schedule: ClassificationSchedule,
    category: FacetCategory,
    config: LintConfig,
    findings: list[Finding],
) -> None:
    by_id = {c.id: c for c in category.concepts}

    if config.rule_enabled("CH1"):
        for concept in category.concepts:
            path = concept_path(category, concept)
            if concept.characteristic_value is None:
                findings.append(
                    finding("CH1", path, "concept adds no characteristic value")
                )
            elif concept.parent is not None:
                parent = by_id[concept.parent]
                if parent.characteristic_value == concept.characteristic_value:
                    findings.append(
                        finding("CH1", path, "concept repeats its parent's value")
                    )

    if config.rule_enabled("IC2"):
        leaves = [c for c in category.concepts if not category.children_of(c.id)]
        for leaf in leaves:
            chain = _path_to_root(category, leaf)
            names = [c.characteristic_value[0] for c in chain if c.characteristic_value]
            collapsed = [name for i, name in enumerate(names) if i == 0 or names[i - 1] != name]
            if not _is_subsequence(collapsed, schedule.succession):
                findings.append(
                    finding(
                        "IC2",
                        concept_path(category, leaf),
                        f"chain characteristics {collapsed} do not follow"
                        f" succession {list(schedule.succession)}",
                    )
                )


def _lint_reticence(schedule: ClassificationSchedule, findings: list[Finding]) -> None:
    stoplist = set(schedule.reticence_stoplist)
    if not stoplist:
        return

    def check(path: str, label: Label) -> None:
        words = {w.lower() for w in _WORD_RE.findall(label.text)}
        for word in sorted(words & stoplist):
            findings.append(
                finding("VP1", path, f"label {label.text!r} contains stopword {word!r}")
            )

    check(schedule.base.id, schedule.base.label)
    for category in schedule.categories:
        for concept in category.concepts:
            check(concept_path(category, concept), concept.label)


def _lint_synonym(schedule: ClassificationSchedule, findings: list[Finding]) -> None:
    occurrences: dict[str, list[str]] = {}
    occurrences.setdefault(schedule.base.id, []).append(schedule.base.notation)
    for category in schedule.categories:
        for concept in category.concepts:
            occurrences.setdefault(concept.id, []).append(
                category.code + ":" + full_notation(category, concept)
            )
    for concept_id, notations in occurrences.items():
        if len(notations) > 1:
            findings.append(
                finding(
                    "NP1",
                    concept_id,
                    f"id resolves to notations {sorted(notations)}",
                )
            )


def _lint_homonym(schedule: ClassificationSchedule, findings: list[Finding]) -> None:
    for category in schedule.categories:
        seen: dict[str, str] = {}
        for concept in category.concepts:
            notation = full_notation(category, concept)
            if notation in seen:
                findings.append(
                    finding(
                        "NP2",
                        f"{category.code}/{notation}",
                        f"notation names both {seen[notation]!r} and {concept.id!r}",
                    )
                )
            else:
                seen[notation] = concept.id


# ---------------------------------------------------------------------------
# Resolution


def resolve_notation(
    schedule: ClassificationSchedule, notation: str, category: str | None = None
) -> list[Concept]:
    """Resolve a full facet notation to its root-to-node concept path.

    Matching is longest-match, left-to-right within one category's arrays.
    When *category* is omitted every category is tried; a notation valid in
    more than one is reported as ambiguous.
    """
    if not notation:
        raise ValueError("empty notation")
    if category is not None:
        return _resolve_in_category(schedule.category(category), notation)
    matches: list[tuple[str, list[Concept]]] = []
    for cat in schedule.categories:
        try:
            matches.append((cat.code, _resolve_in_category(cat, notation)))
        except ValueError:
            continue
    if not matches:
        raise ValueError(f"schedule {schedule.id}: no concept matches notation {notation!r}")
    if len(matches) > 1:
        codes = [code for code, _ in matches]
        raise ValueError(f"notation {notation!r} is ambiguous across categories {codes}")
    return matches[0][1]


def _resolve_in_category(category: FacetCategory, notation: str) -> list[Concept]:
    level = category.roots()
    remaining = notation
    path: list[Concept] = []
    while remaining:
        candidates = [c for c in level if remaining.startswith(c.notation)]
        if not candidates:
            raise ValueError(
                f"category {category.code}: no concept matches notation {notation!r}"
            )
        longest = max(len(c.notation) for c in candidates)
        best = [c for c in candidates if len(c.notation) == longest]
        if len(best) > 1:
            ids = sorted(c.id for c in best)
            raise ValueError(
                f"category {category.code}: notation {notation!r} is ambiguous between {ids}"
            )
        chosen = best[0]
        path.append(chosen)
        remaining = remaining[len(chosen.notation):]
        level = category.children_of(chosen.id)
    return path


def children(schedule: ClassificationSchedule, concept_id: str) -> list[Concept]:
    """Children of a concept, sorted by ordinal then notation."""
    category, _ = schedule.find_concept(concept_id)
    if category is None:
        return []
    kids = category.children_of(concept_id)
    return sorted(kids, key=lambda c: (c.ordinal, c.notation))
