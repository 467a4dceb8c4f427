"""Entity type graphs (ETGs), their repository, quality lint, and grounding.

An ETG is a single-rooted type hierarchy carrying data properties (entity
descriptions) and object properties (entity interrelations).  ``lint_etg``
recasts the schedule rules on the hierarchy and adds the property rules
EP1-EP3; ``repo_add`` refuses ETGs with lint errors, and ``ground`` maps a
lightweight ontology onto a lint-clean ETG.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

from .core import (
    Finding,
    FormatError,
    Identifier,
    Label,
    Provenance,
    finding,
    format_timestamp,
    has_errors,
    parse_timestamp,
    sort_findings,
    validate_identifier,
)
from .ontology import LightweightOntology

__all__ = [
    "DataProperty",
    "EffectiveProperties",
    "EntityType",
    "EntityTypeGraph",
    "EtgLintConfig",
    "EtgRepository",
    "LintGateError",
    "ObjectProperty",
    "RepoEntry",
    "SchemaGraph",
    "etg_to_json",
    "ground",
    "lint_etg",
    "load_etg",
    "open_repository",
    "repo_add",
    "repo_find",
]

DATA_DATATYPES = ("string", "integer", "date", "iri")

_WORD_RE = re.compile(r"[A-Za-z0-9]+")

EPOCH = datetime(1970, 1, 1, tzinfo=timezone.utc)


class LintGateError(ValueError):
    """Raised when an operation refuses an ETG because of lint errors."""

    def __init__(self, message: str, findings: Sequence[Finding]):
        super().__init__(message)
        self.findings = list(findings)


@dataclass(frozen=True)
class DataProperty:
    name: str
    domain: str
    datatype: str
    identifying: bool = False

    def __post_init__(self) -> None:
        if self.datatype not in DATA_DATATYPES:
            raise ValueError(f"data property {self.name}: bad datatype {self.datatype!r}")


@dataclass(frozen=True)
class ObjectProperty:
    name: str
    domain: str
    range: str


@dataclass(frozen=True)
class EntityType:
    id: str
    label: Label
    parent: str | None = None
    differentiating: tuple[str, ...] = ()


@dataclass(frozen=True)
class EntityTypeGraph:
    id: str
    types: tuple[EntityType, ...]
    data_properties: tuple[DataProperty, ...] = ()
    object_properties: tuple[ObjectProperty, ...] = ()
    provenance: Provenance = Provenance(Identifier("unspecified"), EPOCH)

    def type_index(self) -> dict[str, EntityType]:
        index: dict[str, EntityType] = {}
        for entity_type in self.types:
            index.setdefault(entity_type.id, entity_type)
        return index

    def chain(self, type_id: str) -> list[EntityType]:
        """The type itself followed by its ancestors up to the root."""
        index = self.type_index()
        if type_id not in index:
            raise ValueError(f"ETG {self.id}: unknown type {type_id!r}")
        chain = [index[type_id]]
        seen = {type_id}
        while chain[-1].parent is not None:
            parent = chain[-1].parent
            if parent not in index or parent in seen:
                raise ValueError(f"ETG {self.id}: broken parent chain at {chain[-1].id!r}")
            seen.add(parent)
            chain.append(index[parent])
        return chain

    def effective_data_properties(self, type_id: str) -> dict[str, DataProperty]:
        """Own and inherited data properties; nearest declaration wins."""
        properties: dict[str, DataProperty] = {}
        for entity_type in self.chain(type_id):
            for prop in self.data_properties:
                if prop.domain == entity_type.id and prop.name not in properties:
                    properties[prop.name] = prop
        return properties

    def effective_object_properties(self, type_id: str) -> dict[str, ObjectProperty]:
        properties: dict[str, ObjectProperty] = {}
        for entity_type in self.chain(type_id):
            for prop in self.object_properties:
                if prop.domain == entity_type.id and prop.name not in properties:
                    properties[prop.name] = prop
        return properties

    def descends_from(self, type_id: str, ancestor_id: str) -> bool:
        return any(t.id == ancestor_id for t in self.chain(type_id))


# ---------------------------------------------------------------------------
# Loading and serialization


_ETG_KEYS = {"id", "types", "data_properties", "object_properties", "provenance"}
_TYPE_KEYS = {"id", "label", "parent", "differentiating"}
_DATA_KEYS = {"name", "domain", "datatype", "identifying"}
_OBJECT_KEYS = {"name", "domain", "range"}
_PROVENANCE_KEYS = {"source_id", "timestamp"}


def load_etg(document: str | bytes) -> EntityTypeGraph:
    """Load an ETG from its JSON file format and resolve all references."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"ETG: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise FormatError("ETG: top level must be a JSON object")
    unknown = sorted(set(data) - _ETG_KEYS)
    if unknown:
        raise FormatError(f"ETG: unknown keys {unknown}")
    if "id" not in data:
        raise FormatError("ETG: missing key 'id'")

    etg_id = validate_identifier(data["id"]).value
    types: list[EntityType] = []
    seen: set[str] = set()
    for raw in data.get("types", []):
        bad = sorted(set(raw) - _TYPE_KEYS)
        if bad:
            raise FormatError(f"ETG type: unknown keys {bad}")
        entity_type = EntityType(
            id=validate_identifier(raw["id"]).value,
            label=Label(raw["label"]),
            parent=raw.get("parent"),
            differentiating=tuple(raw.get("differentiating", [])),
        )
        if entity_type.id in seen:
            raise FormatError(f"ETG: duplicate type id {entity_type.id!r}")
        seen.add(entity_type.id)
        types.append(entity_type)
    for entity_type in types:
        if entity_type.parent is not None and entity_type.parent not in seen:
            raise FormatError(
                f"ETG: type {entity_type.id} has dangling parent {entity_type.parent!r}"
            )

    data_properties: list[DataProperty] = []
    for raw in data.get("data_properties", []):
        bad = sorted(set(raw) - _DATA_KEYS)
        if bad:
            raise FormatError(f"ETG data property: unknown keys {bad}")
        if raw["name"] == "type":
            raise FormatError("ETG: property name 'type' is reserved")
        prop = DataProperty(
            name=validate_identifier(raw["name"]).value,
            domain=raw["domain"],
            datatype=raw["datatype"],
            identifying=bool(raw.get("identifying", False)),
        )
        if prop.domain not in seen:
            raise FormatError(f"ETG: data property {prop.name} domain {prop.domain!r} undefined")
        data_properties.append(prop)

    object_properties: list[ObjectProperty] = []
    for raw in data.get("object_properties", []):
        bad = sorted(set(raw) - _OBJECT_KEYS)
        if bad:
            raise FormatError(f"ETG object property: unknown keys {bad}")
        if raw["name"] == "type":
            raise FormatError("ETG: property name 'type' is reserved")
        prop = ObjectProperty(
            name=validate_identifier(raw["name"]).value,
            domain=raw["domain"],
            range=raw["range"],
        )
        for endpoint, kind in ((prop.domain, "domain"), (prop.range, "range")):
            if endpoint not in seen:
                raise FormatError(
                    f"ETG: object property {prop.name} {kind} {endpoint!r} undefined"
                )
        object_properties.append(prop)

    declared: set[tuple[str, str]] = set()
    for name, domain in [(p.name, p.domain) for p in data_properties] + [
        (p.name, p.domain) for p in object_properties
    ]:
        if (domain, name) in declared:
            raise FormatError(f"ETG: property {name!r} declared twice on {domain!r}")
        declared.add((domain, name))

    provenance = Provenance(Identifier(etg_id), EPOCH)
    if "provenance" in data:
        raw = data["provenance"]
        bad = sorted(set(raw) - _PROVENANCE_KEYS)
        if bad:
            raise FormatError(f"ETG provenance: unknown keys {bad}")
        provenance = Provenance(
            Identifier(raw["source_id"]), parse_timestamp(raw["timestamp"])
        )

    etg = EntityTypeGraph(
        etg_id, tuple(types), tuple(data_properties), tuple(object_properties), provenance
    )
    _check_tree(etg)
    return etg


def _check_tree(etg: EntityTypeGraph) -> None:
    roots = [t.id for t in etg.types if t.parent is None]
    if etg.types and len(roots) != 1:
        raise FormatError(f"ETG {etg.id}: expected exactly one root, found {sorted(roots)}")
    for entity_type in etg.types:
        etg.chain(entity_type.id)  # raises on cycles


def etg_to_json(etg: EntityTypeGraph) -> str:
    payload = {
        "id": etg.id,
        "types": [
            {
                "id": t.id,
                "label": t.label.text,
                **({"parent": t.parent} if t.parent is not None else {}),
                "differentiating": list(t.differentiating),
            }
            for t in etg.types
        ],
        "data_properties": [
            {
                "name": p.name,
                "domain": p.domain,
                "datatype": p.datatype,
                "identifying": p.identifying,
            }
            for p in etg.data_properties
        ],
        "object_properties": [
            {"name": p.name, "domain": p.domain, "range": p.range}
            for p in etg.object_properties
        ],
        "provenance": {
            "source_id": etg.provenance.source_id.value,
            "timestamp": format_timestamp(etg.provenance.timestamp),
        },
    }
    return json.dumps(payload, ensure_ascii=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# Linting


@dataclass(frozen=True)
class EtgLintConfig:
    enabled: frozenset[str] | None = None
    stoplist: frozenset[str] = frozenset()

    def rule_enabled(self, code: str) -> bool:
        return self.enabled is None or code in self.enabled


def lint_etg(etg: EntityTypeGraph, config: EtgLintConfig | None = None) -> list[Finding]:
    """Apply the hierarchy rules and the property rules EP1-EP3 to *etg*."""
    config = config or EtgLintConfig()
    findings: list[Finding] = []
    index = etg.type_index()

    def safe_chain(type_id: str) -> list[EntityType] | None:
        try:
            return etg.chain(type_id)
        except ValueError:
            return None

    if config.rule_enabled("NP1"):
        counts: dict[str, int] = {}
        for entity_type in etg.types:
            counts[entity_type.id] = counts.get(entity_type.id, 0) + 1
        for type_id, count in counts.items():
            if count > 1:
                findings.append(
                    finding("NP1", f"types/{type_id}", f"type id declared {count} times")
                )

    if config.rule_enabled("IC4"):
        by_parent: dict[str | None, list[EntityType]] = {}
        for entity_type in etg.types:
            by_parent.setdefault(entity_type.parent, []).append(entity_type)
        for siblings in by_parent.values():
            labels: dict[str, str] = {}
            for entity_type in siblings:
                key = entity_type.label.text.strip().lower()
                if key in labels:
                    findings.append(
                        finding(
                            "IC4",
                            f"types/{entity_type.id}",
                            f"label {entity_type.label.text!r} shared with"
                            f" sibling {labels[key]!r}",
                        )
                    )
                else:
                    labels[key] = entity_type.id

    if config.rule_enabled("NP2"):
        paths: dict[tuple[str, ...], EntityType] = {}
        for entity_type in etg.types:
            chain = safe_chain(entity_type.id)
            if chain is None:
                continue
            label_path = tuple(t.label.text.strip().lower() for t in reversed(chain))
            other = paths.get(label_path)
            if other is not None and other.parent != entity_type.parent:
                findings.append(
                    finding(
                        "NP2",
                        f"types/{entity_type.id}",
                        f"label path {'/'.join(label_path)} also names {other.id!r}",
                    )
                )
            elif other is None:
                paths[label_path] = entity_type

    if config.rule_enabled("CH1"):
        for entity_type in etg.types:
            if entity_type.parent is None:
                continue
            chain = safe_chain(entity_type.id)
            inherited: set[str] = set()
            if chain is not None:
                for ancestor in chain[1:]:
                    inherited |= set(ancestor.differentiating)
            added = set(entity_type.differentiating) - inherited
            if not added:
                findings.append(
                    finding(
                        "CH1",
                        f"types/{entity_type.id}",
                        "type adds no differentiating item beyond its ancestors",
                    )
                )

    if config.rule_enabled("VP1") and config.stoplist:
        stoplist = {word.lower() for word in config.stoplist}
        for entity_type in etg.types:
            words = {w.lower() for w in _WORD_RE.findall(entity_type.label.text)}
            for word in sorted(words & stoplist):
                findings.append(
                    finding(
                        "VP1",
                        f"types/{entity_type.id}",
                        f"label {entity_type.label.text!r} contains stopword {word!r}",
                    )
                )

    if config.rule_enabled("EP2"):
        for prop in etg.data_properties:
            if prop.domain not in index:
                findings.append(
                    finding(
                        "EP2",
                        f"data_properties/{prop.name}",
                        f"domain {prop.domain!r} resolves to no type",
                    )
                )
        for prop in etg.object_properties:
            for endpoint, kind in ((prop.domain, "domain"), (prop.range, "range")):
                if endpoint not in index:
                    findings.append(
                        finding(
                            "EP2",
                            f"object_properties/{prop.name}",
                            f"{kind} {endpoint!r} resolves to no type",
                        )
                    )

    if config.rule_enabled("EP1"):
        for entity_type in etg.types:
            chain = safe_chain(entity_type.id)
            if chain is None:
                continue
            chain_ids = {t.id for t in chain}
            identified = any(
                p.identifying and p.domain in chain_ids for p in etg.data_properties
            )
            if not identified:
                findings.append(
                    finding(
                        "EP1",
                        f"types/{entity_type.id}",
                        "no identifying data property on the type or its ancestors",
                    )
                )

    if config.rule_enabled("EP3"):
        for entity_type in etg.types:
            chain = safe_chain(entity_type.id)
            if chain is None:
                continue
            own = [
                p.name
                for p in (*etg.data_properties, *etg.object_properties)
                if p.domain == entity_type.id
            ]
            duplicated_here = {name for name in own if own.count(name) > 1}
            ancestor_ids = {t.id for t in chain[1:]}
            ancestor_names = {
                p.name
                for p in (*etg.data_properties, *etg.object_properties)
                if p.domain in ancestor_ids
            }
            for name in sorted(set(own) & ancestor_names | duplicated_here):
                findings.append(
                    finding(
                        "EP3",
                        f"types/{entity_type.id}/{name}",
                        f"property {name!r} redeclared along the inheritance chain",
                    )
                )

    return sort_findings(findings)


# ---------------------------------------------------------------------------
# Repository


@dataclass(frozen=True)
class RepoEntry:
    etg_id: str
    version: str
    tags: tuple[str, ...]
    lint_status: str  # "clean" or "warnings"


@dataclass(frozen=True)
class EtgRepository:
    root: Path
    entries: tuple[RepoEntry, ...] = ()

    def entry_path(self, entry: RepoEntry) -> Path:
        return self.root / entry.etg_id / f"{entry.version}.etg.json"


def open_repository(root: str | Path) -> EtgRepository:
    """Open (or initialize) an ETG repository rooted at *root*."""
    root = Path(root)
    catalogue = root / "catalogue.json"
    if not catalogue.exists():
        return EtgRepository(root)
    try:
        data = json.loads(catalogue.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"repository catalogue: parse error: {exc.msg}") from None
    entries = tuple(
        RepoEntry(raw["id"], raw["version"], tuple(raw["tags"]), raw["lint_status"])
        for raw in data.get("entries", [])
    )
    repo = EtgRepository(root, entries)
    for entry in entries:
        if not repo.entry_path(entry).exists():
            raise FormatError(
                f"repository catalogue lists missing file {repo.entry_path(entry)}"
            )
    return repo


def _write_catalogue(repo: EtgRepository) -> None:
    payload = {
        "entries": [
            {
                "id": e.etg_id,
                "version": e.version,
                "tags": list(e.tags),
                "lint_status": e.lint_status,
            }
            for e in sorted(repo.entries, key=lambda e: (e.etg_id, e.version))
        ]
    }
    (repo.root / "catalogue.json").write_text(
        json.dumps(payload, ensure_ascii=True, indent=2) + "\n", encoding="utf-8"
    )


def repo_add(
    repo: EtgRepository,
    etg: EntityTypeGraph,
    tags: Sequence[str],
    version: str = "1",
    config: EtgLintConfig | None = None,
) -> EtgRepository:
    """Admit *etg* into the repository; lint errors refuse admission."""
    findings = lint_etg(etg, config)
    if has_errors(findings):
        raise LintGateError(
            f"ETG {etg.id} refused: {sum(f.severity == 'error' for f in findings)}"
            " lint error(s)",
            findings,
        )
    validate_identifier(version)
    if any(e.etg_id == etg.id and e.version == version for e in repo.entries):
        raise ValueError(f"repository already holds {etg.id} version {version}")

    status = "warnings" if findings else "clean"
    entry = RepoEntry(etg.id, version, tuple(tags), status)
    target = repo.entry_path(entry)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(etg_to_json(etg), encoding="utf-8")
    updated = replace(repo, entries=repo.entries + (entry,))
    _write_catalogue(updated)
    return updated


def repo_find(repo: EtgRepository, tags: Sequence[str] = ()) -> list[RepoEntry]:
    """Entries whose tag sets intersect *tags*; an empty query matches all."""
    wanted = set(tags)
    hits = [e for e in repo.entries if not wanted or wanted & set(e.tags)]
    return sorted(hits, key=lambda e: (e.etg_id, e.version))


# ---------------------------------------------------------------------------
# Grounding


@dataclass(frozen=True)
class EffectiveProperties:
    data: frozenset[str]
    objects: frozenset[str]


@dataclass(frozen=True)
class SchemaGraph:
    """A lightweight ontology grounded in an ETG."""

    ontology: LightweightOntology
    etg: EntityTypeGraph
    grounding: Mapping[str, str]
    effective_properties: Mapping[str, EffectiveProperties]


def ground(
    ontology: LightweightOntology,
    etg: EntityTypeGraph,
    mapping: Mapping[str, str] | None = None,
) -> tuple[SchemaGraph, list[Finding]]:
    """Ground every ontology node in an ETG type.

    Resolution order per node: explicit mapping entry, then case-insensitive
    label match against type labels, then the nearest grounded ancestor's
    type (reported as a GR1 warning).  Grounding is total on success.
    """
    mapping = dict(mapping or {})
    etg_findings = lint_etg(etg)
    if has_errors(etg_findings):
        raise LintGateError(f"ETG {etg.id} is not lint-clean", etg_findings)

    index = etg.type_index()
    for node_id, type_id in mapping.items():
        if node_id not in ontology.nodes:
            raise ValueError(f"mapping references unknown ontology node {node_id!r}")
        if type_id not in index:
            raise ValueError(f"mapping references unknown entity type {type_id!r}")

    label_matches: dict[str, list[str]] = {}
    for entity_type in etg.types:
        label_matches.setdefault(entity_type.label.text.strip().lower(), []).append(
            entity_type.id
        )

    def match_label(label: str) -> str | None:
        candidates = label_matches.get(label.strip().lower(), [])
        return candidates[0] if len(candidates) == 1 else None

    grounding: dict[str, str] = {}
    findings: list[Finding] = []

    root = ontology.nodes[ontology.root]
    root_type = mapping.get(root.id) or match_label(root.label)
    if root_type is None:
        raise ValueError(
            f"root node {root.id!r} ({root.label!r}) matches no entity type"
            " and has no mapping entry"
        )
    grounding[root.id] = root_type

    queue = [root.id]
    while queue:
        current = queue.pop(0)
        for child in ontology.children(current):
            type_id = mapping.get(child.id) or match_label(child.label)
            if type_id is None:
                type_id = grounding[current]
                findings.append(
                    finding(
                        "GR1",
                        f"nodes/{child.id}",
                        f"node {child.label!r} grounded by inheriting"
                        f" {type_id!r} from its ancestor",
                    )
                )
            grounding[child.id] = type_id
            queue.append(child.id)

    if set(grounding) != set(ontology.nodes):
        unreachable = sorted(set(ontology.nodes) - set(grounding))
        raise ValueError(f"ontology nodes unreachable from the root: {unreachable}")

    effective = {
        node_id: EffectiveProperties(
            data=frozenset(etg.effective_data_properties(type_id)),
            objects=frozenset(etg.effective_object_properties(type_id)),
        )
        for node_id, type_id in grounding.items()
    }
    schema_graph = SchemaGraph(ontology, etg, grounding, effective)
    return schema_graph, sort_findings(findings)
