"""Lightweight backbone ontologies built from a lexical hierarchy and a schema.

The builder resolves each dataset-schema class name to a word sense, splices
the full hypernym path into a tree (merging shared prefixes on synset id),
and keeps unresolvable classes directly under the root with an LO1 warning.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Mapping

from .core import Finding, FormatError, finding, sort_findings, validate_identifier
from .lexsem import LexicalSemanticResource, hypernym_path, resolve_sense

__all__ = [
    "DatasetSchema",
    "LightweightOntology",
    "OntologyNode",
    "SchemaAttribute",
    "SchemaClass",
    "build_lightweight_ontology",
    "canonical_json",
    "load_dataset_schema",
    "load_ontology_json",
    "validate_backbone",
]

DATATYPES = ("string", "integer", "date", "reference")

_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


@dataclass(frozen=True)
class SchemaAttribute:
    name: str
    datatype: str
    target: str | None = None


@dataclass(frozen=True)
class SchemaClass:
    name: str
    attributes: tuple[SchemaAttribute, ...] = ()


@dataclass(frozen=True)
class DatasetSchema:
    classes: tuple[SchemaClass, ...]


@dataclass(frozen=True)
class OntologyNode:
    id: str
    label: str
    synset_id: str | None = None
    schema_class: str | None = None
    parent: str | None = None


@dataclass(frozen=True)
class LightweightOntology:
    """A rooted is-a tree; nodes are keyed by id in insertion order."""

    root: str
    nodes: Mapping[str, OntologyNode]

    def children(self, node_id: str) -> list[OntologyNode]:
        kids = [n for n in self.nodes.values() if n.parent == node_id]
        return sorted(kids, key=lambda n: (n.label, n.id))


# ---------------------------------------------------------------------------
# Dataset schemas


_SCHEMA_KEYS = {"classes"}
_CLASS_KEYS = {"name", "attributes"}
_ATTRIBUTE_KEYS = {"name", "datatype", "target"}


def load_dataset_schema(document: str | bytes) -> DatasetSchema:
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(
            f"dataset schema: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise FormatError("dataset schema: top level must be a JSON object")
    unknown = sorted(set(data) - _SCHEMA_KEYS)
    if unknown:
        raise FormatError(f"dataset schema: unknown keys {unknown}")

    classes: list[SchemaClass] = []
    names: set[str] = set()
    for raw in data.get("classes", []):
        bad = sorted(set(raw) - _CLASS_KEYS)
        if bad:
            raise FormatError(f"dataset schema: unknown class keys {bad}")
        name = validate_identifier(raw["name"]).value
        if name in names:
            raise FormatError(f"dataset schema: duplicate class {name!r}")
        names.add(name)
        attributes: list[SchemaAttribute] = []
        attr_names: set[str] = set()
        for attr_raw in raw.get("attributes", []):
            bad = sorted(set(attr_raw) - _ATTRIBUTE_KEYS)
            if bad:
                raise FormatError(f"class {name}: unknown attribute keys {bad}")
            attribute = SchemaAttribute(
                attr_raw["name"], attr_raw["datatype"], attr_raw.get("target")
            )
            if attribute.datatype not in DATATYPES:
                raise FormatError(
                    f"class {name}: attribute {attribute.name!r} has unknown"
                    f" datatype {attribute.datatype!r}"
                )
            if attribute.name in attr_names:
                raise FormatError(f"class {name}: duplicate attribute {attribute.name!r}")
            attr_names.add(attribute.name)
            if (attribute.datatype == "reference") != (attribute.target is not None):
                raise FormatError(
                    f"class {name}: attribute {attribute.name!r} target must be"
                    " given exactly for reference attributes"
                )
            attributes.append(attribute)
        classes.append(SchemaClass(name, tuple(attributes)))

    for cls in classes:
        for attribute in cls.attributes:
            if attribute.target is not None and attribute.target not in names:
                raise FormatError(
                    f"class {cls.name}: reference target {attribute.target!r}"
                    " names no class"
                )
    return DatasetSchema(tuple(classes))


# ---------------------------------------------------------------------------
# Building


def normalize_class_name(name: str) -> list[str]:
    """Lowercased tokens of a class name (camel case and underscores split)."""
    spaced = _CAMEL_RE.sub(" ", name.replace("_", " "))
    return [token for token in spaced.lower().split() if token]


def build_lightweight_ontology(
    lexsem: LexicalSemanticResource, language: str, schema: DatasetSchema
) -> tuple[LightweightOntology, list[Finding]]:
    """Build the backbone tree for *schema* over one language hierarchy.

    Classes whose names fail sense resolution attach directly under the root
    and produce an LO1 warning each.
    """
    if not schema.classes:
        raise ValueError("dataset schema has no classes")
    root_synset = lexsem.root_of(language)

    nodes: dict[str, OntologyNode] = {
        root_synset.id: OntologyNode(
            id=root_synset.id, label=root_synset.lemmas[0], synset_id=root_synset.id
        )
    }
    findings: list[Finding] = []

    for cls in schema.classes:
        tokens = normalize_class_name(cls.name)
        synset = None
        for candidate in (" ".join(tokens), tokens[-1] if tokens else ""):
            if not candidate:
                continue
            try:
                synset = resolve_sense(lexsem, candidate, language)
                break
            except ValueError:
                continue

        if synset is None:
            node_id = cls.name
            if node_id in nodes:
                raise ValueError(f"ontology already has a node {node_id!r}")
            nodes[node_id] = OntologyNode(
                id=node_id,
                label=cls.name,
                schema_class=cls.name,
                parent=root_synset.id,
            )
            findings.append(
                finding("LO1", f"nodes/{node_id}", f"class name {cls.name!r} has no sense")
            )
            continue

        path = list(reversed(hypernym_path(lexsem, synset.id)))  # root first
        parent_id: str | None = None
        for step in path:
            if step.id not in nodes:
                nodes[step.id] = OntologyNode(
                    id=step.id,
                    label=step.lemmas[0],
                    synset_id=step.id,
                    parent=parent_id,
                )
            parent_id = step.id
        leaf = nodes[synset.id]
        if leaf.schema_class is not None and leaf.schema_class != cls.name:
            raise ValueError(
                f"classes {leaf.schema_class!r} and {cls.name!r} both resolve"
                f" to synset {synset.id}"
            )
        nodes[synset.id] = OntologyNode(
            id=leaf.id,
            label=leaf.label,
            synset_id=leaf.synset_id,
            schema_class=cls.name,
            parent=leaf.parent,
        )

    return LightweightOntology(root_synset.id, nodes), sort_findings(findings)


# ---------------------------------------------------------------------------
# Validation


def validate_backbone(ontology: LightweightOntology) -> list[Finding]:
    """Check the backbone rules: single root, tree shape, sibling labels."""
    findings: list[Finding] = []
    nodes = ontology.nodes

    roots = [n.id for n in nodes.values() if n.parent is None]
    if len(roots) != 1:
        findings.append(
            finding("LO2", "nodes", f"expected exactly one root, found {sorted(roots)}")
        )

    for node in nodes.values():
        if node.parent is not None and node.parent not in nodes:
            findings.append(
                finding("LO3", f"nodes/{node.id}", f"dangling parent {node.parent!r}")
            )
    reported_cycles: set[frozenset[str]] = set()
    for node in nodes.values():
        seen: list[str] = []
        current: str | None = node.id
        while current is not None and current in nodes:
            if current in seen:
                members = frozenset(seen[seen.index(current):])
                if members not in reported_cycles:
                    reported_cycles.add(members)
                    findings.append(
                        finding(
                            "LO3",
                            f"nodes/{min(members)}",
                            f"parent cycle {{{', '.join(sorted(members))}}}",
                        )
                    )
                break
            seen.append(current)
            current = nodes[current].parent

    by_parent: dict[str | None, list[OntologyNode]] = {}
    for node in nodes.values():
        by_parent.setdefault(node.parent, []).append(node)
    for parent, siblings in by_parent.items():
        labels: dict[str, str] = {}
        for node in siblings:
            key = node.label.strip().lower()
            if key in labels:
                findings.append(
                    finding(
                        "LO4",
                        f"nodes/{node.id}",
                        f"label {node.label!r} shared with sibling {labels[key]!r}",
                    )
                )
            else:
                labels[key] = node.id

    return sort_findings(findings)


# ---------------------------------------------------------------------------
# Canonical serialization


def _node_payload(ontology: LightweightOntology, node_id: str) -> dict:
    node = ontology.nodes[node_id]
    return {
        "id": node.id,
        "label": node.label,
        "synset": node.synset_id,
        "class": node.schema_class,
        "children": [
            _node_payload(ontology, child.id) for child in ontology.children(node.id)
        ],
    }


def canonical_json(ontology: LightweightOntology) -> bytes:
    """Deterministic serialization: children sorted by label, compact JSON."""
    payload = _node_payload(ontology, ontology.root)
    return json.dumps(payload, ensure_ascii=True, separators=(",", ":")).encode() + b"\n"


def load_ontology_json(document: str | bytes) -> LightweightOntology:
    """Parse the canonical serialization back into an ontology."""
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise FormatError(f"ontology: parse error: {exc.msg}") from None

    nodes: dict[str, OntologyNode] = {}

    def walk(raw: dict, parent: str | None) -> None:
        try:
            node = OntologyNode(
                id=raw["id"],
                label=raw["label"],
                synset_id=raw.get("synset"),
                schema_class=raw.get("class"),
                parent=parent,
            )
        except KeyError as exc:
            raise FormatError(f"ontology: node missing key {exc}") from None
        if node.id in nodes:
            raise FormatError(f"ontology: duplicate node id {node.id!r}")
        nodes[node.id] = node
        for child in raw.get("children", []):
            walk(child, node.id)

    if not isinstance(data, dict):
        raise FormatError("ontology: top level must be a JSON object")
    walk(data, None)
    return LightweightOntology(data["id"], nodes)
