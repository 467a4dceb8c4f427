"""Deterministic entity-graph exporters and their inverse loaders.

All three exporters (N-Triples-style lines, JSON graph, FCA context matrix)
produce byte-identical output for equal graphs; the N-Triples and JSON-graph
formats round-trip through their loaders.
"""

from __future__ import annotations

import csv
import io
import json

from .core import FormatError, Iri, parse_timestamp, format_timestamp
from .eg import (
    Entity,
    EntityGraph,
    Literal,
    Triple,
    derive_base,
    property_predicate,
    type_iri,
    type_predicate,
)

__all__ = [
    "XSD",
    "export_fca",
    "export_jsongraph",
    "export_ntriples",
    "load_entity_graph_json",
    "parse_ntriples",
    "render_ntriples",
    "render_term",
]

XSD = {
    "string": "http://www.w3.org/2001/XMLSchema#string",
    "integer": "http://www.w3.org/2001/XMLSchema#integer",
    "date": "http://www.w3.org/2001/XMLSchema#date",
}
_XSD_REVERSE = {iri: name for name, iri in XSD.items()}

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def render_term(term: Iri | Literal) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    return f'"{_escape(term.text)}"^^<{XSD[term.datatype]}>'


# ---------------------------------------------------------------------------
# N-Triples-style lines


def render_ntriples(triples) -> bytes:
    """Render triples as sorted ``<s> <p> <o> .`` lines (LF, trailing newline)."""
    lines = sorted(
        f"{render_term(t.subject)} {render_term(t.predicate)} {render_term(t.object)} .".encode()
        for t in triples
    )
    if not lines:
        return b""
    return b"\n".join(lines) + b"\n"


def export_ntriples(eg: EntityGraph) -> bytes:
    return render_ntriples(eg.triples)


def _read_term(text: str, position: int) -> tuple[Iri | Literal, int]:
    if text[position] == "<":
        end = text.index(">", position)
        return Iri(text[position + 1:end]), end + 1
    if text[position] == '"':
        chars: list[str] = []
        cursor = position + 1
        while cursor < len(text):
            ch = text[cursor]
            if ch == "\\":
                escaped = _UNESCAPES.get(text[cursor + 1])
                if escaped is None:
                    raise FormatError(f"bad escape \\{text[cursor + 1]} in literal")
                chars.append(escaped)
                cursor += 2
                continue
            if ch == '"':
                break
            chars.append(ch)
            cursor += 1
        else:
            raise FormatError("unterminated literal")
        cursor += 1
        if not text.startswith("^^<", cursor):
            raise FormatError("literal missing ^^<datatype>")
        end = text.index(">", cursor + 3)
        datatype_iri = text[cursor + 3:end]
        datatype = _XSD_REVERSE.get(datatype_iri)
        if datatype is None:
            raise FormatError(f"unsupported literal datatype {datatype_iri!r}")
        return Literal("".join(chars), datatype), end + 1
    raise FormatError(f"unexpected term at column {position}: {text[position:]!r}")


def parse_ntriples(data: bytes | str) -> tuple[Triple, ...]:
    """Parse the exporter's line subset: IRI terms and typed literals."""
    text = data.decode() if isinstance(data, bytes) else data
    triples: list[Triple] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            subject, position = _read_term(line, 0)
            predicate, position = _read_term(line, position + 1)
            obj, position = _read_term(line, position + 1)
        except (ValueError, IndexError) as exc:
            raise FormatError(f"line {line_number}: {exc}") from None
        if line[position:].strip() != ".":
            raise FormatError(f"line {line_number}: missing terminating dot")
        if not isinstance(subject, Iri) or not isinstance(predicate, Iri):
            raise FormatError(f"line {line_number}: subject/predicate must be IRIs")
        triples.append(Triple(subject, predicate, obj))
    return tuple(triples)


# ---------------------------------------------------------------------------
# JSON graph


def export_jsongraph(eg: EntityGraph) -> bytes:
    """Self-contained JSON rendering: metadata, typed entities, links.

    Property names are stored bare; their predicate IRIs follow the fixed
    ``<base>/prop/<name>`` convention and are recovered by the loader.
    """
    entities_payload = []
    for entity in sorted(eg.entities, key=lambda e: e.iri.value):
        values = sorted(
            (
                {
                    "property": prop,
                    "datatype": value.datatype if isinstance(value, Literal) else "iri",
                    "value": value.text if isinstance(value, Literal) else value.value,
                }
                for prop, value in entity.values
            ),
            key=lambda v: (v["property"], v["datatype"], v["value"]),
        )
        entities_payload.append(
            {"iri": entity.iri.value, "type": entity.type, "values": values}
        )

    base = derive_base(eg.iri)
    predicate_type = type_predicate(base).value
    links_payload = sorted(
        (
            {
                "subject": t.subject.value,
                "property": t.predicate.value.rsplit("/", 1)[1],
                "object": t.object.value,
            }
            for t in eg.triples
            if isinstance(t.object, Iri) and t.predicate.value != predicate_type
        ),
        key=lambda l: (l["subject"], l["property"], l["object"]),
    )

    payload = {
        "metadata": {
            "iri": eg.iri.value,
            "timestamp": format_timestamp(eg.timestamp),
            "sources": list(eg.sources),
            "counts": {"entities": eg.counts[0], "triples": eg.counts[1]},
        },
        "entities": entities_payload,
        "links": links_payload,
    }
    return json.dumps(payload, ensure_ascii=True, separators=(",", ":")).encode() + b"\n"


def load_entity_graph_json(data: bytes | str) -> EntityGraph:
    """Rebuild an entity graph from :func:`export_jsongraph` output."""
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FormatError(f"entity graph: parse error: {exc.msg}") from None
    try:
        metadata = payload["metadata"]
        eg_iri = Iri(metadata["iri"])
        timestamp = parse_timestamp(metadata["timestamp"])
        sources = tuple(metadata["sources"])
        base = derive_base(eg_iri)

        entities = []
        triples: list[Triple] = []
        for raw in payload["entities"]:
            values: list[tuple[str, Literal | Iri]] = []
            for value_raw in raw["values"]:
                if value_raw["datatype"] == "iri":
                    value: Literal | Iri = Iri(value_raw["value"])
                else:
                    value = Literal(value_raw["value"], value_raw["datatype"])
                values.append((value_raw["property"], value))
            entity = Entity(Iri(raw["iri"]), raw["type"], tuple(values))
            entities.append(entity)
            triples.append(
                Triple(entity.iri, type_predicate(base), type_iri(base, entity.type))
            )
            for prop, value in entity.values:
                triples.append(Triple(entity.iri, property_predicate(base, prop), value))
        for raw in payload["links"]:
            triples.append(
                Triple(
                    Iri(raw["subject"]),
                    property_predicate(base, raw["property"]),
                    Iri(raw["object"]),
                )
            )
    except (KeyError, TypeError) as exc:
        raise FormatError(f"entity graph: malformed document ({exc})") from None

    ordered_entities = tuple(sorted(entities, key=lambda e: e.iri.value))
    ordered_triples = tuple(sorted(triples, key=Triple.sort_key))
    return EntityGraph(
        iri=eg_iri,
        timestamp=timestamp,
        sources=sources,
        entities=ordered_entities,
        triples=ordered_triples,
        counts=(len(ordered_entities), len(ordered_triples)),
    )


# ---------------------------------------------------------------------------
# FCA context matrix


def export_fca(eg: EntityGraph) -> bytes:
    """Binary entity-by-attribute incidence matrix as CSV.

    Columns are the property names used anywhere in the graph plus one
    ``type:<T>`` column per entity type in use, sorted; rows are entity IRIs,
    sorted.  A cell is ``1`` iff the entity has at least one value for the
    property (or is of the type).
    """
    property_names = {
        t.predicate.value.rsplit("/", 1)[1]
        for t in eg.triples
        if t.predicate.value.rsplit("/", 1)[1] != "type"
    }
    type_columns = {f"type:{e.type}" for e in eg.entities}
    columns = sorted(property_names | type_columns)

    incidence: dict[str, set[str]] = {e.iri.value: set() for e in eg.entities}
    for triple in eg.triples:
        name = triple.predicate.value.rsplit("/", 1)[1]
        if name != "type" and triple.subject.value in incidence:
            incidence[triple.subject.value].add(name)
    for entity in eg.entities:
        incidence[entity.iri.value].add(f"type:{entity.type}")

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(["entity", *columns])
    for iri_value in sorted(incidence):
        row = ["1" if column in incidence[iri_value] else "0" for column in columns]
        writer.writerow([iri_value, *row])
    return buffer.getvalue().encode()
