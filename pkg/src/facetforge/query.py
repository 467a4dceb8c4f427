"""Conjunctive triple-pattern queries over an entity graph.

The query subset is basic graph patterns only: up to eight patterns whose
positions are constants (IRIs or typed literals) or ``?variables``.  Results
are set-semantics binding tables with a canonical row order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .core import Iri
from .eg import EntityGraph, Literal
from .exports import render_term

__all__ = ["BindingTable", "Query", "Variable", "run_query"]

MAX_PATTERNS = 8

_VARIABLE_RE = re.compile(r"\?[a-z][a-z0-9_]*\Z")


@dataclass(frozen=True)
class Variable:
    name: str  # includes the leading '?'

    def __post_init__(self) -> None:
        if not _VARIABLE_RE.match(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")


Term = Union[Iri, Literal]
PatternTerm = Union[Variable, Iri, Literal]
Pattern = tuple[PatternTerm, PatternTerm, PatternTerm]


@dataclass(frozen=True)
class Query:
    patterns: tuple[Pattern, ...]

    def __post_init__(self) -> None:
        if not self.patterns:
            raise ValueError("query has no patterns")
        if len(self.patterns) > MAX_PATTERNS:
            raise ValueError(f"query exceeds {MAX_PATTERNS} patterns")

    def variables(self) -> list[str]:
        """Variable names in first-appearance order."""
        ordered: list[str] = []
        for pattern in self.patterns:
            for term in pattern:
                if isinstance(term, Variable) and term.name not in ordered:
                    ordered.append(term.name)
        return ordered


@dataclass(frozen=True)
class BindingTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Term, ...], ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("row width does not match column count")

    def holds(self) -> bool:
        """For variable-free queries: whether all patterns matched."""
        return bool(self.rows)


def _match(
    pattern: Pattern, triple_terms: tuple[Term, Term, Term], binding: dict[str, Term]
) -> dict[str, Term] | None:
    extended = dict(binding)
    for term, actual in zip(pattern, triple_terms):
        if isinstance(term, Variable):
            bound = extended.get(term.name)
            if bound is None:
                extended[term.name] = actual
            elif bound != actual:
                return None
        elif term != actual:
            return None
    return extended


def run_query(eg: EntityGraph, query: Query) -> BindingTable:
    """Evaluate a conjunctive query; rows deduplicated and canonically sorted.

    A variable-free query yields a zero-column table with one row iff every
    pattern is a triple of the graph.
    """
    bindings: list[dict[str, Term]] = [{}]
    triples = [(t.subject, t.predicate, t.object) for t in eg.triples]
    for pattern in query.patterns:
        next_bindings: list[dict[str, Term]] = []
        for binding in bindings:
            for triple_terms in triples:
                extended = _match(pattern, triple_terms, binding)
                if extended is not None:
                    next_bindings.append(extended)
        bindings = next_bindings
        if not bindings:
            break

    columns = tuple(query.variables())
    unique_rows = {tuple(b[name] for name in columns) for b in bindings}
    ordered = sorted(unique_rows, key=lambda row: [render_term(t) for t in row])
    return BindingTable(columns, tuple(ordered))
