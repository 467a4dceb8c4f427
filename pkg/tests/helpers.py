"""Randomized generators and independent oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from datetime import datetime, timezone

from facetforge.core import Iri, Label, parse_timestamp
from facetforge.eg import EntityGraph, Literal, Triple
from facetforge.facet import FacetFormula, FormulaSlot
from facetforge.query import Query, Variable
from facetforge.schedule import ClassificationSchedule, Concept, FacetCategory

BASE = Iri("https://ex.org/du")
AT = parse_timestamp("2024-01-01T00:00:00Z")
MED_FORMULA = "[B],[P]:[E].[S]'[T?]"
DATASET_NAMES = ("books", "people", "orgs", "places")

_SEGMENT_ALPHABET = "0123456789ABCDEFGHJKMNPRSTUVWXYZ"
_INDICATORS = [",", ";", ":", ".", "'"]


# ---------------------------------------------------------------------------
# Random schedules, formulas, and assignments


def _segments(rng: random.Random, count: int, length: int) -> list[str]:
    """Distinct equal-length segments; equal length keeps siblings prefix-free."""
    pool = set()
    while len(pool) < count:
        pool.add("".join(rng.choice(_SEGMENT_ALPHABET) for _ in range(length)))
    return sorted(pool)


def random_schedule(rng: random.Random) -> ClassificationSchedule:
    category_count = rng.randint(1, 5)
    codes = rng.sample("ABCDEFGHJKLMPQRSTUVWXYZ", category_count)
    indicators = rng.sample(_INDICATORS, category_count)
    succession = tuple(f"division-{i}" for i in range(category_count))

    uid = itertools.count()
    categories = []
    for index in range(category_count):
        characteristic = succession[index]
        concepts: list[Concept] = []

        def add_level(parents: list[Concept | None], depth: int) -> list[Concept]:
            created: list[Concept] = []
            for parent in parents:
                width = rng.randint(1, 3) if parent is None else rng.randint(0, 2)
                if width == 0:
                    continue
                for ordinal, segment in enumerate(_segments(rng, width, rng.randint(1, 2))):
                    serial = next(uid)
                    concept = Concept(
                        id=f"c{serial}",
                        notation=segment,
                        label=Label(f"Concept {serial}"),
                        characteristic_value=(characteristic, f"value-{serial}"),
                        parent=None if parent is None else parent.id,
                        sought=rng.random() < 0.8,
                        ordinal=ordinal,
                    )
                    concepts.append(concept)
                    created.append(concept)
            return created

        level = add_level([None], 0)
        for depth in (1, 2):
            if not level:
                break
            level = add_level(level, depth)

        categories.append(
            FacetCategory(codes[index], indicators[index], characteristic, tuple(concepts))
        )

    return ClassificationSchedule(
        id="RND",
        base=Concept(
            id="base",
            notation=rng.choice(["A", "B2", "L", "X"]),
            label=Label("Base subject"),
            sought=rng.random() < 0.9,
        ),
        succession=succession,
        categories=tuple(categories),
    )


def random_formula(rng: random.Random, schedule: ClassificationSchedule) -> FacetFormula:
    codes = [c.code for c in schedule.categories]
    chosen = rng.sample(codes, rng.randint(1, len(codes)))
    return FacetFormula(
        tuple(FormulaSlot(code, required=rng.random() < 0.7) for code in chosen)
    )


def random_assignments(
    rng: random.Random, schedule: ClassificationSchedule, formula: FacetFormula
) -> dict[str, str]:
    from facetforge.schedule import full_notation

    assignments: dict[str, str] = {}
    for slot in formula.slots:
        if not slot.required and rng.random() < 0.4:
            continue
        category = schedule.category(slot.code)
        concept = rng.choice(category.concepts)
        assignments[slot.code] = full_notation(category, concept)
    # Shuffled insertion order exercises slot-order determinism.
    items = list(assignments.items())
    rng.shuffle(items)
    return dict(items)


# ---------------------------------------------------------------------------
# Random entity graphs and queries


def random_entity_graph(rng: random.Random, max_triples: int = 50) -> EntityGraph:
    iri_count = rng.randint(3, 8)
    iris = [Iri(f"https://ex.org/t/r{i}") for i in range(iri_count)]
    literals = [Literal(str(n), "integer") for n in range(rng.randint(0, 3))]
    objects = iris + literals

    wanted = rng.randint(0, max_triples)
    triples = set()
    for _ in range(wanted * 2):
        if len(triples) >= wanted:
            break
        triples.add(
            Triple(rng.choice(iris), rng.choice(iris), rng.choice(objects))
        )
    ordered = tuple(sorted(triples, key=Triple.sort_key))
    return EntityGraph(
        iri=Iri("https://ex.org/t/eg/fixed"),
        timestamp=datetime(2024, 1, 1, tzinfo=timezone.utc),
        sources=(),
        entities=(),
        triples=ordered,
        counts=(0, len(ordered)),
    )


def random_query(rng: random.Random, eg: EntityGraph, max_patterns: int = 3) -> Query:
    variables = [Variable("?a"), Variable("?b"), Variable("?c")]
    terms = eg.terms() or [Iri("https://ex.org/t/none")]
    novel = Iri("https://ex.org/t/unknown")

    def term():
        roll = rng.random()
        if roll < 0.45:
            return rng.choice(variables[: rng.randint(1, 3)])
        if roll < 0.9:
            return rng.choice(terms)
        return novel

    patterns = tuple(
        (term(), term(), term()) for _ in range(rng.randint(1, max_patterns))
    )
    return Query(patterns)


def brute_force_query(eg: EntityGraph, query: Query) -> tuple[tuple[str, ...], set]:
    """Enumerate every variable assignment over the graph's terms and filter.

    Independent of the engine's join order: the only shared vocabulary is the
    term and triple types.
    """
    columns = tuple(query.variables())
    terms = eg.terms()
    triple_set = {(t.subject, t.predicate, t.object) for t in eg.triples}
    rows = set()
    for assignment in itertools.product(terms, repeat=len(columns)):
        env = dict(zip(columns, assignment))

        def instantiate(term):
            if isinstance(term, Variable):
                return env[term.name]
            return term

        if all(
            (instantiate(s), instantiate(p), instantiate(o)) in triple_set
            for s, p, o in query.patterns
        ):
            rows.add(assignment)
    return columns, rows
