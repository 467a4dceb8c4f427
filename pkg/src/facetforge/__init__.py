"""Faceted classification, chain indexing, and entity-graph construction.

The package turns a facet-analytical cataloguing workflow into executable
pieces: schedule and catalogue linting, class-number synthesis and parsing,
chain indexing, lightweight-ontology construction over a lexical resource,
entity-type-graph management and grounding, and a deterministic CSV-to-graph
build with query and export services.
"""

from .core import (
    Finding,
    FormatError,
    Identifier,
    Iri,
    Label,
    Provenance,
    RULES,
    finding,
    has_errors,
    mint_iri,
    validate_identifier,
)
from .schedule import (
    Characteristic,
    ClassificationSchedule,
    Concept,
    FacetCategory,
    LintConfig,
    children,
    lint_schedule,
    load_schedule,
    resolve_notation,
)
from .facet import (
    ClassNumber,
    FacetFormula,
    SubjectHeading,
    chain_index,
    parse_class_number,
    parse_formula,
    synthesize_class_number,
)
from .catalogue import (
    CallNumber,
    CatalogueCode,
    CatalogueRecord,
    build_record,
    lint_records,
    load_catalogue_code,
    make_call_number,
)
from .lexsem import LexicalSemanticResource, Synset, hypernym_path, load_lexsem, resolve_sense
from .ontology import (
    DatasetSchema,
    LightweightOntology,
    build_lightweight_ontology,
    load_dataset_schema,
    validate_backbone,
)
from .etg import (
    EntityTypeGraph,
    EtgRepository,
    LintGateError,
    SchemaGraph,
    ground,
    lint_etg,
    load_etg,
    open_repository,
    repo_add,
    repo_find,
)
from .eg import (
    EntityGraph,
    Literal,
    MappingSpec,
    Triple,
    build_entity_graph,
    ingest_dataset,
    load_mapping_spec,
    snapshot,
)
from .exports import export_fca, export_jsongraph, export_ntriples, load_entity_graph_json
from .query import BindingTable, Query, Variable, run_query

__version__ = "0.1.0"
