from __future__ import annotations

import json
import random

import pytest

from facetforge.catalogue import (
    CallNumber,
    build_record,
    lint_records,
    load_catalogue_code,
    load_record,
    make_call_number,
    record_to_json,
)
from facetforge.core import FormatError
from facetforge.facet import SubjectHeading, chain_index, parse_class_number
from facetforge.fixtures import fixture_text

FULL_IMPRINT = {
    "title": "Bibliography on the tropical disease of children in India in the 1970s",
    "author": "E.F. Schumacher",
    "publisher": "Harper & Row",
    "place": "New York",
    "date": "1973",
    "pages": "290",
}


def ccc_document(**overrides):
    data = json.loads(fixture_text("ccc.catalogue.json"))
    data.update(overrides)
    return data


@pytest.fixture()
def med_headings(med, med_formula):
    number = parse_class_number(med, med_formula, "L,9C:4.44")
    return chain_index(med, number)


class TestLoadCatalogueCode:
    def test_fixture_loads(self, ccc):
        specs = ccc.specs("Book")
        assert [s.key for s in specs] == ["title", "author", "publisher", "place", "date", "pages"]
        assert [s.order for s in specs] == [1, 2, 3, 4, 5, 6]

    def test_variation_on_unknown_field_rejected(self):
        data = ccc_document(local_variations=[{"field": "isbn", "template": "{value}"}])
        with pytest.raises(FormatError, match="unknown field 'isbn'"):
            load_catalogue_code(json.dumps(data))

    def test_empty_resource_types_is_valid(self):
        data = ccc_document(resource_types={})
        code = load_catalogue_code(json.dumps(data))
        assert code.resource_types == {}

    def test_duplicate_order_rejected(self):
        data = ccc_document()
        data["resource_types"]["Book"][1]["order"] = 1
        with pytest.raises(FormatError, match="duplicate order"):
            load_catalogue_code(json.dumps(data))


class TestMakeCallNumber:
    CLASS = "L,9C:421.44'N7"

    def test_surname_and_year_rule(self):
        number = make_call_number(self.CLASS, "Schumacher", 1973, 1)
        assert number == CallNumber(self.CLASS, "SCH73")

    def test_collision_appends_accession(self):
        taken = {CallNumber(self.CLASS, "SCH73")}
        number = make_call_number(self.CLASS, "Schumacher", 1973, 42, taken)
        assert number.book_part == "SCH7342"

    def test_surname_without_letters_rejected(self):
        with pytest.raises(ValueError, match="no letters"):
            make_call_number(self.CLASS, "", 1973, 1)

    def test_short_surname_and_punctuation(self):
        number = make_call_number(self.CLASS, "O'Ng", 2001, 7)
        assert number.book_part == "ONG01"

    def test_duplicate_accession_rejected(self):
        taken = {CallNumber(self.CLASS, "SCH73"), CallNumber(self.CLASS, "SCH7342")}
        with pytest.raises(ValueError, match="duplicate accession"):
            make_call_number(self.CLASS, "Schumacher", 1973, 42, taken)

    def test_register_never_duplicates(self):
        rng = random.Random(99)
        surnames = ["Schumacher", "Ng", "O'Brien", "Li", "Brontë", "Kafka", "Sand"]
        register: set[CallNumber] = set()
        for accession in range(1, 2001):
            number = make_call_number(
                "L", rng.choice(surnames), rng.randint(1900, 2024), accession, register
            )
            assert number not in register
            register.add(number)


class TestBuildRecord:
    def test_full_imprint_record(self, ccc, med_headings):
        call = make_call_number("L,9C:4.44", "Schumacher", 1973, 1)
        record = build_record(ccc, "Book", FULL_IMPRINT, med_headings, call, 1)
        assert [k for k, _ in record.fields] == [
            "title", "author", "publisher", "place", "date", "pages",
        ]
        assert len(record.headings) == 4
        assert record.call_number.book_part == "SCH73"
        assert record.record_id == "rec-1"

    def test_missing_required_fields_all_named(self, ccc, med_headings):
        call = make_call_number("L", "Schumacher", 1973, 1)
        with pytest.raises(ValueError, match="title.*date") as exc:
            build_record(ccc, "Book", {"author": "x", "publisher": "y"}, med_headings, call, 1)
        assert "title" in str(exc.value)

    def test_unknown_field_rejected(self, ccc, med_headings):
        call = make_call_number("L", "Schumacher", 1973, 1)
        imprint = dict(FULL_IMPRINT, colour="red")
        with pytest.raises(ValueError, match="colour"):
            build_record(ccc, "Book", imprint, med_headings, call, 1)

    def test_local_variation_applied(self, med_headings):
        data = ccc_document(
            local_variations=[{"field": "date", "template": "published {value}"}]
        )
        code = load_catalogue_code(json.dumps(data))
        call = make_call_number("L", "Schumacher", 1973, 1)
        record = build_record(code, "Book", FULL_IMPRINT, med_headings, call, 1)
        assert dict(record.fields)["date"] == "published 1973"

    def test_json_round_trip(self, ccc, med_headings):
        call = make_call_number("L,9C:4.44", "Schumacher", 1973, 3)
        record = build_record(ccc, "Book", FULL_IMPRINT, med_headings, call, 3)
        rendered = record_to_json(record)
        assert list(json.loads(rendered)) == [
            "record_id", "resource_type", "call_number", "accession_number",
            "headings", "fields",
        ]
        assert load_record(rendered) == record


class TestLintRecords:
    def build(self, ccc, med_headings, imprint, accession):
        call = make_call_number("L,9C:4.44", "Schumacher", 1973, accession)
        return build_record(ccc, "Book", imprint, med_headings, call, accession)

    def test_identical_key_sets_pass(self, ccc, med_headings):
        records = [
            self.build(ccc, med_headings, FULL_IMPRINT, 1),
            self.build(ccc, med_headings, dict(FULL_IMPRINT, title="Другое"), 2),
        ]
        assert lint_records(ccc, records) == []

    def test_cc1_missing_field_flagged(self, ccc, med_headings):
        smaller = {k: v for k, v in FULL_IMPRINT.items() if k != "pages"}
        records = [
            self.build(ccc, med_headings, FULL_IMPRINT, 1),
            self.build(ccc, med_headings, smaller, 2),
        ]
        findings = lint_records(ccc, records)
        assert [(f.code, f.severity) for f in findings] == [("CC1", "error")]
        assert "rec-2" in findings[0].path

    def test_cc1_exemption_covers_difference(self, med_headings):
        data = ccc_document(
            context_exemptions=[
                {"resource_type": "Book", "field": "pages", "reason": "serials"}
            ]
        )
        code = load_catalogue_code(json.dumps(data))
        smaller = {k: v for k, v in FULL_IMPRINT.items() if k != "pages"}
        records = [
            self.build(code, med_headings, FULL_IMPRINT, 1),
            self.build(code, med_headings, smaller, 2),
        ]
        assert lint_records(code, records) == []

    def test_cc2_foreign_heading_flagged(self, ccc, med_headings):
        record = self.build(ccc, med_headings, FULL_IMPRINT, 1)
        import dataclasses

        doctored = dataclasses.replace(
            record, headings=record.headings + (SubjectHeading("Doodles", "ZZZ"),)
        )
        findings = lint_records(ccc, [doctored])
        assert [(f.code, f.severity) for f in findings] == [("CC2", "warning")]

    def test_cc2_sought_field_heading_allowed(self, ccc, med_headings):
        record = self.build(ccc, med_headings, FULL_IMPRINT, 1)
        import dataclasses

        doctored = dataclasses.replace(
            record,
            headings=record.headings + (SubjectHeading(FULL_IMPRINT["title"], ""),),
        )
        assert lint_records(ccc, [doctored]) == []

    def test_cc3_template_without_placeholder(self, med_headings):
        data = ccc_document(
            local_variations=[{"field": "date", "template": "published"}]
        )
        code = load_catalogue_code(json.dumps(data))
        findings = lint_records(code, [])
        assert [(f.code, f.severity) for f in findings] == [("CC3", "error")]

    def test_empty_is_clean_and_monotone(self, ccc, med_headings):
        assert lint_records(ccc, []) == []
        records = []
        for accession in range(1, 4):
            records.append(self.build(ccc, med_headings, FULL_IMPRINT, accession))
            assert lint_records(ccc, records) == []

    def test_unknown_resource_type_rejected(self, ccc, med_headings):
        record = self.build(ccc, med_headings, FULL_IMPRINT, 1)
        import dataclasses

        alien = dataclasses.replace(record, resource_type="Serial")
        with pytest.raises(ValueError, match="unknown resource type"):
            lint_records(ccc, [alien])
