"""Domain model: identifiers, value coding, entity and record validation."""

from datetime import date
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS_PERIODS, CORPUS_PLACES, CORPUS_SCHEMA, CORPUS_VOCABULARIES
from sia.errors import InvalidInterval, UnknownPlace
from sia.model import (
    AttributeNode,
    AttributeValueTree,
    ContentRef,
    DocumentKind,
    MetadataSchema,
    Period,
    Place,
    RecordDraft,
    ValueType,
    Vocabulary,
    convert_value,
    format_value,
    is_slug,
    parse_value,
    period_overlaps,
    place_descendants,
    record_from_draft,
    slugify,
    validate_period,
    validate_place,
    validate_record,
    validate_schema,
    validate_vocabulary,
)

T0 = __import__("datetime").datetime(2005, 1, 1, tzinfo=__import__("datetime").timezone.utc)


class TestSlugs:
    @pytest.mark.parametrize(
        "text,expected",
        [
            ("North Wall", "north-wall"),
            ("  Überblick: Turm & Hof  ", "uberblick-turm-hof"),
            ("---", "item"),
            ("", "item"),
            ("a" * 100, "a" * 60),
        ],
    )
    def test_slugify(self, text, expected):
        assert slugify(text) == expected

    def test_fallback_is_configurable(self):
        assert slugify("", fallback="photo") == "photo"

    @given(st.text(max_size=30))
    @settings(max_examples=80, deadline=None)
    def test_slugify_always_yields_a_slug(self, text):
        assert is_slug(slugify(text))

    def test_is_slug_rejects_path_tricks(self):
        for bad in ("..", "a/b", "A", "", "-x", "a_b"):
            assert not is_slug(bad)


class TestValueCoding:
    @pytest.mark.parametrize(
        "value,text",
        [
            (7, "7"),
            (-3, "-3"),
            (Decimal("1.50"), "1.50"),
            (date(1998, 7, 14), "1998-07-14"),
            ("plain", "plain"),
        ],
    )
    def test_format(self, value, text):
        assert format_value(value) == text

    def test_parse_integer_rejects_noise(self):
        with pytest.raises(ValueError):
            parse_value("12a", ValueType.INTEGER)
        with pytest.raises(ValueError):
            parse_value("1.0", ValueType.INTEGER)

    def test_parse_decimal_rejects_exponent(self):
        with pytest.raises(ValueError):
            parse_value("1e3", ValueType.DECIMAL)

    def test_groups_carry_no_scalar(self):
        with pytest.raises(ValueError):
            parse_value("x", ValueType.GROUP)

    @given(st.integers())
    @settings(max_examples=60, deadline=None)
    def test_integer_roundtrip(self, n):
        assert parse_value(format_value(n), ValueType.INTEGER) == n

    def test_convert_lossless(self):
        assert convert_value("41", ValueType.INTEGER) == 41
        assert convert_value(41, ValueType.TEXT) == "41"
        assert convert_value("2001-02-03", ValueType.DATE) == date(2001, 2, 3)

    def test_convert_rejects_lossy(self):
        # leading zero would not survive the canonical round trip
        with pytest.raises(ValueError):
            convert_value("007", ValueType.INTEGER)
        with pytest.raises(ValueError):
            convert_value("1.50", ValueType.INTEGER)


class TestPeriods:
    def test_overlap_is_closed_interval(self):
        p = Period("p", "P", 1000, 1100)
        assert period_overlaps(p, 1100, 1200)
        assert period_overlaps(p, 900, 1000)
        assert not period_overlaps(p, 1101, 1200)

    def test_inverted_interval_rejected(self):
        with pytest.raises(InvalidInterval):
            period_overlaps(Period("p", "P", 0, 1), 10, 5)

    def test_validation(self):
        assert validate_period(Period("early", "Early", 900, 1000)) == []
        rules = {v.rule for v in validate_period(Period("Bad Id", " ", 100, 50))}
        assert rules == {"slug", "non-empty", "interval"}


class TestPlaces:
    def test_descendants_transitive(self):
        assert place_descendants("site", CORPUS_PLACES) == {
            "site", "north-wing", "south-wing", "tower", "cellar", "yard",
        }
        assert place_descendants("gatehouse", CORPUS_PLACES) == {"gatehouse"}

    def test_descendants_unknown_root(self):
        with pytest.raises(UnknownPlace):
            place_descendants("atlantis", CORPUS_PLACES)

    def test_validation_catches_cycles(self):
        a = Place("a", "A", parent_id="b")
        b = Place("b", "B", parent_id="a")
        assert any(v.rule == "cycle" for v in validate_place(a, [b]))

    def test_validation_catches_missing_parent(self):
        orphan = Place("a", "A", parent_id="nowhere")
        assert any(v.rule == "unknown-place" for v in validate_place(orphan, []))

    def test_footprint_needs_three_distinct_vertices(self):
        short = Place("a", "A", footprint=((0.0, 0.0), (1.0, 1.0)))
        assert any(v.rule == "min-vertices" for v in validate_place(short, []))
        repeated = Place("a", "A", footprint=((0.0, 0.0), (0.0, 0.0), (1.0, 1.0)))
        assert any(v.rule == "repeated-vertex" for v in validate_place(repeated, []))


class TestVocabularies:
    def test_duplicates_and_empties_flagged(self):
        rules = {v.rule for v in validate_vocabulary(Vocabulary("subject", ("a", "a", "")))}
        assert rules == {"duplicate-term", "non-empty"}

    def test_clean_vocabulary(self):
        assert validate_vocabulary(Vocabulary("subject", ("a", "b"))) == []


class TestSchemaValidation:
    def test_corpus_schema_is_clean(self):
        assert validate_schema(CORPUS_SCHEMA, CORPUS_VOCABULARIES) == []

    def test_enum_needs_existing_facet(self):
        schema = MetadataSchema(1, {"photo": (AttributeNode("c", ValueType.ENUM, facet="nope"),)})
        assert any(v.rule == "unknown-facet" for v in validate_schema(schema, []))

    def test_group_needs_children_and_leaves_reject_them(self):
        schema = MetadataSchema(
            1,
            {
                "photo": (
                    AttributeNode("g", ValueType.GROUP),
                    AttributeNode("leaf", ValueType.TEXT, children=(AttributeNode("x", ValueType.TEXT),)),
                )
            },
        )
        rules = {v.rule for v in validate_schema(schema, [])}
        assert {"empty-group", "leaf-children"} <= rules

    def test_reserved_legacy_name(self):
        schema = MetadataSchema(1, {"photo": (AttributeNode("legacy", ValueType.TEXT),)})
        assert any(v.rule == "reserved-name" for v in validate_schema(schema, []))

    def test_duplicate_siblings(self):
        schema = MetadataSchema(
            1, {"photo": (AttributeNode("a", ValueType.TEXT), AttributeNode("a", ValueType.DATE))}
        )
        assert any(v.rule == "duplicate-sibling" for v in validate_schema(schema, []))

    def test_unknown_kind(self):
        schema = MetadataSchema(1, {"hologram": ()})
        assert any(v.rule == "unknown-kind" for v in validate_schema(schema, []))


def make_record(**overrides):
    base = dict(
        kind=DocumentKind("photo"),
        title="North wall",
        author="A. Stone",
        subject_keywords=("masonry",),
        place_refs=("tower",),
        period_refs=("early",),
        content=ContentRef("https://x.example/a.png", "image/png", "ab" * 32, 10),
        attributes=AttributeValueTree(values={"condition": "good"}),
    )
    base.update(overrides)
    return record_from_draft(
        RecordDraft(**base), record_id="r", schema_version=1, created_at=T0, updated_at=T0
    )


def check(record):
    return validate_record(record, CORPUS_SCHEMA, CORPUS_VOCABULARIES, CORPUS_PERIODS, CORPUS_PLACES)


class TestRecordValidation:
    def test_valid_record(self):
        assert check(make_record()) == []

    def test_empty_title(self):
        assert any(v.rule == "non-empty" and v.path == "title" for v in check(make_record(title="  ")))

    def test_keyword_must_be_a_subject_term(self):
        violations = check(make_record(subject_keywords=("masonry", "ufo")))
        assert [v.path for v in violations if v.rule == "unknown-term"] == ["subject[1]"]

    def test_unknown_references(self):
        violations = check(make_record(place_refs=("atlantis",), period_refs=("space-age",)))
        assert {v.rule for v in violations} == {"unknown-place", "unknown-period"}

    def test_raster_plan_subkind_required(self):
        record = make_record(kind=DocumentKind("rasterPlan"), attributes=AttributeValueTree())
        assert any(v.rule == "required" and v.path == "kind.planSubkind" for v in check(record))

    def test_subkind_forbidden_elsewhere(self):
        record = make_record(kind=DocumentKind("photo", "section"))
        assert any(v.rule == "subkind-forbidden" for v in check(record))

    def test_unknown_subkind(self):
        record = make_record(kind=DocumentKind("rasterPlan", "doodle"), attributes=AttributeValueTree())
        assert any(v.rule == "unknown-subkind" for v in check(record))

    def test_enum_value_outside_facet(self):
        record = make_record(attributes=AttributeValueTree(values={"condition": "shiny"}))
        assert any(v.rule == "enum" for v in check(record))

    def test_required_attribute_missing(self):
        record = make_record(kind=DocumentKind("text"), attributes=AttributeValueTree())
        assert any(v.rule == "required" and v.path == "text/language" for v in check(record))

    def test_repeat_on_non_repeatable_node(self):
        record = make_record(attributes=AttributeValueTree(values={"exposure": ["a", "b"]}))
        assert any(v.rule == "repeat" for v in check(record))

    def test_type_mismatch_reported_not_raised(self):
        record = make_record(
            kind=DocumentKind("model3d"),
            attributes=AttributeValueTree(values={"polygonCount": "many"}),
        )
        assert any(v.rule == "type" for v in check(record))

    def test_unknown_node_flagged(self):
        record = make_record(attributes=AttributeValueTree(values={"zebra": "x"}))
        assert any(v.rule == "unknown-node" for v in check(record))

    def test_nested_group_values_checked(self):
        record = make_record(
            attributes=AttributeValueTree(values={"camera": {"focalLength": "wide"}})
        )
        assert any(v.rule == "type" and v.path == "photo/camera/focalLength" for v in check(record))

    def test_schema_version_mismatch_is_a_programming_error(self):
        with pytest.raises(ValueError):
            validate_record(make_record(), MetadataSchema(version=2), [], [], [])
