"""Schema deltas, migration plans, and the value-preservation contract."""

import random
from collections import Counter
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS_SCHEMA, CORPUS_VOCABULARIES, build_corpus
from sia.errors import DefaultMissing, InvalidDelta, MigrationBlocked, StalePlan
from sia.evolution import (
    ARCHIVE_TO_LEGACY,
    FILL_EMPTY,
    MOVE_VALUE,
    RETYPE_OR_LEGACY,
    AddNode,
    MigrationPlan,
    MigrationRule,
    RemoveNode,
    RenameNode,
    RetypeNode,
    SchemaDelta,
    apply_delta,
    migrate_tree,
    propose_schema,
    tree_leaves,
)
from sia.model import (
    AttributeNode,
    AttributeValueTree,
    LegacyEntry,
    ValueType,
)
from sia.store import EXPERT


def find(schema, kind, *names):
    nodes = schema.nodes_for(kind)
    node = None
    for name in names:
        node = next((n for n in nodes if n.name == name), None)
        assert node is not None, f"no node {name!r}"
        nodes = node.children
    return node


class TestDeltaApplication:
    def test_add_top_level_node(self):
        delta = SchemaDelta((AddNode("photo", AttributeNode("film", ValueType.TEXT)),))
        schema, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert schema.version == 2
        assert find(schema, "photo", "film").value_type == ValueType.TEXT
        assert rules == ()

    def test_add_with_default_emits_fill_rule(self):
        delta = SchemaDelta(
            (AddNode("photo", AttributeNode("film", ValueType.TEXT, required=True), default="unknown"),)
        )
        _, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert rules == (MigrationRule("photo", FILL_EMPTY, "film", text="unknown", value_type="text"),)

    def test_add_required_without_default(self):
        delta = SchemaDelta((AddNode("photo", AttributeNode("film", ValueType.TEXT, required=True)),))
        with pytest.raises(DefaultMissing):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_add_into_group(self):
        delta = SchemaDelta(
            (AddNode("photo", AttributeNode("aperture", ValueType.TEXT), parent_path="camera"),)
        )
        schema, _ = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "camera", "aperture") is not None

    def test_add_under_leaf_rejected(self):
        delta = SchemaDelta(
            (AddNode("photo", AttributeNode("x", ValueType.TEXT), parent_path="exposure"),)
        )
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_add_duplicate_sibling_rejected(self):
        delta = SchemaDelta((AddNode("photo", AttributeNode("exposure", ValueType.TEXT)),))
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_enum_default_must_belong_to_facet(self):
        node = AttributeNode("state", ValueType.ENUM, facet="condition")
        delta = SchemaDelta((AddNode("photo", node, default="pristine"),))
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_group_default_rejected(self):
        node = AttributeNode("g", ValueType.GROUP, children=(AttributeNode("x", ValueType.TEXT),))
        delta = SchemaDelta((AddNode("photo", node, default="x"),))
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_remove_emits_archive_rule(self):
        delta = SchemaDelta((RemoveNode("photo", "camera.model"),))
        schema, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "camera").children == (
            AttributeNode("focalLength", ValueType.DECIMAL),
        )
        assert rules == (MigrationRule("photo", ARCHIVE_TO_LEGACY, "camera.model"),)

    def test_remove_unknown_path(self):
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, SchemaDelta((RemoveNode("photo", "nope"),)), CORPUS_VOCABULARIES)

    def test_rename_emits_move_rule(self):
        delta = SchemaDelta((RenameNode("photo", "exposure", "shutter"),))
        schema, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "shutter") is not None
        assert rules == (MigrationRule("photo", MOVE_VALUE, "exposure", target_path="shutter"),)

    def test_rename_collision_rejected(self):
        delta = SchemaDelta((RenameNode("photo", "exposure", "condition"),))
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_retype_emits_convert_rule(self):
        delta = SchemaDelta((RetypeNode("photo", "exposure", ValueType.INTEGER),))
        schema, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "exposure").value_type == ValueType.INTEGER
        assert rules == (MigrationRule("photo", RETYPE_OR_LEGACY, "exposure", value_type="integer"),)

    def test_retype_to_enum_needs_facet(self):
        with pytest.raises(InvalidDelta):
            apply_delta(
                CORPUS_SCHEMA,
                SchemaDelta((RetypeNode("photo", "exposure", ValueType.ENUM),)),
                CORPUS_VOCABULARIES,
            )
        delta = SchemaDelta((RetypeNode("photo", "exposure", ValueType.ENUM, facet="condition"),))
        schema, _ = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "exposure").facet == "condition"

    def test_groups_cannot_be_retyped(self):
        with pytest.raises(InvalidDelta):
            apply_delta(
                CORPUS_SCHEMA,
                SchemaDelta((RetypeNode("photo", "camera", ValueType.TEXT),)),
                CORPUS_VOCABULARIES,
            )

    def test_unknown_kind_rejected(self):
        delta = SchemaDelta((AddNode("hologram", AttributeNode("x", ValueType.TEXT)),))
        with pytest.raises(InvalidDelta):
            apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_later_changes_see_earlier_ones(self):
        delta = SchemaDelta(
            (
                AddNode("photo", AttributeNode("film", ValueType.TEXT)),
                RenameNode("photo", "film", "stock"),
                RetypeNode("photo", "stock", ValueType.INTEGER),
            )
        )
        schema, rules = apply_delta(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)
        assert find(schema, "photo", "stock").value_type == ValueType.INTEGER
        assert [r.action for r in rules] == [MOVE_VALUE, RETYPE_OR_LEGACY]

    def test_propose_rejects_invalid_result(self):
        # renaming to the reserved quarantine name survives apply_delta's
        # local checks but fails whole-schema validation
        delta = SchemaDelta((RenameNode("photo", "exposure", "legacy"),))
        with pytest.raises(InvalidDelta, match="reserved"):
            propose_schema(CORPUS_SCHEMA, delta, CORPUS_VOCABULARIES)

    def test_propose_carries_versions(self):
        plan = propose_schema(
            CORPUS_SCHEMA, SchemaDelta((RemoveNode("photo", "exposure"),)), CORPUS_VOCABULARIES
        )
        assert (plan.from_version, plan.to_version) == (1, 2)


class TestTreeMigration:
    def rules(self, *changes):
        _, rules = apply_delta(CORPUS_SCHEMA, SchemaDelta(tuple(changes)), CORPUS_VOCABULARIES)
        return rules

    def test_fill_empty_only_touches_missing_or_blank(self):
        rules = self.rules(
            AddNode("photo", AttributeNode("film", ValueType.TEXT, required=True), default="unknown")
        )
        absent = migrate_tree(AttributeValueTree(), "photo", rules)
        assert absent.values == {"film": "unknown"}
        blank = migrate_tree(AttributeValueTree(values={"film": ""}), "photo", rules)
        assert blank.values == {"film": "unknown"}

    def test_fill_does_not_overwrite(self):
        # schema edit first so the fill targets a fresh node name
        rules = (MigrationRule("photo", FILL_EMPTY, "exposure", text="1/30", value_type="text"),)
        kept = migrate_tree(AttributeValueTree(values={"exposure": "1/250"}), "photo", rules)
        assert kept.values == {"exposure": "1/250"}

    def test_move_value(self):
        rules = self.rules(RenameNode("photo", "exposure", "shutter"))
        tree = migrate_tree(AttributeValueTree(values={"exposure": "1/60"}), "photo", rules)
        assert tree.values == {"shutter": "1/60"}

    def test_move_inside_group(self):
        rules = self.rules(RenameNode("photo", "camera.model", "make"))
        tree = migrate_tree(
            AttributeValueTree(values={"camera": {"model": "box", "focalLength": Decimal("35.0")}}),
            "photo",
            rules,
        )
        assert tree.values == {"camera": {"make": "box", "focalLength": Decimal("35.0")}}

    def test_retype_keeps_lossless_values(self):
        rules = self.rules(RetypeNode("photo", "exposure", ValueType.INTEGER))
        tree = migrate_tree(AttributeValueTree(values={"exposure": "125"}), "photo", rules)
        assert tree.values == {"exposure": 125} and tree.legacy == ()

    def test_retype_quarantines_lossy_values(self):
        rules = self.rules(RetypeNode("photo", "exposure", ValueType.INTEGER))
        tree = migrate_tree(AttributeValueTree(values={"exposure": "1/125"}), "photo", rules)
        assert "exposure" not in tree.values
        assert tree.legacy == (LegacyEntry("exposure", "1/125"),)

    def test_retype_repeatable_splits_item_by_item(self):
        rules = self.rules(RetypeNode("drawing", "medium", ValueType.INTEGER))
        tree = migrate_tree(AttributeValueTree(values={"medium": ["12", "ink"]}), "drawing", rules)
        assert tree.values == {"medium": [12]}
        assert tree.legacy == (LegacyEntry("medium", "ink"),)

    def test_archive_flattens_groups(self):
        rules = self.rules(RemoveNode("photo", "camera"))
        tree = migrate_tree(
            AttributeValueTree(values={"camera": {"model": "box", "focalLength": Decimal("35.0")}}),
            "photo",
            rules,
        )
        assert tree.values == {}
        assert set(tree.legacy) == {
            LegacyEntry("camera.model", "box"),
            LegacyEntry("camera.focalLength", "35.0"),
        }

    def test_rules_for_other_kinds_ignored(self):
        rules = self.rules(RemoveNode("photo", "exposure"))
        tree = migrate_tree(AttributeValueTree(values={"language": "de"}), "text", rules)
        assert tree.values == {"language": "de"} and tree.legacy == ()

    def test_existing_legacy_rides_along(self):
        rules = self.rules(RemoveNode("photo", "exposure"))
        tree = migrate_tree(
            AttributeValueTree(values={"exposure": "1/60"}, legacy=(LegacyEntry("old", "x"),)),
            "photo",
            rules,
        )
        assert tree.legacy == (LegacyEntry("old", "x"), LegacyEntry("exposure", "1/60"))

    def test_input_tree_never_mutated(self):
        original = AttributeValueTree(values={"camera": {"model": "box"}})
        self_rules = self.rules(RemoveNode("photo", "camera"))
        migrate_tree(original, "photo", self_rules)
        assert original.values == {"camera": {"model": "box"}}

    @given(st.integers(0, 10**9))
    @settings(max_examples=60, deadline=None)
    def test_leaf_multiset_preserved_modulo_rename(self, seed):
        """Archive, rename and retype never lose a canonical leaf text."""
        rng = random.Random(seed)
        tree = AttributeValueTree(
            values={
                "exposure": rng.choice(("1/60", "125", "", "007")),
                "condition": rng.choice(("good", "fair")),
                "camera": {"model": rng.choice(("box", "17")), "focalLength": Decimal("35.0")},
            }
        )
        rules = self.rules(
            RenameNode("photo", "exposure", "shutter"),
            RetypeNode("photo", "shutter", ValueType.INTEGER),
            RemoveNode("photo", "camera"),
        )
        migrated = migrate_tree(tree, "photo", rules)
        before = Counter(text for _, text in tree_leaves(tree))
        after = Counter(text for _, text in tree_leaves(migrated))
        assert before == after


class TestStoreMigration:
    def plan(self, store, *changes):
        return propose_schema(store.active_schema(), SchemaDelta(tuple(changes)), store.vocabularies())

    def test_versions_must_line_up(self, refs_store):
        plan = self.plan(refs_store, RemoveNode("photo", "exposure"))
        stale = MigrationPlan(5, 6, plan.schema, plan.rules)
        with pytest.raises(StalePlan):
            refs_store.apply_migration(stale, EXPERT)

    def test_plan_cannot_be_replayed(self, refs_store):
        plan = self.plan(refs_store, RemoveNode("photo", "exposure"))
        refs_store.apply_migration(plan, EXPERT)
        with pytest.raises(StalePlan):
            refs_store.apply_migration(plan, EXPERT)

    def test_migration_rewrites_records(self, tmp_path):
        from sia.store import Store

        with Store.init(tmp_path / "data") as store:
            build_corpus(store, 60, seed=5)
            before = {rid: tree_leaves(store.read(rid).attributes) for rid in store.record_ids()}
            plan = self.plan(
                store,
                RenameNode("photo", "exposure", "shutter"),
                RemoveNode("model3d", "software"),
            )
            store.apply_migration(plan, EXPERT)
            assert store.active_schema().version == 2
            assert store.validate_store() == {}
            for rid in store.record_ids():
                record = store.read(rid)
                assert record.schema_version == 2
                texts_before = Counter(t for _, t in before[rid])
                texts_after = Counter(t for _, t in tree_leaves(record.attributes))
                assert texts_before == texts_after
                if record.kind.tag == "model3d":
                    assert "software" not in record.attributes.values
                    assert any(e.path == "software" for e in record.attributes.legacy)

    def test_blocked_migration_leaves_store_untouched(self, refs_store):
        from sia.model import ContentRef, DocumentKind, RecordDraft

        refs_store.ingest(
            RecordDraft(
                kind=DocumentKind("text"),
                title="Notes",
                content=ContentRef("https://x.example/n.txt", "text/plain", "ab" * 32, 5),
                attributes=AttributeValueTree(values={"language": "de"}),
            ),
            EXPERT,
        )
        before = refs_store.export_xml("notes")
        # "de" cannot become an integer, and language is required: the
        # migrated record would be invalid, so nothing may change
        plan = self.plan(refs_store, RetypeNode("text", "language", ValueType.INTEGER))
        with pytest.raises(MigrationBlocked, match="notes"):
            refs_store.apply_migration(plan, EXPERT)
        assert refs_store.active_schema().version == 1
        assert refs_store.export_xml("notes") == before

    def test_records_at_other_versions_skipped(self, tmp_path):
        from sia.store import Store

        with Store.init(tmp_path / "data") as store:
            build_corpus(store, 10, seed=9)
            first = self.plan(store, RemoveNode("photo", "exposure"))
            store.apply_migration(first, EXPERT)
            # hold one record back at v1 by rewriting its file
            held = store.record_ids()[0]
            path = store.layout.records_dir / f"{held}.xml"
            path.write_bytes(path.read_bytes().replace(b'schemaVersion="2"', b'schemaVersion="1"'))
            store.rebuild_index()
            second = self.plan(store, RemoveNode("photo", "condition"))
            store.apply_migration(second, EXPERT)
            assert store.read(held).schema_version == 1
            others = [r for r in store.record_ids() if r != held]
            assert all(store.read(r).schema_version == 3 for r in others)
