"""3D scene composition: selection, naming, palette, X3D output."""

import pytest
from xml.etree import ElementTree as ET

from sia.errors import EmptyComposition, UnknownPeriod
from sia.model import Period
from sia.scene import (
    DEFAULT_PALETTE,
    CompositionRequest,
    compose_model,
    format_color,
    period_colors,
    serialize_x3d,
)

ALL_PLACES = ("yard", "chapel", "great-hall")
BOTH_PERIODS = ("p1100", "p1150")


class TestPalette:
    def test_twelve_distinct_colors(self):
        assert len(DEFAULT_PALETTE) == 12
        assert len(set(DEFAULT_PALETTE)) == 12

    def test_first_two_are_yellow_and_pink(self):
        assert DEFAULT_PALETTE[0] == (1.0, 0.9, 0.0)
        assert DEFAULT_PALETTE[1] == (1.0, 0.6, 0.75)

    def test_format_color_drops_trailing_zeroes(self):
        assert format_color((1.0, 0.9, 0.0)) == "1 0.9 0"
        assert format_color((0.25, 0.5, 0.75)) == "0.25 0.5 0.75"


class TestPeriodColors:
    PERIODS = [
        Period("newer", "Newer", 1500, 1600),
        Period("older", "Older", 1000, 1100),
        Period("middle", "Middle", 1200, 1300),
    ]

    def test_chronological_assignment(self):
        colors = period_colors(("newer", "older", "middle"), self.PERIODS)
        assert colors["older"] == DEFAULT_PALETTE[0]
        assert colors["middle"] == DEFAULT_PALETTE[1]
        assert colors["newer"] == DEFAULT_PALETTE[2]

    def test_request_order_is_irrelevant(self):
        a = period_colors(("newer", "older"), self.PERIODS)
        b = period_colors(("older", "newer", "older"), self.PERIODS)
        assert a == b

    def test_palette_cycles(self):
        many = [Period(f"p{i}", f"P{i}", i * 10, i * 10 + 5) for i in range(15)]
        colors = period_colors(tuple(p.id for p in many), many)
        assert colors["p0"] == colors["p12"] == DEFAULT_PALETTE[0]

    def test_unknown_period(self):
        with pytest.raises(UnknownPeriod):
            period_colors(("ghost",), self.PERIODS)


class TestComposeModel:
    def test_full_composition_yields_six_groups(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        assert len(scene.groups) == 6
        assert scene.warnings == ()
        names = [g.name for g in scene.groups]
        assert names == sorted(names)
        assert "yard-p1100-yard-massing-model-around-1100" in names

    def test_exactly_one_color_per_period(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        by_period = {}
        for g in scene.groups:
            by_period.setdefault(g.period_id, set()).add(g.color)
        assert by_period == {
            "p1100": {DEFAULT_PALETTE[0]},
            "p1150": {DEFAULT_PALETTE[1]},
        }
        assert scene.legend == (
            ("p1100", DEFAULT_PALETTE[0]),
            ("p1150", DEFAULT_PALETTE[1]),
        )

    def test_parent_place_pulls_in_descendants(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(("castle",), ("p1100",)))
        assert {g.record_id for g in scene.groups} == {
            "yard-massing-model-around-1100",
            "chapel-massing-model-around-1100",
            "great-hall-massing-model-around-1100",
        }
        # groups are named after the requested place, not the record's own
        assert all(g.place_id == "castle" for g in scene.groups)

    def test_empty_pairs_warn_but_do_not_fail(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(("yard", "chapel"), ("p1100", "p1250")))
        assert len(scene.groups) == 2  # only the p1100 models
        assert len(scene.warnings) == 2
        assert any("p1250" in w and "yard" in w for w in scene.warnings)

    def test_no_match_at_all_raises(self, demo_store):
        with pytest.raises(EmptyComposition):
            compose_model(demo_store, CompositionRequest(("yard",), ("p1250",)))

    def test_empty_request_raises(self, demo_store):
        with pytest.raises(EmptyComposition):
            compose_model(demo_store, CompositionRequest((), ("p1100",)))
        with pytest.raises(EmptyComposition):
            compose_model(demo_store, CompositionRequest(("yard",), ()))

    def test_archived_models_excluded(self, demo_store):
        from sia.store import EXPERT

        demo_store.set_archived("yard-massing-model-around-1100", True, EXPERT)
        scene = compose_model(demo_store, CompositionRequest(("yard", "chapel"), ("p1100",)))
        assert {g.record_id for g in scene.groups} == {"chapel-massing-model-around-1100"}
        assert any("yard" in w for w in scene.warnings)

    def test_groups_carry_model_coordinates(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(("yard",), ("p1100",)))
        (group,) = scene.groups
        assert group.translation is not None
        assert group.inline_url == "media/yard-1100.x3d"


class TestX3DOutput:
    def test_document_structure(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        data = serialize_x3d(scene)
        root = ET.fromstring(data)
        assert root.tag == "X3D"
        assert root.get("profile") == "Interchange" and root.get("version") == "3.2"
        groups = root.findall("Scene/Group")
        assert len(groups) == 6
        for group_el, group in zip(groups, scene.groups):
            assert group_el.get("DEF") == group.name
            material = group_el.find("Shape/Appearance/Material")
            assert material.get("diffuseColor") == format_color(group.color)
            inline = group_el.find("Inline")
            if inline is None:
                inline = group_el.find("Transform/Inline")
            assert inline.get("url") == f'"{group.inline_url}"'

    def test_material_colors_match_legend(self, demo_store):
        scene = compose_model(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        root = ET.fromstring(serialize_x3d(scene))
        colors = {m.get("diffuseColor") for m in root.iter("Material")}
        assert colors == {"1 0.9 0", "1 0.6 0.75"}

    def test_output_is_deterministic(self, demo_store):
        request = CompositionRequest(ALL_PLACES, BOTH_PERIODS)
        assert serialize_x3d(compose_model(demo_store, request)) == serialize_x3d(
            compose_model(demo_store, request)
        )
