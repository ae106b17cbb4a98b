"""Layered SVG synthesis plans and raster montages."""

import base64
from xml.etree import ElementTree as ET

import pytest

from sia.errors import (
    EmptyComposition,
    InvalidOpacity,
    MalformedSourceVector,
    NotAnImage,
    StorageFailure,
)
from sia.plans import (
    DRAWABLE_TAGS,
    SVG_NS,
    CompositionRequest,
    MontageEntry,
    MontageRequest,
    color_hex,
    compose_photomontage,
    compose_plan,
    parse_view_box,
    serialize_plan,
)
from sia.scene import DEFAULT_PALETTE
from sia.store import EXPERT

ALL_PLACES = ("yard", "chapel", "great-hall")
BOTH_PERIODS = ("p1100", "p1150")

SVG = f"{{{SVG_NS}}}"


def local(tag):
    return tag.rpartition("}")[2]


class TestViewBox:
    def test_parse_accepts_commas(self):
        assert parse_view_box("0,0 10,20") == (0.0, 0.0, 10.0, 20.0)

    @pytest.mark.parametrize("bad", ["", "1 2 3", "0 0 -5 5", "0 0 5 0", "a b c d"])
    def test_parse_rejects_garbage(self, bad):
        with pytest.raises(ValueError):
            parse_view_box(bad)

    def test_color_hex(self):
        assert color_hex((1.0, 0.9, 0.0)) == "#ffe600"
        assert color_hex((0.0, 0.0, 0.0)) == "#000000"


class TestComposePlan:
    def test_full_composition(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        assert len(doc.layers) == 6
        assert doc.warnings == ()

    def test_layers_stack_oldest_period_first(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        periods = [l.period_id for l in doc.layers]
        assert periods == ["p1100"] * 3 + ["p1150"] * 3
        # within one period, place then record id
        assert [l.place_id for l in doc.layers[:3]] == sorted(l.place_id for l in doc.layers[:3])

    def test_view_box_is_margined_union(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        boxes = [l.view_box for l in doc.layers]
        x0 = min(b[0] for b in boxes)
        y0 = min(b[1] for b in boxes)
        x1 = max(b[0] + b[2] for b in boxes)
        y1 = max(b[1] + b[3] for b in boxes)
        mx, my = (x1 - x0) * 0.05, (y1 - y0) * 0.05
        assert doc.view_box == pytest.approx((x0 - mx, y0 - my, (x1 - x0) + 2 * mx, (y1 - y0) + 2 * my))

    def test_legend_is_chronological_with_labels(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(ALL_PLACES, BOTH_PERIODS))
        assert doc.legend == (
            ("p1100", "Romanesque core", DEFAULT_PALETTE[0]),
            ("p1150", "Gothic extension", DEFAULT_PALETTE[1]),
        )

    def test_missing_pairs_warn(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(("yard",), ("p1100", "p1250")))
        assert len(doc.layers) == 1
        assert any("p1250" in w for w in doc.warnings)

    def test_no_layers_raises(self, demo_store):
        with pytest.raises(EmptyComposition):
            compose_plan(demo_store, CompositionRequest(("yard",), ("p1250",)))

    def test_empty_request_raises(self, demo_store):
        with pytest.raises(EmptyComposition):
            compose_plan(demo_store, CompositionRequest((), ()))

    def test_unreadable_asset_reports_the_record(self, demo_store):
        record = demo_store.read("yard-outline-plan-around-1100")
        demo_store.resolve_asset(record.content).unlink()
        with pytest.raises(MalformedSourceVector, match="yard-outline-plan-around-1100"):
            compose_plan(demo_store, CompositionRequest(("yard",), ("p1100",)))

    def test_non_svg_asset_rejected(self, demo_store):
        record = demo_store.read("yard-outline-plan-around-1100")
        demo_store.resolve_asset(record.content).write_bytes(b"<html></html>")
        with pytest.raises(MalformedSourceVector, match="not an SVG"):
            compose_plan(demo_store, CompositionRequest(("yard",), ("p1100",)))

    def test_missing_view_box_rejected(self, demo_store):
        record = demo_store.read("yard-outline-plan-around-1100")
        demo_store.resolve_asset(record.content).write_bytes(b'<svg xmlns="http://www.w3.org/2000/svg"/>')
        with pytest.raises(MalformedSourceVector, match="viewBox"):
            compose_plan(demo_store, CompositionRequest(("yard",), ("p1100",)))


class TestPlanOutput:
    def render(self, demo_store, places=ALL_PLACES, periods=BOTH_PERIODS):
        doc = compose_plan(demo_store, CompositionRequest(places, periods))
        return doc, ET.fromstring(serialize_plan(doc))

    def test_root_and_layer_groups(self, demo_store):
        doc, root = self.render(demo_store)
        assert local(root.tag) == "svg"
        layer_groups = [g for g in root.findall(f"{SVG}g") if g.get("id", "").startswith("layer-")]
        assert [g.get("id") for g in layer_groups] == [
            f"layer-{l.period_id}-{l.place_id}-{l.record_id}" for l in doc.layers
        ]
        for g, layer in zip(layer_groups, doc.layers):
            assert g.get("data-record-id") == layer.record_id
            assert g.get("fill") == color_hex(layer.color)
            assert g.get("stroke") == color_hex(layer.color)

    def test_click_through_stamp_on_drawables(self, demo_store):
        _, root = self.render(demo_store)
        for g in root.findall(f"{SVG}g"):
            rid = g.get("data-record-id")
            if rid is None:
                continue
            for child in g:
                if local(child.tag) in DRAWABLE_TAGS:
                    assert child.get("data-record-id") == rid

    def test_legend_group_lists_periods(self, demo_store):
        doc, root = self.render(demo_store)
        legend = [g for g in root.findall(f"{SVG}g") if g.get("id") == "legend"]
        assert len(legend) == 1
        entries = legend[0].findall(f"{SVG}g")
        assert [e.get("data-period-id") for e in entries] == ["p1100", "p1150"]
        for entry, (_, label, color) in zip(entries, doc.legend):
            assert entry.find(f"{SVG}rect").get("fill") == color_hex(color)
            assert entry.find(f"{SVG}text").text == label

    def test_source_geometry_copied_through(self, demo_store):
        _, root = self.render(demo_store, places=("yard",), periods=("p1100",))
        layer = next(g for g in root.findall(f"{SVG}g") if g.get("id", "").startswith("layer-"))
        tags = {local(child.tag) for child in layer}
        assert {"rect", "path", "circle"} <= tags

    def test_single_namespace_declaration(self, demo_store):
        doc = compose_plan(demo_store, CompositionRequest(("yard",), ("p1100",)))
        data = serialize_plan(doc)
        assert data.count(b'xmlns="http://www.w3.org/2000/svg"') == 1


class TestMontage:
    def test_layers_in_request_order_with_opacity(self, demo_store):
        request = MontageRequest(
            (
                MontageEntry("yard-north-wall-photo", 1.0),
                MontageEntry("chapel-window-detail", 0.4),
            )
        )
        root = ET.fromstring(compose_photomontage(demo_store, request))
        groups = root.findall(f"{SVG}g")
        assert [g.get("id") for g in groups] == [
            "montage-1-yard-north-wall-photo",
            "montage-2-chapel-window-detail",
        ]
        images = [g.find(f"{SVG}image") for g in groups]
        assert [i.get("opacity") for i in images] == ["1", "0.4"]
        assert all(i.get("preserveAspectRatio") == "none" for i in images)

    def test_canvas_from_first_raster(self, demo_store):
        record = demo_store.read("yard-north-wall-photo")
        data = demo_store.resolve_asset(record.content).read_bytes()
        import struct

        width, height = struct.unpack(">II", data[16:24])
        root = ET.fromstring(
            compose_photomontage(demo_store, MontageRequest((MontageEntry("yard-north-wall-photo"),)))
        )
        assert root.get("viewBox") == f"0 0 {width} {height}"
        image = root.find(f"{SVG}g/{SVG}image")
        assert image.get("width") == str(width) and image.get("height") == str(height)

    def test_assets_embedded_as_data_uris(self, demo_store):
        record = demo_store.read("yard-north-wall-photo")
        raw = demo_store.resolve_asset(record.content).read_bytes()
        root = ET.fromstring(
            compose_photomontage(demo_store, MontageRequest((MontageEntry("yard-north-wall-photo"),)))
        )
        href = root.find(f"{SVG}g/{SVG}image").get("href")
        prefix = "data:image/png;base64,"
        assert href.startswith(prefix)
        assert base64.b64decode(href[len(prefix):]) == raw

    def test_vector_plans_count_as_images(self, demo_store):
        root = ET.fromstring(
            compose_photomontage(
                demo_store, MontageRequest((MontageEntry("yard-outline-plan-around-1100"),))
            )
        )
        # canvas falls back to the SVG viewBox extent
        assert root.get("viewBox") == "0 0 100 80"

    def test_non_image_kind_rejected(self, demo_store):
        with pytest.raises(NotAnImage):
            compose_photomontage(
                demo_store,
                MontageRequest((MontageEntry("field-notes-on-the-great-hall-excavation"),)),
            )

    @pytest.mark.parametrize("opacity", [0.0, -0.5, 1.5])
    def test_opacity_bounds(self, demo_store, opacity):
        with pytest.raises(InvalidOpacity):
            compose_photomontage(
                demo_store, MontageRequest((MontageEntry("yard-north-wall-photo", opacity),))
            )

    def test_empty_request(self, demo_store):
        with pytest.raises(EmptyComposition):
            compose_photomontage(demo_store, MontageRequest(()))

    def test_missing_asset_is_a_storage_failure(self, demo_store):
        record = demo_store.read("yard-north-wall-photo")
        demo_store.resolve_asset(record.content).unlink()
        with pytest.raises(StorageFailure):
            compose_photomontage(
                demo_store, MontageRequest((MontageEntry("yard-north-wall-photo"),))
            )

    def test_unknown_canvas_falls_back(self, demo_store, tmp_path):
        # a raster record whose asset is not probeable gets the default canvas
        record = demo_store.read("yard-north-wall-photo")
        demo_store.resolve_asset(record.content).write_bytes(b"JUNKBYTES")
        root = ET.fromstring(
            compose_photomontage(demo_store, MontageRequest((MontageEntry("yard-north-wall-photo"),)))
        )
        assert root.get("viewBox") == "0 0 1024 768"
