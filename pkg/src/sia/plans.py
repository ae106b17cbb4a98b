"""Layered 2D synthesis: stack vector plans of several places and periods
into one SVG, or superimpose translucent raster documents as a montage.

Every plan layer is a group tinted with its period color; the group and
its top-level drawable children carry ``data-record-id`` so a click
anywhere in the drawing resolves back to the source record. The combined
viewBox is the union of all source viewBoxes plus a 5% margin.
"""

from __future__ import annotations

import base64
import struct
import xml.etree.ElementTree as ET
from dataclasses import dataclass

from .errors import (
    EmptyComposition,
    InvalidOpacity,
    MalformedSourceVector,
    NotAnImage,
    StorageFailure,
)
from .model import IMAGE_KINDS, place_descendants
from .scene import Color, CompositionRequest, DEFAULT_PALETTE, period_colors
from .store import Store
from .xmlio import parse_tree, serialize_tree

SVG_NS = "http://www.w3.org/2000/svg"

# Elements that render something clickable; these get the record stamp.
DRAWABLE_TAGS = frozenset(
    {"path", "rect", "circle", "ellipse", "line", "polyline", "polygon", "g", "text", "use", "image"}
)

ViewBox = tuple[float, float, float, float]


@dataclass(frozen=True)
class PlanLayer:
    record_id: str
    place_id: str
    period_id: str
    color: Color
    view_box: ViewBox
    elements: tuple[ET.Element, ...]

    def __hash__(self):  # pragma: no cover - carries mutable elements
        raise TypeError("PlanLayer is not hashable")


@dataclass(frozen=True)
class PlanDocument:
    view_box: ViewBox
    layers: tuple[PlanLayer, ...]
    legend: tuple[tuple[str, str, Color], ...]  # (periodId, label, color)
    warnings: tuple[str, ...]

    def __hash__(self):  # pragma: no cover
        raise TypeError("PlanDocument is not hashable")


def color_hex(color: Color) -> str:
    return "#" + "".join(f"{round(channel * 255):02x}" for channel in color)


def _fmt(value: float) -> str:
    return f"{value:g}"


def _local(tag: str) -> str:
    return tag.rpartition("}")[2]


def parse_view_box(text: str) -> ViewBox:
    parts = text.replace(",", " ").split()
    if len(parts) != 4:
        raise ValueError(f"viewBox needs 4 numbers, got {text!r}")
    x, y, w, h = (float(p) for p in parts)
    if w <= 0 or h <= 0:
        raise ValueError(f"viewBox extent must be positive, got {text!r}")
    return (x, y, w, h)


def _load_vector(store: Store, record_id: str) -> tuple[ViewBox, tuple[ET.Element, ...]]:
    record = store.read(record_id)
    path = store.resolve_asset(record.content)
    if path is None:
        raise MalformedSourceVector(record_id, f"record {record_id!r} has no readable vector asset")
    try:
        root = parse_tree(path.read_bytes())
    except Exception as exc:
        raise MalformedSourceVector(record_id, f"record {record_id!r}: {exc}") from exc
    if _local(root.tag) != "svg":
        raise MalformedSourceVector(record_id, f"record {record_id!r} asset is not an SVG document")
    try:
        view_box = parse_view_box(root.get("viewBox", ""))
    except ValueError as exc:
        raise MalformedSourceVector(record_id, f"record {record_id!r}: {exc}") from None
    return view_box, tuple(root)


def _union(boxes: list[ViewBox], margin_ratio: float = 0.05) -> ViewBox:
    x0 = min(b[0] for b in boxes)
    y0 = min(b[1] for b in boxes)
    x1 = max(b[0] + b[2] for b in boxes)
    y1 = max(b[1] + b[3] for b in boxes)
    mx = (x1 - x0) * margin_ratio
    my = (y1 - y0) * margin_ratio
    return (x0 - mx, y0 - my, (x1 - x0) + 2 * mx, (y1 - y0) + 2 * my)


def compose_plan(
    store: Store, request: CompositionRequest, palette: tuple[Color, ...] = DEFAULT_PALETTE
) -> PlanDocument:
    """Select every vector plan matching a requested (place, period) pair
    and stack them oldest period first."""
    if not request.places or not request.periods:
        raise EmptyComposition("a synthesis plan needs at least one place and one period")
    places = store.places()
    scopes = {place_id: place_descendants(place_id, places) for place_id in request.places}
    periods = store.periods()
    colors = period_colors(request.periods, periods, palette)
    by_id = {p.id: p for p in periods}

    view = store.index_view()
    candidates = [row for row in view.rows.values() if row.kind == "vectorPlan" and not row.archived]
    layers: list[PlanLayer] = []
    warnings: list[str] = []
    for place_id in sorted(set(request.places)):
        for period_id in sorted(set(request.periods)):
            matched = [
                row
                for row in candidates
                if scopes[place_id].intersection(view.places.get(row.id, ()))
                and period_id in view.periods.get(row.id, ())
            ]
            if not matched:
                warnings.append(f"no vector plan covers place {place_id!r} in period {period_id!r}")
                continue
            for row in matched:
                box, elements = _load_vector(store, row.id)
                layers.append(
                    PlanLayer(
                        record_id=row.id,
                        place_id=place_id,
                        period_id=period_id,
                        color=colors[period_id],
                        view_box=box,
                        elements=elements,
                    )
                )
    if not layers:
        raise EmptyComposition("no vector plan matches the requested places and periods")
    layers.sort(
        key=lambda l: (
            by_id[l.period_id].start_year,
            by_id[l.period_id].end_year,
            l.period_id,
            l.place_id,
            l.record_id,
        )
    )
    legend = tuple(
        (pid, by_id[pid].label, colors[pid])
        for pid in sorted(colors, key=lambda pid: (by_id[pid].start_year, by_id[pid].end_year, pid))
    )
    return PlanDocument(
        view_box=_union([l.view_box for l in layers]),
        layers=tuple(layers),
        legend=legend,
        warnings=tuple(warnings),
    )


def _legend_group(doc: PlanDocument) -> ET.Element:
    x, y, w, h = doc.view_box
    swatch = max(w, h) * 0.03
    group = ET.Element("g", {"id": "legend"})
    for i, (period_id, label, color) in enumerate(doc.legend):
        entry = ET.SubElement(group, "g", {"class": "legend-entry", "data-period-id": period_id})
        ET.SubElement(
            entry,
            "rect",
            {
                "fill": color_hex(color),
                "height": _fmt(swatch),
                "width": _fmt(swatch),
                "x": _fmt(x + swatch * 0.5),
                "y": _fmt(y + swatch * (0.5 + 1.5 * i)),
            },
        )
        text = ET.SubElement(
            entry,
            "text",
            {
                "font-size": _fmt(swatch * 0.8),
                "x": _fmt(x + swatch * 1.8),
                "y": _fmt(y + swatch * (1.3 + 1.5 * i)),
            },
        )
        text.text = label
    return group


def plan_element(doc: PlanDocument) -> ET.Element:
    root = ET.Element(
        f"{{{SVG_NS}}}svg", {"viewBox": " ".join(_fmt(v) for v in doc.view_box)}
    )
    for layer in doc.layers:
        group = ET.SubElement(
            root,
            "g",
            {
                "id": f"layer-{layer.period_id}-{layer.place_id}-{layer.record_id}",
                "data-record-id": layer.record_id,
                "fill": color_hex(layer.color),
                "stroke": color_hex(layer.color),
            },
        )
        for element in layer.elements:
            if _local(element.tag) in DRAWABLE_TAGS:
                element.set("data-record-id", layer.record_id)
            group.append(element)
    root.append(_legend_group(doc))
    return root


def serialize_plan(doc: PlanDocument) -> bytes:
    return serialize_tree(plan_element(doc), default_ns=SVG_NS)


# ---------------------------------------------------------------------------
# photo montage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MontageEntry:
    record_id: str
    opacity: float = 0.5


@dataclass(frozen=True)
class MontageRequest:
    entries: tuple[MontageEntry, ...]


def _png_dimensions(data: bytes) -> tuple[int, int] | None:
    if len(data) >= 24 and data[:8] == b"\x89PNG\r\n\x1a\n" and data[12:16] == b"IHDR":
        width, height = struct.unpack(">II", data[16:24])
        return width, height
    return None


def _image_dimensions(data: bytes, media_format: str) -> tuple[float, float] | None:
    dims = _png_dimensions(data)
    if dims:
        return float(dims[0]), float(dims[1])
    if "svg" in media_format:
        try:
            root = parse_tree(data)
            box = parse_view_box(root.get("viewBox", ""))
            return box[2], box[3]
        except Exception:
            return None
    return None


def compose_photomontage(store: Store, request: MontageRequest) -> bytes:
    """Superimpose image documents as translucent full-canvas layers, in
    the order given (first entry at the bottom). Assets are embedded, so
    the montage is a single self-contained file."""
    if not request.entries:
        raise EmptyComposition("a montage needs at least one image record")
    layers: list[tuple[MontageEntry, str, bytes]] = []
    for entry in request.entries:
        if not 0.0 < entry.opacity <= 1.0:
            raise InvalidOpacity(f"opacity must be in (0, 1], got {entry.opacity}")
        record = store.read(entry.record_id)
        if record.kind.tag not in IMAGE_KINDS:
            raise NotAnImage(f"record {entry.record_id!r} is a {record.kind.tag}, not an image")
        path = store.resolve_asset(record.content)
        if path is None:
            raise StorageFailure(f"record {entry.record_id!r} has no readable image asset")
        layers.append((entry, record.content.media_format, path.read_bytes()))

    canvas = next(
        (dims for _, fmt, data in layers if (dims := _image_dimensions(data, fmt))),
        (1024.0, 768.0),
    )
    width, height = canvas
    root = ET.Element(
        f"{{{SVG_NS}}}svg", {"viewBox": f"0 0 {_fmt(width)} {_fmt(height)}"}
    )
    for i, (entry, media_format, data) in enumerate(layers):
        mime = media_format if "/" in media_format else f"image/{media_format or 'png'}"
        group = ET.SubElement(
            root,
            "g",
            {"id": f"montage-{i + 1}-{entry.record_id}", "data-record-id": entry.record_id},
        )
        ET.SubElement(
            group,
            "image",
            {
                "data-record-id": entry.record_id,
                "height": _fmt(height),
                "href": f"data:{mime};base64,{base64.b64encode(data).decode('ascii')}",
                "opacity": _fmt(entry.opacity),
                "preserveAspectRatio": "none",
                "width": _fmt(width),
                "x": "0",
                "y": "0",
            },
        )
    return serialize_tree(root, default_ns=SVG_NS)
