"""Self-contained demo site: a small castle hill with three documented
sub-places, three construction phases, and at least one record of every
document kind, including the generated binary assets.

The content is written out as a manifest directory and ingested through
the regular bulk path, so building the demo exercises the same code an
operator would use for real data.
"""

from __future__ import annotations

import struct
import tempfile
import xml.etree.ElementTree as ET
import zlib
from pathlib import Path

from .manifest import ingest_manifest, parse_manifest
from .model import (
    AttributeNode,
    MetadataSchema,
    Period,
    Place,
    ValueType,
    Vocabulary,
)
from .service import write_account
from .store import EXPERT, VISITOR, Store
from .xmlio import (
    format_float,
    periods_element,
    places_element,
    schema_element,
    serialize_tree,
    vocabularies_element,
)

DEMO_EXPERT = ("curator", "stone-arch-1998")
DEMO_VISITOR = ("guest", "open-doors")

DEMO_PLACES = (
    Place("castle", "Castle hill"),
    Place("yard", "Inner yard", parent_id="castle", footprint=((0.0, 0.0), (40.0, 0.0), (40.0, 30.0), (0.0, 30.0))),
    Place("chapel", "Chapel", parent_id="castle"),
    Place("great-hall", "Great hall", parent_id="castle"),
)

DEMO_PERIODS = (
    Period("p1100", "Romanesque core", 1080, 1120, "First stone buildings on the hill."),
    Period("p1150", "Gothic extension", 1130, 1170, "Chapel rebuilt, hall enlarged."),
    Period("p1250", "Late medieval expansion", 1230, 1280, "Outer works and domestic wings."),
)

DEMO_VOCABULARIES = (
    Vocabulary("subject", ("masonry", "woodwork", "foundations", "chapel-fittings", "defence-works", "pottery")),
    Vocabulary("author", ("K. Weber", "M. Dupont", "survey team")),
    Vocabulary("condition", ("good", "fair", "poor")),
)

DEMO_SCHEMA = MetadataSchema(
    version=1,
    per_kind={
        "photo": (
            AttributeNode("exposure", ValueType.TEXT),
            AttributeNode("condition", ValueType.ENUM, facet="condition"),
        ),
        "model3d": (
            AttributeNode("software", ValueType.TEXT),
            AttributeNode("polygonCount", ValueType.INTEGER),
        ),
        "vectorPlan": (
            AttributeNode("scale", ValueType.TEXT, required=True),
            AttributeNode("surveyYear", ValueType.INTEGER),
        ),
        "text": (AttributeNode("language", ValueType.TEXT),),
    },
)

_PLACE_COORDS = {
    "yard": (0.0, 0.0, 0.0),
    "chapel": (14.0, 0.0, -8.0),
    "great-hall": (-12.0, 0.0, 6.0),
}

_PLACE_VIEW_BOXES = {
    "yard": "0 0 100 80",
    "chapel": "20 10 60 50",
    "great-hall": "-10 -5 120 90",
}

_MODEL_PLACES = ("yard", "chapel", "great-hall")
_MODEL_PERIODS = ("p1100", "p1150")


def _png(width: int, height: int, rgb: tuple[int, int, int]) -> bytes:
    """Minimal solid-color truecolor PNG."""

    def chunk(kind: bytes, payload: bytes) -> bytes:
        body = kind + payload
        return struct.pack(">I", len(payload)) + body + struct.pack(">I", zlib.crc32(body) & 0xFFFFFFFF)

    raw = b"".join(b"\x00" + bytes(rgb) * width for _ in range(height))
    return (
        b"\x89PNG\r\n\x1a\n"
        + chunk(b"IHDR", struct.pack(">IIBBBBB", width, height, 8, 2, 0, 0, 0))
        + chunk(b"IDAT", zlib.compress(raw))
        + chunk(b"IEND", b"")
    )


def _box_x3d(size: tuple[float, float, float]) -> bytes:
    dims = " ".join(format_float(v) for v in size)
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        '<X3D profile="Interchange" version="3.2">\n'
        "  <Scene>\n"
        "    <Shape>\n"
        f'      <Box size="{dims}"/>\n'
        "    </Shape>\n"
        "  </Scene>\n"
        "</X3D>\n"
    ).encode("utf-8")


def _plan_svg(view_box: str, shift: int) -> bytes:
    x, y, w, h = (float(v) for v in view_box.split())
    rx, ry = x + w * 0.1 + shift, y + h * 0.15
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{view_box}">\n'
        f'  <rect height="{h * 0.4:g}" width="{w * 0.5:g}" x="{rx:g}" y="{ry:g}"/>\n'
        f'  <path d="M {x + w * 0.1:g} {y + h * 0.7:g} L {x + w * 0.8:g} {y + h * 0.7:g} L {x + w * 0.8:g} {y + h * 0.85:g} Z"/>\n'
        f'  <circle cx="{x + w * 0.3 + shift:g}" cy="{y + h * 0.3:g}" r="{min(w, h) * 0.05:g}"/>\n'
        "</svg>\n"
    ).encode("utf-8")


def _entry(
    entries: ET.Element,
    *,
    kind: str,
    title: str,
    src: str,
    places: tuple[str, ...],
    periods: tuple[str, ...],
    author: str = "survey team",
    provenance: str = "site survey archive",
    subkind: str | None = None,
    capture: str | None = None,
    keywords: tuple[str, ...] = (),
    coordinates: tuple[float, float, float] | None = None,
    attributes: dict[str, str] | None = None,
) -> None:
    attrs = {"author": author, "kind": kind, "src": src, "title": title}
    if subkind:
        attrs["subkind"] = subkind
    if capture:
        attrs["capture-date"] = capture
    el = ET.SubElement(entries, "entry", attrs)
    ET.SubElement(el, "provenance").text = provenance
    subject = ET.SubElement(el, "subject")
    for keyword in keywords:
        ET.SubElement(subject, "keyword").text = keyword
    places_el = ET.SubElement(el, "places")
    for place_id in places:
        ET.SubElement(places_el, "ref", {"id": place_id})
    periods_el = ET.SubElement(el, "periods")
    for period_id in periods:
        ET.SubElement(periods_el, "ref", {"id": period_id})
    if coordinates is not None:
        x, y, z = coordinates
        ET.SubElement(
            el, "coordinates", {"x": format_float(x), "y": format_float(y), "z": format_float(z)}
        )
    if attributes:
        attributes_el = ET.SubElement(el, "attributes")
        for name, text in attributes.items():
            ET.SubElement(attributes_el, name).text = text


def write_demo_manifest(target: str | Path) -> Path:
    """Write the demo's assets and manifest.xml into ``target``; returns
    the manifest path."""
    target = Path(target)
    assets = target / "assets"
    assets.mkdir(parents=True, exist_ok=True)

    root = ET.Element("manifest")
    root.append(schema_element(DEMO_SCHEMA))
    root.append(vocabularies_element(list(DEMO_VOCABULARIES)))
    root.append(periods_element(list(DEMO_PERIODS)))
    root.append(places_element(list(DEMO_PLACES)))
    entries = ET.SubElement(root, "entries")

    year_by_period = {"p1100": "1100", "p1150": "1150", "p1250": "1250"}
    for pi, place_id in enumerate(_MODEL_PLACES):
        for qi, period_id in enumerate(_MODEL_PERIODS):
            year = year_by_period[period_id]
            model_name = f"{place_id}-{year}.x3d"
            (assets / model_name).write_bytes(_box_x3d((4.0 + pi, 3.0 + qi, 4.0 + pi * 0.5)))
            label = place_id.replace("-", " ")
            _entry(
                entries,
                kind="model3d",
                title=f"{label.capitalize()} massing model around {year}",
                src=f"assets/{model_name}",
                places=(place_id,),
                periods=(period_id,),
                coordinates=_PLACE_COORDS[place_id],
                keywords=("masonry",),
                attributes={"software": "siteforge 2.1", "polygonCount": str(9000 + 700 * pi + 130 * qi)},
            )
            plan_name = f"{place_id}-{year}-outline.svg"
            (assets / plan_name).write_bytes(_plan_svg(_PLACE_VIEW_BOXES[place_id], shift=qi * 4))
            _entry(
                entries,
                kind="vectorPlan",
                title=f"{label.capitalize()} outline plan around {year}",
                src=f"assets/{plan_name}",
                places=(place_id,),
                periods=(period_id,),
                keywords=("foundations",),
                attributes={"scale": "1:100", "surveyYear": str(1995 + pi + qi)},
            )

    photos = (
        ("yard-north-wall.png", "Yard north wall photo", ("yard",), ("p1100",), "1998-07-14",
         ("masonry", "defence-works"), "K. Weber", "fair", (180, 160, 140)),
        ("yard-from-keep.png", "Yard from the keep", ("yard",), ("p1100", "p1150"), "1999-05-02",
         ("masonry",), "M. Dupont", "good", (150, 170, 190)),
        ("chapel-window.png", "Chapel window detail", ("chapel",), ("p1150",), "1998-09-01",
         ("chapel-fittings",), "K. Weber", "fair", (200, 180, 120)),
        ("hall-fireplace.png", "Great hall fireplace", ("great-hall",), ("p1250",), "2001-03-20",
         ("woodwork",), "M. Dupont", "poor", (120, 100, 90)),
    )
    for name, title, places, periods, capture, keywords, author, condition, rgb in photos:
        (assets / name).write_bytes(_png(8, 6, rgb))
        _entry(
            entries,
            kind="photo",
            title=title,
            src=f"assets/{name}",
            places=places,
            periods=periods,
            capture=capture,
            keywords=keywords,
            author=author,
            attributes={"exposure": "1/125", "condition": condition},
        )

    (assets / "chapel-section.png").write_bytes(_png(10, 8, (90, 90, 110)))
    _entry(
        entries,
        kind="rasterPlan",
        title="Chapel cross section scan",
        src="assets/chapel-section.png",
        places=("chapel",),
        periods=("p1150",),
        subkind="section",
        keywords=("chapel-fittings",),
        author="K. Weber",
    )

    (assets / "hall-notes.txt").write_text(
        "Excavation notes, great hall trench B: pottery sherds beneath the "
        "fireplace foundations suggest a later rebuild of the west wall.\n",
        "utf-8",
    )
    _entry(
        entries,
        kind="text",
        title="Field notes on the great hall excavation",
        src="assets/hall-notes.txt",
        places=("great-hall",),
        periods=("p1250",),
        keywords=("foundations", "pottery"),
        author="M. Dupont",
        attributes={"language": "de"},
    )

    manifest_path = target / "manifest.xml"
    manifest_path.write_bytes(serialize_tree(root))
    return manifest_path


def build_demo_store(data_dir: str | Path, *, clock=None) -> Store:
    """Initialize ``data_dir`` with the full demo content and the demo
    accounts; returns the open writer store."""
    with tempfile.TemporaryDirectory() as tmp:
        manifest_path = write_demo_manifest(Path(tmp))
        store = Store.init(data_dir, clock=clock)
        ingest_manifest(store, parse_manifest(manifest_path), EXPERT)
    accounts = store.layout.data_dir / "accounts.json"
    write_account(accounts, DEMO_EXPERT[0], DEMO_EXPERT[1], EXPERT)
    write_account(accounts, DEMO_VISITOR[0], DEMO_VISITOR[1], VISITOR)
    return store
