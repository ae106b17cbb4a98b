"""Canonical XML reading and writing for every document the archive keeps
on disk: record files, schema versions, vocabularies, periods and places.

Canonical form: UTF-8, LF line endings, 2-space indentation, attributes in
alphabetical order, fixed element order per document type. Serializing the
same value twice yields identical bytes, and serialize(parse(bytes)) is a
fixpoint on canonical input — tests lean on both properties.

Elements that carry text (or whose children carry tails, as inlined SVG
fragments do) are written verbatim with no added whitespace, so foreign
vector content survives untouched.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from datetime import date, datetime, timezone
from typing import Any, Callable, Mapping

from .errors import RecordParseError, SchemaVersionUnknown
from .model import (
    AttributeNode,
    AttributeValueTree,
    ContentRef,
    DocumentKind,
    DocumentRecord,
    LegacyEntry,
    MetadataSchema,
    Period,
    Place,
    ValueType,
    Vocabulary,
)

XML_DECLARATION = b'<?xml version="1.0" encoding="UTF-8"?>\n'

_WELL_KNOWN_PREFIXES = {
    "http://www.w3.org/1999/xlink": "xlink",
    "http://www.w3.org/XML/1998/namespace": "xml",
}


# ---------------------------------------------------------------------------
# generic canonical writer
# ---------------------------------------------------------------------------

def _escape_text(text: str) -> str:
    text = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    return text.replace("\r", "&#13;")


def _escape_attr(text: str) -> str:
    text = text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    text = text.replace('"', "&quot;")
    return text.replace("\n", "&#10;").replace("\t", "&#9;").replace("\r", "&#13;")


def _split_tag(tag: str) -> tuple[str | None, str]:
    if tag.startswith("{"):
        uri, _, local = tag[1:].partition("}")
        return uri, local
    return None, tag


def _collect_namespaces(el: ET.Element, found: set[str]) -> None:
    uri, _ = _split_tag(el.tag)
    if uri:
        found.add(uri)
    for name in el.attrib:
        uri, _ = _split_tag(name)
        if uri:
            found.add(uri)
    for child in el:
        _collect_namespaces(child, found)


def _namespace_prefixes(root: ET.Element, default_ns: str | None) -> dict[str, str]:
    found: set[str] = set()
    _collect_namespaces(root, found)
    prefixes: dict[str, str] = {}
    if default_ns:
        prefixes[default_ns] = ""
        found.discard(default_ns)
    counter = 1
    for uri in sorted(found):
        if uri == "http://www.w3.org/XML/1998/namespace":
            prefixes[uri] = "xml"  # implicitly bound, never declared
            continue
        known = _WELL_KNOWN_PREFIXES.get(uri)
        if known and known not in prefixes.values():
            prefixes[uri] = known
        else:
            prefixes[uri] = f"ns{counter}"
            counter += 1
    return prefixes


def _qname(tag: str, prefixes: dict[str, str]) -> str:
    uri, local = _split_tag(tag)
    if uri is None:
        return local
    prefix = prefixes[uri]
    return f"{prefix}:{local}" if prefix else local


def _attr_items(el: ET.Element, prefixes: dict[str, str], extra: dict[str, str] | None = None):
    items = {_qname(name, prefixes): value for name, value in el.attrib.items()}
    if extra:
        items.update(extra)
    return sorted(items.items())


def _has_inline_content(el: ET.Element) -> bool:
    if el.text:
        return True
    return any(child.tail for child in el)


def _write_inline(el: ET.Element, prefixes: dict[str, str], out: list[str]) -> None:
    tag = _qname(el.tag, prefixes)
    attrs = "".join(f' {name}="{_escape_attr(value)}"' for name, value in _attr_items(el, prefixes))
    children = list(el)
    if not children and not el.text:
        out.append(f"<{tag}{attrs}/>")
    else:
        out.append(f"<{tag}{attrs}>")
        if el.text:
            out.append(_escape_text(el.text))
        for child in children:
            _write_inline(child, prefixes, out)
            if child.tail:
                out.append(_escape_text(child.tail))
        out.append(f"</{tag}>")


def _write_element(
    el: ET.Element,
    prefixes: dict[str, str],
    depth: int,
    out: list[str],
    ns_decls: dict[str, str] | None = None,
) -> None:
    pad = "  " * depth
    tag = _qname(el.tag, prefixes)
    attrs = "".join(
        f' {name}="{_escape_attr(value)}"' for name, value in _attr_items(el, prefixes, ns_decls)
    )
    children = list(el)
    if not children and not el.text:
        out.append(f"{pad}<{tag}{attrs}/>\n")
        return
    if _has_inline_content(el):
        chunk: list[str] = []
        if el.text:
            chunk.append(_escape_text(el.text))
        for child in children:
            _write_inline(child, prefixes, chunk)
            if child.tail:
                chunk.append(_escape_text(child.tail))
        out.append(f"{pad}<{tag}{attrs}>{''.join(chunk)}</{tag}>\n")
        return
    if not children:
        out.append(f"{pad}<{tag}{attrs}>{_escape_text(el.text or '')}</{tag}>\n")
        return
    out.append(f"{pad}<{tag}{attrs}>\n")
    for child in children:
        _write_element(child, prefixes, depth + 1, out)
    out.append(f"{pad}</{tag}>\n")


def serialize_tree(root: ET.Element, *, default_ns: str | None = None) -> bytes:
    """Render an element tree in canonical form (deterministic bytes)."""
    prefixes = _namespace_prefixes(root, default_ns)
    ns_decls: dict[str, str] = {}
    for uri, prefix in prefixes.items():
        if uri == "http://www.w3.org/XML/1998/namespace":
            continue
        ns_decls["xmlns" if not prefix else f"xmlns:{prefix}"] = uri
    out: list[str] = []
    _write_element(root, prefixes, 0, out, ns_decls or None)
    return XML_DECLARATION + "".join(out).encode("utf-8")


def parse_tree(data: bytes) -> ET.Element:
    """Strict well-formedness parse; raises :class:`RecordParseError` with
    line/column on failure."""
    try:
        return ET.fromstring(data)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise RecordParseError(str(exc.msg if hasattr(exc, "msg") else exc), line, column) from exc


# ---------------------------------------------------------------------------
# scalar formatting
# ---------------------------------------------------------------------------

def format_float(value: float) -> str:
    return repr(float(value))


def parse_float(text: str) -> float:
    return float(text)


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return datetime.fromisoformat(text)


# ---------------------------------------------------------------------------
# attribute trees
# ---------------------------------------------------------------------------

def _node_map(nodes: tuple[AttributeNode, ...]) -> dict[str, AttributeNode]:
    return {n.name: n for n in nodes}


def _leaf_text(value: Any) -> str:
    from .model import format_value

    return format_value(value)


def _append_value(parent: ET.Element, name: str, value: Any, node: AttributeNode | None) -> None:
    if isinstance(value, list):
        for item in value:
            _append_value(parent, name, item, node)
        return
    el = ET.SubElement(parent, name)
    if isinstance(value, dict):
        children = node.children if node is not None else ()
        _fill_values(el, value, children)
    else:
        text = _leaf_text(value)
        if text:
            el.text = text


def _fill_values(parent: ET.Element, values: Mapping[str, Any], nodes: tuple[AttributeNode, ...]) -> None:
    node_map = _node_map(nodes)
    for node in nodes:
        if node.name in values:
            _append_value(parent, node.name, values[node.name], node)
    for name in sorted(set(values) - set(node_map)):
        _append_value(parent, name, values[name], None)


def attributes_element(tree: AttributeValueTree, nodes: tuple[AttributeNode, ...]) -> ET.Element:
    el = ET.Element("attributes")
    _fill_values(el, tree.values, nodes)
    if tree.legacy:
        legacy = ET.SubElement(el, "legacy")
        for entry in tree.legacy:
            value_el = ET.SubElement(legacy, "value", {"path": entry.path})
            if entry.value:
                value_el.text = entry.value
    return el


def _parse_leaf(text: str, node: AttributeNode | None) -> Any:
    from .model import parse_value

    if node is None or node.value_type in (ValueType.TEXT, ValueType.ENUM):
        return text
    try:
        return parse_value(text, node.value_type)
    except ValueError:
        return text  # kept raw; validation reports the type mismatch


def _parse_value_element(el: ET.Element, node: AttributeNode | None) -> Any:
    children = list(el)
    if children or (node is not None and node.value_type == ValueType.GROUP):
        nodes = node.children if node is not None else ()
        return _parse_values(el, nodes)
    return _parse_leaf(el.text or "", node)


def _parse_values(parent: ET.Element, nodes: tuple[AttributeNode, ...]) -> dict[str, Any]:
    node_map = _node_map(nodes)
    grouped: dict[str, list[Any]] = {}
    order: list[str] = []
    for el in parent:
        name = el.tag
        if name not in grouped:
            grouped[name] = []
            order.append(name)
        grouped[name].append(_parse_value_element(el, node_map.get(name)))
    values: dict[str, Any] = {}
    for name in order:
        node = node_map.get(name)
        items = grouped[name]
        if (node is not None and node.repeatable) or len(items) > 1:
            values[name] = items
        else:
            values[name] = items[0]
    return values


def parse_attributes(el: ET.Element | None, nodes: tuple[AttributeNode, ...]) -> AttributeValueTree:
    if el is None:
        return AttributeValueTree()
    legacy: list[LegacyEntry] = []
    scratch = ET.Element("attributes")
    for child in el:
        if child.tag == "legacy":
            for value_el in child:
                legacy.append(LegacyEntry(value_el.get("path", ""), value_el.text or ""))
        else:
            scratch.append(child)
    values = _parse_values(scratch, nodes)
    return AttributeValueTree(values=values, legacy=tuple(legacy))


# ---------------------------------------------------------------------------
# record documents
# ---------------------------------------------------------------------------

def record_element(record: DocumentRecord, schema: MetadataSchema) -> ET.Element:
    attrs = {
        "id": record.id,
        "kind": record.kind.tag,
        "schemaVersion": str(record.schema_version),
    }
    if record.kind.plan_subkind is not None:
        attrs["subkind"] = record.kind.plan_subkind
    root = ET.Element("record", attrs)
    for tag, value in (("title", record.title), ("author", record.author), ("provenance", record.provenance)):
        el = ET.SubElement(root, tag)
        if value:
            el.text = value
    if record.capture_date is not None:
        ET.SubElement(root, "capture-date").text = record.capture_date.isoformat()
    subject = ET.SubElement(root, "subject")
    for keyword in record.subject_keywords:
        ET.SubElement(subject, "keyword").text = keyword
    places = ET.SubElement(root, "places")
    for ref in record.place_refs:
        ET.SubElement(places, "ref", {"id": ref})
    periods = ET.SubElement(root, "periods")
    for ref in record.period_refs:
        ET.SubElement(periods, "ref", {"id": ref})
    if record.coordinates is not None:
        x, y, z = record.coordinates
        ET.SubElement(
            root,
            "coordinates",
            {"x": format_float(x), "y": format_float(y), "z": format_float(z)},
        )
    ET.SubElement(
        root,
        "content",
        {
            "checksum": record.content.checksum,
            "format": record.content.media_format,
            "href": record.content.href,
            "size": str(record.content.byte_size),
        },
    )
    root.append(attributes_element(record.attributes, schema.nodes_for(record.kind.tag)))
    audit = ET.SubElement(root, "audit")
    ET.SubElement(audit, "created").text = format_timestamp(record.created_at)
    ET.SubElement(audit, "updated").text = format_timestamp(record.updated_at)
    if record.archived:
        ET.SubElement(audit, "archived").text = "true"
    return root


def serialize_record(record: DocumentRecord, schema: MetadataSchema) -> bytes:
    if schema.version != record.schema_version:
        raise ValueError("schema version does not match record")
    return serialize_tree(record_element(record, schema))


def _child(root: ET.Element, tag: str) -> ET.Element | None:
    for el in root:
        if el.tag == tag:
            return el
    return None


def _require(root: ET.Element, tag: str) -> ET.Element:
    el = _child(root, tag)
    if el is None:
        raise RecordParseError(f"missing <{tag}> element")
    return el


def _refs(root: ET.Element, tag: str) -> tuple[str, ...]:
    container = _child(root, tag)
    if container is None:
        return ()
    return tuple(el.get("id", "") for el in container if el.tag == "ref")


def parse_record(data: bytes, schema_for: Callable[[int], MetadataSchema]) -> DocumentRecord:
    """Parse a canonical record document.

    ``schema_for`` resolves a schema version to its schema and raises
    :class:`SchemaVersionUnknown` for versions the store has never seen.
    """
    root = parse_tree(data)
    if root.tag != "record":
        raise RecordParseError(f"expected <record> root, got <{root.tag}>")
    record_id = root.get("id")
    kind_tag = root.get("kind")
    version_text = root.get("schemaVersion")
    if not record_id or not kind_tag or not version_text:
        raise RecordParseError("record element needs id, kind and schemaVersion attributes")
    try:
        version = int(version_text)
    except ValueError:
        raise RecordParseError(f"schemaVersion {version_text!r} is not an integer") from None
    schema = schema_for(version)
    kind = DocumentKind(kind_tag, root.get("subkind"))

    capture_el = _child(root, "capture-date")
    capture = date.fromisoformat(capture_el.text or "") if capture_el is not None else None
    subject_el = _child(root, "subject")
    keywords = tuple(el.text or "" for el in subject_el) if subject_el is not None else ()
    coords_el = _child(root, "coordinates")
    coordinates = None
    if coords_el is not None:
        coordinates = (
            parse_float(coords_el.get("x", "0")),
            parse_float(coords_el.get("y", "0")),
            parse_float(coords_el.get("z", "0")),
        )
    content_el = _require(root, "content")
    content = ContentRef(
        href=content_el.get("href", ""),
        media_format=content_el.get("format", ""),
        checksum=content_el.get("checksum", ""),
        byte_size=int(content_el.get("size", "0")),
    )
    audit = _require(root, "audit")
    created = parse_timestamp(_require(audit, "created").text or "")
    updated = parse_timestamp(_require(audit, "updated").text or "")
    archived_el = _child(audit, "archived")
    archived = archived_el is not None and (archived_el.text or "") == "true"

    attributes = parse_attributes(_child(root, "attributes"), schema.nodes_for(kind_tag))
    title_el = _require(root, "title")
    return DocumentRecord(
        id=record_id,
        kind=kind,
        title=title_el.text or "",
        author=(_child(root, "author").text or "") if _child(root, "author") is not None else "",
        provenance=(_child(root, "provenance").text or "") if _child(root, "provenance") is not None else "",
        subject_keywords=keywords,
        place_refs=_refs(root, "places"),
        period_refs=_refs(root, "periods"),
        content=content,
        attributes=attributes,
        schema_version=version,
        created_at=created,
        updated_at=updated,
        capture_date=capture,
        coordinates=coordinates,
        archived=archived,
    )


# ---------------------------------------------------------------------------
# schema documents
# ---------------------------------------------------------------------------

def _node_element(node: AttributeNode) -> ET.Element:
    attrs = {
        "name": node.name,
        "repeatable": "true" if node.repeatable else "false",
        "required": "true" if node.required else "false",
        "type": node.value_type.value,
    }
    if node.facet is not None:
        attrs["facet"] = node.facet
    el = ET.Element("node", attrs)
    for child in node.children:
        el.append(_node_element(child))
    return el


def schema_element(schema: MetadataSchema) -> ET.Element:
    root = ET.Element("schema", {"version": str(schema.version)})
    for kind_tag in sorted(schema.per_kind):
        kind_el = ET.SubElement(root, "kind", {"tag": kind_tag})
        for node in schema.per_kind[kind_tag]:
            kind_el.append(_node_element(node))
    return root


def serialize_schema(schema: MetadataSchema) -> bytes:
    return serialize_tree(schema_element(schema))


def _parse_node(el: ET.Element) -> AttributeNode:
    return AttributeNode(
        name=el.get("name", ""),
        value_type=ValueType(el.get("type", "text")),
        required=el.get("required") == "true",
        repeatable=el.get("repeatable") == "true",
        facet=el.get("facet"),
        children=tuple(_parse_node(child) for child in el if child.tag == "node"),
    )


def schema_from_element(root: ET.Element) -> MetadataSchema:
    per_kind = {
        kind_el.get("tag", ""): tuple(_parse_node(n) for n in kind_el if n.tag == "node")
        for kind_el in root
        if kind_el.tag == "kind"
    }
    return MetadataSchema(version=int(root.get("version", "0")), per_kind=per_kind)


def parse_schema(data: bytes) -> MetadataSchema:
    root = parse_tree(data)
    if root.tag != "schema":
        raise RecordParseError(f"expected <schema> root, got <{root.tag}>")
    return schema_from_element(root)


# ---------------------------------------------------------------------------
# reference entities
# ---------------------------------------------------------------------------

def vocabularies_element(vocabularies: list[Vocabulary]) -> ET.Element:
    root = ET.Element("vocabularies")
    for vocab in vocabularies:
        facet_el = ET.SubElement(root, "facet", {"name": vocab.facet_name})
        for term in vocab.terms:
            ET.SubElement(facet_el, "term").text = term
    return root


def serialize_vocabularies(vocabularies: list[Vocabulary]) -> bytes:
    return serialize_tree(vocabularies_element(vocabularies))


def vocabularies_from_element(root: ET.Element) -> list[Vocabulary]:
    return [
        Vocabulary(el.get("name", ""), tuple(t.text or "" for t in el if t.tag == "term"))
        for el in root
        if el.tag == "facet"
    ]


def parse_vocabularies(data: bytes) -> list[Vocabulary]:
    return vocabularies_from_element(parse_tree(data))


def periods_element(periods: list[Period]) -> ET.Element:
    root = ET.Element("periods")
    for period in periods:
        el = ET.SubElement(
            root,
            "period",
            {"end": str(period.end_year), "id": period.id, "start": str(period.start_year)},
        )
        ET.SubElement(el, "label").text = period.label
        if period.description:
            ET.SubElement(el, "description").text = period.description
    return root


def serialize_periods(periods: list[Period]) -> bytes:
    return serialize_tree(periods_element(periods))


def periods_from_element(root: ET.Element) -> list[Period]:
    out = []
    for el in root:
        if el.tag != "period":
            continue
        label = _child(el, "label")
        description = _child(el, "description")
        out.append(
            Period(
                id=el.get("id", ""),
                label=(label.text or "") if label is not None else "",
                start_year=int(el.get("start", "0")),
                end_year=int(el.get("end", "0")),
                description=(description.text or "") if description is not None else "",
            )
        )
    return out


def parse_periods(data: bytes) -> list[Period]:
    return periods_from_element(parse_tree(data))


def places_element(places: list[Place]) -> ET.Element:
    root = ET.Element("places")
    for place in places:
        attrs = {"id": place.id}
        if place.parent_id is not None:
            attrs["parent"] = place.parent_id
        el = ET.SubElement(root, "place", attrs)
        ET.SubElement(el, "name").text = place.name
        if place.description:
            ET.SubElement(el, "description").text = place.description
        if place.footprint is not None:
            fp = ET.SubElement(el, "footprint")
            for x, y in place.footprint:
                ET.SubElement(fp, "vertex", {"x": format_float(x), "y": format_float(y)})
    return root


def serialize_places(places: list[Place]) -> bytes:
    return serialize_tree(places_element(places))


def places_from_element(root: ET.Element) -> list[Place]:
    out = []
    for el in root:
        if el.tag != "place":
            continue
        name = _child(el, "name")
        description = _child(el, "description")
        fp_el = _child(el, "footprint")
        footprint = None
        if fp_el is not None:
            footprint = tuple(
                (parse_float(v.get("x", "0")), parse_float(v.get("y", "0")))
                for v in fp_el
                if v.tag == "vertex"
            )
        out.append(
            Place(
                id=el.get("id", ""),
                name=(name.text or "") if name is not None else "",
                parent_id=el.get("parent"),
                description=(description.text or "") if description is not None else "",
                footprint=footprint,
            )
        )
    return out


def parse_places(data: bytes) -> list[Place]:
    return places_from_element(parse_tree(data))
