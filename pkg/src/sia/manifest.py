"""Bulk ingestion from a manifest document.

A manifest bundles reference entities (vocabularies, periods, places, an
optional schema for a virgin store) with a list of document entries whose
``src`` attributes point at asset files relative to the manifest itself.
Ingestion copies each asset into the store and commits the record; a
failing entry is rolled back (its copied asset removed) and reported with
its position so long imports are debuggable.
"""

from __future__ import annotations

import mimetypes
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from .errors import InvalidRequest, RecordParseError, SiaError, ValidationFailed
from .model import (
    DocumentKind,
    MetadataSchema,
    Period,
    Place,
    RecordDraft,
    Vocabulary,
    validate_schema,
)
from .store import Store
from .xmlio import (
    parse_attributes,
    parse_float,
    parse_tree,
    periods_from_element,
    places_from_element,
    schema_from_element,
    vocabularies_from_element,
)

_FORMAT_BY_SUFFIX = {
    ".x3d": "model/x3d+xml",
    ".svg": "image/svg+xml",
    ".png": "image/png",
    ".jpg": "image/jpeg",
    ".jpeg": "image/jpeg",
    ".txt": "text/plain",
    ".xml": "application/xml",
}


@dataclass(frozen=True)
class ManifestEntry:
    kind: DocumentKind
    title: str
    author: str
    provenance: str
    keywords: tuple[str, ...]
    place_refs: tuple[str, ...]
    period_refs: tuple[str, ...]
    capture_date: date | None
    coordinates: tuple[float, float, float] | None
    source: Path
    media_format: str
    attributes_el: ET.Element | None

    def __hash__(self):  # pragma: no cover - carries a mutable element
        raise TypeError("ManifestEntry is not hashable")


@dataclass(frozen=True)
class Manifest:
    schema: MetadataSchema | None
    vocabularies: tuple[Vocabulary, ...]
    periods: tuple[Period, ...]
    places: tuple[Place, ...]
    entries: tuple[ManifestEntry, ...]

    def __hash__(self):  # pragma: no cover
        raise TypeError("Manifest is not hashable")


def _media_format(source: Path, explicit: str | None) -> str:
    if explicit:
        return explicit
    by_suffix = _FORMAT_BY_SUFFIX.get(source.suffix.lower())
    if by_suffix:
        return by_suffix
    return mimetypes.guess_type(source.name)[0] or "application/octet-stream"


def _parse_entry(el: ET.Element, base: Path, position: int) -> ManifestEntry:
    src = el.get("src")
    if not src:
        raise RecordParseError(f"entry {position}: missing src attribute")
    kind_tag = el.get("kind")
    if not kind_tag:
        raise RecordParseError(f"entry {position}: missing kind attribute")
    source = (base / src).resolve()

    def _text(tag: str) -> str:
        child = el.find(tag)
        return (child.text or "") if child is not None else ""

    def _refs(tag: str) -> tuple[str, ...]:
        container = el.find(tag)
        if container is None:
            return ()
        return tuple(ref.get("id", "") for ref in container if ref.tag == "ref")

    capture_text = el.get("capture-date")
    try:
        capture = date.fromisoformat(capture_text) if capture_text else None
    except ValueError:
        raise RecordParseError(f"entry {position}: bad capture-date {capture_text!r}") from None
    coords_el = el.find("coordinates")
    coordinates = None
    if coords_el is not None:
        coordinates = (
            parse_float(coords_el.get("x", "0")),
            parse_float(coords_el.get("y", "0")),
            parse_float(coords_el.get("z", "0")),
        )
    subject_el = el.find("subject")
    keywords = (
        tuple(k.text or "" for k in subject_el if k.tag == "keyword")
        if subject_el is not None
        else ()
    )
    return ManifestEntry(
        kind=DocumentKind(kind_tag, el.get("subkind")),
        title=el.get("title", ""),
        author=el.get("author", ""),
        provenance=_text("provenance"),
        keywords=keywords,
        place_refs=_refs("places"),
        period_refs=_refs("periods"),
        capture_date=capture,
        coordinates=coordinates,
        source=source,
        media_format=_media_format(source, el.get("format")),
        attributes_el=el.find("attributes"),
    )


def parse_manifest(path: str | Path) -> Manifest:
    path = Path(path)
    root = parse_tree(path.read_bytes())
    if root.tag != "manifest":
        raise RecordParseError(f"expected <manifest> root, got <{root.tag}>")
    base = path.parent
    schema_el = root.find("schema")
    vocab_el = root.find("vocabularies")
    periods_el = root.find("periods")
    places_el = root.find("places")
    entries_el = root.find("entries")
    entries = (
        tuple(
            _parse_entry(el, base, i)
            for i, el in enumerate(entries_el)
            if el.tag == "entry"
        )
        if entries_el is not None
        else ()
    )
    return Manifest(
        schema=schema_from_element(schema_el) if schema_el is not None else None,
        vocabularies=tuple(vocabularies_from_element(vocab_el)) if vocab_el is not None else (),
        periods=tuple(periods_from_element(periods_el)) if periods_el is not None else (),
        places=tuple(places_from_element(places_el)) if places_el is not None else (),
        entries=entries,
    )


def ingest_manifest(store: Store, manifest: Manifest, actor: str) -> list:
    """Install reference entities, then ingest every entry. Returns the
    committed records in manifest order."""
    for vocab in manifest.vocabularies:
        store.set_vocabulary(vocab, actor)
    if manifest.schema is not None:
        _install_schema(store, manifest.schema)
    for period in manifest.periods:
        store.upsert_period(period, actor)
    for place in manifest.places:
        store.upsert_place(place, actor)

    schema = store.active_schema()
    records = []
    for position, entry in enumerate(manifest.entries):
        try:
            data = entry.source.read_bytes()
        except OSError as exc:
            raise InvalidRequest(f"entry {position}: cannot read asset {entry.source}: {exc}") from exc
        content, created = store.add_media(data, entry.source.name, entry.media_format, actor)
        draft = RecordDraft(
            kind=entry.kind,
            title=entry.title,
            author=entry.author,
            provenance=entry.provenance,
            subject_keywords=entry.keywords,
            place_refs=entry.place_refs,
            period_refs=entry.period_refs,
            content=content,
            attributes=parse_attributes(entry.attributes_el, schema.nodes_for(entry.kind.tag)),
            capture_date=entry.capture_date,
            coordinates=entry.coordinates,
        )
        try:
            records.append(store.ingest(draft, actor))
        except SiaError as exc:
            if created:
                store.discard_media(content.href, actor)
            exc.message = f"entry {position} ({entry.title!r}): {exc.message}"
            raise
    return records


def _install_schema(store: Store, schema: MetadataSchema) -> None:
    """A manifest may define the starting schema, but only before any
    record exists; later evolution must go through migration plans."""
    if store.record_ids():
        raise InvalidRequest("a manifest schema can only be installed into an empty store")
    active = store.active_schema()
    if schema.version != active.version:
        raise InvalidRequest(
            f"manifest schema version {schema.version} does not match store version {active.version}"
        )
    violations = validate_schema(schema, store.vocabularies())
    if violations:
        raise ValidationFailed(violations)
    store.save_schema(schema)
