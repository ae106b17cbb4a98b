"""Domain entities of the intra-site archive and their validation rules.

Everything here is an immutable value: records, the temporal/spatial
reference entities they link to, controlled vocabularies, and the versioned
attribute schema. Validation collects violations exhaustively instead of
failing fast, so a data-entry form can show every problem at once.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field, replace
from datetime import date, datetime
from decimal import Decimal, InvalidOperation
from enum import Enum
from typing import Any, Iterable, Mapping

from .errors import InvalidInterval, UnknownPlace

KIND_TAGS = ("photo", "drawing", "text", "rasterPlan", "vectorPlan", "model3d")

PLAN_SUBKINDS = (
    "axonometry",
    "map",
    "section",
    "plan",
    "elevation",
    "excavationProfile",
    "excavationPlan",
)

# Kinds whose content is a 2D image; these get thumbnails, HTML view images
# and are accepted by the photo-montage composer.
IMAGE_KINDS = frozenset({"photo", "drawing", "rasterPlan", "vectorPlan"})

SUBJECT_FACET = "subject"
AUTHOR_FACET = "author"

_SLUG_RE = re.compile(r"^[a-z0-9][a-z0-9-]*$")
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_-]*$")
_INT_RE = re.compile(r"^-?[0-9]+$")
_DECIMAL_RE = re.compile(r"^-?[0-9]+(\.[0-9]+)?$")
_HEX_RE = re.compile(r"^[0-9a-f]+$")


def slugify(text: str, fallback: str = "item") -> str:
    """Collapse arbitrary text into a lowercase URL-safe slug."""
    folded = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    parts = re.findall(r"[a-z0-9]+", folded.lower())
    slug = "-".join(parts)[:60].strip("-")
    return slug or fallback


def is_slug(value: str) -> bool:
    return bool(_SLUG_RE.match(value))


@dataclass(frozen=True)
class Violation:
    """One broken rule, addressed by the offending field path."""

    path: str
    rule: str
    message: str


@dataclass(frozen=True)
class Period:
    """A named historical phase of the site (years use astronomical
    numbering: negative means BCE)."""

    id: str
    label: str
    start_year: int
    end_year: int
    description: str = ""


@dataclass(frozen=True)
class Place:
    """A named spatial subdivision of the site; optionally part of a
    parent place, optionally outlined by a site-local footprint polygon."""

    id: str
    name: str
    parent_id: str | None = None
    description: str = ""
    footprint: tuple[tuple[float, float], ...] | None = None


@dataclass(frozen=True)
class DocumentKind:
    tag: str
    plan_subkind: str | None = None


@dataclass(frozen=True)
class ContentRef:
    """Pointer to the binary asset a record documents."""

    href: str
    media_format: str
    checksum: str
    byte_size: int


@dataclass(frozen=True)
class Vocabulary:
    """Closed keyword list for one facet; users pick terms, they never
    type them."""

    facet_name: str
    terms: tuple[str, ...]


class ValueType(str, Enum):
    TEXT = "text"
    INTEGER = "integer"
    DECIMAL = "decimal"
    DATE = "date"
    ENUM = "enum"
    GROUP = "group"


@dataclass(frozen=True)
class AttributeNode:
    """One node of the per-kind metadata tree."""

    name: str
    value_type: ValueType
    required: bool = False
    repeatable: bool = False
    facet: str | None = None  # enum nodes only
    children: tuple["AttributeNode", ...] = ()


@dataclass(frozen=True)
class MetadataSchema:
    """Versioned attribute tree; ``per_kind`` maps a kind tag to its
    top-level nodes. Kinds missing from the map carry no attributes."""

    version: int
    per_kind: Mapping[str, tuple[AttributeNode, ...]] = field(default_factory=dict)

    def nodes_for(self, kind_tag: str) -> tuple[AttributeNode, ...]:
        return tuple(self.per_kind.get(kind_tag, ()))


@dataclass(frozen=True)
class LegacyEntry:
    """A (path, value) pair preserved verbatim from a retired schema node."""

    path: str
    value: str


@dataclass(frozen=True)
class AttributeValueTree:
    """Attribute values mirroring the schema tree.

    ``values`` keys are node names; leaf values are typed scalars (or raw
    strings when a file holds something the declared type cannot parse),
    repeatable nodes hold lists, groups hold nested dicts.
    """

    values: Mapping[str, Any] = field(default_factory=dict)
    legacy: tuple[LegacyEntry, ...] = ()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AttributeValueTree):
            return NotImplemented
        return dict(self.values) == dict(other.values) and self.legacy == other.legacy

    def __hash__(self):  # pragma: no cover - dict field, identity hashing unsupported
        raise TypeError("AttributeValueTree is not hashable")


EMPTY_ATTRIBUTES = AttributeValueTree()


@dataclass(frozen=True)
class DocumentRecord:
    """One archaeological document plus its metadata — the system's atom."""

    id: str
    kind: DocumentKind
    title: str
    author: str
    provenance: str
    subject_keywords: tuple[str, ...]
    place_refs: tuple[str, ...]
    period_refs: tuple[str, ...]
    content: ContentRef
    attributes: AttributeValueTree
    schema_version: int
    created_at: datetime
    updated_at: datetime
    capture_date: date | None = None
    coordinates: tuple[float, float, float] | None = None
    archived: bool = False

    def __hash__(self):  # pragma: no cover
        raise TypeError("DocumentRecord is not hashable")


@dataclass(frozen=True)
class RecordDraft:
    """A record as entered on a form: everything except the identity and
    audit fields the store assigns."""

    kind: DocumentKind
    title: str
    author: str = ""
    provenance: str = ""
    subject_keywords: tuple[str, ...] = ()
    place_refs: tuple[str, ...] = ()
    period_refs: tuple[str, ...] = ()
    content: ContentRef = ContentRef("", "", "", 0)
    attributes: AttributeValueTree = EMPTY_ATTRIBUTES
    capture_date: date | None = None
    coordinates: tuple[float, float, float] | None = None

    def __hash__(self):  # pragma: no cover
        raise TypeError("RecordDraft is not hashable")


def draft_from_record(record: DocumentRecord) -> RecordDraft:
    return RecordDraft(
        kind=record.kind,
        title=record.title,
        author=record.author,
        provenance=record.provenance,
        subject_keywords=record.subject_keywords,
        place_refs=record.place_refs,
        period_refs=record.period_refs,
        content=record.content,
        attributes=record.attributes,
        capture_date=record.capture_date,
        coordinates=record.coordinates,
    )


def record_from_draft(
    draft: RecordDraft,
    *,
    record_id: str,
    schema_version: int,
    created_at: datetime,
    updated_at: datetime,
    archived: bool = False,
) -> DocumentRecord:
    return DocumentRecord(
        id=record_id,
        kind=draft.kind,
        title=draft.title,
        author=draft.author,
        provenance=draft.provenance,
        subject_keywords=tuple(draft.subject_keywords),
        place_refs=tuple(draft.place_refs),
        period_refs=tuple(draft.period_refs),
        content=draft.content,
        attributes=draft.attributes,
        schema_version=schema_version,
        created_at=created_at,
        updated_at=updated_at,
        capture_date=draft.capture_date,
        coordinates=draft.coordinates,
        archived=archived,
    )


# ---------------------------------------------------------------------------
# value formatting / parsing (canonical text forms)
# ---------------------------------------------------------------------------

def format_value(value: Any) -> str:
    """Canonical text form of a leaf value; inverse of :func:`parse_value`
    on canonical input."""
    if isinstance(value, bool):  # bools are not a leaf type; guard anyway
        return "true" if value else "false"
    if isinstance(value, (int, Decimal)):
        return str(value)
    if isinstance(value, date):
        return value.isoformat()
    return str(value)


def parse_value(text: str, value_type: ValueType) -> Any:
    """Parse canonical text into a typed value; raises ValueError when the
    text does not belong to the type's canonical language."""
    if value_type in (ValueType.TEXT, ValueType.ENUM):
        return text
    if value_type == ValueType.INTEGER:
        if not _INT_RE.match(text):
            raise ValueError(f"not an integer: {text!r}")
        return int(text)
    if value_type == ValueType.DECIMAL:
        if not _DECIMAL_RE.match(text):
            raise ValueError(f"not a decimal: {text!r}")
        try:
            return Decimal(text)
        except InvalidOperation as exc:  # pragma: no cover - regex guards
            raise ValueError(str(exc)) from exc
    if value_type == ValueType.DATE:
        return date.fromisoformat(text)
    raise ValueError(f"group nodes carry no scalar value")


def convert_value(value: Any, target: ValueType) -> Any:
    """Losslessly convert a leaf value to another type via its canonical
    text form. Raises ValueError when the conversion would change the
    canonical text (e.g. text \"007\" to integer 7)."""
    text = format_value(value)
    converted = parse_value(text, target)
    if format_value(converted) != text:
        raise ValueError(f"conversion of {text!r} to {target.value} is not lossless")
    return converted


# ---------------------------------------------------------------------------
# entity validation
# ---------------------------------------------------------------------------

def validate_period(period: Period) -> list[Violation]:
    out: list[Violation] = []
    if not is_slug(period.id):
        out.append(Violation("id", "slug", f"period id {period.id!r} is not a lowercase slug"))
    if not period.label.strip():
        out.append(Violation("label", "non-empty", "period label must be non-empty"))
    if period.start_year > period.end_year:
        out.append(
            Violation(
                "startYear",
                "interval",
                f"startYear {period.start_year} exceeds endYear {period.end_year}",
            )
        )
    return out


def validate_place(place: Place, others: Iterable[Place]) -> list[Violation]:
    """Validate one place against the rest of the forest."""
    out: list[Violation] = []
    if not is_slug(place.id):
        out.append(Violation("id", "slug", f"place id {place.id!r} is not a lowercase slug"))
    if not place.name.strip():
        out.append(Violation("name", "non-empty", "place name must be non-empty"))
    by_id = {p.id: p for p in others}
    by_id[place.id] = place
    if place.parent_id is not None:
        if place.parent_id not in by_id:
            out.append(Violation("parentId", "unknown-place", f"parent {place.parent_id!r} does not exist"))
        else:
            seen = {place.id}
            cursor = place.parent_id
            while cursor is not None:
                if cursor in seen:
                    out.append(Violation("parentId", "cycle", f"parent chain of {place.id!r} forms a cycle"))
                    break
                seen.add(cursor)
                parent = by_id.get(cursor)
                cursor = parent.parent_id if parent else None
    if place.footprint is not None:
        if len(place.footprint) < 3:
            out.append(Violation("footprint", "min-vertices", "footprint needs at least 3 vertices"))
        for i in range(1, len(place.footprint)):
            if place.footprint[i] == place.footprint[i - 1]:
                out.append(
                    Violation("footprint", "repeated-vertex", f"vertices {i - 1} and {i} are identical")
                )
    return out


def validate_vocabulary(vocab: Vocabulary) -> list[Violation]:
    out: list[Violation] = []
    if not vocab.facet_name.strip():
        out.append(Violation("facetName", "non-empty", "facet name must be non-empty"))
    seen: set[str] = set()
    for term in vocab.terms:
        if not term:
            out.append(Violation(f"terms", "non-empty", "vocabulary terms must be non-empty"))
        elif term in seen:
            out.append(Violation(f"terms", "duplicate-term", f"term {term!r} repeats in facet"))
        seen.add(term)
    return out


def validate_schema(schema: MetadataSchema, vocabularies: Iterable[Vocabulary]) -> list[Violation]:
    out: list[Violation] = []
    if schema.version < 1:
        out.append(Violation("version", "min-version", "schema version must be >= 1"))
    facets = {v.facet_name for v in vocabularies}
    for kind_tag in schema.per_kind:
        if kind_tag not in KIND_TAGS:
            out.append(Violation(kind_tag, "unknown-kind", f"unknown document kind {kind_tag!r}"))
        for node in schema.nodes_for(kind_tag):
            # a top-level node named "legacy" would collide with the
            # quarantine block in record files
            if node.name == "legacy":
                out.append(
                    Violation(f"{kind_tag}/legacy", "reserved-name", "top-level name 'legacy' is reserved")
                )
        _validate_nodes(schema.nodes_for(kind_tag), kind_tag, facets, out)
    return out


def _validate_nodes(nodes, path: str, facets: set[str], out: list[Violation]) -> None:
    seen: set[str] = set()
    for node in nodes:
        node_path = f"{path}/{node.name}"
        if not _NAME_RE.match(node.name):
            out.append(Violation(node_path, "bad-name", f"node name {node.name!r} is not a valid name"))
        if node.name in seen:
            out.append(Violation(node_path, "duplicate-sibling", f"sibling name {node.name!r} repeats"))
        seen.add(node.name)
        if node.value_type == ValueType.GROUP:
            if not node.children:
                out.append(Violation(node_path, "empty-group", "group node needs at least one child"))
            _validate_nodes(node.children, node_path, facets, out)
        else:
            if node.children:
                out.append(Violation(node_path, "leaf-children", "non-group node cannot have children"))
            if node.value_type == ValueType.ENUM:
                if not node.facet or node.facet not in facets:
                    out.append(
                        Violation(node_path, "unknown-facet", f"enum facet {node.facet!r} does not exist")
                    )
            elif node.facet:
                out.append(Violation(node_path, "stray-facet", "only enum nodes reference a facet"))


# ---------------------------------------------------------------------------
# record validation
# ---------------------------------------------------------------------------

def validate_record(
    record: DocumentRecord,
    schema: MetadataSchema,
    vocabularies: Iterable[Vocabulary],
    periods: Iterable[Period],
    places: Iterable[Place],
) -> list[Violation]:
    """Check every record-level invariant; returns an empty list iff the
    record is valid. Violations come out in a fixed traversal order, so
    identical inputs yield identical lists."""
    if schema.version != record.schema_version:
        raise ValueError(
            f"schema version {schema.version} does not match record version {record.schema_version}"
        )
    out: list[Violation] = []
    vocab_map = {v.facet_name: v for v in vocabularies}
    period_ids = {p.id for p in periods}
    place_ids = {p.id for p in places}

    _validate_kind(record.kind, out)
    if not record.title.strip():
        out.append(Violation("title", "non-empty", "title must be non-empty"))
    if not record.content.href:
        out.append(Violation("content.href", "non-empty", "content href must be non-empty"))
    if record.content.checksum and not _HEX_RE.match(record.content.checksum):
        out.append(Violation("content.checksum", "hex", "checksum must be a lowercase hex string"))
    if record.content.byte_size < 0:
        out.append(Violation("content.size", "non-negative", "content size cannot be negative"))
    subject = vocab_map.get(SUBJECT_FACET)
    subject_terms = set(subject.terms) if subject else set()
    for i, keyword in enumerate(record.subject_keywords):
        if keyword not in subject_terms:
            out.append(
                Violation(
                    f"subject[{i}]",
                    "unknown-term",
                    f"keyword {keyword!r} is not in the {SUBJECT_FACET!r} facet",
                )
            )
    for i, ref in enumerate(record.place_refs):
        if ref not in place_ids:
            out.append(Violation(f"places[{i}]", "unknown-place", f"place {ref!r} does not exist"))
    for i, ref in enumerate(record.period_refs):
        if ref not in period_ids:
            out.append(Violation(f"periods[{i}]", "unknown-period", f"period {ref!r} does not exist"))
    _validate_attributes(
        record.attributes.values,
        schema.nodes_for(record.kind.tag),
        record.kind.tag,
        vocab_map,
        out,
    )
    return out


def _validate_kind(kind: DocumentKind, out: list[Violation]) -> None:
    if kind.tag not in KIND_TAGS:
        out.append(Violation("kind", "unknown-kind", f"unknown document kind {kind.tag!r}"))
        return
    if kind.tag == "rasterPlan":
        if kind.plan_subkind is None:
            out.append(Violation("kind.planSubkind", "required", "rasterPlan records need a plan subkind"))
        elif kind.plan_subkind not in PLAN_SUBKINDS:
            out.append(
                Violation("kind.planSubkind", "unknown-subkind", f"unknown plan subkind {kind.plan_subkind!r}")
            )
    elif kind.plan_subkind is not None:
        out.append(
            Violation("kind.planSubkind", "subkind-forbidden", "only rasterPlan records carry a plan subkind")
        )


_EXPECTED_PY_TYPE = {
    ValueType.TEXT: str,
    ValueType.ENUM: str,
    ValueType.INTEGER: int,
    ValueType.DECIMAL: Decimal,
    ValueType.DATE: date,
}


def _validate_attributes(values, nodes, path, vocab_map, out: list[Violation]) -> None:
    values = dict(values)
    known = {n.name for n in nodes}
    for node in nodes:
        node_path = f"{path}/{node.name}"
        if node.name not in values:
            if node.required:
                out.append(Violation(node_path, "required", f"required attribute {node.name!r} missing"))
            continue
        value = values[node.name]
        items = value if isinstance(value, list) else [value]
        if isinstance(value, list) and not node.repeatable:
            out.append(Violation(node_path, "repeat", f"attribute {node.name!r} is not repeatable"))
        if node.required and not items:
            out.append(Violation(node_path, "required", f"required attribute {node.name!r} is empty"))
        for item in items:
            if node.value_type == ValueType.GROUP:
                if not isinstance(item, dict):
                    out.append(Violation(node_path, "type", f"group {node.name!r} needs nested values"))
                else:
                    _validate_attributes(item, node.children, node_path, vocab_map, out)
                continue
            expected = _EXPECTED_PY_TYPE[node.value_type]
            if isinstance(item, dict):
                out.append(Violation(node_path, "type", f"leaf {node.name!r} cannot hold nested values"))
            elif not isinstance(item, expected) or isinstance(item, bool):
                out.append(
                    Violation(
                        node_path,
                        "type",
                        f"value {format_value(item)!r} does not parse as {node.value_type.value}",
                    )
                )
            elif node.value_type == ValueType.ENUM:
                vocab = vocab_map.get(node.facet or "")
                if vocab is None or item not in vocab.terms:
                    out.append(
                        Violation(node_path, "enum", f"value {item!r} is not in facet {node.facet!r}")
                    )
    for name in sorted(set(values) - known):
        out.append(Violation(f"{path}/{name}", "unknown-node", f"no schema node named {name!r}"))


# ---------------------------------------------------------------------------
# reference-entity helpers used by queries and composers
# ---------------------------------------------------------------------------

def period_overlaps(period: Period, lo: int, hi: int) -> bool:
    """True iff the period's years intersect the closed interval [lo, hi]."""
    if lo > hi:
        raise InvalidInterval(f"invalid epoch interval: {lo} > {hi}")
    return max(period.start_year, lo) <= min(period.end_year, hi)


def place_descendants(place_id: str, places: Iterable[Place]) -> set[str]:
    """The place itself plus all transitive children (forest, so this
    terminates)."""
    place_list = list(places)
    if place_id not in {p.id for p in place_list}:
        raise UnknownPlace(f"place {place_id!r} does not exist")
    children: dict[str, list[str]] = {}
    for p in place_list:
        if p.parent_id is not None:
            children.setdefault(p.parent_id, []).append(p.id)
    out = {place_id}
    frontier = [place_id]
    while frontier:
        current = frontier.pop()
        for child in children.get(current, ()):
            if child not in out:
                out.add(child)
                frontier.append(child)
    return out


__all__ = [
    "KIND_TAGS",
    "PLAN_SUBKINDS",
    "IMAGE_KINDS",
    "SUBJECT_FACET",
    "AUTHOR_FACET",
    "AttributeNode",
    "AttributeValueTree",
    "ContentRef",
    "DocumentKind",
    "DocumentRecord",
    "EMPTY_ATTRIBUTES",
    "LegacyEntry",
    "MetadataSchema",
    "Period",
    "Place",
    "RecordDraft",
    "ValueType",
    "Violation",
    "Vocabulary",
    "convert_value",
    "draft_from_record",
    "format_value",
    "is_slug",
    "parse_value",
    "period_overlaps",
    "place_descendants",
    "record_from_draft",
    "slugify",
    "validate_period",
    "validate_place",
    "validate_record",
    "validate_schema",
    "validate_vocabulary",
]
