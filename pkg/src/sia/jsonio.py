"""JSON representations of the domain objects, used by the HTTP API and
the CLI's machine-readable output.

Attribute leaf values travel as canonical text strings (JSON has neither
dates nor exact decimals); incoming text that fails to parse under the
schema's declared type is kept raw so validation can point at it instead
of the transport rejecting the request wholesale.
"""

from __future__ import annotations

from datetime import date
from typing import Any, Mapping

from .errors import InvalidRequest
from .evolution import (
    AddNode,
    MigrationPlan,
    MigrationRule,
    RemoveNode,
    RenameNode,
    RetypeNode,
    SchemaChange,
    SchemaDelta,
)
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
    RecordDraft,
    ValueType,
    Violation,
    Vocabulary,
    format_value,
    parse_value,
)
from .query import RelatedItem, ResultItem, ResultPage
from .xmlio import format_timestamp


# ---------------------------------------------------------------------------
# attribute trees
# ---------------------------------------------------------------------------

def _value_to_json(value: Any) -> Any:
    if isinstance(value, list):
        return [_value_to_json(item) for item in value]
    if isinstance(value, dict):
        return {name: _value_to_json(item) for name, item in value.items()}
    return format_value(value)


def attributes_to_json(tree: AttributeValueTree) -> dict[str, Any]:
    return {name: _value_to_json(value) for name, value in tree.values.items()}


def legacy_to_json(tree: AttributeValueTree) -> list[dict[str, str]]:
    return [{"path": entry.path, "value": entry.value} for entry in tree.legacy]


def _leaf_from_json(value: Any, node: AttributeNode | None) -> Any:
    if isinstance(value, bool) or value is None:
        raise InvalidRequest(f"attribute values must be text, got {value!r}")
    text = value if isinstance(value, str) else format_value(value)
    if node is None or node.value_type in (ValueType.TEXT, ValueType.ENUM):
        return text
    try:
        return parse_value(text, node.value_type)
    except ValueError:
        return text  # kept raw; validation reports the mismatch


def _value_from_json(value: Any, node: AttributeNode | None) -> Any:
    if isinstance(value, list):
        return [_value_from_json(item, node) for item in value]
    if isinstance(value, dict):
        children = node.children if node is not None else ()
        return _values_from_json(value, children)
    return _leaf_from_json(value, node)


def _values_from_json(data: Mapping[str, Any], nodes: tuple[AttributeNode, ...]) -> dict[str, Any]:
    node_map = {n.name: n for n in nodes}
    return {name: _value_from_json(value, node_map.get(name)) for name, value in data.items()}


def attributes_from_json(
    data: Mapping[str, Any] | None,
    legacy: Any,
    nodes: tuple[AttributeNode, ...],
) -> AttributeValueTree:
    if data is None:
        data = {}
    if not isinstance(data, Mapping):
        raise InvalidRequest("attributes must be an object")
    entries: list[LegacyEntry] = []
    for item in legacy or []:
        if not isinstance(item, Mapping) or "path" not in item:
            raise InvalidRequest("legacy entries need path and value")
        entries.append(LegacyEntry(str(item["path"]), str(item.get("value", ""))))
    return AttributeValueTree(values=_values_from_json(data, nodes), legacy=tuple(entries))


# ---------------------------------------------------------------------------
# records
# ---------------------------------------------------------------------------

def content_to_json(content: ContentRef) -> dict[str, Any]:
    return {
        "href": content.href,
        "format": content.media_format,
        "checksum": content.checksum,
        "size": content.byte_size,
    }


def content_from_json(data: Any) -> ContentRef:
    if not isinstance(data, Mapping):
        raise InvalidRequest("content must be an object")
    return ContentRef(
        href=str(data.get("href", "")),
        media_format=str(data.get("format", "")),
        checksum=str(data.get("checksum", "")),
        byte_size=int(data.get("size", 0)),
    )


def record_to_json(record: DocumentRecord) -> dict[str, Any]:
    return {
        "id": record.id,
        "kind": record.kind.tag,
        "subkind": record.kind.plan_subkind,
        "title": record.title,
        "author": record.author,
        "provenance": record.provenance,
        "captureDate": record.capture_date.isoformat() if record.capture_date else None,
        "subject": list(record.subject_keywords),
        "places": list(record.place_refs),
        "periods": list(record.period_refs),
        "coordinates": list(record.coordinates) if record.coordinates else None,
        "content": content_to_json(record.content),
        "attributes": attributes_to_json(record.attributes),
        "legacy": legacy_to_json(record.attributes),
        "schemaVersion": record.schema_version,
        "createdAt": format_timestamp(record.created_at),
        "updatedAt": format_timestamp(record.updated_at),
        "archived": record.archived,
    }


def _date_from_json(value: Any) -> date | None:
    if value in (None, ""):
        return None
    try:
        return date.fromisoformat(str(value))
    except ValueError:
        raise InvalidRequest(f"captureDate {value!r} is not an ISO date") from None


def _coordinates_from_json(value: Any) -> tuple[float, float, float] | None:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise InvalidRequest("coordinates must be a list of three numbers")
    try:
        x, y, z = (float(v) for v in value)
    except (TypeError, ValueError):
        raise InvalidRequest("coordinates must be a list of three numbers") from None
    return (x, y, z)


def _strings_from_json(value: Any, key: str) -> tuple[str, ...]:
    if value is None:
        return ()
    if not isinstance(value, (list, tuple)) or any(not isinstance(v, str) for v in value):
        raise InvalidRequest(f"{key} must be a list of strings")
    return tuple(value)


def draft_from_json(data: Mapping[str, Any], schema: MetadataSchema) -> RecordDraft:
    if not isinstance(data, Mapping):
        raise InvalidRequest("record body must be an object")
    kind_tag = data.get("kind")
    if not isinstance(kind_tag, str) or not kind_tag:
        raise InvalidRequest("record body needs a kind")
    subkind = data.get("subkind")
    if subkind is not None and not isinstance(subkind, str):
        raise InvalidRequest("subkind must be a string")
    kind = DocumentKind(kind_tag, subkind)
    return RecordDraft(
        kind=kind,
        title=str(data.get("title", "")),
        author=str(data.get("author", "")),
        provenance=str(data.get("provenance", "")),
        subject_keywords=_strings_from_json(data.get("subject"), "subject"),
        place_refs=_strings_from_json(data.get("places"), "places"),
        period_refs=_strings_from_json(data.get("periods"), "periods"),
        content=content_from_json(data.get("content", {})),
        attributes=attributes_from_json(
            data.get("attributes"), data.get("legacy"), schema.nodes_for(kind_tag)
        ),
        capture_date=_date_from_json(data.get("captureDate")),
        coordinates=_coordinates_from_json(data.get("coordinates")),
    )


def patch_from_json(
    data: Mapping[str, Any], current: DocumentRecord, schema: MetadataSchema
) -> dict[str, Any]:
    """Translate a partial JSON body into draft-field assignments. The
    legacy block survives an attributes replacement unless the body
    provides its own."""
    if not isinstance(data, Mapping):
        raise InvalidRequest("patch body must be an object")
    patch: dict[str, Any] = {}
    if "kind" in data or "subkind" in data:
        kind_tag = data.get("kind", current.kind.tag)
        subkind = data.get("subkind", current.kind.plan_subkind)
        if not isinstance(kind_tag, str) or (subkind is not None and not isinstance(subkind, str)):
            raise InvalidRequest("kind and subkind must be strings")
        patch["kind"] = DocumentKind(kind_tag, subkind)
    for key, field_name in (("title", "title"), ("author", "author"), ("provenance", "provenance")):
        if key in data:
            patch[field_name] = str(data[key])
    if "subject" in data:
        patch["subject_keywords"] = _strings_from_json(data["subject"], "subject")
    if "places" in data:
        patch["place_refs"] = _strings_from_json(data["places"], "places")
    if "periods" in data:
        patch["period_refs"] = _strings_from_json(data["periods"], "periods")
    if "content" in data:
        patch["content"] = content_from_json(data["content"])
    if "captureDate" in data:
        patch["capture_date"] = _date_from_json(data["captureDate"])
    if "coordinates" in data:
        patch["coordinates"] = _coordinates_from_json(data["coordinates"])
    if "attributes" in data or "legacy" in data:
        kind = patch.get("kind", current.kind)
        attributes = data.get("attributes")
        legacy = data.get("legacy", legacy_to_json(current.attributes))
        if attributes is None and "attributes" not in data:
            attributes = attributes_to_json(current.attributes)
        patch["attributes"] = attributes_from_json(attributes, legacy, schema.nodes_for(kind.tag))
    unknown = set(data) - {
        "kind", "subkind", "title", "author", "provenance", "subject", "places",
        "periods", "content", "captureDate", "coordinates", "attributes", "legacy",
    }
    if unknown:
        raise InvalidRequest(f"unknown patch fields: {', '.join(sorted(unknown))}")
    return patch


# ---------------------------------------------------------------------------
# query results
# ---------------------------------------------------------------------------

def item_to_json(item: ResultItem) -> dict[str, Any]:
    return {
        "id": item.id,
        "kind": item.kind,
        "subkind": item.subkind,
        "title": item.title,
        "author": item.author,
        "captureDate": item.capture_date,
        "places": list(item.places),
        "periods": list(item.periods),
        "keywords": list(item.keywords),
        "archived": item.archived,
    }


def page_to_json(page: ResultPage) -> dict[str, Any]:
    return {
        "items": [item_to_json(item) for item in page.items],
        "total": page.total,
        "page": page.page,
        "pageSize": page.page_size,
    }


def related_to_json(related: list[RelatedItem]) -> list[dict[str, Any]]:
    return [{"score": r.score, **item_to_json(r.item)} for r in related]


def violations_to_json(violations: list[Violation]) -> list[dict[str, str]]:
    return [{"path": v.path, "rule": v.rule, "message": v.message} for v in violations]


# ---------------------------------------------------------------------------
# reference entities
# ---------------------------------------------------------------------------

def period_to_json(period: Period) -> dict[str, Any]:
    return {
        "id": period.id,
        "label": period.label,
        "startYear": period.start_year,
        "endYear": period.end_year,
        "description": period.description,
    }


def period_from_json(data: Mapping[str, Any]) -> Period:
    try:
        return Period(
            id=str(data["id"]),
            label=str(data.get("label", "")),
            start_year=int(data["startYear"]),
            end_year=int(data["endYear"]),
            description=str(data.get("description", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidRequest(f"bad period body: {exc}") from None


def place_to_json(place: Place) -> dict[str, Any]:
    return {
        "id": place.id,
        "name": place.name,
        "parentId": place.parent_id,
        "description": place.description,
        "footprint": [list(v) for v in place.footprint] if place.footprint else None,
    }


def place_from_json(data: Mapping[str, Any]) -> Place:
    footprint = data.get("footprint")
    vertices = None
    if footprint is not None:
        try:
            vertices = tuple((float(v[0]), float(v[1])) for v in footprint)
        except (TypeError, ValueError, IndexError):
            raise InvalidRequest("footprint must be a list of [x, y] pairs") from None
    try:
        return Place(
            id=str(data["id"]),
            name=str(data.get("name", "")),
            parent_id=data.get("parentId"),
            description=str(data.get("description", "")),
            footprint=vertices,
        )
    except KeyError as exc:
        raise InvalidRequest(f"bad place body: missing {exc}") from None


def vocabulary_to_json(vocab: Vocabulary) -> dict[str, Any]:
    return {"facet": vocab.facet_name, "terms": list(vocab.terms)}


def vocabulary_from_json(data: Mapping[str, Any]) -> Vocabulary:
    if "facet" not in data:
        raise InvalidRequest("vocabulary body needs a facet name")
    return Vocabulary(str(data["facet"]), _strings_from_json(data.get("terms"), "terms"))


# ---------------------------------------------------------------------------
# schemas, deltas and migration plans
# ---------------------------------------------------------------------------

def node_to_json(node: AttributeNode) -> dict[str, Any]:
    out: dict[str, Any] = {
        "name": node.name,
        "type": node.value_type.value,
        "required": node.required,
        "repeatable": node.repeatable,
    }
    if node.facet is not None:
        out["facet"] = node.facet
    if node.children:
        out["children"] = [node_to_json(child) for child in node.children]
    return out


def node_from_json(data: Mapping[str, Any]) -> AttributeNode:
    if not isinstance(data, Mapping) or "name" not in data:
        raise InvalidRequest("schema nodes need a name")
    try:
        value_type = ValueType(str(data.get("type", "text")))
    except ValueError:
        raise InvalidRequest(f"unknown node type {data.get('type')!r}") from None
    return AttributeNode(
        name=str(data["name"]),
        value_type=value_type,
        required=bool(data.get("required", False)),
        repeatable=bool(data.get("repeatable", False)),
        facet=data.get("facet"),
        children=tuple(node_from_json(child) for child in data.get("children", [])),
    )


def schema_to_json(schema: MetadataSchema) -> dict[str, Any]:
    return {
        "version": schema.version,
        "kinds": {
            kind_tag: [node_to_json(node) for node in schema.per_kind[kind_tag]]
            for kind_tag in sorted(schema.per_kind)
        },
    }


def schema_from_json(data: Mapping[str, Any]) -> MetadataSchema:
    if not isinstance(data, Mapping) or "version" not in data:
        raise InvalidRequest("schema body needs a version")
    kinds = data.get("kinds", {})
    if not isinstance(kinds, Mapping):
        raise InvalidRequest("schema kinds must be an object")
    return MetadataSchema(
        version=int(data["version"]),
        per_kind={
            str(tag): tuple(node_from_json(node) for node in nodes) for tag, nodes in kinds.items()
        },
    )


def change_from_json(data: Mapping[str, Any]) -> SchemaChange:
    op = data.get("op")
    kind = str(data.get("kind", ""))
    if op == "addNode":
        if "node" not in data:
            raise InvalidRequest("addNode needs a node definition")
        default = data.get("default")
        return AddNode(
            kind_tag=kind,
            node=node_from_json(data["node"]),
            parent_path=str(data.get("parentPath", "")),
            default=None if default is None else str(default),
        )
    if op == "removeNode":
        return RemoveNode(kind_tag=kind, path=str(data.get("path", "")))
    if op == "renameNode":
        return RenameNode(kind_tag=kind, path=str(data.get("path", "")), new_name=str(data.get("newName", "")))
    if op == "retypeNode":
        try:
            new_type = ValueType(str(data.get("newType", "")))
        except ValueError:
            raise InvalidRequest(f"unknown node type {data.get('newType')!r}") from None
        facet = data.get("facet")
        return RetypeNode(
            kind_tag=kind,
            path=str(data.get("path", "")),
            new_type=new_type,
            facet=None if facet is None else str(facet),
        )
    raise InvalidRequest(f"unknown schema change op {op!r}")


def delta_from_json(data: Mapping[str, Any]) -> SchemaDelta:
    if not isinstance(data, Mapping):
        raise InvalidRequest("delta body must be an object")
    changes = data.get("changes")
    if not isinstance(changes, list) or not changes:
        raise InvalidRequest("delta body needs a non-empty changes list")
    return SchemaDelta(changes=tuple(change_from_json(change) for change in changes))


def rule_to_json(rule: MigrationRule) -> dict[str, Any]:
    return {
        "kind": rule.kind_tag,
        "action": rule.action,
        "path": rule.path,
        "targetPath": rule.target_path,
        "text": rule.text,
        "valueType": rule.value_type,
    }


def plan_to_json(plan: MigrationPlan) -> dict[str, Any]:
    return {
        "fromVersion": plan.from_version,
        "toVersion": plan.to_version,
        "schema": schema_to_json(plan.schema),
        "rules": [rule_to_json(rule) for rule in plan.rules],
    }


def plan_from_json(data: Mapping[str, Any]) -> MigrationPlan:
    if not isinstance(data, Mapping) or "schema" not in data:
        raise InvalidRequest("plan body needs fromVersion, toVersion, schema and rules")
    try:
        rules = tuple(
            MigrationRule(
                kind_tag=str(rule["kind"]),
                action=str(rule["action"]),
                path=str(rule["path"]),
                target_path=str(rule.get("targetPath", "")),
                text=str(rule.get("text", "")),
                value_type=str(rule.get("valueType", "")),
            )
            for rule in data.get("rules", [])
        )
        return MigrationPlan(
            from_version=int(data["fromVersion"]),
            to_version=int(data["toVersion"]),
            schema=schema_from_json(data["schema"]),
            rules=rules,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidRequest(f"bad migration plan body: {exc}") from None
