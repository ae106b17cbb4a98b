"""Schema evolution: turn a batch of tree edits into the next schema
version plus a migration plan, and rewrite attribute value trees to match.

The contract is value-preserving: after migration every attribute value
either sits at its (possibly renamed) path with unchanged canonical text,
or is quarantined in the record's legacy block under its original path.
Nothing is silently dropped or reformatted; a retype keeps a value in
place only when converting it back would reproduce the identical text.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any, Iterable, Union

from .errors import DefaultMissing, InvalidDelta
from .model import (
    KIND_TAGS,
    AttributeNode,
    AttributeValueTree,
    LegacyEntry,
    MetadataSchema,
    ValueType,
    Vocabulary,
    convert_value,
    format_value,
    parse_value,
    validate_schema,
)

FILL_EMPTY = "fill-empty"
MOVE_VALUE = "move-value"
RETYPE_OR_LEGACY = "retype-or-legacy"
ARCHIVE_TO_LEGACY = "archive-to-legacy"


@dataclass(frozen=True)
class AddNode:
    """Insert ``node`` under ``parent_path`` (dotted, "" = top level).
    Required leaves must bring a canonical-text default to fill existing
    records with."""

    kind_tag: str
    node: AttributeNode
    parent_path: str = ""
    default: str | None = None


@dataclass(frozen=True)
class RemoveNode:
    kind_tag: str
    path: str


@dataclass(frozen=True)
class RenameNode:
    kind_tag: str
    path: str
    new_name: str


@dataclass(frozen=True)
class RetypeNode:
    kind_tag: str
    path: str
    new_type: ValueType
    facet: str | None = None  # required when new_type is enum


SchemaChange = Union[AddNode, RemoveNode, RenameNode, RetypeNode]


@dataclass(frozen=True)
class SchemaDelta:
    changes: tuple[SchemaChange, ...]


@dataclass(frozen=True)
class MigrationRule:
    """One sequential instruction for rewriting a record's value tree;
    paths refer to the tree as left by the preceding rules."""

    kind_tag: str
    action: str
    path: str
    target_path: str = ""  # move-value: destination
    text: str = ""  # fill-empty: canonical default text
    value_type: str = ""  # fill-empty / retype-or-legacy: type name


@dataclass(frozen=True)
class MigrationPlan:
    from_version: int
    to_version: int
    schema: MetadataSchema
    rules: tuple[MigrationRule, ...]


# ---------------------------------------------------------------------------
# schema tree editing
# ---------------------------------------------------------------------------

def _parts(path: str) -> tuple[str, ...]:
    return tuple(path.split(".")) if path else ()


def _find_node(nodes: tuple[AttributeNode, ...], parts: tuple[str, ...]) -> AttributeNode | None:
    for node in nodes:
        if node.name != parts[0]:
            continue
        if len(parts) == 1:
            return node
        return _find_node(node.children, parts[1:])
    return None


def _edit_node(nodes, parts, editor) -> tuple[AttributeNode, ...]:
    """Apply ``editor`` to the node at ``parts``; returning None deletes it."""
    out: list[AttributeNode] = []
    for node in nodes:
        if node.name == parts[0]:
            if len(parts) == 1:
                edited = editor(node)
                if edited is not None:
                    out.append(edited)
            else:
                out.append(replace(node, children=_edit_node(node.children, parts[1:], editor)))
        else:
            out.append(node)
    return tuple(out)


def _with_kind(schema: MetadataSchema, kind_tag: str, nodes: tuple[AttributeNode, ...]) -> MetadataSchema:
    per_kind = dict(schema.per_kind)
    per_kind[kind_tag] = nodes
    return replace(schema, per_kind=per_kind)


def _require_path(schema: MetadataSchema, kind_tag: str, path: str, index: int) -> AttributeNode:
    node = _find_node(schema.nodes_for(kind_tag), _parts(path))
    if node is None:
        raise InvalidDelta(f"change {index}: no node at {kind_tag}:{path}")
    return node


def _apply_add(schema: MetadataSchema, change: AddNode, vocabularies, index: int):
    nodes = schema.nodes_for(change.kind_tag)
    parent_parts = _parts(change.parent_path)
    if parent_parts:
        parent = _find_node(nodes, parent_parts)
        if parent is None:
            raise InvalidDelta(f"change {index}: no node at {change.kind_tag}:{change.parent_path}")
        if parent.value_type != ValueType.GROUP:
            raise InvalidDelta(f"change {index}: {change.parent_path} is not a group")
        siblings = parent.children
    else:
        siblings = nodes
    if any(n.name == change.node.name for n in siblings):
        raise InvalidDelta(f"change {index}: {change.node.name!r} already exists under {change.parent_path!r}")
    node = change.node
    rules: list[MigrationRule] = []
    if change.default is not None:
        if node.value_type == ValueType.GROUP:
            raise InvalidDelta(f"change {index}: group nodes take no default")
        try:
            parse_value(change.default, node.value_type)
        except ValueError as exc:
            raise InvalidDelta(f"change {index}: bad default: {exc}") from None
        if node.value_type == ValueType.ENUM:
            terms = next((v.terms for v in vocabularies if v.facet_name == node.facet), ())
            if change.default not in terms:
                raise InvalidDelta(f"change {index}: default {change.default!r} missing from facet {node.facet!r}")
        path = change.parent_path + "." + node.name if change.parent_path else node.name
        rules.append(
            MigrationRule(change.kind_tag, FILL_EMPTY, path, text=change.default, value_type=node.value_type.value)
        )
    elif node.required:
        raise DefaultMissing(
            f"change {index}: required node {node.name!r} needs a default to fill existing records"
        )
    if parent_parts:
        new_nodes = _edit_node(nodes, parent_parts, lambda p: replace(p, children=p.children + (node,)))
    else:
        new_nodes = nodes + (node,)
    return _with_kind(schema, change.kind_tag, new_nodes), rules


def _apply_remove(schema: MetadataSchema, change: RemoveNode, index: int):
    _require_path(schema, change.kind_tag, change.path, index)
    nodes = _edit_node(schema.nodes_for(change.kind_tag), _parts(change.path), lambda n: None)
    rule = MigrationRule(change.kind_tag, ARCHIVE_TO_LEGACY, change.path)
    return _with_kind(schema, change.kind_tag, nodes), [rule]


def _apply_rename(schema: MetadataSchema, change: RenameNode, index: int):
    _require_path(schema, change.kind_tag, change.path, index)
    parts = _parts(change.path)
    target_parts = parts[:-1] + (change.new_name,)
    if _find_node(schema.nodes_for(change.kind_tag), target_parts) is not None:
        raise InvalidDelta(f"change {index}: {change.new_name!r} already exists beside {change.path}")
    nodes = _edit_node(
        schema.nodes_for(change.kind_tag), parts, lambda n: replace(n, name=change.new_name)
    )
    rule = MigrationRule(change.kind_tag, MOVE_VALUE, change.path, target_path=".".join(target_parts))
    return _with_kind(schema, change.kind_tag, nodes), [rule]


def _apply_retype(schema: MetadataSchema, change: RetypeNode, vocabularies, index: int):
    node = _require_path(schema, change.kind_tag, change.path, index)
    if node.value_type == ValueType.GROUP or change.new_type == ValueType.GROUP:
        raise InvalidDelta(f"change {index}: group nodes cannot be retyped")
    facet = None
    if change.new_type == ValueType.ENUM:
        if not change.facet or change.facet not in {v.facet_name for v in vocabularies}:
            raise InvalidDelta(f"change {index}: enum facet {change.facet!r} does not exist")
        facet = change.facet
    nodes = _edit_node(
        schema.nodes_for(change.kind_tag),
        _parts(change.path),
        lambda n: replace(n, value_type=change.new_type, facet=facet),
    )
    rule = MigrationRule(change.kind_tag, RETYPE_OR_LEGACY, change.path, value_type=change.new_type.value)
    return _with_kind(schema, change.kind_tag, nodes), [rule]


def apply_delta(
    base: MetadataSchema, delta: SchemaDelta, vocabularies: Iterable[Vocabulary]
) -> tuple[MetadataSchema, tuple[MigrationRule, ...]]:
    """Apply changes in order (later changes see earlier ones); returns the
    next-version schema and the value-migration rules it implies."""
    vocab_list = list(vocabularies)
    schema = base
    rules: list[MigrationRule] = []
    for index, change in enumerate(delta.changes):
        if change.kind_tag not in KIND_TAGS:
            raise InvalidDelta(f"change {index}: unknown document kind {change.kind_tag!r}")
        if isinstance(change, AddNode):
            schema, new_rules = _apply_add(schema, change, vocab_list, index)
        elif isinstance(change, RemoveNode):
            schema, new_rules = _apply_remove(schema, change, index)
        elif isinstance(change, RenameNode):
            schema, new_rules = _apply_rename(schema, change, index)
        elif isinstance(change, RetypeNode):
            schema, new_rules = _apply_retype(schema, change, vocab_list, index)
        else:
            raise InvalidDelta(f"change {index}: unsupported change {type(change).__name__}")
        rules.extend(new_rules)
    return replace(schema, version=base.version + 1), tuple(rules)


def propose_schema(
    base: MetadataSchema, delta: SchemaDelta, vocabularies: Iterable[Vocabulary]
) -> MigrationPlan:
    """Validate a delta against the current schema and produce the plan
    that advances the store one version."""
    vocab_list = list(vocabularies)
    schema, rules = apply_delta(base, delta, vocab_list)
    violations = validate_schema(schema, vocab_list)
    if violations:
        details = "; ".join(f"{v.path}: {v.message}" for v in violations)
        raise InvalidDelta(f"delta produces an invalid schema: {details}")
    return MigrationPlan(
        from_version=base.version, to_version=schema.version, schema=schema, rules=rules
    )


# ---------------------------------------------------------------------------
# value-tree migration
# ---------------------------------------------------------------------------

def _clone(value: Any) -> Any:
    if isinstance(value, dict):
        return {name: _clone(item) for name, item in value.items()}
    if isinstance(value, list):
        return [_clone(item) for item in value]
    return value


def _instances(root: dict, parts: tuple[str, ...]) -> list[dict]:
    """Every dict reachable by descending ``parts`` (repeatable groups
    fan out)."""
    current: list[dict] = [root]
    for part in parts:
        descended: list[dict] = []
        for holder in current:
            value = holder.get(part)
            if isinstance(value, list):
                descended.extend(item for item in value if isinstance(item, dict))
            elif isinstance(value, dict):
                descended.append(value)
        current = descended
    return current


def _flatten(prefix: str, value: Any) -> list[LegacyEntry]:
    if isinstance(value, list):
        out: list[LegacyEntry] = []
        for item in value:
            out.extend(_flatten(prefix, item))
        return out
    if isinstance(value, dict):
        out = []
        for name, item in value.items():
            out.extend(_flatten(f"{prefix}.{name}", item))
        return out
    return [LegacyEntry(prefix, format_value(value))]


def _fill_empty(root: dict, rule: MigrationRule) -> None:
    parts = _parts(rule.path)
    default = parse_value(rule.text, ValueType(rule.value_type))
    for holder in _instances(root, parts[:-1]):
        if parts[-1] not in holder or holder[parts[-1]] == "":
            holder[parts[-1]] = default


def _move_value(root: dict, rule: MigrationRule) -> None:
    parts = _parts(rule.path)
    target = _parts(rule.target_path)[-1]
    for holder in _instances(root, parts[:-1]):
        if parts[-1] in holder:
            holder[target] = holder.pop(parts[-1])


def _retype_or_legacy(root: dict, rule: MigrationRule, legacy: list[LegacyEntry]) -> None:
    parts = _parts(rule.path)
    target_type = ValueType(rule.value_type)
    for holder in _instances(root, parts[:-1]):
        if parts[-1] not in holder:
            continue
        value = holder[parts[-1]]
        items = value if isinstance(value, list) else [value]
        kept: list[Any] = []
        for item in items:
            try:
                kept.append(convert_value(item, target_type))
            except ValueError:
                legacy.append(LegacyEntry(rule.path, format_value(item)))
        if not kept:
            del holder[parts[-1]]
        elif isinstance(value, list):
            holder[parts[-1]] = kept
        else:
            holder[parts[-1]] = kept[0]


def _archive(root: dict, rule: MigrationRule, legacy: list[LegacyEntry]) -> None:
    parts = _parts(rule.path)
    for holder in _instances(root, parts[:-1]):
        if parts[-1] in holder:
            legacy.extend(_flatten(rule.path, holder.pop(parts[-1])))


def migrate_tree(tree: AttributeValueTree, kind_tag: str, rules: tuple[MigrationRule, ...]) -> AttributeValueTree:
    """Rewrite one record's attribute values per the plan's rules for its
    kind; existing legacy entries ride along untouched."""
    root = _clone(dict(tree.values))
    legacy = list(tree.legacy)
    for rule in rules:
        if rule.kind_tag != kind_tag:
            continue
        if rule.action == FILL_EMPTY:
            _fill_empty(root, rule)
        elif rule.action == MOVE_VALUE:
            _move_value(root, rule)
        elif rule.action == RETYPE_OR_LEGACY:
            _retype_or_legacy(root, rule, legacy)
        elif rule.action == ARCHIVE_TO_LEGACY:
            _archive(root, rule, legacy)
    return AttributeValueTree(values=root, legacy=tuple(legacy))


def tree_leaves(tree: AttributeValueTree) -> list[tuple[str, str]]:
    """Every (dotted path, canonical text) pair in the tree, live values
    and legacy entries alike; the unit preserved by migration."""
    out: list[tuple[str, str]] = []
    for name, value in tree.values.items():
        out.extend((entry.path, entry.value) for entry in _flatten(name, value))
    out.extend((entry.path, entry.value) for entry in tree.legacy)
    return out
