"""Self-contained HTML view of one record: a metadata table plus, for
image-bearing kinds, a thumbnail hyperlinked to the original asset.

Output is XHTML-compatible (every tag closed, everything escaped) so it can
be checked by a strict markup parser.
"""

from __future__ import annotations

from html import escape
from typing import Any

from .model import IMAGE_KINDS, DocumentRecord, format_value
from .xmlio import format_float, format_timestamp

_STYLE = (
    "body{font-family:sans-serif;margin:2em;color:#222}"
    "table{border-collapse:collapse}"
    "td,th{border:1px solid #bbb;padding:.3em .6em;text-align:left;vertical-align:top}"
    "th{background:#eee}"
    ".thumb img{max-width:320px;border:1px solid #888}"
)


def _rows(record: DocumentRecord) -> list[tuple[str, str]]:
    kind = record.kind.tag
    if record.kind.plan_subkind:
        kind += f" ({record.kind.plan_subkind})"
    rows = [
        ("Identifier", record.id),
        ("Kind", kind),
        ("Title", record.title),
        ("Author", record.author),
        ("Provenance", record.provenance),
    ]
    if record.capture_date is not None:
        rows.append(("Capture date", record.capture_date.isoformat()))
    rows.append(("Keywords", ", ".join(record.subject_keywords)))
    rows.append(("Places", ", ".join(record.place_refs)))
    rows.append(("Periods", ", ".join(record.period_refs)))
    if record.coordinates is not None:
        rows.append(("Coordinates", " / ".join(format_float(c) for c in record.coordinates)))
    rows.append(("Content", f"{record.content.href} ({record.content.media_format}, {record.content.byte_size} bytes)"))
    rows.append(("Checksum", record.content.checksum))
    rows.extend(_attribute_rows(record.attributes.values, record.kind.tag))
    for entry in record.attributes.legacy:
        rows.append((f"Legacy {entry.path}", entry.value))
    rows.append(("Schema version", str(record.schema_version)))
    rows.append(("Created", format_timestamp(record.created_at)))
    rows.append(("Updated", format_timestamp(record.updated_at)))
    if record.archived:
        rows.append(("Archived", "yes"))
    return rows


def _attribute_rows(values: Any, path: str) -> list[tuple[str, str]]:
    rows: list[tuple[str, str]] = []
    for name, value in values.items():
        sub_path = f"{path}/{name}"
        items = value if isinstance(value, list) else [value]
        for item in items:
            if isinstance(item, dict):
                rows.extend(_attribute_rows(item, sub_path))
            else:
                rows.append((sub_path, format_value(item)))
    return rows


def render_html_view(record: DocumentRecord) -> bytes:
    parts = [
        "<!DOCTYPE html>\n",
        '<html><head><meta charset="utf-8"/><base href="/"/>',
        f"<title>{escape(record.title)}</title>",
        f"<style>{_STYLE}</style></head><body>",
        f"<h1>{escape(record.title)}</h1>",
    ]
    if record.kind.tag in IMAGE_KINDS and record.content.href:
        href = escape(record.content.href, quote=True)
        parts.append(
            f'<p class="thumb"><a href="{href}">'
            f'<img src="{href}" alt="{escape(record.title, quote=True)}"/></a></p>'
        )
    parts.append("<table>")
    for label, value in _rows(record):
        parts.append(f"<tr><th>{escape(label)}</th><td>{escape(value)}</td></tr>")
    parts.append("</table></body></html>\n")
    return "".join(parts).encode("utf-8")
