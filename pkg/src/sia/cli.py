"""Command line front end.

Exit codes: 0 success, 1 a domain failure (validation, unknown ids, bad
composition), 2 usage errors, 3 storage problems (lock held, corrupt or
missing store). The data directory comes from --data or SIA_DATA_DIR.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from . import jsonio
from .errors import (
    CorruptRecordFile,
    SchemaVersionUnknown,
    SiaError,
    StorageFailure,
    StoreLocked,
)
from .fixture import DEMO_EXPERT, DEMO_VISITOR, build_demo_store
from .manifest import ingest_manifest, parse_manifest
from .plans import MontageEntry, MontageRequest, compose_photomontage, compose_plan, serialize_plan
from .query import QueryEngine, QuerySpec
from .scene import CompositionRequest, compose_model, serialize_x3d
from .store import EXPERT, Store

_STORAGE_ERRORS = (StoreLocked, StorageFailure, CorruptRecordFile, SchemaVersionUnknown)


class UsageError(Exception):
    pass


def _data_dir(args: argparse.Namespace) -> Path:
    raw = args.data or os.environ.get("SIA_DATA_DIR")
    if not raw:
        raise UsageError("no data directory: pass --data or set SIA_DATA_DIR")
    return Path(raw)


@contextmanager
def _open_store(args: argparse.Namespace, writer: bool = True):
    store = Store.open(_data_dir(args), writer=writer)
    try:
        yield store
    finally:
        store.close()


def _split_ids(raw: str | None) -> tuple[str, ...]:
    if not raw:
        return ()
    return tuple(part for part in (p.strip() for p in raw.split(",")) if part)


def _write_output(data: bytes, out: str | None) -> None:
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_init(args: argparse.Namespace) -> int:
    store = Store.init(_data_dir(args))
    store.close()
    print(f"initialized empty store at {store.layout.data_dir}")
    return 0


def cmd_demo(args: argparse.Namespace) -> int:
    store = build_demo_store(_data_dir(args))
    count = len(store.record_ids())
    store.close()
    print(f"built demo store at {store.layout.data_dir}: {count} records")
    print(f"accounts: {DEMO_EXPERT[0]} (expert), {DEMO_VISITOR[0]} (visitor)")
    return 0


def cmd_ingest(args: argparse.Namespace) -> int:
    manifest = parse_manifest(args.manifest)
    with _open_store(args) as store:
        records = ingest_manifest(store, manifest, EXPERT)
    print(f"ingested {len(records)} records")
    for record in records:
        print(f"  {record.id}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    with _open_store(args, writer=False) as store:
        report = store.validate_store()
        total = len(store.record_ids())
    if args.format == "json":
        print(json.dumps({rid: jsonio.violations_to_json(v) for rid, v in report.items()}, indent=2))
    elif report:
        for record_id, violations in sorted(report.items()):
            for violation in violations:
                print(f"{record_id}: {violation.path or '(file)'}: {violation.message}")
    if report:
        print(f"{len(report)} of {total} records invalid", file=sys.stderr)
        return 1
    if args.format != "json":
        print(f"all {total} records valid")
    return 0


def cmd_reindex(args: argparse.Namespace) -> int:
    with _open_store(args) as store:
        snapshot = store.rebuild_index()
    print(f"index rebuilt: {len(snapshot.records)} records")
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    epoch = None
    if args.period_from is not None or args.period_to is not None:
        epoch = (
            args.period_from if args.period_from is not None else -9999,
            args.period_to if args.period_to is not None else 9999,
        )
    spec = QuerySpec(
        kinds=tuple(args.kind or ()),
        places=tuple(args.place or ()),
        epoch=epoch,
        keywords=tuple(args.keyword or ()),
        authors=tuple(args.author or ()),
        include_archived=args.include_archived,
        page=args.page,
        page_size=args.page_size,
    )
    with _open_store(args, writer=False) as store:
        page = QueryEngine(store).search(spec)
    if args.format == "json":
        print(json.dumps(jsonio.page_to_json(page), indent=2))
        return 0
    for item in page.items:
        capture = item.capture_date or "-"
        print(f"{item.id}\t{item.kind}\t{capture}\t{item.title}")
    window = f"page {page.page}" if page.total > len(page.items) else "all"
    print(f"{len(page.items)} of {page.total} matches ({window})", file=sys.stderr)
    return 0


def cmd_compose_model(args: argparse.Namespace) -> int:
    request = CompositionRequest(places=_split_ids(args.places), periods=_split_ids(args.periods))
    with _open_store(args, writer=False) as store:
        scene = compose_model(store, request)
        data = serialize_x3d(scene)
    _write_output(data, args.out)
    for warning in scene.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_compose_plan(args: argparse.Namespace) -> int:
    request = CompositionRequest(places=_split_ids(args.places), periods=_split_ids(args.periods))
    with _open_store(args, writer=False) as store:
        doc = compose_plan(store, request)
        data = serialize_plan(doc)
    _write_output(data, args.out)
    for warning in doc.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return 0


def cmd_compose_montage(args: argparse.Namespace) -> int:
    entries = []
    for part in _split_ids(args.records):
        record_id, _, opacity_text = part.partition(":")
        try:
            opacity = float(opacity_text) if opacity_text else 0.5
        except ValueError:
            raise UsageError(f"bad --records entry {part!r}: expected id or id:opacity") from None
        entries.append(MontageEntry(record_id=record_id, opacity=opacity))
    request = MontageRequest(entries=tuple(entries))
    with _open_store(args, writer=False) as store:
        data = compose_photomontage(store, request)
    _write_output(data, args.out)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    with _open_store(args, writer=False) as store:
        data = store.export_xml(args.id)
    _write_output(data, args.out)
    return 0


def cmd_vocab(args: argparse.Namespace) -> int:
    if args.vocab_command == "list":
        with _open_store(args, writer=False) as store:
            vocabularies = store.vocabularies()
        for vocab in vocabularies:
            if args.facet and vocab.facet_name != args.facet:
                continue
            print(f"{vocab.facet_name}: {', '.join(vocab.terms) or '(empty)'}")
        return 0
    with _open_store(args) as store:
        store.add_vocabulary_term(args.facet, args.term, EXPERT)
    print(f"added {args.term!r} to facet {args.facet!r}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = args.ui
    if ui_dir is None:
        bundled = Path.cwd() / "frontend" / "dist"
        ui_dir = str(bundled) if bundled.is_dir() else None
    app = create_app(_data_dir(args), accounts_path=args.accounts, ui_dir=ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="store directory (default: $SIA_DATA_DIR)")

    parser = argparse.ArgumentParser(prog="sia", description="intra-site archive tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", parents=[common], help="create an empty store")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("demo", parents=[common], help="create a store with demo content")
    p.set_defaults(func=cmd_demo)

    p = sub.add_parser("ingest", parents=[common], help="bulk-load records from a manifest")
    p.add_argument("--manifest", required=True, help="manifest XML file")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("validate", parents=[common], help="re-validate every record file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("reindex", parents=[common], help="rebuild the query index from the files")
    p.set_defaults(func=cmd_reindex)

    p = sub.add_parser("search", parents=[common], help="faceted record search")
    p.add_argument("--kind", action="append", help="document kind (repeatable)")
    p.add_argument("--place", action="append", help="place id, includes sub-places (repeatable)")
    p.add_argument("--keyword", action="append", help="subject keyword (repeatable)")
    p.add_argument("--author", action="append", help="author (repeatable)")
    p.add_argument("--period-from", type=int, help="epoch interval start year")
    p.add_argument("--period-to", type=int, help="epoch interval end year")
    p.add_argument("--include-archived", action="store_true")
    p.add_argument("--page", type=int, default=1)
    p.add_argument("--page-size", type=int, default=50)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("compose-model", parents=[common], help="compose an X3D scene")
    p.add_argument("--places", required=True, help="comma-separated place ids")
    p.add_argument("--periods", required=True, help="comma-separated period ids")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_compose_model)

    p = sub.add_parser("compose-plan", parents=[common], help="compose a layered SVG plan")
    p.add_argument("--places", required=True, help="comma-separated place ids")
    p.add_argument("--periods", required=True, help="comma-separated period ids")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_compose_plan)

    p = sub.add_parser("compose-montage", parents=[common], help="superimpose image records")
    p.add_argument(
        "--records", required=True, help="comma-separated record ids, each optionally id:opacity"
    )
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_compose_montage)

    p = sub.add_parser("export", parents=[common], help="export one record as canonical XML")
    p.add_argument("--id", required=True, help="record id")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("vocab", parents=[common], help="inspect or extend vocabularies")
    vocab_sub = p.add_subparsers(dest="vocab_command", required=True)
    v = vocab_sub.add_parser("list", parents=[common], help="list facets and terms")
    v.add_argument("--facet", help="only this facet")
    v.set_defaults(func=cmd_vocab)
    v = vocab_sub.add_parser("add", parents=[common], help="add a term to a facet")
    v.add_argument("--facet", required=True)
    v.add_argument("--term", required=True)
    v.set_defaults(func=cmd_vocab)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--accounts", help="accounts file (default: <data>/accounts.json)")
    p.add_argument("--ui", help="static web UI directory (default: ./frontend/dist if present)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _STORAGE_ERRORS as exc:
        print(f"storage error: {exc.message}", file=sys.stderr)
        return 3
    except SiaError as exc:
        print(f"error ({exc.code}): {exc.message}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"storage error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
