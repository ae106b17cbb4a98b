"""The dual store: every record lives simultaneously as a canonical XML
file (the source of truth) and as rows in an embedded relational index
(a rebuildable cache used by the query engine).

Commit protocol per mutation: write the record file to a temp name, fsync,
rename into place, then apply the index rows inside one SQLite transaction.
On open, leftover temp files are discarded and the index is compared
against the file set; any drift triggers an automatic rebuild, so a crash
at any commit step leaves a store that recovers to a consistent state.

Concurrency: single writer (a lock file plus an in-process mutex), readers
never take the mutex — record reads hit committed files, index reads use
short-lived SQLite connections.
"""

from __future__ import annotations

import fcntl
import hashlib
import os
import re
import sqlite3
import threading
from contextlib import closing
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, NamedTuple

from . import xmlio
from .errors import (
    CorruptRecordFile,
    MigrationBlocked,
    NotFound,
    PermissionDenied,
    SchemaVersionUnknown,
    StalePlan,
    StorageFailure,
    StoreLocked,
    ValidationFailed,
)
from .htmlview import render_html_view
from .model import (
    AUTHOR_FACET,
    SUBJECT_FACET,
    ContentRef,
    DocumentRecord,
    MetadataSchema,
    Period,
    Place,
    RecordDraft,
    Violation,
    Vocabulary,
    draft_from_record,
    is_slug,
    record_from_draft,
    slugify,
    validate_period,
    validate_place,
    validate_record,
    validate_vocabulary,
)

EXPERT = "expert"
VISITOR = "visitor"

LOCK_FILENAME = ".sia.lock"

# Points at which a simulated fault can be injected by tests; the commit
# hook is called with each name in order during a record commit.
COMMIT_POINTS = (
    "begin",
    "temp-partial",
    "temp-written",
    "renamed",
    "index-pending",
    "committed",
)

_SCHEMA_FILE_RE = re.compile(r"^v(\d+)\.xml$")

_DB_TABLES = """
CREATE TABLE records(
    id TEXT PRIMARY KEY,
    kind TEXT NOT NULL,
    subkind TEXT,
    title TEXT NOT NULL,
    author TEXT NOT NULL,
    capture_date TEXT,
    schema_version INTEGER NOT NULL,
    archived INTEGER NOT NULL,
    content_href TEXT NOT NULL,
    content_format TEXT NOT NULL,
    created TEXT NOT NULL,
    updated TEXT NOT NULL,
    file_sha256 TEXT NOT NULL
);
CREATE TABLE record_places(record_id TEXT NOT NULL, place_id TEXT NOT NULL);
CREATE TABLE record_periods(record_id TEXT NOT NULL, period_id TEXT NOT NULL);
CREATE TABLE record_keywords(record_id TEXT NOT NULL, keyword TEXT NOT NULL);
"""


class RecordRow(NamedTuple):
    id: str
    kind: str
    subkind: str | None
    title: str
    author: str
    capture_date: str | None
    schema_version: int
    archived: bool
    content_href: str
    content_format: str
    created: str
    updated: str
    file_sha256: str


@dataclass(frozen=True)
class IndexSnapshot:
    """Sorted row-level image of the index; two snapshots compare equal iff
    the indexes agree row-for-row."""

    records: tuple[RecordRow, ...]
    places: tuple[tuple[str, str], ...]
    periods: tuple[tuple[str, str], ...]
    keywords: tuple[tuple[str, str], ...]


@dataclass
class IndexView:
    """Per-record projection of the index used by the query engine."""

    rows: dict[str, RecordRow]
    places: dict[str, tuple[str, ...]]
    periods: dict[str, tuple[str, ...]]
    keywords: dict[str, tuple[str, ...]]


@dataclass(frozen=True)
class StoreLayout:
    data_dir: Path

    @property
    def records_dir(self) -> Path:
        return self.data_dir / "records"

    @property
    def media_dir(self) -> Path:
        return self.data_dir / "media"

    @property
    def schema_dir(self) -> Path:
        return self.data_dir / "schema"

    @property
    def index_dir(self) -> Path:
        return self.data_dir / "index"

    @property
    def db_path(self) -> Path:
        return self.index_dir / "index.sqlite"

    @property
    def periods_path(self) -> Path:
        return self.data_dir / "periods.xml"

    @property
    def places_path(self) -> Path:
        return self.data_dir / "places.xml"

    @property
    def vocabularies_path(self) -> Path:
        return self.data_dir / "vocabularies.xml"

    @property
    def lock_path(self) -> Path:
        return self.data_dir / LOCK_FILENAME


def _fsync_dir(path: Path) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Store:
    def __init__(self, layout: StoreLayout, *, writer: bool, clock: Callable[[], datetime] | None = None):
        self.layout = layout
        self.writer = writer
        self.clock = clock or _utcnow
        self.commit_hook: Callable[[str], None] | None = None
        self._mutex = threading.RLock()
        self._lock_fd: int | None = None
        self._schema_cache: dict[int, MetadataSchema] = {}
        self._ref_cache: dict[str, tuple[tuple[int, int], Any]] = {}

    # -- lifecycle ----------------------------------------------------------

    @classmethod
    def init(cls, data_dir: str | Path, *, clock: Callable[[], datetime] | None = None) -> "Store":
        """Create a fresh store skeleton (fails on a non-empty directory)
        and open it for writing."""
        layout = StoreLayout(Path(data_dir))
        root = layout.data_dir
        if root.exists() and any(root.iterdir()):
            raise StorageFailure(f"{root} exists and is not empty")
        for sub in (layout.records_dir, layout.media_dir, layout.schema_dir, layout.index_dir):
            sub.mkdir(parents=True, exist_ok=True)
        (layout.schema_dir / "v1.xml").write_bytes(xmlio.serialize_schema(MetadataSchema(version=1)))
        layout.vocabularies_path.write_bytes(
            xmlio.serialize_vocabularies(
                [Vocabulary(SUBJECT_FACET, ()), Vocabulary(AUTHOR_FACET, ())]
            )
        )
        layout.periods_path.write_bytes(xmlio.serialize_periods([]))
        layout.places_path.write_bytes(xmlio.serialize_places([]))
        store = cls(layout, writer=True, clock=clock)
        store._acquire_lock()
        store._create_db(layout.db_path)
        return store

    @classmethod
    def open(
        cls,
        data_dir: str | Path,
        *,
        writer: bool = True,
        clock: Callable[[], datetime] | None = None,
    ) -> "Store":
        layout = StoreLayout(Path(data_dir))
        if not layout.records_dir.is_dir() or not layout.schema_dir.is_dir():
            raise StorageFailure(f"{layout.data_dir} is not an initialized store")
        store = cls(layout, writer=writer, clock=clock)
        if writer:
            store._acquire_lock()
            store._recover()
        return store

    def close(self) -> None:
        if self._lock_fd is not None:
            fcntl.flock(self._lock_fd, fcntl.LOCK_UN)
            os.close(self._lock_fd)
            self._lock_fd = None

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _acquire_lock(self) -> None:
        fd = os.open(self.layout.lock_path, os.O_RDWR | os.O_CREAT, 0o644)
        try:
            fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError:
            os.close(fd)
            raise StoreLocked(f"{self.layout.data_dir} is held by another writer") from None
        self._lock_fd = fd

    def _recover(self) -> None:
        for tmp in self.layout.records_dir.glob(".tmp.*"):
            tmp.unlink()
        if not self.layout.db_path.exists() or not self._index_matches_files():
            self.rebuild_index()

    def _index_matches_files(self) -> bool:
        on_disk = {
            path.stem: sha256_hex(path.read_bytes())
            for path in self.layout.records_dir.glob("*.xml")
        }
        try:
            with closing(self._connect()) as conn:
                in_index = dict(conn.execute("SELECT id, file_sha256 FROM records"))
        except sqlite3.DatabaseError:
            return False
        return on_disk == in_index

    # -- sqlite plumbing ----------------------------------------------------

    def _connect(self, path: Path | None = None) -> sqlite3.Connection:
        conn = sqlite3.connect(path or self.layout.db_path, timeout=10.0)
        conn.execute("PRAGMA synchronous=NORMAL")
        return conn

    def _create_db(self, path: Path) -> None:
        if path.exists():
            path.unlink()
        with closing(self._connect(path)) as conn:
            conn.executescript(_DB_TABLES)
            conn.commit()

    # -- reference entities -------------------------------------------------

    def _load_reference(self, path: Path, parser: Callable[[bytes], Any]) -> Any:
        stat = path.stat()
        key = (stat.st_mtime_ns, stat.st_size)
        cached = self._ref_cache.get(str(path))
        if cached and cached[0] == key:
            return cached[1]
        value = parser(path.read_bytes())
        self._ref_cache[str(path)] = (key, value)
        return value

    def periods(self) -> list[Period]:
        return list(self._load_reference(self.layout.periods_path, xmlio.parse_periods))

    def places(self) -> list[Place]:
        return list(self._load_reference(self.layout.places_path, xmlio.parse_places))

    def vocabularies(self) -> list[Vocabulary]:
        return list(self._load_reference(self.layout.vocabularies_path, xmlio.parse_vocabularies))

    def _write_reference(self, path: Path, data: bytes) -> None:
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(data)
        os.replace(tmp, path)
        _fsync_dir(path.parent)
        self._ref_cache.pop(str(path), None)

    def upsert_period(self, period: Period, actor: str) -> None:
        self._require_expert(actor)
        with self._mutex:
            violations = validate_period(period)
            if violations:
                raise ValidationFailed(violations)
            periods = self.periods()
            merged = [period if p.id == period.id else p for p in periods]
            if period.id not in {p.id for p in periods}:
                merged.append(period)
            self._write_reference(self.layout.periods_path, xmlio.serialize_periods(merged))

    def upsert_place(self, place: Place, actor: str) -> None:
        self._require_expert(actor)
        with self._mutex:
            places = self.places()
            others = [p for p in places if p.id != place.id]
            violations = validate_place(place, others)
            if violations:
                raise ValidationFailed(violations)
            merged = [place if p.id == place.id else p for p in places]
            if place.id not in {p.id for p in places}:
                merged.append(place)
            self._write_reference(self.layout.places_path, xmlio.serialize_places(merged))

    def set_vocabulary(self, vocab: Vocabulary, actor: str) -> None:
        self._require_expert(actor)
        with self._mutex:
            violations = validate_vocabulary(vocab)
            if violations:
                raise ValidationFailed(violations)
            vocabularies = self.vocabularies()
            merged = [vocab if v.facet_name == vocab.facet_name else v for v in vocabularies]
            if vocab.facet_name not in {v.facet_name for v in vocabularies}:
                merged.append(vocab)
            self._write_reference(self.layout.vocabularies_path, xmlio.serialize_vocabularies(merged))

    def add_vocabulary_term(self, facet_name: str, term: str, actor: str) -> None:
        with self._mutex:
            existing = {v.facet_name: v for v in self.vocabularies()}
            vocab = existing.get(facet_name, Vocabulary(facet_name, ()))
            if term in vocab.terms:
                return
            self.set_vocabulary(Vocabulary(facet_name, vocab.terms + (term,)), actor)

    # -- schema history -----------------------------------------------------

    def schema_versions(self) -> list[int]:
        versions = []
        for path in self.layout.schema_dir.iterdir():
            match = _SCHEMA_FILE_RE.match(path.name)
            if match:
                versions.append(int(match.group(1)))
        return sorted(versions)

    def schema_for(self, version: int) -> MetadataSchema:
        if version in self._schema_cache:
            return self._schema_cache[version]
        path = self.layout.schema_dir / f"v{version}.xml"
        if not path.exists():
            raise SchemaVersionUnknown(f"no schema version {version}")
        schema = xmlio.parse_schema(path.read_bytes())
        self._schema_cache[version] = schema
        return schema

    def active_schema(self) -> MetadataSchema:
        versions = self.schema_versions()
        if not versions:
            raise StorageFailure("store has no schema documents")
        return self.schema_for(versions[-1])

    def save_schema(self, schema: MetadataSchema) -> None:
        path = self.layout.schema_dir / f"v{schema.version}.xml"
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(xmlio.serialize_schema(schema))
        os.replace(tmp, path)
        _fsync_dir(self.layout.schema_dir)
        self._schema_cache[schema.version] = schema

    # -- record paths -------------------------------------------------------

    def _record_path(self, record_id: str) -> Path:
        if not is_slug(record_id):
            raise NotFound(f"no record {record_id!r}")
        return self.layout.records_dir / f"{record_id}.xml"

    def record_ids(self) -> list[str]:
        return sorted(p.stem for p in self.layout.records_dir.glob("*.xml"))

    def _new_id(self, draft: RecordDraft) -> str:
        base = slugify(draft.title, fallback=slugify(draft.kind.tag))
        candidate = base
        suffix = 2
        while (self.layout.records_dir / f"{candidate}.xml").exists():
            candidate = f"{base}-{suffix}"
            suffix += 1
        return candidate

    # -- validation ---------------------------------------------------------

    def _asset_violations(self, content: ContentRef) -> list[Violation]:
        href = content.href
        if not href or "://" in href:
            return []  # external URLs are taken on faith
        out: list[Violation] = []
        path = (self.layout.data_dir / href).resolve()
        if not str(path).startswith(str(self.layout.data_dir.resolve()) + os.sep):
            return [Violation("content.href", "outside-store", f"href {href!r} escapes the data directory")]
        if not path.is_file():
            return [Violation("content.href", "asset-missing", f"no asset at {href!r}")]
        data = path.read_bytes()
        if sha256_hex(data) != content.checksum:
            out.append(Violation("content.checksum", "checksum-mismatch", f"checksum does not match {href!r}"))
        if len(data) != content.byte_size:
            out.append(Violation("content.size", "size-mismatch", f"size does not match {href!r}"))
        return out

    def _validate(self, record: DocumentRecord, schema: MetadataSchema) -> list[Violation]:
        violations = validate_record(record, schema, self.vocabularies(), self.periods(), self.places())
        violations.extend(self._asset_violations(record.content))
        return violations

    def validate_store(self) -> dict[str, list[Violation]]:
        """Re-validate every record file; parse failures surface as a
        single parse-error violation for that file."""
        report: dict[str, list[Violation]] = {}
        for path in sorted(self.layout.records_dir.glob("*.xml")):
            try:
                record = xmlio.parse_record(path.read_bytes(), self.schema_for)
            except Exception as exc:
                report[path.stem] = [Violation("", "parse-error", str(exc))]
                continue
            violations = self._validate(record, self.schema_for(record.schema_version))
            if violations:
                report[path.stem] = violations
        return report

    # -- commit machinery ---------------------------------------------------

    def _hook(self, point: str) -> None:
        if self.commit_hook is not None:
            self.commit_hook(point)

    def _require_writer(self) -> None:
        if not self.writer:
            raise StorageFailure("store opened read-only")

    @staticmethod
    def _require_expert(actor: str) -> None:
        if actor != EXPERT:
            raise PermissionDenied(f"actor {actor!r} may not modify the store")

    def _commit_record(self, record: DocumentRecord) -> None:
        """File first (temp + fsync + rename), then index rows in one
        transaction. Interruption at any point is repaired on next open."""
        data = xmlio.serialize_record(record, self.schema_for(record.schema_version))
        final = self._record_path(record.id)
        tmp = self.layout.records_dir / f".tmp.{record.id}.xml"
        self._hook("begin")
        with open(tmp, "wb") as handle:
            half = len(data) // 2
            handle.write(data[:half])
            self._hook("temp-partial")
            handle.write(data[half:])
            handle.flush()
            os.fsync(handle.fileno())
        self._hook("temp-written")
        os.replace(tmp, final)
        self._hook("renamed")
        _fsync_dir(self.layout.records_dir)
        with closing(self._connect()) as conn:
            with conn:
                self._delete_rows(conn, record.id)
                self._insert_rows(conn, record, sha256_hex(data))
                self._hook("index-pending")
        self._hook("committed")

    @staticmethod
    def _delete_rows(conn: sqlite3.Connection, record_id: str) -> None:
        conn.execute("DELETE FROM records WHERE id = ?", (record_id,))
        conn.execute("DELETE FROM record_places WHERE record_id = ?", (record_id,))
        conn.execute("DELETE FROM record_periods WHERE record_id = ?", (record_id,))
        conn.execute("DELETE FROM record_keywords WHERE record_id = ?", (record_id,))

    @staticmethod
    def _insert_rows(conn: sqlite3.Connection, record: DocumentRecord, file_sha: str) -> None:
        conn.execute(
            "INSERT INTO records VALUES (?,?,?,?,?,?,?,?,?,?,?,?,?)",
            (
                record.id,
                record.kind.tag,
                record.kind.plan_subkind,
                record.title,
                record.author,
                record.capture_date.isoformat() if record.capture_date else None,
                record.schema_version,
                1 if record.archived else 0,
                record.content.href,
                record.content.media_format,
                xmlio.format_timestamp(record.created_at),
                xmlio.format_timestamp(record.updated_at),
                file_sha,
            ),
        )
        conn.executemany(
            "INSERT INTO record_places VALUES (?,?)",
            [(record.id, ref) for ref in record.place_refs],
        )
        conn.executemany(
            "INSERT INTO record_periods VALUES (?,?)",
            [(record.id, ref) for ref in record.period_refs],
        )
        conn.executemany(
            "INSERT INTO record_keywords VALUES (?,?)",
            [(record.id, keyword) for keyword in record.subject_keywords],
        )

    # -- record operations ----------------------------------------------------

    def ingest(self, draft: RecordDraft, actor: str) -> DocumentRecord:
        self._require_expert(actor)
        self._require_writer()
        with self._mutex:
            schema = self.active_schema()
            now = self.clock()
            record = record_from_draft(
                draft,
                record_id=self._new_id(draft),
                schema_version=schema.version,
                created_at=now,
                updated_at=now,
            )
            violations = self._validate(record, schema)
            if violations:
                raise ValidationFailed(violations)
            self._commit_record(record)
            return record

    def read(self, record_id: str) -> DocumentRecord:
        path = self._record_path(record_id)
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no record {record_id!r}") from None
        return xmlio.parse_record(data, self.schema_for)

    def update(self, record_id: str, patch: Mapping[str, Any], actor: str) -> DocumentRecord:
        self._require_expert(actor)
        self._require_writer()
        with self._mutex:
            current = self.read(record_id)
            draft = draft_from_record(current)
            unknown = [name for name in patch if not hasattr(draft, name)]
            if unknown:
                raise ValidationFailed(
                    [Violation(f"patch.{name}", "unknown-field", f"no record field {name!r}") for name in unknown]
                )
            draft = replace(draft, **dict(patch))
            updated = record_from_draft(
                draft,
                record_id=current.id,
                schema_version=current.schema_version,
                created_at=current.created_at,
                updated_at=self.clock(),
                archived=current.archived,
            )
            violations = self._validate(updated, self.schema_for(updated.schema_version))
            if violations:
                raise ValidationFailed(violations)
            self._commit_record(updated)
            return updated

    def set_archived(self, record_id: str, archived: bool, actor: str) -> DocumentRecord:
        self._require_expert(actor)
        self._require_writer()
        with self._mutex:
            current = self.read(record_id)
            updated = replace(current, archived=archived, updated_at=self.clock())
            self._commit_record(updated)
            return updated

    def export_xml(self, record_id: str) -> bytes:
        path = self._record_path(record_id)
        try:
            return path.read_bytes()
        except FileNotFoundError:
            raise NotFound(f"no record {record_id!r}") from None

    def import_xml(self, data: bytes) -> DocumentRecord:
        """Parse a record document against this store's schema history;
        does not persist (pair with ingest for that)."""
        return xmlio.parse_record(data, self.schema_for)

    def render_html_view(self, record_id: str) -> bytes:
        return render_html_view(self.read(record_id))

    # -- media assets ---------------------------------------------------------

    def add_media(self, data: bytes, filename: str, media_format: str, actor: str) -> tuple[ContentRef, bool]:
        """Copy asset bytes into media/ and return (ContentRef, created).
        An existing file with identical bytes is reused; a name clash with
        different bytes gets a numeric suffix."""
        self._require_expert(actor)
        self._require_writer()
        with self._mutex:
            stem, dot, ext = filename.partition(".")
            safe = slugify(stem, fallback="asset") + (dot + ext.lower() if dot else "")
            candidate = safe
            suffix = 2
            while True:
                path = self.layout.media_dir / candidate
                if not path.exists():
                    break
                if path.read_bytes() == data:
                    ref = ContentRef(f"media/{candidate}", media_format, sha256_hex(data), len(data))
                    return ref, False
                base, dot, ext = safe.partition(".")
                candidate = f"{base}-{suffix}" + (dot + ext if dot else "")
                suffix += 1
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_bytes(data)
            os.replace(tmp, path)
            _fsync_dir(self.layout.media_dir)
            return ContentRef(f"media/{candidate}", media_format, sha256_hex(data), len(data)), True

    def discard_media(self, href: str, actor: str) -> None:
        self._require_expert(actor)
        path = self.layout.data_dir / href
        if path.is_file() and path.parent == self.layout.media_dir:
            path.unlink()

    def resolve_asset(self, content: ContentRef) -> Path | None:
        if not content.href or "://" in content.href:
            return None
        path = (self.layout.data_dir / content.href).resolve()
        if not str(path).startswith(str(self.layout.data_dir.resolve()) + os.sep):
            return None
        return path if path.is_file() else None

    # -- index ----------------------------------------------------------------

    def rebuild_index(self) -> IndexSnapshot:
        """Derive the index from the record files alone and swap it in
        atomically; aborts (old index intact) on any unparseable file."""
        self._require_writer()
        with self._mutex:
            parsed: list[tuple[DocumentRecord, str]] = []
            for path in sorted(self.layout.records_dir.glob("*.xml")):
                data = path.read_bytes()
                try:
                    record = xmlio.parse_record(data, self.schema_for)
                except Exception as exc:
                    raise CorruptRecordFile(path.name, f"{path.name}: {exc}") from exc
                parsed.append((record, sha256_hex(data)))
            tmp_db = self.layout.index_dir / "index.sqlite.tmp"
            self._create_db(tmp_db)
            with closing(self._connect(tmp_db)) as conn:
                with conn:
                    for record, sha in parsed:
                        self._insert_rows(conn, record, sha)
            os.replace(tmp_db, self.layout.db_path)
            _fsync_dir(self.layout.index_dir)
            return self.snapshot()

    def snapshot(self) -> IndexSnapshot:
        with closing(self._connect()) as conn:
            records = tuple(
                sorted(
                    RecordRow(
                        id=row[0],
                        kind=row[1],
                        subkind=row[2],
                        title=row[3],
                        author=row[4],
                        capture_date=row[5],
                        schema_version=row[6],
                        archived=bool(row[7]),
                        content_href=row[8],
                        content_format=row[9],
                        created=row[10],
                        updated=row[11],
                        file_sha256=row[12],
                    )
                    for row in conn.execute("SELECT * FROM records")
                )
            )
            places = tuple(sorted((r[0], r[1]) for r in conn.execute("SELECT * FROM record_places")))
            periods = tuple(sorted((r[0], r[1]) for r in conn.execute("SELECT * FROM record_periods")))
            keywords = tuple(sorted((r[0], r[1]) for r in conn.execute("SELECT * FROM record_keywords")))
        return IndexSnapshot(records=records, places=places, periods=periods, keywords=keywords)

    def index_view(self) -> IndexView:
        snap = self.snapshot()
        view = IndexView(rows={row.id: row for row in snap.records}, places={}, periods={}, keywords={})
        for record_id, place_id in snap.places:
            view.places[record_id] = view.places.get(record_id, ()) + (place_id,)
        for record_id, period_id in snap.periods:
            view.periods[record_id] = view.periods.get(record_id, ()) + (period_id,)
        for record_id, keyword in snap.keywords:
            view.keywords[record_id] = view.keywords.get(record_id, ()) + (keyword,)
        return view

    # -- schema migration -------------------------------------------------------

    def apply_migration(self, plan: "MigrationPlan", actor: str) -> MetadataSchema:
        """Advance the store to the plan's schema version, rewriting every
        record at the outgoing version. All records are migrated and
        re-validated in memory first; nothing is written unless all pass,
        so a blocked migration leaves the store untouched."""
        from .evolution import MigrationPlan, migrate_tree  # local: avoids an import cycle

        assert isinstance(plan, MigrationPlan)
        self._require_expert(actor)
        self._require_writer()
        with self._mutex:
            active = self.active_schema()
            if plan.from_version != active.version or plan.to_version != active.version + 1:
                raise StalePlan(
                    f"plan migrates v{plan.from_version} to v{plan.to_version}, store is at v{active.version}"
                )
            vocabularies = self.vocabularies()
            periods = self.periods()
            places = self.places()
            migrated: list[DocumentRecord] = []
            blocked: list[str] = []
            for record_id in self.record_ids():
                record = self.read(record_id)
                if record.schema_version != plan.from_version:
                    continue
                next_tree = migrate_tree(record.attributes, record.kind.tag, plan.rules)
                next_record = replace(record, attributes=next_tree, schema_version=plan.to_version)
                if validate_record(next_record, plan.schema, vocabularies, periods, places):
                    blocked.append(record_id)
                else:
                    migrated.append(next_record)
            if blocked:
                raise MigrationBlocked(
                    f"migration would leave invalid records: {', '.join(blocked)}"
                )
            self.save_schema(plan.schema)
            for record in migrated:
                self._commit_record(record)
            return plan.schema
