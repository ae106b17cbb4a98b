"""HTTP face of the archive.

Read endpoints are public; anything that mutates the store (or inspects
the schema machinery) needs a bearer token belonging to an expert account.
Tokens come from POST /auth/login against a JSON accounts file of salted
sha256 password digests and expire after twelve hours.

Composition endpoints return the raw X3D / SVG document as the body;
non-fatal composer warnings and the period color legend travel in
``X-Composition-Warnings`` / ``X-Composition-Legend`` response headers so
the payload stays a pure, viewer-ready document.
"""

from __future__ import annotations

import hashlib
import json
import mimetypes
import secrets
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Any, Callable

from fastapi import Body, FastAPI, Header, Query, Request, Response
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import jsonio
from .errors import (
    CorruptRecordFile,
    EmptyComposition,
    InvalidRequest,
    MigrationBlocked,
    NotFound,
    PermissionDenied,
    SiaError,
    StalePlan,
    StorageFailure,
    StoreLocked,
    UnknownPeriod,
    UnknownPlace,
    ValidationFailed,
)
from .evolution import propose_schema
from .plans import MontageEntry, MontageRequest, compose_photomontage, compose_plan, serialize_plan
from .query import QueryEngine, QuerySpec
from .scene import CompositionRequest, compose_model, format_color, serialize_x3d
from .store import EXPERT, Store

TOKEN_LIFETIME = timedelta(hours=12)

X3D_MEDIA_TYPE = "model/x3d+xml"
SVG_MEDIA_TYPE = "image/svg+xml"

_STATUS_BY_ERROR: tuple[tuple[type[SiaError], int], ...] = (
    (ValidationFailed, 422),
    (EmptyComposition, 422),
    (PermissionDenied, 403),
    (NotFound, 404),
    (UnknownPlace, 404),
    (UnknownPeriod, 404),
    (StalePlan, 409),
    (StoreLocked, 409),
    (MigrationBlocked, 409),
    (CorruptRecordFile, 500),
    (StorageFailure, 500),
)


def status_for(error: SiaError) -> int:
    for error_type, status in _STATUS_BY_ERROR:
        if isinstance(error, error_type):
            return status
    return 400


def hash_password(password: str, salt: str = "") -> str:
    return hashlib.sha256((salt + password).encode("utf-8")).hexdigest()


def write_account(path: str | Path, username: str, password: str, role: str) -> None:
    """Add or replace one account in the accounts file (created if absent)."""
    path = Path(path)
    accounts: dict[str, Any] = {}
    if path.exists():
        accounts = json.loads(path.read_text("utf-8"))
    salt = secrets.token_hex(8)
    accounts[username] = {"salt": salt, "passwordSha256": hash_password(password, salt), "role": role}
    path.write_text(json.dumps(accounts, indent=2, sort_keys=True) + "\n", "utf-8")


class TokenTable:
    """In-memory bearer tokens; a restart logs everyone out."""

    def __init__(self, clock: Callable[[], datetime]):
        self.clock = clock
        self._tokens: dict[str, tuple[str, str, datetime]] = {}

    def issue(self, username: str, role: str) -> tuple[str, datetime]:
        token = secrets.token_urlsafe(32)
        expires = self.clock() + TOKEN_LIFETIME
        self._tokens[token] = (username, role, expires)
        return token, expires

    def resolve(self, token: str) -> tuple[str, str] | None:
        entry = self._tokens.get(token)
        if entry is None:
            return None
        username, role, expires = entry
        if expires <= self.clock():
            del self._tokens[token]
            return None
        return username, role

    def revoke(self, token: str) -> None:
        self._tokens.pop(token, None)


def create_app(
    data_dir: str | Path | None = None,
    *,
    store: Store | None = None,
    accounts_path: str | Path | None = None,
    ui_dir: str | Path | None = None,
    clock: Callable[[], datetime] | None = None,
) -> FastAPI:
    """Build the application around one writer store. Pass either an open
    store or a data directory to open."""
    if store is None:
        if data_dir is None:
            raise ValueError("create_app needs a store or a data directory")
        store = Store.open(data_dir, writer=True, clock=clock)
    clock = clock or (lambda: datetime.now(timezone.utc))
    accounts_file = Path(accounts_path) if accounts_path else store.layout.data_dir / "accounts.json"
    tokens = TokenTable(clock)
    engine = QueryEngine(store)

    app = FastAPI(title="site archive", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.store = store

    @app.exception_handler(SiaError)
    def handle_domain_error(request: Request, error: SiaError) -> JSONResponse:
        payload: dict[str, Any] = {"error": {"code": error.code, "message": error.message}}
        if isinstance(error, ValidationFailed):
            payload["error"]["violations"] = jsonio.violations_to_json(error.violations)
        return JSONResponse(payload, status_code=status_for(error))

    def load_accounts() -> dict[str, Any]:
        if not accounts_file.exists():
            return {}
        try:
            return json.loads(accounts_file.read_text("utf-8"))
        except (OSError, json.JSONDecodeError):
            return {}

    def actor_from_header(authorization: str | None) -> tuple[str, str] | None:
        if not authorization or not authorization.startswith("Bearer "):
            return None
        return tokens.resolve(authorization[len("Bearer ") :])

    def require_expert(authorization: str | None) -> str:
        actor = actor_from_header(authorization)
        if actor is None:
            raise _unauthorized()
        username, role = actor
        if role != EXPERT:
            raise PermissionDenied(f"account {username!r} is not an expert")
        return EXPERT

    # -- auth ---------------------------------------------------------------

    @app.post("/auth/login")
    def login(payload: dict = Body(...)) -> JSONResponse:
        username = payload.get("username")
        password = payload.get("password")
        account = load_accounts().get(username) if isinstance(username, str) else None
        if (
            account is None
            or not isinstance(password, str)
            or hash_password(password, account.get("salt", "")) != account.get("passwordSha256")
        ):
            raise _unauthorized("unknown account or wrong password")
        role = account.get("role", "visitor")
        token, expires = tokens.issue(username, role)
        return JSONResponse(
            {"token": token, "role": role, "expiresAt": expires.isoformat().replace("+00:00", "Z")}
        )

    @app.post("/auth/logout")
    def logout(authorization: str | None = Header(default=None)) -> dict:
        if authorization and authorization.startswith("Bearer "):
            tokens.revoke(authorization[len("Bearer ") :])
        return {"ok": True}

    # -- records --------------------------------------------------------------

    @app.get("/records")
    def search(
        kind: list[str] = Query(default=[]),
        place: list[str] = Query(default=[]),
        keyword: list[str] = Query(default=[]),
        author: list[str] = Query(default=[]),
        periodFrom: int | None = Query(default=None),
        periodTo: int | None = Query(default=None),
        includeArchived: bool = Query(default=False),
        page: int = Query(default=1),
        pageSize: int = Query(default=50),
    ) -> dict:
        epoch = None
        if periodFrom is not None or periodTo is not None:
            epoch = (
                periodFrom if periodFrom is not None else -9999,
                periodTo if periodTo is not None else 9999,
            )
        spec = QuerySpec(
            kinds=tuple(kind),
            places=tuple(place),
            epoch=epoch,
            keywords=tuple(keyword),
            authors=tuple(author),
            include_archived=includeArchived,
            page=page,
            page_size=pageSize,
        )
        return jsonio.page_to_json(engine.search(spec))

    @app.post("/records", status_code=201)
    def create_record(
        payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        draft = jsonio.draft_from_json(payload, store.active_schema())
        return jsonio.record_to_json(store.ingest(draft, actor))

    @app.get("/records/{record_id}")
    def read_record(record_id: str) -> dict:
        return jsonio.record_to_json(store.read(record_id))

    @app.put("/records/{record_id}")
    def update_record(
        record_id: str, payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        current = store.read(record_id)
        patch = jsonio.patch_from_json(payload, current, store.schema_for(current.schema_version))
        return jsonio.record_to_json(store.update(record_id, patch, actor))

    @app.delete("/records/{record_id}")
    def archive_record(record_id: str, authorization: str | None = Header(default=None)) -> dict:
        actor = require_expert(authorization)
        return jsonio.record_to_json(store.set_archived(record_id, True, actor))

    @app.post("/records/{record_id}/restore")
    def restore_record(record_id: str, authorization: str | None = Header(default=None)) -> dict:
        actor = require_expert(authorization)
        return jsonio.record_to_json(store.set_archived(record_id, False, actor))

    @app.get("/records/{record_id}/xml")
    def record_xml(record_id: str) -> Response:
        return Response(content=store.export_xml(record_id), media_type="application/xml")

    @app.get("/records/{record_id}/view")
    def record_view(record_id: str) -> HTMLResponse:
        return HTMLResponse(content=store.render_html_view(record_id))

    @app.get("/records/{record_id}/related")
    def record_related(record_id: str, limit: int = Query(default=10)) -> list:
        return jsonio.related_to_json(engine.related_documents(record_id, limit=limit))

    # -- facets and browsing ----------------------------------------------------

    @app.get("/facets")
    def facets() -> dict:
        return engine.list_facets()

    @app.get("/browse/history/{period_id}")
    def browse_history(period_id: str) -> list:
        return [jsonio.item_to_json(item) for item in engine.browse_by_history(period_id)]

    @app.get("/browse/place/{place_id}")
    def browse_place(place_id: str) -> list:
        return [jsonio.item_to_json(item) for item in engine.browse_by_place(place_id)]

    # -- reference entities -------------------------------------------------------

    @app.get("/periods")
    def list_periods() -> list:
        return [jsonio.period_to_json(p) for p in store.periods()]

    @app.post("/periods")
    def upsert_period(
        payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        period = jsonio.period_from_json(payload)
        store.upsert_period(period, actor)
        return jsonio.period_to_json(period)

    @app.get("/places")
    def list_places() -> list:
        return [jsonio.place_to_json(p) for p in store.places()]

    @app.post("/places")
    def upsert_place(
        payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        place = jsonio.place_from_json(payload)
        store.upsert_place(place, actor)
        return jsonio.place_to_json(place)

    @app.get("/vocabularies")
    def list_vocabularies() -> list:
        return [jsonio.vocabulary_to_json(v) for v in store.vocabularies()]

    @app.post("/vocabularies")
    def set_vocabulary(
        payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        vocab = jsonio.vocabulary_from_json(payload)
        store.set_vocabulary(vocab, actor)
        return jsonio.vocabulary_to_json(vocab)

    @app.post("/vocabularies/{facet_name}/terms")
    def add_term(
        facet_name: str, payload: dict = Body(...), authorization: str | None = Header(default=None)
    ) -> dict:
        actor = require_expert(authorization)
        term = payload.get("term")
        if not isinstance(term, str) or not term:
            raise InvalidRequest("body needs a non-empty term")
        store.add_vocabulary_term(facet_name, term, actor)
        vocab = next(v for v in store.vocabularies() if v.facet_name == facet_name)
        return jsonio.vocabulary_to_json(vocab)

    # -- composition ----------------------------------------------------------

    def _composition_request(payload: dict) -> CompositionRequest:
        places = payload.get("places")
        periods = payload.get("periods")
        if not isinstance(places, list) or not isinstance(periods, list):
            raise InvalidRequest("body needs places and periods lists")
        return CompositionRequest(places=tuple(places), periods=tuple(periods))

    def _composition_headers(warnings, legend) -> dict[str, str]:
        return {
            "X-Composition-Warnings": json.dumps(list(warnings)),
            "X-Composition-Legend": json.dumps(
                [[period_id, format_color(color)] for period_id, color in legend]
            ),
        }

    @app.post("/compose/model")
    def compose_model_endpoint(payload: dict = Body(...)) -> Response:
        scene = compose_model(store, _composition_request(payload))
        return Response(
            content=serialize_x3d(scene),
            media_type=X3D_MEDIA_TYPE,
            headers=_composition_headers(scene.warnings, scene.legend),
        )

    @app.post("/compose/plan")
    def compose_plan_endpoint(payload: dict = Body(...)) -> Response:
        doc = compose_plan(store, _composition_request(payload))
        legend = tuple((period_id, color) for period_id, _label, color in doc.legend)
        return Response(
            content=serialize_plan(doc),
            media_type=SVG_MEDIA_TYPE,
            headers=_composition_headers(doc.warnings, legend),
        )

    @app.post("/compose/montage")
    def compose_montage_endpoint(payload: dict = Body(...)) -> Response:
        entries = payload.get("entries")
        if not isinstance(entries, list):
            raise InvalidRequest("body needs an entries list")
        request = MontageRequest(
            entries=tuple(
                MontageEntry(
                    record_id=str(entry.get("recordId", "")),
                    opacity=float(entry.get("opacity", 0.5)),
                )
                for entry in entries
                if isinstance(entry, dict)
            )
        )
        return Response(content=compose_photomontage(store, request), media_type=SVG_MEDIA_TYPE)

    # -- schema evolution --------------------------------------------------------

    @app.get("/schema")
    def get_schema(authorization: str | None = Header(default=None)) -> dict:
        require_expert(authorization)
        return jsonio.schema_to_json(store.active_schema())

    @app.get("/schema/versions")
    def get_schema_versions(authorization: str | None = Header(default=None)) -> list:
        require_expert(authorization)
        return store.schema_versions()

    @app.post("/schema")
    def propose(payload: dict = Body(...), authorization: str | None = Header(default=None)) -> dict:
        require_expert(authorization)
        delta = jsonio.delta_from_json(payload)
        plan = propose_schema(store.active_schema(), delta, store.vocabularies())
        return jsonio.plan_to_json(plan)

    @app.post("/schema/migrations")
    def migrate(payload: dict = Body(...), authorization: str | None = Header(default=None)) -> dict:
        actor = require_expert(authorization)
        plan = jsonio.plan_from_json(payload)
        schema = store.apply_migration(plan, actor)
        return {"version": schema.version}

    # -- admin ---------------------------------------------------------------

    @app.post("/admin/reindex")
    def reindex(authorization: str | None = Header(default=None)) -> dict:
        require_expert(authorization)
        snapshot = store.rebuild_index()
        return {"records": len(snapshot.records)}

    @app.get("/admin/validate")
    def validate(authorization: str | None = Header(default=None)) -> dict:
        require_expert(authorization)
        report = store.validate_store()
        return {
            record_id: jsonio.violations_to_json(violations)
            for record_id, violations in report.items()
        }

    # -- binary assets -----------------------------------------------------------

    @app.get("/media/{ref:path}")
    def media(ref: str) -> Response:
        candidate = (store.layout.media_dir / ref).resolve()
        if candidate.is_file() and str(candidate).startswith(str(store.layout.media_dir.resolve())):
            media_type = mimetypes.guess_type(candidate.name)[0] or "application/octet-stream"
            return Response(content=candidate.read_bytes(), media_type=media_type)
        record = store.read(ref)  # raises NotFound for unknown refs
        asset = store.resolve_asset(record.content)
        if asset is None:
            raise NotFound(f"record {ref!r} has no stored asset")
        return Response(content=asset.read_bytes(), media_type=record.content.media_format)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "records": len(store.record_ids()),
            "schemaVersion": store.active_schema().version,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _unauthorized(message: str = "authentication required"):
    from fastapi import HTTPException

    return HTTPException(
        status_code=401,
        detail={"error": {"code": "unauthorized", "message": message}},
        headers={"WWW-Authenticate": "Bearer"},
    )
