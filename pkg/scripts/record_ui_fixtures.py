"""Record HTTP request/response fixtures for the web UI test suite.

Drives the service in-process against a clock-pinned demo store and
writes every exchange the UI relies on into frontend/tests/fixtures/:
response bodies verbatim, plus the exact request bodies and query
strings the service accepted. The UI tests assert their own request
builders reproduce these bytes.
"""

import argparse
import json
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from sia.fixture import DEMO_EXPERT, build_demo_store
from sia.service import create_app

CLOCK = lambda: datetime(2026, 1, 15, 9, 30, 0, tzinfo=timezone.utc)

SEARCH_QUERY = "kind=photo&place=yard&periodFrom=1080&periodTo=1170"

COMPOSE_BODY = {"places": ["yard", "chapel", "great-hall"], "periods": ["p1100", "p1150"]}

MONTAGE_BODY = {
    "entries": [
        {"recordId": "yard-north-wall-photo", "opacity": 0.7},
        {"recordId": "yard-from-the-keep", "opacity": 0.45},
    ]
}

UPDATE_BODY = {
    "title": "Yard north wall photo (reframed)",
    "subject": ["masonry", "defence-works", "foundations"],
    "attributes": {"exposure": "1/250", "condition": "good"},
}

CREATE_BODY = {
    "kind": "photo",
    "title": "Gate passage photo",
    "author": "K. Weber",
    "provenance": "site survey archive",
    "subject": ["masonry"],
    "places": ["yard"],
    "periods": ["p1150"],
    "captureDate": "2001-06-30",
    "content": {
        "href": "https://archive.example/gate-passage.png",
        "format": "image/png",
        "checksum": "cd" * 32,
        "size": 2048,
    },
    "attributes": {"exposure": "1/60"},
}


def record_fixtures(out_dir: Path) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[str] = []

    def save(name: str, data: bytes) -> None:
        (out_dir / name).write_bytes(data)
        written.append(name)

    def wire(payload) -> bytes:
        """The exact bytes that go on the wire: compact JSON, key order as
        written here, which the UI serializers must reproduce."""
        return json.dumps(payload, separators=(",", ":")).encode("utf-8")

    json_headers = {"Content-Type": "application/json"}

    with tempfile.TemporaryDirectory() as tmp:
        store = build_demo_store(Path(tmp) / "demo", clock=CLOCK)
        try:
            app = create_app(store=store, clock=CLOCK)
            with TestClient(app) as client:
                login_body = wire({"username": DEMO_EXPERT[0], "password": DEMO_EXPERT[1]})
                response = client.post("/auth/login", content=login_body, headers=json_headers)
                response.raise_for_status()
                token = response.json()["token"]
                expert = {"Authorization": f"Bearer {token}"}
                save("login_body.json", login_body)
                sanitized = dict(response.json(), token="TOKEN")
                save("login.json", wire(sanitized))

                for name, path in (
                    ("search.json", f"/records?{SEARCH_QUERY}"),
                    ("record.json", "/records/yard-north-wall-photo"),
                    ("related.json", "/records/yard-north-wall-photo/related"),
                    ("facets.json", "/facets"),
                    ("periods.json", "/periods"),
                    ("places.json", "/places"),
                    ("browse_history.json", "/browse/history/p1100"),
                    ("health.json", "/health"),
                ):
                    response = client.get(path)
                    response.raise_for_status()
                    save(name, response.content)

                save((out_dir / "search_query.txt").name, SEARCH_QUERY.encode() + b"\n")

                response = client.get("/schema", headers=expert)
                response.raise_for_status()
                save("schema.json", response.content)

                compose_body = wire(COMPOSE_BODY)
                save("compose_body.json", compose_body)
                response = client.post("/compose/model", content=compose_body, headers=json_headers)
                response.raise_for_status()
                save("compose_model.x3d", response.content)
                save(
                    "compose_model_headers.json",
                    wire(
                        {
                            "warnings": json.loads(response.headers["X-Composition-Warnings"]),
                            "legend": json.loads(response.headers["X-Composition-Legend"]),
                        }
                    ),
                )

                response = client.post("/compose/plan", content=compose_body, headers=json_headers)
                response.raise_for_status()
                save("compose_plan.svg", response.content)
                save(
                    "compose_plan_headers.json",
                    wire(
                        {
                            "warnings": json.loads(response.headers["X-Composition-Warnings"]),
                            "legend": json.loads(response.headers["X-Composition-Legend"]),
                        }
                    ),
                )

                montage_body = wire(MONTAGE_BODY)
                save("montage_body.json", montage_body)
                response = client.post("/compose/montage", content=montage_body, headers=json_headers)
                response.raise_for_status()
                save("montage.svg", response.content)

                update_body = wire(UPDATE_BODY)
                save("update_body.json", update_body)
                response = client.put(
                    "/records/yard-north-wall-photo",
                    content=update_body,
                    headers={**expert, **json_headers},
                )
                response.raise_for_status()
                save("updated_record.json", response.content)

                create_body = wire(CREATE_BODY)
                save("create_body.json", create_body)
                response = client.post(
                    "/records", content=create_body, headers={**expert, **json_headers}
                )
                assert response.status_code == 201, response.text
                save("created_record.json", response.content)
        finally:
            store.close()
    return written


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out",
        default=str(Path(__file__).resolve().parent.parent / "frontend" / "tests" / "fixtures"),
        help="fixture directory",
    )
    args = parser.parse_args()
    written = record_fixtures(Path(args.out))
    for name in written:
        print(name)
    print(f"{len(written)} fixtures -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
