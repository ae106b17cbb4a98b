"""Shared fixtures and helpers for the suite.

Two things live here besides the store fixtures:

* a deterministic synthetic corpus builder (seeded ``random.Random``, so a
  failing seed reproduces exactly), and
* an independent query oracle that re-reads every record file with plain
  ElementTree and re-implements the search semantics from first principles.
  The oracle deliberately shares no code with the query engine; engine and
  oracle agreeing on random inputs is the strongest signal the suite has.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from datetime import date
from decimal import Decimal
from pathlib import Path
from xml.etree import ElementTree as ET

import pytest

from sia.fixture import build_demo_store
from sia.model import (
    PLAN_SUBKINDS,
    AttributeNode,
    AttributeValueTree,
    ContentRef,
    DocumentKind,
    MetadataSchema,
    Period,
    Place,
    RecordDraft,
    ValueType,
    Vocabulary,
)
from sia.store import EXPERT, Store

# ---------------------------------------------------------------------------
# reference data for the synthetic corpus
# ---------------------------------------------------------------------------

CORPUS_PLACES = (
    Place("site", "Excavation site"),
    Place("north-wing", "North wing", parent_id="site"),
    Place("south-wing", "South wing", parent_id="site"),
    Place("tower", "Corner tower", parent_id="north-wing"),
    Place("cellar", "Vaulted cellar", parent_id="south-wing"),
    Place("yard", "Inner yard", parent_id="site", footprint=((0.0, 0.0), (40.0, 0.0), (40.0, 25.0), (0.0, 25.0))),
    Place("gatehouse", "Gatehouse"),
)

CORPUS_PERIODS = (
    Period("early", "Early phase", 900, 1000),
    Period("high", "High phase", 980, 1150),
    Period("late", "Late phase", 1140, 1300),
    Period("modern", "Modern repairs", 1800, 1950),
)

CORPUS_KEYWORDS = ("masonry", "pottery", "timber", "bones", "metalwork", "plaster")
CORPUS_AUTHORS = ("A. Stone", "B. Mercer", "C. Vogel", "survey team")
CORPUS_CONDITIONS = ("good", "fair", "poor")

CORPUS_VOCABULARIES = (
    Vocabulary("subject", CORPUS_KEYWORDS),
    Vocabulary("author", CORPUS_AUTHORS),
    Vocabulary("condition", CORPUS_CONDITIONS),
)

CORPUS_SCHEMA = MetadataSchema(
    version=1,
    per_kind={
        "photo": (
            AttributeNode("exposure", ValueType.TEXT),
            AttributeNode("condition", ValueType.ENUM, facet="condition"),
            AttributeNode(
                "camera",
                ValueType.GROUP,
                children=(
                    AttributeNode("model", ValueType.TEXT),
                    AttributeNode("focalLength", ValueType.DECIMAL),
                ),
            ),
        ),
        "model3d": (
            AttributeNode("software", ValueType.TEXT),
            AttributeNode("polygonCount", ValueType.INTEGER),
        ),
        "text": (
            AttributeNode("language", ValueType.TEXT, required=True),
            AttributeNode("pageCount", ValueType.INTEGER),
        ),
        "drawing": (AttributeNode("medium", ValueType.TEXT, repeatable=True),),
    },
)


def install_references(store: Store) -> None:
    """Replace the empty seed schema with the corpus one and load the
    reference entities; only valid on a store without records."""
    assert not store.record_ids()
    store.save_schema(CORPUS_SCHEMA)
    for vocab in CORPUS_VOCABULARIES:
        store.set_vocabulary(vocab, EXPERT)
    for period in CORPUS_PERIODS:
        store.upsert_period(period, EXPERT)
    for place in CORPUS_PLACES:
        store.upsert_place(place, EXPERT)


# ---------------------------------------------------------------------------
# synthetic records
# ---------------------------------------------------------------------------

_WORDS = (
    "wall", "arch", "vault", "hearth", "beam", "shard", "lintel", "post",
    "floor", "mortar", "stair", "buttress", "window", "gate", "well",
)


def _title(rng: random.Random, i: int) -> str:
    return f"{rng.choice(_WORDS).capitalize()} {rng.choice(_WORDS)} {i}"


def _attributes(rng: random.Random, kind_tag: str) -> AttributeValueTree:
    values: dict = {}
    if kind_tag == "photo":
        if rng.random() < 0.7:
            values["exposure"] = f"1/{rng.choice((60, 125, 250))}"
        if rng.random() < 0.5:
            values["condition"] = rng.choice(CORPUS_CONDITIONS)
        if rng.random() < 0.3:
            values["camera"] = {
                "model": "field camera",
                "focalLength": Decimal(str(rng.choice(("35.0", "50.0", "28.5")))),
            }
    elif kind_tag == "model3d":
        values["software"] = rng.choice(("meshkit", "scanforge"))
        if rng.random() < 0.8:
            values["polygonCount"] = rng.randrange(100, 90000)
    elif kind_tag == "text":
        values["language"] = rng.choice(("de", "en", "fr"))
        if rng.random() < 0.6:
            values["pageCount"] = rng.randrange(1, 40)
    elif kind_tag == "drawing" and rng.random() < 0.6:
        values["medium"] = rng.sample(("ink", "pencil", "chalk"), rng.randrange(1, 3))
    return AttributeValueTree(values=values)


def random_draft(rng: random.Random, i: int) -> RecordDraft:
    """One valid draft; content points at an external URL so no asset file
    is needed (external hrefs are taken on faith)."""
    kind_tag = rng.choice(("photo", "photo", "drawing", "text", "rasterPlan", "vectorPlan", "model3d"))
    subkind = rng.choice(PLAN_SUBKINDS) if kind_tag == "rasterPlan" else None
    capture = None
    if rng.random() < 0.6:
        capture = date(rng.randrange(1990, 2010), rng.randrange(1, 13), rng.randrange(1, 28))
    coords = None
    if rng.random() < 0.3:
        coords = (round(rng.uniform(-50, 50), 1), round(rng.uniform(-50, 50), 1), 0.0)
    return RecordDraft(
        kind=DocumentKind(kind_tag, subkind),
        title=_title(rng, i),
        author=rng.choice(CORPUS_AUTHORS) if rng.random() < 0.9 else "",
        provenance=rng.choice(("field survey", "archive box 12", "")),
        subject_keywords=tuple(rng.sample(CORPUS_KEYWORDS, rng.randrange(0, 4))),
        place_refs=tuple(rng.sample([p.id for p in CORPUS_PLACES], rng.randrange(0, 3))),
        period_refs=tuple(rng.sample([p.id for p in CORPUS_PERIODS], rng.randrange(0, 3))),
        content=ContentRef(
            href=f"https://archive.example/assets/{i}.bin",
            media_format="application/octet-stream",
            checksum="ab" * 32,
            byte_size=rng.randrange(100, 10_000),
        ),
        attributes=_attributes(rng, kind_tag),
        capture_date=capture,
        coordinates=coords,
    )


def build_corpus(store: Store, n: int, seed: int) -> list[str]:
    """Install references and ingest ``n`` deterministic records; returns
    the ids in ingest order."""
    install_references(store)
    rng = random.Random(seed)
    ids = []
    for i in range(n):
        record = store.ingest(random_draft(rng, i), EXPERT)
        ids.append(record.id)
    return ids


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

KIND_ORDER = ("photo", "drawing", "text", "rasterPlan", "vectorPlan", "model3d")


@dataclass
class OracleRecord:
    id: str
    kind: str
    author: str
    capture_date: str | None
    places: set[str]
    periods: set[str]
    keywords: set[str]
    archived: bool


@dataclass
class OracleWorld:
    """Everything the oracle read straight off the disk."""

    records: list[OracleRecord]
    period_spans: dict[str, tuple[int, int]]
    children: dict[str, list[str]]
    place_ids: set[str]


def scan_store(data_dir: Path) -> OracleWorld:
    records = []
    for path in sorted((data_dir / "records").glob("*.xml")):
        root = ET.parse(path).getroot()
        capture_el = root.find("capture-date")
        audit = root.find("audit")
        archived_el = audit.find("archived") if audit is not None else None
        records.append(
            OracleRecord(
                id=root.get("id", ""),
                kind=root.get("kind", ""),
                author=(root.findtext("author") or ""),
                capture_date=capture_el.text if capture_el is not None else None,
                places={el.get("id", "") for el in root.findall("places/ref")},
                periods={el.get("id", "") for el in root.findall("periods/ref")},
                keywords={el.text or "" for el in root.findall("subject/keyword")},
                archived=archived_el is not None and archived_el.text == "true",
            )
        )
    period_spans = {
        el.get("id", ""): (int(el.get("start", "0")), int(el.get("end", "0")))
        for el in ET.parse(data_dir / "periods.xml").getroot().findall("period")
    }
    children: dict[str, list[str]] = {}
    place_ids: set[str] = set()
    for el in ET.parse(data_dir / "places.xml").getroot().findall("place"):
        place_ids.add(el.get("id", ""))
        parent = el.get("parent")
        if parent is not None:
            children.setdefault(parent, []).append(el.get("id", ""))
    return OracleWorld(records, period_spans, children, place_ids)


def oracle_place_closure(world: OracleWorld, roots: tuple[str, ...]) -> set[str]:
    out: set[str] = set()
    frontier = list(roots)
    while frontier:
        current = frontier.pop()
        if current in out:
            continue
        out.add(current)
        frontier.extend(world.children.get(current, ()))
    return out


def oracle_sort_key(rec: OracleRecord):
    return (KIND_ORDER.index(rec.kind), rec.capture_date is None, rec.capture_date or "", rec.id)


def oracle_search(world: OracleWorld, spec) -> list[OracleRecord]:
    """Full matching result list (before pagination), canonical order."""
    place_scope = oracle_place_closure(world, spec.places) if spec.places else None
    period_scope = None
    if spec.epoch is not None:
        lo, hi = spec.epoch
        period_scope = {
            pid
            for pid, (start, end) in world.period_spans.items()
            if max(start, lo) <= min(end, hi)
        }
    out = []
    for rec in world.records:
        if rec.archived and not spec.include_archived:
            continue
        if spec.kinds and rec.kind not in spec.kinds:
            continue
        if place_scope is not None and not (rec.places & place_scope):
            continue
        if period_scope is not None and not (rec.periods & period_scope):
            continue
        if spec.keywords and not (rec.keywords & set(spec.keywords)):
            continue
        if spec.authors and rec.author not in spec.authors:
            continue
        out.append(rec)
    out.sort(key=oracle_sort_key)
    return out


def random_spec(rng: random.Random):
    """A random QuerySpec hitting every facet combination, including the
    unconstrained one."""
    from sia.query import QuerySpec

    kinds = tuple(rng.sample(KIND_ORDER, rng.randrange(0, 3)))
    places = tuple(rng.sample([p.id for p in CORPUS_PLACES], rng.randrange(0, 3)))
    epoch = None
    if rng.random() < 0.5:
        lo = rng.randrange(850, 1900)
        epoch = (lo, lo + rng.randrange(0, 400))
    keywords = tuple(rng.sample(CORPUS_KEYWORDS, rng.randrange(0, 3)))
    authors = tuple(rng.sample(CORPUS_AUTHORS, rng.randrange(0, 2)))
    return QuerySpec(
        kinds=kinds,
        places=places,
        epoch=epoch,
        keywords=keywords,
        authors=authors,
        include_archived=rng.random() < 0.3,
        page=rng.randrange(1, 4),
        page_size=rng.choice((3, 10, 50)),
    )


# ---------------------------------------------------------------------------
# fixtures
# ---------------------------------------------------------------------------

@pytest.fixture()
def store(tmp_path):
    """A freshly initialized empty store, open for writing."""
    with Store.init(tmp_path / "data") as s:
        yield s


@pytest.fixture()
def refs_store(store):
    """Empty store with the corpus reference entities and schema loaded."""
    install_references(store)
    return store


@pytest.fixture()
def demo_store(tmp_path):
    """The bundled demonstration site (18 records, 4 places, 3 periods)."""
    with build_demo_store(tmp_path / "demo") as s:
        yield s
