"""Faceted retrieval over the relational index.

Search semantics: criteria of different facets intersect (AND), values
within one facet union (OR). A place criterion covers the place and all
its descendants; an epoch interval matches records referencing any period
overlapping it. Results come back in one canonical order (kind, capture
date ascending with undated records last, id) so pagination is stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidSpec, UnknownPeriod, UnknownPlace
from .model import KIND_TAGS, Period, period_overlaps, place_descendants
from .store import RecordRow, Store

DEFAULT_PAGE_SIZE = 50
MAX_PAGE_SIZE = 500


@dataclass(frozen=True)
class QuerySpec:
    """One search request; empty facets do not constrain."""

    kinds: tuple[str, ...] = ()
    places: tuple[str, ...] = ()
    epoch: tuple[int, int] | None = None
    keywords: tuple[str, ...] = ()
    authors: tuple[str, ...] = ()
    include_archived: bool = False
    page: int = 1
    page_size: int = DEFAULT_PAGE_SIZE


@dataclass(frozen=True)
class ResultItem:
    id: str
    kind: str
    subkind: str | None
    title: str
    author: str
    capture_date: str | None
    places: tuple[str, ...]
    periods: tuple[str, ...]
    keywords: tuple[str, ...]
    archived: bool


@dataclass(frozen=True)
class ResultPage:
    items: tuple[ResultItem, ...]
    total: int
    page: int
    page_size: int


@dataclass(frozen=True)
class RelatednessWeights:
    """Contribution of each shared reference to the relatedness score."""

    place: int = 2
    period: int = 2
    keyword: int = 1


@dataclass(frozen=True)
class RelatedItem:
    item: ResultItem
    score: int


def _canonical_key(row: RecordRow) -> tuple:
    return (
        KIND_TAGS.index(row.kind),
        row.capture_date is None,
        row.capture_date or "",
        row.id,
    )


def _chronological(periods: list[Period]) -> list[Period]:
    return sorted(periods, key=lambda p: (p.start_year, p.end_year, p.id))


class QueryEngine:
    """Reads the store's index; never mutates anything."""

    def __init__(self, store: Store):
        self.store = store

    def _item(self, row: RecordRow, view) -> ResultItem:
        return ResultItem(
            id=row.id,
            kind=row.kind,
            subkind=row.subkind,
            title=row.title,
            author=row.author,
            capture_date=row.capture_date,
            places=view.places.get(row.id, ()),
            periods=view.periods.get(row.id, ()),
            keywords=view.keywords.get(row.id, ()),
            archived=row.archived,
        )

    def list_facets(self) -> dict[str, list[str]]:
        """Every closed vocabulary a search form can offer, vocabulary
        facets first, then the derived kind/place/period facets."""
        out: dict[str, list[str]] = {}
        for vocab in self.store.vocabularies():
            out[vocab.facet_name] = list(vocab.terms)
        view = self.store.index_view()
        present = {row.kind for row in view.rows.values() if not row.archived}
        out["kinds"] = [tag for tag in KIND_TAGS if tag in present]
        out["places"] = [p.id for p in self.store.places()]
        out["periods"] = [p.id for p in _chronological(self.store.periods())]
        return out

    def search(self, spec: QuerySpec) -> ResultPage:
        if spec.page < 1:
            raise InvalidSpec(f"page must be >= 1, got {spec.page}")
        if not 1 <= spec.page_size <= MAX_PAGE_SIZE:
            raise InvalidSpec(f"pageSize must be in 1..{MAX_PAGE_SIZE}, got {spec.page_size}")
        for kind in spec.kinds:
            if kind not in KIND_TAGS:
                raise InvalidSpec(f"unknown document kind {kind!r}")

        places = self.store.places()
        place_scope: set[str] | None = None
        if spec.places:
            place_scope = set()
            for place_id in spec.places:
                place_scope |= place_descendants(place_id, places)

        overlapping: set[str] | None = None
        if spec.epoch is not None:
            lo, hi = spec.epoch
            overlapping = {
                p.id for p in self.store.periods() if period_overlaps(p, lo, hi)
            }

        view = self.store.index_view()
        matched: list[RecordRow] = []
        for row in view.rows.values():
            if row.archived and not spec.include_archived:
                continue
            if spec.kinds and row.kind not in spec.kinds:
                continue
            if place_scope is not None and not place_scope.intersection(view.places.get(row.id, ())):
                continue
            if overlapping is not None and not overlapping.intersection(view.periods.get(row.id, ())):
                continue
            if spec.keywords and not set(spec.keywords).intersection(view.keywords.get(row.id, ())):
                continue
            if spec.authors and row.author not in spec.authors:
                continue
            matched.append(row)
        matched.sort(key=_canonical_key)
        start = (spec.page - 1) * spec.page_size
        window = matched[start : start + spec.page_size]
        return ResultPage(
            items=tuple(self._item(row, view) for row in window),
            total=len(matched),
            page=spec.page,
            page_size=spec.page_size,
        )

    def browse_by_history(self, period_id: str) -> list[ResultItem]:
        """Everything recorded for one period, in canonical order."""
        if period_id not in {p.id for p in self.store.periods()}:
            raise UnknownPeriod(f"period {period_id!r} does not exist")
        view = self.store.index_view()
        rows = [
            row
            for row in view.rows.values()
            if not row.archived and period_id in view.periods.get(row.id, ())
        ]
        rows.sort(key=_canonical_key)
        return [self._item(row, view) for row in rows]

    def browse_by_place(self, place_id: str) -> list[ResultItem]:
        """Everything recorded for one place or any of its sub-places."""
        scope = place_descendants(place_id, self.store.places())
        view = self.store.index_view()
        rows = [
            row
            for row in view.rows.values()
            if not row.archived and scope.intersection(view.places.get(row.id, ()))
        ]
        rows.sort(key=_canonical_key)
        return [self._item(row, view) for row in rows]

    def related_documents(
        self,
        record_id: str,
        limit: int = 10,
        weights: RelatednessWeights = RelatednessWeights(),
    ) -> list[RelatedItem]:
        """Records sharing references with the given one, best first.
        Score: shared places and periods count double, shared subject
        keywords single; zero-scoring records never appear."""
        view = self.store.index_view()
        if record_id not in view.rows:
            from .errors import NotFound

            raise NotFound(f"no record {record_id!r}")
        base_places = set(view.places.get(record_id, ()))
        base_periods = set(view.periods.get(record_id, ()))
        base_keywords = set(view.keywords.get(record_id, ()))
        scored: list[tuple[int, RecordRow]] = []
        for row in view.rows.values():
            if row.id == record_id or row.archived:
                continue
            score = (
                weights.place * len(base_places.intersection(view.places.get(row.id, ())))
                + weights.period * len(base_periods.intersection(view.periods.get(row.id, ())))
                + weights.keyword * len(base_keywords.intersection(view.keywords.get(row.id, ())))
            )
            if score > 0:
                scored.append((score, row))
        scored.sort(key=lambda pair: (-pair[0],) + _canonical_key(pair[1]))
        return [RelatedItem(self._item(row, view), score) for score, row in scored[:limit]]
