"""Site information archive: canonical XML records with a mirrored query
index, faceted search, on-the-fly 3D scenes and layered plan drawings."""

from .errors import SiaError
from .model import (
    AttributeNode,
    AttributeValueTree,
    ContentRef,
    DocumentKind,
    DocumentRecord,
    MetadataSchema,
    Period,
    Place,
    RecordDraft,
    ValueType,
    Violation,
    Vocabulary,
)
from .query import QueryEngine, QuerySpec, ResultPage
from .store import EXPERT, VISITOR, Store

__all__ = [
    "AttributeNode",
    "AttributeValueTree",
    "ContentRef",
    "DocumentKind",
    "DocumentRecord",
    "EXPERT",
    "MetadataSchema",
    "Period",
    "Place",
    "QueryEngine",
    "QuerySpec",
    "RecordDraft",
    "ResultPage",
    "SiaError",
    "Store",
    "VISITOR",
    "ValueType",
    "Violation",
    "Vocabulary",
]
