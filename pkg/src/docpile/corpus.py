"""Corpus ingestion, lookup, keyword filtering, and metadata grouping.

The corpus is closed: documents are ingested once, indexed, and never
edited. A CorpusIndex is immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import json
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from .jsonutil import ndjson_line, read_ndjson

logger = logging.getLogger(__name__)

NDJSON_FORMAT = "ndjson"
TEXT_DIR_FORMAT = "txt-dir"

REQUIRED_FIELDS = ("id", "title", "text")
OPTIONAL_FIELDS = ("date", "topic")

GROUP_KEYS = ("date", "name", "length", "topic")
UNKNOWN_GROUP = "unknown"


class CorpusError(ValueError):
    """Base class for corpus ingestion failures."""


class CorpusFormatError(CorpusError):
    """A record failed to parse; the message carries its position."""


class DuplicateDocumentError(CorpusError):
    """Two records share a document id."""


class TopicProviderError(CorpusError):
    """A topic provider failed while labeling a document."""


@dataclass(frozen=True)
class Document:
    """One corpus record; the unit of piling and provenance."""

    id: str
    title: str
    body: str
    length: int
    date: str | None = None
    topic: str | None = None

    def to_record(self) -> dict:
        record = {"id": self.id, "title": self.title, "text": self.body}
        if self.date is not None:
            record["date"] = self.date
        if self.topic is not None:
            record["topic"] = self.topic
        return record


@dataclass(frozen=True)
class DocumentGroup:
    label: str
    documents: tuple[Document, ...]


class CorpusIndex:
    """Ordered, id-addressable view of an ingested corpus."""

    def __init__(self, documents: Iterable[Document]):
        self.documents: tuple[Document, ...] = tuple(documents)
        self.by_id: dict[str, Document] = {}
        for doc in self.documents:
            if doc.id in self.by_id:
                raise DuplicateDocumentError(f"duplicate document id: {doc.id!r}")
            self.by_id[doc.id] = doc
        self.topic_groups: dict[str, set[str]] = {}
        for doc in self.documents:
            if doc.topic is not None:
                self.topic_groups.setdefault(doc.topic, set()).add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self.by_id

    def get(self, doc_id: str) -> Document:
        if doc_id not in self.by_id:
            raise KeyError(f"unknown document id: {doc_id!r}")
        return self.by_id[doc_id]

    def ids(self) -> list[str]:
        return [doc.id for doc in self.documents]

    def to_ndjson(self) -> str:
        return "".join(ndjson_line(doc.to_record()) for doc in self.documents)


def _document_from_record(record: Mapping, position: str) -> Document:
    if not isinstance(record, Mapping):
        raise CorpusFormatError(f"{position}: record is not an object")
    for field in REQUIRED_FIELDS:
        value = record.get(field)
        if not isinstance(value, str) or not value:
            raise CorpusFormatError(f"{position}: missing or empty field {field!r}")
    for field in OPTIONAL_FIELDS:
        if field in record and not isinstance(record[field], str):
            raise CorpusFormatError(f"{position}: field {field!r} must be a string")
    body = record["text"]
    return Document(
        id=record["id"],
        title=record["title"],
        body=body,
        length=len(body.split()),
        date=record.get("date"),
        topic=record.get("topic"),
    )


def _iter_ndjson_documents(path: Path) -> Iterator[Document]:
    for line_no, record in read_ndjson(path):
        yield _document_from_record(record, f"{path}:{line_no}")


def _iter_text_dir_documents(path: Path) -> Iterator[Document]:
    files = sorted(p for p in path.iterdir() if p.is_file() and p.suffix == ".txt")
    for file in files:
        body = file.read_text(encoding="utf-8")
        if not body.strip():
            raise CorpusFormatError(f"{file}: document body is empty")
        name = file.stem
        yield Document(id=name, title=name, body=body, length=len(body.split()))


def detect_format(source: str | Path) -> str:
    return TEXT_DIR_FORMAT if Path(source).is_dir() else NDJSON_FORMAT


def ingest_corpus(
    source: str | Path | Iterable[Mapping], format: str | None = None
) -> CorpusIndex:
    """Ingest a corpus from NDJSON, a directory of .txt files, or records.

    Args:
        source: Path to an NDJSON file or a directory of plain-text files,
            or an in-memory iterable of record dicts.
        format: "ndjson" or "txt-dir"; inferred from the path when omitted.

    Raises:
        CorpusFormatError: a record is malformed (message names its position).
        DuplicateDocumentError: two records share an id.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        if not path.exists():
            raise CorpusError(f"corpus source does not exist: {path}")
        fmt = format or detect_format(path)
        if fmt == NDJSON_FORMAT:
            docs = _iter_ndjson_documents(path)
        elif fmt == TEXT_DIR_FORMAT:
            docs = _iter_text_dir_documents(path)
        else:
            raise CorpusError(f"unknown corpus format: {fmt!r}")
    else:
        docs = (
            _document_from_record(record, f"record {i}") for i, record in enumerate(source)
        )
    index = CorpusIndex(docs)
    logger.info("ingested corpus with %d documents", len(index))
    return index


# ---------------------------------------------------------------------------
# Topic assignment
# ---------------------------------------------------------------------------


class TopicProvider(ABC):
    """Supplies zero or one topic label per document."""

    @abstractmethod
    def label_for(self, doc: Document) -> str | None:
        ...


class FileTopicProvider(TopicProvider):
    """Reads precomputed labels from a JSON object mapping id to label."""

    def __init__(self, path: str | Path):
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise CorpusError(f"topic label file {path} must hold a JSON object")
        self.labels: dict[str, str] = {str(k): str(v) for k, v in data.items()}

    def label_for(self, doc: Document) -> str | None:
        return self.labels.get(doc.id)


class MappingTopicProvider(TopicProvider):
    """Serves labels from an in-memory mapping; convenient in tests."""

    def __init__(self, labels: Mapping[str, str]):
        self.labels = dict(labels)

    def label_for(self, doc: Document) -> str | None:
        return self.labels.get(doc.id)


def assign_topics(index: CorpusIndex, topics: TopicProvider) -> CorpusIndex:
    """Return a new index with topic labels applied and groups rebuilt.

    Unlabeled documents keep their topic absent. Provider failures carry the
    document id they occurred on.
    """
    labeled: list[Document] = []
    for doc in index.documents:
        try:
            label = topics.label_for(doc)
        except Exception as exc:
            raise TopicProviderError(f"topic provider failed on document {doc.id!r}: {exc}") from exc
        labeled.append(doc if label is None else replace(doc, topic=label))
    return CorpusIndex(labeled)


# ---------------------------------------------------------------------------
# Filtering and grouping
# ---------------------------------------------------------------------------


def keyword_filter(
    index: CorpusIndex, query: str, fields: Iterable[str] = ("title", "body")
) -> list[Document]:
    """Case-insensitive substring filter over title and/or body.

    Corpus order is preserved. The query must be non-empty after trimming.
    """
    if not query.strip():
        raise ValueError("keyword query must be non-empty")
    field_set = set(fields)
    unknown = field_set - {"title", "body"}
    if unknown:
        raise ValueError(f"unknown filter fields: {sorted(unknown)}")
    if not field_set:
        raise ValueError("at least one filter field is required")
    needle = query.lower()
    results = []
    for doc in index.documents:
        haystacks = []
        if "title" in field_set:
            haystacks.append(doc.title)
        if "body" in field_set:
            haystacks.append(doc.body)
        if any(needle in text.lower() for text in haystacks):
            results.append(doc)
    return results


def _group_value(doc: Document, key: str) -> str | int | None:
    if key == "date":
        return doc.date
    if key == "name":
        return doc.title
    if key == "length":
        return doc.length
    if key == "topic":
        return doc.topic
    raise ValueError(f"unknown group key: {key!r} (expected one of {GROUP_KEYS})")


def group_sort(
    docs: Iterable[Document], key: str, direction: str = "asc"
) -> list[DocumentGroup]:
    """Stable sort by a metadata key, grouped by equal values.

    Documents missing the key land in a trailing "unknown" group that keeps
    input order. Flattening the groups yields a permutation of the input.
    """
    if direction not in ("asc", "desc"):
        raise ValueError(f"direction must be 'asc' or 'desc', got {direction!r}")
    doc_list = list(docs)
    present = [d for d in doc_list if _group_value(d, key) is not None]
    missing = [d for d in doc_list if _group_value(d, key) is None]
    ordered = sorted(
        present, key=lambda d: _group_value(d, key), reverse=(direction == "desc")
    )
    groups: list[DocumentGroup] = []
    current_label: str | None = None
    current_docs: list[Document] = []
    for doc in ordered:
        label = str(_group_value(doc, key))
        if label != current_label:
            if current_docs:
                groups.append(DocumentGroup(label=current_label, documents=tuple(current_docs)))
            current_label, current_docs = label, []
        current_docs.append(doc)
    if current_docs:
        groups.append(DocumentGroup(label=current_label, documents=tuple(current_docs)))
    if missing:
        groups.append(DocumentGroup(label=UNKNOWN_GROUP, documents=tuple(missing)))
    return groups
