"""Knowledge-graph construction: triple extraction, dedup, provenance.

Each document is fed to the generation provider with an extraction prompt
that asks for one "subject | predicate | object" triple per line. Raw
triples are then semantically deduplicated: two triples merge when their
subjects, objects, and predicates are pairwise similar enough, clusters are
the transitive closure of that relation, and each cluster keeps one
representative surface form plus every source document that contributed a
duplicate. Support is the count of distinct supporting documents.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CorpusIndex, Document
from .jsonutil import atomic_write_text, canonical_json, ndjson_line, read_ndjson
from .providers import (
    EmbeddingProvider,
    GenerationProvider,
    GenerationRequest,
    ProviderError,
    cosine_similarity,
)
from .textutil import normalize_entity

logger = logging.getLogger(__name__)

DEFAULT_ENTITY_THRESHOLD = 0.90
DEFAULT_RELATION_THRESHOLD = 0.85
FACT_ID_LENGTH = 16

EXTRACTION_PROMPT_TEMPLATE = """You are extracting a knowledge graph from a news report.

Read the document below and list the factual relationships it states.
Write one relationship per line in exactly this form:

subject | predicate | object

Use short noun phrases for subject and object and a short verb phrase for
the predicate. Do not number the lines, do not add commentary, and do not
invent facts that the document does not state.

Document id: {id}
Title: {title}

{body}
"""


class TripleError(ValueError):
    """A raw triple violates its field constraints."""


@dataclass(frozen=True)
class RawTriple:
    """One extracted (subject, predicate, object) tagged with its source."""

    subject: str
    predicate: str
    object: str
    source_doc: str

    def __post_init__(self) -> None:
        for name in ("subject", "predicate", "object"):
            value = getattr(self, name).strip()
            if not value:
                raise TripleError(f"triple {name} is empty")
            object.__setattr__(self, name, value)
        if not self.source_doc:
            raise TripleError("triple has no source document")

    @property
    def surface(self) -> tuple[str, str, str]:
        return (self.subject, self.predicate, self.object)


@dataclass(frozen=True)
class Fact:
    """A deduplicated triple with full provenance."""

    id: str
    subject: str
    predicate: str
    object: str
    sources: tuple[str, ...]
    support: int

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "subject": self.subject,
            "predicate": self.predicate,
            "object": self.object,
            "sources": list(self.sources),
            "support": self.support,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Fact":
        return cls(
            id=str(record["id"]),
            subject=str(record["subject"]),
            predicate=str(record["predicate"]),
            object=str(record["object"]),
            sources=tuple(str(s) for s in record["sources"]),
            support=int(record["support"]),
        )


def fact_id(subject: str, predicate: str, object_: str) -> str:
    payload = json.dumps([subject, predicate, object_], ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:FACT_ID_LENGTH]


class FactStore:
    """Immutable fact collection with entity lookups.

    entity_index maps a normalized entity to the ids of facts it appears in;
    entity_degree counts its distinct neighbors over those facts. An entity
    whose only fact is a self-loop counts itself as a neighbor, so every
    indexed entity has degree at least 1.
    """

    def __init__(self, facts: Iterable[Fact]):
        self.facts: dict[str, Fact] = {}
        for fact in facts:
            if fact.id in self.facts:
                raise ValueError(f"duplicate fact id: {fact.id}")
            self.facts[fact.id] = fact
        self.entity_index: dict[str, set[str]] = {}
        self.neighbors: dict[str, set[str]] = {}
        for fact in self.facts.values():
            subject = normalize_entity(fact.subject)
            obj = normalize_entity(fact.object)
            self.entity_index.setdefault(subject, set()).add(fact.id)
            self.entity_index.setdefault(obj, set()).add(fact.id)
            self.neighbors.setdefault(subject, set()).add(obj)
            self.neighbors.setdefault(obj, set()).add(subject)
        self.entity_degree: dict[str, int] = {
            entity: len(near) for entity, near in self.neighbors.items()
        }

    def __len__(self) -> int:
        return len(self.facts)

    def all_facts(self) -> list[Fact]:
        return [self.facts[fact_id_] for fact_id_ in sorted(self.facts)]

    def get(self, fact_id_: str) -> Fact:
        if fact_id_ not in self.facts:
            raise KeyError(f"unknown fact id: {fact_id_!r}")
        return self.facts[fact_id_]

    def flatten(self) -> list[RawTriple]:
        """Expand every fact back into one raw triple per source document."""
        triples = []
        for fact in self.all_facts():
            for source in fact.sources:
                triples.append(
                    RawTriple(
                        subject=fact.subject,
                        predicate=fact.predicate,
                        object=fact.object,
                        source_doc=source,
                    )
                )
        return triples

    def to_ndjson(self) -> str:
        return "".join(ndjson_line(fact.to_record()) for fact in self.all_facts())

    def save(self, path: str | Path) -> None:
        atomic_write_text(Path(path), self.to_ndjson())

    @classmethod
    def load(cls, path: str | Path) -> "FactStore":
        return cls(Fact.from_record(record) for _, record in read_ndjson(path))


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------


def render_extraction_prompt(doc: Document, template: str = EXTRACTION_PROMPT_TEMPLATE) -> str:
    # Literal replacement, not str.format: document bodies may contain braces.
    return (
        template.replace("{id}", doc.id)
        .replace("{title}", doc.title)
        .replace("{body}", doc.body)
    )


def parse_triples(response: str, doc_id: str) -> tuple[list[RawTriple], int]:
    """Parse an extraction response into triples.

    Returns (triples, skipped): one triple per "a | b | c" line; non-blank
    lines that do not split into three non-empty fields are skipped and
    counted.
    """
    triples: list[RawTriple] = []
    skipped = 0
    for line in response.splitlines():
        if not line.strip():
            continue
        parts = [part.strip() for part in line.split("|")]
        if len(parts) != 3 or not all(parts):
            skipped += 1
            continue
        triples.append(
            RawTriple(subject=parts[0], predicate=parts[1], object=parts[2], source_doc=doc_id)
        )
    return triples, skipped


@dataclass(frozen=True)
class ExtractionOutcome:
    triples: tuple[RawTriple, ...]
    skipped: int


def extract_triples(
    doc: Document,
    llm: GenerationProvider,
    extraction_prompt: str = EXTRACTION_PROMPT_TEMPLATE,
    temperature: float = 0.0,
    model: str = "default",
) -> ExtractionOutcome:
    """Run triple extraction for one document.

    Provider failures propagate; build_kg catches them to record the
    document as failed and keep going.
    """
    request = GenerationRequest(
        prompt=render_extraction_prompt(doc, extraction_prompt),
        temperature=temperature,
        model=model,
    )
    result = llm.generate(request)
    triples, skipped = parse_triples(result.text, doc.id)
    return ExtractionOutcome(triples=tuple(triples), skipped=skipped)


# ---------------------------------------------------------------------------
# Deduplication
# ---------------------------------------------------------------------------


class _UnionFind:
    def __init__(self, size: int):
        self.parent = list(range(size))

    def find(self, item: int) -> int:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _validate_threshold(name: str, value: float) -> None:
    if not (0.0 < value <= 1.0):
        raise ValueError(f"{name} must be in (0, 1], got {value}")


def deduplicate_facts(
    raw: Sequence[RawTriple],
    embedder: EmbeddingProvider,
    threshold_entity: float = DEFAULT_ENTITY_THRESHOLD,
    threshold_relation: float = DEFAULT_RELATION_THRESHOLD,
) -> FactStore:
    """Cluster raw triples into deduplicated facts with provenance.

    Two triples merge when cosine(subjects) >= threshold_entity AND
    cosine(objects) >= threshold_entity AND cosine(predicates) >=
    threshold_relation; clusters are the transitive closure of that
    relation. Byte-identical surface forms always share a cluster. Each
    cluster's representative is its most frequent surface form, with ties
    broken by smallest source document id, then lexicographic triple text.
    """
    _validate_threshold("threshold_entity", threshold_entity)
    _validate_threshold("threshold_relation", threshold_relation)
    if not raw:
        return FactStore([])

    # Group by exact surface form first; the pairwise predicate then only
    # needs to compare distinct forms.
    occurrences: dict[tuple[str, str, str], int] = {}
    sources: dict[tuple[str, str, str], set[str]] = {}
    order: list[tuple[str, str, str]] = []
    for triple in raw:
        key = triple.surface
        if key not in occurrences:
            occurrences[key] = 0
            sources[key] = set()
            order.append(key)
        occurrences[key] += 1
        sources[key].add(triple.source_doc)

    texts = {text for key in order for text in key}
    vectors = {text: embedder.embed(text) for text in sorted(texts)}

    uf = _UnionFind(len(order))
    for i in range(len(order)):
        s_i, p_i, o_i = order[i]
        for j in range(i + 1, len(order)):
            s_j, p_j, o_j = order[j]
            if (
                cosine_similarity(vectors[s_i], vectors[s_j]) >= threshold_entity
                and cosine_similarity(vectors[o_i], vectors[o_j]) >= threshold_entity
                and cosine_similarity(vectors[p_i], vectors[p_j]) >= threshold_relation
            ):
                uf.union(i, j)

    clusters: dict[int, list[tuple[str, str, str]]] = {}
    for position, key in enumerate(order):
        clusters.setdefault(uf.find(position), []).append(key)

    facts = []
    for members in clusters.values():
        representative = min(
            members, key=lambda key: (-occurrences[key], min(sources[key]), key)
        )
        cluster_sources = sorted(set().union(*(sources[key] for key in members)))
        subject, predicate, object_ = representative
        facts.append(
            Fact(
                id=fact_id(subject, predicate, object_),
                subject=subject,
                predicate=predicate,
                object=object_,
                sources=tuple(cluster_sources),
                support=len(cluster_sources),
            )
        )
    return FactStore(facts)


# ---------------------------------------------------------------------------
# Full build
# ---------------------------------------------------------------------------


@dataclass
class DocumentBuildStats:
    triples: int = 0
    skipped: int = 0
    failed: bool = False
    error: str | None = None


@dataclass
class BuildReport:
    documents: dict[str, DocumentBuildStats] = field(default_factory=dict)

    @property
    def total_triples(self) -> int:
        return sum(stats.triples for stats in self.documents.values())

    @property
    def total_skipped(self) -> int:
        return sum(stats.skipped for stats in self.documents.values())

    @property
    def failed_documents(self) -> list[str]:
        return [doc_id for doc_id, stats in self.documents.items() if stats.failed]

    def to_json(self) -> str:
        payload = {
            "documents": {
                doc_id: {
                    "triples": stats.triples,
                    "skipped": stats.skipped,
                    "failed": stats.failed,
                    **({"error": stats.error} if stats.error else {}),
                }
                for doc_id, stats in self.documents.items()
            },
            "totalTriples": self.total_triples,
            "totalSkipped": self.total_skipped,
            "failedDocuments": self.failed_documents,
        }
        return canonical_json(payload)


@dataclass(frozen=True)
class KgBuildConfig:
    threshold_entity: float = DEFAULT_ENTITY_THRESHOLD
    threshold_relation: float = DEFAULT_RELATION_THRESHOLD
    temperature: float = 0.0
    model: str = "default"
    extraction_prompt: str = EXTRACTION_PROMPT_TEMPLATE


def build_kg(
    index: CorpusIndex,
    llm: GenerationProvider,
    embedder: EmbeddingProvider,
    config: KgBuildConfig = KgBuildConfig(),
    out_dir: str | Path | None = None,
) -> tuple[FactStore, BuildReport]:
    """Extract triples from every document in corpus order, then deduplicate.

    Extraction failures are per-document: the document is recorded as failed
    in the report and the build continues. When out_dir is given the store
    is written to facts.jsonl and the report to report.json inside it.
    """
    report = BuildReport()
    all_triples: list[RawTriple] = []
    for doc in index.documents:
        stats = DocumentBuildStats()
        report.documents[doc.id] = stats
        try:
            outcome = extract_triples(
                doc,
                llm,
                extraction_prompt=config.extraction_prompt,
                temperature=config.temperature,
                model=config.model,
            )
        except ProviderError as exc:
            logger.warning("extraction failed for document %s: %s", doc.id, exc)
            stats.failed = True
            stats.error = str(exc)
            continue
        stats.triples = len(outcome.triples)
        stats.skipped = outcome.skipped
        all_triples.extend(outcome.triples)
    store = deduplicate_facts(
        all_triples,
        embedder,
        threshold_entity=config.threshold_entity,
        threshold_relation=config.threshold_relation,
    )
    logger.info(
        "knowledge graph built: %d facts from %d raw triples (%d skipped lines, %d failed docs)",
        len(store),
        len(all_triples),
        report.total_skipped,
        len(report.failed_documents),
    )
    if out_dir is not None:
        out = Path(out_dir)
        store.save(out / "facts.jsonl")
        atomic_write_text(out / "report.json", report.to_json())
    return store, report
