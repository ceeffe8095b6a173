"""Semantic document search: embed the corpus once, rank queries by cosine.

Documents are embedded whole (500-1000 word news reports fit comfortably in
an embedding window), the table is immutable after the build, and every
query is an exact scan over it. Parallel embedding is bounded and the
per-document work goes through the provider's cache when one is attached,
so interrupted builds resume where they left off.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import CorpusIndex
from .providers import DEFAULT_MAX_PARALLEL, EmbeddingProvider, rank_by_similarity

logger = logging.getLogger(__name__)

DEFAULT_SEARCH_K = 20


@dataclass(frozen=True)
class SearchResult:
    doc_id: str
    score: float
    rank: int


class EmbeddingTable:
    """Immutable id-to-vector table for one embedding model."""

    def __init__(self, entries: dict[str, np.ndarray], dim: int):
        self._entries = dict(entries)
        self.dim = dim

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, key: str) -> bool:
        return key in self._entries

    def get(self, key: str) -> np.ndarray:
        return self._entries[key]

    def items(self) -> list[tuple[str, np.ndarray]]:
        return list(self._entries.items())

    def subset(self, keys: Iterable[str]) -> list[tuple[str, np.ndarray]]:
        return [(key, self._entries[key]) for key in keys]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        keys = sorted(self._entries)
        matrix = np.stack([self._entries[k] for k in keys]) if keys else np.zeros((0, self.dim))
        np.savez(path, keys=np.array(keys, dtype=object), vectors=matrix, dim=self.dim)

    @classmethod
    def load(cls, path: str | Path) -> "EmbeddingTable":
        with np.load(path, allow_pickle=True) as data:
            keys = [str(k) for k in data["keys"]]
            vectors = data["vectors"]
            dim = int(data["dim"])
        return cls({k: vectors[i] for i, k in enumerate(keys)}, dim=dim)


def embed_texts(
    texts: dict[str, str], embedder: EmbeddingProvider, max_parallel: int = DEFAULT_MAX_PARALLEL
) -> EmbeddingTable:
    """Embed a batch of keyed texts with bounded parallelism.

    Any provider failure aborts the batch; entries already written to the
    provider's cache survive for the next attempt.
    """
    keys = list(texts)
    if not keys:
        return EmbeddingTable({}, dim=embedder.dim)
    workers = max(1, min(max_parallel, len(keys)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        vectors = list(pool.map(lambda k: embedder.embed(texts[k]), keys))
    return EmbeddingTable(dict(zip(keys, vectors)), dim=embedder.dim)


def build_doc_embeddings(
    index: CorpusIndex,
    embedder: EmbeddingProvider,
    max_parallel: int = DEFAULT_MAX_PARALLEL,
) -> EmbeddingTable:
    """One embedding per document body, keyed by document id."""
    table = embed_texts(
        {doc.id: doc.body for doc in index.documents}, embedder, max_parallel=max_parallel
    )
    logger.info("built embeddings for %d documents", len(table))
    return table


def semantic_search(
    query: str,
    table: EmbeddingTable,
    embedder: EmbeddingProvider,
    k: int = DEFAULT_SEARCH_K,
    candidate_ids: Iterable[str] | None = None,
) -> list[SearchResult]:
    """Top-k documents by cosine similarity to the query.

    Ties break by ascending document id. An optional candidate-id subset
    restricts the scan (for searching within a filtered view).

    Raises:
        ValueError: empty query, k <= 0, or a candidate id not in the table.
    """
    if not query.strip():
        raise ValueError("search query must be non-empty")
    if candidate_ids is None:
        candidates = table.items()
    else:
        ids = list(candidate_ids)
        missing = [i for i in ids if i not in table]
        if missing:
            raise ValueError(f"candidate ids not in embedding table: {missing[:5]}")
        candidates = table.subset(ids)
    query_vector = embedder.embed(query)
    ranked = rank_by_similarity(query_vector, candidates, k)
    return [
        SearchResult(doc_id=doc_id, score=score, rank=position + 1)
        for position, (doc_id, score) in enumerate(ranked)
    ]
