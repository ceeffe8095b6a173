"""Read-side knowledge-graph operations: entity search, ranked fact lists,
entity context, and fact-to-document navigation.

Everything here is read-only over an immutable FactStore, so calls are safe
to run concurrently. Fact lists are capped at 5 by default, matching the
compact fact panel they feed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import CorpusIndex, Document
from .kg_build import Fact, FactStore
from .providers import EmbeddingProvider, cosine_similarity, rank_by_similarity
from .textutil import normalize_entity

DEFAULT_FACT_K = 5
DEFAULT_CONNECTED_CAP = 5
DEFAULT_SIMILAR_CAP = 5


@dataclass(frozen=True)
class RankedFact:
    fact: Fact
    score: float
    rank: int


@dataclass(frozen=True)
class EntityContext:
    entity: str
    connected: tuple[tuple[str, int], ...]
    similar: tuple[tuple[str, float], ...]


def fact_text(fact: Fact) -> str:
    return f"{fact.subject} {fact.predicate} {fact.object}"


def _tokens_contain(entity: str, query_tokens: list[str]) -> bool:
    tokens = entity.split()
    width = len(query_tokens)
    if width == 0 or width > len(tokens):
        return False
    return any(
        tokens[start : start + width] == query_tokens
        for start in range(len(tokens) - width + 1)
    )


def search_entity(store: FactStore, name: str) -> list[Fact]:
    """Free-text entity search over fact subjects and objects.

    A fact matches when its normalized subject or object equals the
    normalized query or contains it as a contiguous run of tokens ("vann"
    matches "edvard vann"). Exact matches come first, then higher support,
    then ascending fact id.
    """
    query = normalize_entity(name)
    if not query:
        raise ValueError("entity search query must be non-empty")
    query_tokens = query.split()
    matches: list[tuple[bool, Fact]] = []
    for fact in store.all_facts():
        subject = normalize_entity(fact.subject)
        obj = normalize_entity(fact.object)
        exact = query in (subject, obj)
        if exact or _tokens_contain(subject, query_tokens) or _tokens_contain(obj, query_tokens):
            matches.append((exact, fact))
    matches.sort(key=lambda pair: (not pair[0], -pair[1].support, pair[1].id))
    return [fact for _, fact in matches]


def rank_facts(
    facts: list[Fact],
    context: str,
    embedder: EmbeddingProvider,
    k: int = DEFAULT_FACT_K,
) -> list[RankedFact]:
    """Rank candidate facts by similarity of their text to a context string.

    Each fact is rendered as "subject predicate object" and embedded; the
    top min(k, |facts|) come back with 1-based ranks, ties broken by
    ascending fact id.
    """
    if not facts:
        return []
    by_id = {fact.id: fact for fact in facts}
    context_vector = embedder.embed(context)
    candidates = [(fact.id, embedder.embed(fact_text(fact))) for fact in facts]
    ranked = rank_by_similarity(context_vector, candidates, k)
    return [
        RankedFact(fact=by_id[fact_id], score=score, rank=position + 1)
        for position, (fact_id, score) in enumerate(ranked)
    ]


def entity_context(
    store: FactStore,
    entity: str,
    embedder: EmbeddingProvider,
    cap_connected: int = DEFAULT_CONNECTED_CAP,
    cap_similar: int = DEFAULT_SIMILAR_CAP,
) -> EntityContext:
    """Neighboring and semantically similar entities for one entity.

    connected lists direct KG neighbors ordered by their degree (descending,
    ties lexicographic); similar ranks all non-neighbor entities by cosine
    similarity of name embeddings. The entity itself appears in neither
    list. An entity absent from the store gets an empty connected list and
    similarity over every stored entity.
    """
    query = normalize_entity(entity)
    if not query:
        raise ValueError("entity must be non-empty")
    neighbor_names = set(store.neighbors.get(query, set())) - {query}
    connected_order = sorted(
        neighbor_names, key=lambda name: (-store.entity_degree[name], name)
    )[:cap_connected]
    connected = tuple((name, store.entity_degree[name]) for name in connected_order)

    non_neighbors = sorted(set(store.entity_index) - neighbor_names - {query})
    query_vector = embedder.embed(query)
    scored = [
        (name, cosine_similarity(query_vector, embedder.embed(name)))
        for name in non_neighbors
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    similar = tuple(scored[:cap_similar])
    return EntityContext(entity=query, connected=connected, similar=similar)


def fact_sources(store: FactStore, fact_id: str, index: CorpusIndex) -> list[Document]:
    """Resolve a fact's supporting documents, in sorted-id order."""
    fact = store.get(fact_id)
    return [index.get(doc_id) for doc_id in fact.sources]


def ranking_context(pile_evidence_texts: list[str], pile_doc_texts: list[str]) -> str:
    """The context string used to rank facts for a pile.

    The most recent LLM response wins when one exists; otherwise the pile's
    document titles and bodies are concatenated.
    """
    if pile_evidence_texts:
        return pile_evidence_texts[-1]
    return "\n\n".join(pile_doc_texts)
