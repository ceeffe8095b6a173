"""Grounding operations over LLM responses: Extract, Link, Suggest.

All three annotate a response without rewriting it. Extract finds spans of
text that match knowledge-graph entities (anything unmatched is a candidate
hallucination). Link ties each response sentence to its most similar
sentence in the pile's documents. Suggest ranks the whole corpus against
the whole response and grows the pile with the top hits that are not
already in it.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

from .corpus import CorpusIndex
from .kg_build import FactStore
from .piles import Pile
from .providers import EmbeddingProvider, cosine_similarity
from .search import EmbeddingTable
from .textutil import normalize_entity, split_sentences

logger = logging.getLogger(__name__)

DEFAULT_LINK_FLOOR = 0.15
DEFAULT_SUGGEST_K = 5


@dataclass(frozen=True)
class EntitySpan:
    """A response substring that normalizes to a KG entity."""

    start: int
    end: int
    entity: str

    def to_record(self) -> dict:
        return {"start": self.start, "end": self.end, "entity": self.entity}


@dataclass(frozen=True)
class SentenceLink:
    """One response sentence tied to its most similar pile sentence."""

    response_sentence_index: int
    doc_id: str
    doc_sentence_index: int
    score: float

    def to_record(self) -> dict:
        return {
            "responseSentenceIndex": self.response_sentence_index,
            "docId": self.doc_id,
            "docSentenceIndex": self.doc_sentence_index,
            "score": self.score,
        }


@dataclass(frozen=True)
class Suggestion:
    """One ranked corpus document from a Suggest run, kept for audit."""

    doc_id: str
    score: float
    already_in_pile: bool
    added: bool

    def to_record(self) -> dict:
        return {
            "docId": self.doc_id,
            "score": self.score,
            "alreadyInPile": self.already_in_pile,
            "added": self.added,
        }


def _entity_pattern(entity: str) -> re.Pattern[str]:
    # Tokens may be separated by any whitespace run in the response; the
    # guards keep matches word-boundary-delimited without relying on \b,
    # which misfires next to non-word characters like "u.s.".
    tokens = [re.escape(token) for token in entity.split()]
    return re.compile(r"(?<!\w)" + r"\s+".join(tokens) + r"(?!\w)", re.IGNORECASE)


def extract_entities(response: str, store: FactStore) -> list[EntitySpan]:
    """Find KG entity mentions in a response.

    Matching is case-insensitive and word-boundary-delimited; at overlaps
    the longest match wins, and the survivors come back in text order,
    pairwise disjoint.
    """
    candidates: list[tuple[int, int, str]] = []
    for entity in store.entity_index:
        for match in _entity_pattern(entity).finditer(response):
            candidates.append((match.start(), -(match.end() - match.start()), entity))
    spans: list[EntitySpan] = []
    last_end = 0
    for start, negative_length, entity in sorted(candidates):
        end = start - negative_length
        if start < last_end:
            continue
        spans.append(EntitySpan(start=start, end=end, entity=entity))
        last_end = end
    return spans


def link_sentences(
    response: str,
    pile: Pile,
    index: CorpusIndex,
    embedder: EmbeddingProvider,
    floor: float = DEFAULT_LINK_FLOOR,
) -> list[SentenceLink]:
    """Link each response sentence to its best-matching pile sentence.

    The link is the argmax over every (document, sentence) pair, with ties
    going to the smaller doc id, then the earlier sentence. Links scoring
    below the floor are dropped rather than asserted. An empty response
    yields no links.
    """
    response_sentences = split_sentences(response)
    if not response_sentences:
        return []
    doc_sentences: list[tuple[str, int, str]] = []
    for doc_id in sorted(pile.doc_ids):
        for span in split_sentences(index.get(doc_id).body):
            doc_sentences.append((doc_id, span.index, span.text))
    if not doc_sentences:
        return []
    vectors = [embedder.embed(text) for _, _, text in doc_sentences]
    links: list[SentenceLink] = []
    for span in response_sentences:
        response_vector = embedder.embed(span.text)
        best: tuple[float, str, int] | None = None
        for (doc_id, sentence_index, _), vector in zip(doc_sentences, vectors):
            score = cosine_similarity(response_vector, vector)
            if best is None or score > best[0]:
                best = (score, doc_id, sentence_index)
        score, doc_id, sentence_index = best
        if score >= floor:
            links.append(
                SentenceLink(
                    response_sentence_index=span.index,
                    doc_id=doc_id,
                    doc_sentence_index=sentence_index,
                    score=score,
                )
            )
    return links


def suggest_documents(
    response: str,
    pile: Pile,
    table: EmbeddingTable,
    embedder: EmbeddingProvider,
    k: int = DEFAULT_SUGGEST_K,
) -> list[Suggestion]:
    """Rank the whole corpus against the whole response; grow the pile.

    The top min(k, corpus) documents come back as suggestions; those not
    already in the pile are appended to it in rank order. Taking the top k
    before the membership check is deliberate: it avoids continuously
    adding documents less relevant than what the pile already holds.

    The caller must hold the workspace writer lock when the pile is shared.
    """
    if not response.strip():
        raise ValueError("suggest requires a non-empty response")
    response_vector = embedder.embed(response)
    scored = [
        (doc_id, cosine_similarity(response_vector, vector))
        for doc_id, vector in table.items()
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    members = set(pile.doc_ids)
    suggestions: list[Suggestion] = []
    for doc_id, score in scored[:k]:
        already = doc_id in members
        suggestions.append(
            Suggestion(doc_id=doc_id, score=score, already_in_pile=already, added=not already)
        )
        if not already:
            pile.doc_ids.append(doc_id)
    return suggestions
