"""docpile: document sensemaking over a closed corpus.

Ingest documents, build a provenance-tracked knowledge graph by LLM triple
extraction and semantic deduplication, search the corpus by embedding
similarity, group documents into piles, run sensemaking tasks over them,
and ground every generated response back to its sources.
"""

from .corpus import CorpusIndex, Document, assign_topics, group_sort, ingest_corpus, keyword_filter
from .kg_build import Fact, FactStore, RawTriple, build_kg, deduplicate_facts, extract_triples
from .kg_query import entity_context, fact_sources, rank_facts, search_entity
from .piles import EvidenceRecord, Pile, TaskParams, Workspace, assemble_prompt
from .providers import HashEmbedder, ReplayGenerator, cosine_similarity, load_providers
from .search import build_doc_embeddings, semantic_search
from .validate import extract_entities, link_sentences, suggest_documents

__version__ = "0.1.0"

__all__ = [
    "CorpusIndex",
    "Document",
    "EvidenceRecord",
    "Fact",
    "FactStore",
    "HashEmbedder",
    "Pile",
    "RawTriple",
    "ReplayGenerator",
    "TaskParams",
    "Workspace",
    "assemble_prompt",
    "assign_topics",
    "build_doc_embeddings",
    "build_kg",
    "cosine_similarity",
    "deduplicate_facts",
    "entity_context",
    "extract_entities",
    "extract_triples",
    "fact_sources",
    "group_sort",
    "ingest_corpus",
    "keyword_filter",
    "link_sentences",
    "load_providers",
    "rank_facts",
    "search_entity",
    "semantic_search",
    "suggest_documents",
]
