"""Shared fixtures: deterministic corpora, providers, and a built KG."""

from __future__ import annotations

import random

import pytest

from docpile.corpus import CorpusIndex, ingest_corpus
from docpile.kg_build import FactStore, KgBuildConfig, build_kg
from docpile.piles import Workspace
from docpile.providers import HashEmbedder, ReplayGenerator
from docpile.search import EmbeddingTable, build_doc_embeddings

VOCABULARY = (
    "kronos police report office missing person employee kidnapping ransom "
    "meeting warehouse harbor night witness statement vehicle suspect arrest "
    "investigation interview phone record camera footage contact money transfer "
    "border crossing passport ticket storage unit letter threat deadline"
).split()

FIXED_CLOCK = lambda: "2026-04-01T12:00:00Z"  # noqa: E731


def make_random_corpus(rng: random.Random, size: int, words_low: int = 8, words_high: int = 40) -> CorpusIndex:
    records = []
    for i in range(size):
        body = " ".join(rng.choice(VOCABULARY) for _ in range(rng.randint(words_low, words_high)))
        records.append(
            {
                "id": f"d{i:03d}",
                "title": f"Report {i}",
                "text": body,
                "date": f"2025-01-{(i % 28) + 1:02d}",
            }
        )
    return ingest_corpus(records)


@pytest.fixture()
def embedder() -> HashEmbedder:
    return HashEmbedder()


SMALL_CORPUS_RECORDS = [
    {
        "id": "d1",
        "title": "Office report",
        "text": "John likes Sally. Acme Corp hired Edvard Vann last year.",
        "date": "2025-03-01",
        "topic": "hiring",
    },
    {
        "id": "d2",
        "title": "Witness statement",
        "text": "John likes Sally a lot. Sally trusts Bob.",
        "date": "2025-03-02",
        "topic": "relations",
    },
    {
        "id": "d3",
        "title": "Police file",
        "text": "Edvard Vann was investigated by Kronos police. The case stays open.",
        "date": "2025-03-03",
        "topic": "investigation",
    },
]


@pytest.fixture()
def small_corpus() -> CorpusIndex:
    return ingest_corpus(SMALL_CORPUS_RECORDS)


# Replay script for the 3-document corpus above, served positionally in
# corpus order. Expected facts are frozen in tests before the build runs.
KG_SCRIPT = [
    {"response": "john | likes | sally\nacme corp | hired | edvard vann"},
    {"response": "john | likes | sally\nsally | trusts | bob"},
    {"response": "edvard vann | investigated by | kronos police\nmalformed line without pipes"},
]

# What the script must produce: (subject, predicate, object) -> sources.
EXPECTED_KG_FACTS = {
    ("john", "likes", "sally"): ("d1", "d2"),
    ("acme corp", "hired", "edvard vann"): ("d1",),
    ("sally", "trusts", "bob"): ("d2",),
    ("edvard vann", "investigated by", "kronos police"): ("d3",),
}


@pytest.fixture()
def kg_store(small_corpus, embedder) -> FactStore:
    store, _ = build_kg(
        small_corpus, ReplayGenerator(KG_SCRIPT), embedder, KgBuildConfig(temperature=0.0)
    )
    return store


@pytest.fixture()
def doc_table(small_corpus, embedder) -> EmbeddingTable:
    return build_doc_embeddings(small_corpus, embedder)


@pytest.fixture()
def workspace() -> Workspace:
    return Workspace(clock=FIXED_CLOCK)
