"""Entity search, ranked facts, entity context, and source navigation."""

from __future__ import annotations

import random

import pytest

from docpile.kg_build import RawTriple, deduplicate_facts, fact_id
from docpile.kg_query import (
    entity_context,
    fact_sources,
    fact_text,
    rank_facts,
    ranking_context,
    search_entity,
)
from docpile.textutil import normalize_entity
from oracles import oracle_cosine, oracle_top_k

# -- entity search ---------------------------------------------------------------


def test_search_entity_finds_subject_and_object_roles(kg_store):
    facts = search_entity(kg_store, "sally")
    surfaces = {(f.subject, f.object) for f in facts}
    assert surfaces == {("john", "sally"), ("sally", "bob")}
    # Higher support first among exact matches.
    assert facts[0].support >= facts[-1].support


def test_search_entity_token_containment(kg_store):
    facts = search_entity(kg_store, "vann")
    surfaces = {f.subject for f in facts} | {f.object for f in facts}
    assert "edvard vann" in surfaces
    assert len(facts) == 2


def test_search_entity_exact_before_partial(embedder):
    raw = [
        RawTriple("vann", "called", "someone", "dA"),
        RawTriple("edvard vann", "hired by", "acme", "dB"),
        RawTriple("edvard vann", "hired by", "acme", "dC"),
    ]
    store = deduplicate_facts(raw, embedder)
    facts = search_entity(store, "vann")
    # The exact match leads even though the partial match has more support.
    assert facts[0].subject == "vann"
    assert facts[1].subject == "edvard vann"


def test_search_entity_no_match(kg_store):
    assert search_entity(kg_store, "nobody here") == []


def test_search_entity_requires_query(kg_store):
    with pytest.raises(ValueError):
        search_entity(kg_store, "   ")


def test_search_entity_results_rematch_query(kg_store):
    for query in ("sally", "edvard vann", "kronos police", "vann"):
        tokens = normalize_entity(query).split()
        for fact in search_entity(kg_store, query):
            fields = [normalize_entity(fact.subject).split(), normalize_entity(fact.object).split()]
            assert any(
                tokens == field[i : i + len(tokens)]
                for field in fields
                for i in range(len(field) - len(tokens) + 1)
            )


# -- fact ranking -------------------------------------------------------------------


def _fact_pool(embedder, count: int, rng: random.Random):
    entities = ["vann", "police", "acme", "warehouse", "letter", "witness", "contact"]
    preds = ["saw", "wrote", "met", "owns", "fears"]
    raw = [
        RawTriple(
            f"{rng.choice(entities)} {i}", rng.choice(preds), rng.choice(entities), f"d{i}"
        )
        for i in range(count)
    ]
    return deduplicate_facts(raw, embedder, threshold_entity=0.999, threshold_relation=0.999)


def test_rank_facts_caps_at_five_by_default(embedder):
    rng = random.Random(31)
    store = _fact_pool(embedder, 7, rng)
    assert len(store) == 7
    ranked = rank_facts(store.all_facts(), "vann letter", embedder)
    assert len(ranked) == 5
    assert [r.rank for r in ranked] == [1, 2, 3, 4, 5]


def test_rank_facts_returns_all_when_pool_small(embedder):
    rng = random.Random(32)
    store = _fact_pool(embedder, 3, rng)
    ranked = rank_facts(store.all_facts(), "anything", embedder)
    assert len(ranked) == 3
    assert all(a.score >= b.score for a, b in zip(ranked, ranked[1:]))


def test_rank_facts_empty_pool(embedder):
    assert rank_facts([], "context", embedder) == []


def test_rank_facts_matches_brute_force_oracle(embedder):
    rng = random.Random(33)
    for _ in range(20):
        store = _fact_pool(embedder, rng.randint(1, 12), rng)
        facts = store.all_facts()
        context = " ".join(rng.choice(["vann", "police", "letter", "unseen"]) for _ in range(3))
        ranked = rank_facts(facts, context, embedder, k=5)
        items = [(f.id, embedder.embed(fact_text(f))) for f in facts]
        expected = oracle_top_k(embedder.embed(context), items, 5)
        assert [(r.fact.id, r.score) for r in ranked] == expected


def test_ranking_context_prefers_latest_response():
    assert ranking_context(["first", "second"], ["doc body"]) == "second"
    assert ranking_context([], ["title one", "title two"]) == "title one\n\ntitle two"


# -- entity context --------------------------------------------------------------


def _star_store(embedder):
    raw = [RawTriple("a", "links to", leaf, "d1") for leaf in ["b", "c", "d", "e", "f"]]
    return deduplicate_facts(raw, embedder, threshold_entity=0.999, threshold_relation=0.999)


def test_entity_context_star_graph(embedder):
    store = _star_store(embedder)
    context = entity_context(store, "b", embedder)
    assert context.connected == (("a", 5),)
    assert all(entity != "b" for entity, _ in context.similar)
    center = entity_context(store, "a", embedder)
    assert [entity for entity, _ in center.connected] == ["b", "c", "d", "e", "f"]
    assert all(degree == 1 for _, degree in center.connected)


def test_entity_context_absent_entity(embedder):
    store = _star_store(embedder)
    context = entity_context(store, "zz unknown", embedder)
    assert context.connected == ()
    assert len(context.similar) == 5
    assert {entity for entity, _ in context.similar} <= {"a", "b", "c", "d", "e", "f"}


def test_entity_context_connected_and_similar_are_disjoint(kg_store, embedder):
    for entity in list(kg_store.entity_index):
        context = entity_context(kg_store, entity, embedder)
        connected = {e for e, _ in context.connected}
        similar = {e for e, _ in context.similar}
        assert connected.isdisjoint(similar)
        assert entity not in connected
        assert entity not in similar


def test_entity_context_caps_apply(embedder):
    store = _star_store(embedder)
    context = entity_context(store, "a", embedder, cap_connected=2, cap_similar=0)
    assert len(context.connected) == 2
    assert context.similar == ()


def test_entity_context_similar_matches_oracle(embedder):
    rng = random.Random(35)
    entities = [
        "edvard vann", "kronos police", "acme corp", "vann", "harbor", "witness",
        "storage unit", "ransom letter", "unknown contact", "camera", "office", "report",
    ]
    raw = []
    for i in range(0, len(entities) - 1, 2):
        raw.append(RawTriple(entities[i], "connects to", entities[i + 1], f"d{i}"))
    store = deduplicate_facts(raw, embedder, threshold_entity=0.999, threshold_relation=0.999)
    for query in ("edvard vann", "vann", "camera"):
        context = entity_context(store, query, embedder, cap_similar=4)
        neighbors = store.neighbors.get(query, set()) - {query}
        pool = sorted(set(store.entity_index) - neighbors - {query})
        items = [(name, embedder.embed(name)) for name in pool]
        expected = oracle_top_k(embedder.embed(query), items, 4)
        assert list(context.similar) == expected


def test_entity_context_requires_name(kg_store, embedder):
    with pytest.raises(ValueError):
        entity_context(kg_store, "", embedder)


# -- sources -----------------------------------------------------------------------


def test_fact_sources_resolves_documents(kg_store, small_corpus):
    fid = fact_id("john", "likes", "sally")
    docs = fact_sources(kg_store, fid, small_corpus)
    assert [d.id for d in docs] == ["d1", "d2"]
    assert docs[0].title == "Office report"


def test_fact_sources_singleton(kg_store, small_corpus):
    fid = fact_id("sally", "trusts", "bob")
    docs = fact_sources(kg_store, fid, small_corpus)
    assert [d.id for d in docs] == ["d2"]


def test_fact_sources_unknown_fact(kg_store, small_corpus):
    with pytest.raises(KeyError):
        fact_sources(kg_store, "doesnotexist1234", small_corpus)


def test_fact_sources_subset_of_corpus(kg_store, small_corpus):
    for fact in kg_store.all_facts():
        assert set(fact.sources) <= set(small_corpus.ids())
