"""HTTP service over the engine: corpus, search, KG, piles, tasks, grounding.

Every endpoint is a thin delegation to the library so service responses
equal direct library calls on identical state. Corpus, embeddings, and the
fact store are immutable and shared; pile mutations serialize through the
workspace writer lock. All responses carry a schemaVersion field.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import kg_query, validate
from .corpus import GROUP_KEYS, CorpusIndex, Document
from .kg_build import Fact, FactStore
from .piles import (
    Pile,
    PileError,
    PileNotFoundError,
    TaskParams,
    UnknownDocumentError,
    Workspace,
)
from .providers import (
    TEMPERATURE_RANGE,
    EmbeddingProvider,
    GenerationProvider,
    ProviderError,
)
from .search import DEFAULT_SEARCH_K, EmbeddingTable, semantic_search

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


@dataclass
class AppState:
    """Everything the endpoints need, built once at startup."""

    index: CorpusIndex
    table: EmbeddingTable
    store: FactStore
    embedder: EmbeddingProvider
    generator: GenerationProvider
    workspace: Workspace
    workspace_path: Path | None = None
    link_floor: float = validate.DEFAULT_LINK_FLOOR

    def persist_workspace(self) -> None:
        if self.workspace_path is not None:
            self.workspace.save(self.workspace_path)


def _doc_meta(doc: Document) -> dict:
    meta: dict = {"id": doc.id, "title": doc.title, "length": doc.length}
    if doc.date is not None:
        meta["date"] = doc.date
    if doc.topic is not None:
        meta["topic"] = doc.topic
    return meta


def _doc_full(doc: Document) -> dict:
    full = _doc_meta(doc)
    full["text"] = doc.body
    return full


def _fact_record(fact: Fact) -> dict:
    return fact.to_record()


class SearchBody(BaseModel):
    query: str
    k: int = DEFAULT_SEARCH_K
    candidateIds: list[str] | None = None


class CreatePileBody(BaseModel):
    name: str | None = None
    duplicateOf: str | None = None


class PatchPileBody(BaseModel):
    name: str


class DocsBody(BaseModel):
    docIds: list[str]


class TaskBody(BaseModel):
    kind: str
    params: dict = {}


class LinkBody(BaseModel):
    floor: float | None = None


class SuggestBody(BaseModel):
    k: int = validate.DEFAULT_SUGGEST_K


class ReorderBody(BaseModel):
    ordering: list[str]


class WorkspaceBody(BaseModel):
    workspace: dict


def _task_params(raw: dict) -> TaskParams:
    return TaskParams.from_record(raw)


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="docpile", version="0.1.0")

    @app.exception_handler(PileNotFoundError)
    @app.exception_handler(KeyError)
    async def not_found(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=404, content={"schemaVersion": SCHEMA_VERSION, "error": str(exc)})

    @app.exception_handler(UnknownDocumentError)
    async def unknown_doc(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=404, content={"schemaVersion": SCHEMA_VERSION, "error": str(exc)})

    @app.exception_handler(PileError)
    @app.exception_handler(ValueError)
    async def bad_request(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=400, content={"schemaVersion": SCHEMA_VERSION, "error": str(exc)})

    @app.exception_handler(ProviderError)
    async def provider_failure(request: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(status_code=502, content={"schemaVersion": SCHEMA_VERSION, "error": str(exc)})

    # -- meta ---------------------------------------------------------------

    @app.get("/api/meta")
    def get_meta() -> dict:
        from .piles import TASK_KINDS

        return {
            "schemaVersion": SCHEMA_VERSION,
            "corpusSize": len(state.index),
            "factCount": len(state.store),
            "taskKinds": list(TASK_KINDS),
            "temperatureRange": list(TEMPERATURE_RANGE),
            "defaults": {
                "searchK": DEFAULT_SEARCH_K,
                "factK": kg_query.DEFAULT_FACT_K,
                "suggestK": validate.DEFAULT_SUGGEST_K,
                "linkFloor": state.link_floor,
            },
        }

    # -- documents ------------------------------------------------------------

    @app.get("/api/documents")
    def list_documents(
        filter: str | None = None,
        groupBy: str | None = None,
        sortBy: str | None = None,
        direction: str = "asc",
    ) -> dict:
        from .corpus import group_sort, keyword_filter

        docs = list(state.index.documents)
        if filter is not None and filter.strip():
            docs = keyword_filter(state.index, filter)
        payload: dict = {"schemaVersion": SCHEMA_VERSION}
        key = groupBy or sortBy
        if key is not None:
            if key not in GROUP_KEYS:
                raise ValueError(f"unknown group/sort key: {key!r} (expected one of {GROUP_KEYS})")
            groups = group_sort(docs, key, direction)
            docs = [doc for group in groups for doc in group.documents]
            if groupBy is not None:
                payload["groups"] = [
                    {"label": group.label, "docIds": [d.id for d in group.documents]}
                    for group in groups
                ]
        payload["documents"] = [_doc_meta(doc) for doc in docs]
        return payload

    @app.get("/api/documents/{doc_id}")
    def get_document(doc_id: str) -> dict:
        return {"schemaVersion": SCHEMA_VERSION, "document": _doc_full(state.index.get(doc_id))}

    # -- search ----------------------------------------------------------------

    @app.post("/api/search/semantic")
    def search_semantic(body: SearchBody) -> dict:
        results = semantic_search(
            body.query, state.table, state.embedder, k=body.k, candidate_ids=body.candidateIds
        )
        return {
            "schemaVersion": SCHEMA_VERSION,
            "results": [
                {"docId": r.doc_id, "score": r.score, "rank": r.rank} for r in results
            ],
        }

    # -- knowledge graph ---------------------------------------------------------

    @app.get("/api/kg/entities/{name}/facts")
    def entity_facts(name: str, context: str | None = None, k: int = kg_query.DEFAULT_FACT_K) -> dict:
        facts = kg_query.search_entity(state.store, name)
        ranking_context = context if context is not None else name
        ranked = kg_query.rank_facts(facts, ranking_context, state.embedder, k=k)
        return {
            "schemaVersion": SCHEMA_VERSION,
            "facts": [
                {**_fact_record(r.fact), "score": r.score, "rank": r.rank} for r in ranked
            ],
        }

    @app.get("/api/kg/entities/{name}/context")
    def entity_context(name: str, capConnected: int = 5, capSimilar: int = 5) -> dict:
        context = kg_query.entity_context(
            state.store, name, state.embedder, cap_connected=capConnected, cap_similar=capSimilar
        )
        return {
            "schemaVersion": SCHEMA_VERSION,
            "entity": context.entity,
            "connected": [{"entity": e, "degree": d} for e, d in context.connected],
            "similar": [{"entity": e, "score": s} for e, s in context.similar],
        }

    @app.get("/api/kg/facts/{fact_id}/sources")
    def fact_sources(fact_id: str) -> dict:
        docs = kg_query.fact_sources(state.store, fact_id, state.index)
        return {"schemaVersion": SCHEMA_VERSION, "documents": [_doc_full(d) for d in docs]}

    # -- piles -------------------------------------------------------------------

    def _pile_payload(pile: Pile) -> dict:
        return {"schemaVersion": SCHEMA_VERSION, "pile": pile.to_record()}

    @app.post("/api/piles")
    def create_pile(body: CreatePileBody) -> dict:
        if body.duplicateOf is not None:
            pile = state.workspace.duplicate_pile(body.duplicateOf)
        else:
            pile = state.workspace.create_pile(body.name or "Untitled pile")
        state.persist_workspace()
        return _pile_payload(pile)

    @app.patch("/api/piles/{pile_id}")
    def rename_pile(pile_id: str, body: PatchPileBody) -> dict:
        pile = state.workspace.rename_pile(pile_id, body.name)
        state.persist_workspace()
        return _pile_payload(pile)

    @app.post("/api/piles/{pile_id}/docs")
    def add_docs(pile_id: str, body: DocsBody) -> dict:
        pile = state.workspace.add_docs(pile_id, body.docIds, state.index)
        state.persist_workspace()
        return _pile_payload(pile)

    @app.delete("/api/piles/{pile_id}/docs")
    def remove_docs(pile_id: str, body: DocsBody) -> dict:
        pile = state.workspace.remove_docs(pile_id, body.docIds)
        state.persist_workspace()
        return _pile_payload(pile)

    # -- tasks ----------------------------------------------------------------

    @app.post("/api/piles/{pile_id}/tasks/preview")
    def preview_task(pile_id: str, body: TaskBody) -> dict:
        params = _task_params(body.params)
        prompt = state.workspace.assemble_for_pile(pile_id, body.kind, params, state.index)
        payload = {"schemaVersion": SCHEMA_VERSION, "prompt": prompt}
        if body.kind == "Custom" and not state.workspace.get_pile(pile_id).doc_ids:
            payload["warning"] = "pile is empty: the prompt contains no documents"
        return payload

    @app.post("/api/piles/{pile_id}/tasks")
    def run_task(pile_id: str, body: TaskBody) -> dict:
        params = _task_params(body.params)
        record = state.workspace.run_task(
            pile_id, body.kind, params, state.generator, state.index
        )
        state.persist_workspace()
        return {"schemaVersion": SCHEMA_VERSION, "evidence": record.to_record()}

    # -- grounding ---------------------------------------------------------------

    @app.post("/api/piles/{pile_id}/evidence/{evidence_id}/extract")
    def extract(pile_id: str, evidence_id: str) -> dict:
        with state.workspace.lock:
            record = state.workspace.find_evidence(pile_id, evidence_id)
            spans = validate.extract_entities(record.response, state.store)
            record.annotations["entitySpans"] = [span.to_record() for span in spans]
            state.workspace.touch()
        state.persist_workspace()
        return {
            "schemaVersion": SCHEMA_VERSION,
            "entitySpans": [span.to_record() for span in spans],
            "evidence": record.to_record(),
        }

    @app.post("/api/piles/{pile_id}/evidence/{evidence_id}/link")
    def link(pile_id: str, evidence_id: str, body: LinkBody | None = None) -> dict:
        floor = state.link_floor if body is None or body.floor is None else body.floor
        with state.workspace.lock:
            pile = state.workspace.get_pile(pile_id)
            record = state.workspace.find_evidence(pile_id, evidence_id)
            links = validate.link_sentences(
                record.response, pile, state.index, state.embedder, floor=floor
            )
            record.annotations["sentenceLinks"] = [link.to_record() for link in links]
            state.workspace.touch()
        state.persist_workspace()
        return {
            "schemaVersion": SCHEMA_VERSION,
            "sentenceLinks": [link.to_record() for link in links],
            "evidence": record.to_record(),
        }

    @app.post("/api/piles/{pile_id}/evidence/{evidence_id}/suggest")
    def suggest(pile_id: str, evidence_id: str, body: SuggestBody | None = None) -> dict:
        k = validate.DEFAULT_SUGGEST_K if body is None else body.k
        with state.workspace.lock:
            pile = state.workspace.get_pile(pile_id)
            record = state.workspace.find_evidence(pile_id, evidence_id)
            suggestions = validate.suggest_documents(
                record.response, pile, state.table, state.embedder, k=k
            )
            record.annotations["suggestions"] = [s.to_record() for s in suggestions]
            state.workspace.touch()
        state.persist_workspace()
        return {
            "schemaVersion": SCHEMA_VERSION,
            "suggestions": [s.to_record() for s in suggestions],
            "pile": pile.to_record(),
            "evidence": record.to_record(),
        }

    # -- workspace ------------------------------------------------------------

    @app.get("/api/workspace")
    def get_workspace() -> dict:
        return {"schemaVersion": SCHEMA_VERSION, "workspace": state.workspace.to_record()}

    @app.put("/api/workspace")
    def put_workspace(body: WorkspaceBody) -> dict:
        state.workspace.replace_from_record(body.workspace)
        state.persist_workspace()
        return {"schemaVersion": SCHEMA_VERSION, "workspace": state.workspace.to_record()}

    @app.post("/api/workspace/reorder")
    def reorder(body: ReorderBody) -> dict:
        state.workspace.reorder_piles(body.ordering)
        state.persist_workspace()
        return {"schemaVersion": SCHEMA_VERSION, "workspace": state.workspace.to_record()}

    return app
