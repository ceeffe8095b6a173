"""Command-line pipeline driver: ingest, embed, build-kg, search, kg,
run-task, and serve.

Artifacts live under one workspace directory with fixed subpaths so the
commands compose without flag plumbing:

    <out>/index/corpus.jsonl      ingested corpus
    <out>/embeddings/docs.npz     document embedding table
    <out>/embeddings/cache/       per-text embedding cache
    <out>/kg/facts.jsonl          deduplicated fact store
    <out>/kg/report.json          build report
    <out>/workspace.json          pile workspace (serve)
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import kg_query
from .corpus import CorpusError, CorpusIndex, FileTopicProvider, assign_topics, ingest_corpus
from .jsonutil import atomic_write_text
from .kg_build import (
    DEFAULT_ENTITY_THRESHOLD,
    DEFAULT_RELATION_THRESHOLD,
    FactStore,
    KgBuildConfig,
    build_kg,
)
from .piles import TaskParams, Workspace, assemble_prompt
from .providers import ProviderError, ProviderSetup, load_providers
from .search import EmbeddingTable, build_doc_embeddings, semantic_search

logger = logging.getLogger(__name__)

DEFAULT_OUT = "workdir"

CORPUS_PATH = "index/corpus.jsonl"
EMBEDDINGS_PATH = "embeddings/docs.npz"
CACHE_PATH = "embeddings/cache"
FACTS_PATH = "kg/facts.jsonl"
REPORT_PATH = "kg/report.json"
WORKSPACE_PATH = "workspace.json"


class MissingArtifactError(RuntimeError):
    """A command prerequisite has not been produced yet."""


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise MissingArtifactError(
            f"missing artifact {path}; run `docpile {producer}` first"
        )
    return path


def _load_index(out: Path) -> CorpusIndex:
    return ingest_corpus(_require(out / CORPUS_PATH, "ingest"), format="ndjson")


def _load_table(out: Path) -> EmbeddingTable:
    return EmbeddingTable.load(_require(out / EMBEDDINGS_PATH, "embed"))


def _load_store(out: Path) -> FactStore:
    return FactStore.load(_require(out / FACTS_PATH, "build-kg"))


def _providers(args: argparse.Namespace, out: Path) -> ProviderSetup:
    if not args.provider_config:
        raise MissingArtifactError("this command needs --provider-config")
    return load_providers(args.provider_config, cache_root=out / CACHE_PATH)


def _emit(args: argparse.Namespace, payload: dict, human: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    else:
        print(human)


# -- commands -----------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    out = Path(args.out)
    index = ingest_corpus(args.in_path, format=args.format)
    if args.topics:
        index = assign_topics(index, FileTopicProvider(args.topics))
    atomic_write_text(out / CORPUS_PATH, index.to_ndjson())
    _emit(
        args,
        {"documents": len(index), "path": str(out / CORPUS_PATH)},
        f"ingested {len(index)} documents -> {out / CORPUS_PATH}",
    )
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    out = Path(args.out)
    index = _load_index(out)
    setup = _providers(args, out)
    table = build_doc_embeddings(index, setup.embedder, max_parallel=setup.max_parallel)
    table.save(out / EMBEDDINGS_PATH)
    _emit(
        args,
        {"embeddings": len(table), "dim": table.dim, "path": str(out / EMBEDDINGS_PATH)},
        f"embedded {len(table)} documents ({table.dim} dims) -> {out / EMBEDDINGS_PATH}",
    )
    return 0


def cmd_build_kg(args: argparse.Namespace) -> int:
    out = Path(args.out)
    index = _load_index(out)
    setup = _providers(args, out)
    config = KgBuildConfig(
        threshold_entity=args.threshold_entity, threshold_relation=args.threshold_relation
    )
    store, report = build_kg(
        index, setup.generator, setup.embedder, config=config, out_dir=out / "kg"
    )
    _emit(
        args,
        {
            "facts": len(store),
            "totalTriples": report.total_triples,
            "skipped": report.total_skipped,
            "failedDocuments": report.failed_documents,
            "path": str(out / FACTS_PATH),
        },
        f"built {len(store)} facts from {report.total_triples} triples "
        f"({report.total_skipped} lines skipped, {len(report.failed_documents)} docs failed) "
        f"-> {out / FACTS_PATH}",
    )
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    out = Path(args.out)
    index = _load_index(out)
    table = _load_table(out)
    setup = _providers(args, out)
    results = semantic_search(args.query, table, setup.embedder, k=args.k)
    if args.json:
        print(
            json.dumps(
                {
                    "results": [
                        {"docId": r.doc_id, "score": r.score, "rank": r.rank}
                        for r in results
                    ]
                },
                ensure_ascii=False,
            )
        )
    else:
        for r in results:
            print(f"{r.rank:>3}. {r.doc_id}  {r.score:.4f}  {index.get(r.doc_id).title}")
    return 0


def cmd_kg(args: argparse.Namespace) -> int:
    out = Path(args.out)
    store = _load_store(out)
    setup = _providers(args, out)
    facts = kg_query.search_entity(store, args.entity)
    context_text = args.context if args.context is not None else args.entity
    ranked = kg_query.rank_facts(facts, context_text, setup.embedder, k=args.k)
    entity_info = kg_query.entity_context(store, args.entity, setup.embedder)
    if args.json:
        print(
            json.dumps(
                {
                    "facts": [
                        {**r.fact.to_record(), "score": r.score, "rank": r.rank}
                        for r in ranked
                    ],
                    "connected": [{"entity": e, "degree": d} for e, d in entity_info.connected],
                    "similar": [{"entity": e, "score": s} for e, s in entity_info.similar],
                },
                ensure_ascii=False,
            )
        )
        return 0
    if not ranked:
        print(f"no facts match entity {args.entity!r}")
    for r in ranked:
        sources = ",".join(r.fact.sources)
        print(
            f"{r.rank:>3}. {r.fact.subject} | {r.fact.predicate} | {r.fact.object}"
            f"  (support {r.fact.support}: {sources})"
        )
    if entity_info.connected:
        print("connected: " + ", ".join(f"{e} ({d})" for e, d in entity_info.connected))
    if entity_info.similar:
        print("similar:   " + ", ".join(f"{e} ({s:.3f})" for e, s in entity_info.similar))
    return 0


def cmd_run_task(args: argparse.Namespace) -> int:
    out = Path(args.out)
    index = _load_index(out)
    setup = _providers(args, out)
    doc_ids = [doc_id.strip() for doc_id in args.docs.split(",") if doc_id.strip()]
    unknown = [doc_id for doc_id in doc_ids if doc_id not in index]
    if unknown:
        raise CorpusError(f"unknown document ids: {unknown}")
    params = TaskParams(
        temperature=args.temperature,
        model=args.model,
        question=args.question,
        entity_types=tuple(args.entity_types.split(",")) if args.entity_types else None,
        concepts=tuple(args.concepts.split(",")) if args.concepts else None,
        custom_text=args.custom_text,
    )
    docs = [index.get(doc_id) for doc_id in doc_ids]
    prompt = assemble_prompt(docs, args.kind, params)
    from .providers import GenerationRequest

    result = setup.generator.generate(
        GenerationRequest(prompt=prompt, temperature=params.temperature, model=params.model)
    )
    if args.json:
        print(
            json.dumps(
                {"kind": args.kind, "docIds": doc_ids, "prompt": prompt, "response": result.text},
                ensure_ascii=False,
            )
        )
    else:
        print(result.text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import AppState, create_app

    out = Path(args.out)
    index = _load_index(out)
    table = _load_table(out)
    store = _load_store(out)
    setup = _providers(args, out)
    workspace_path = out / WORKSPACE_PATH
    if workspace_path.exists():
        workspace = Workspace.load(workspace_path)
    else:
        workspace = Workspace()
    state = AppState(
        index=index,
        table=table,
        store=store,
        embedder=setup.embedder,
        generator=setup.generator,
        workspace=workspace,
        workspace_path=workspace_path,
    )
    app = create_app(state)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docpile",
        description="Document sensemaking pipeline: corpus, embeddings, knowledge graph, piles.",
    )
    parser.add_argument("--verbose", action="store_true", help="enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, providers: bool = True) -> None:
        p.add_argument("--out", default=DEFAULT_OUT, help="workspace directory (default: workdir)")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if providers:
            p.add_argument("--provider-config", help="path to provider config JSON")

    p_ingest = sub.add_parser("ingest", help="ingest a corpus file or directory")
    p_ingest.add_argument("--in", dest="in_path", required=True, help="corpus NDJSON file or directory of .txt files")
    p_ingest.add_argument("--format", choices=["ndjson", "txt-dir"], default=None)
    p_ingest.add_argument("--topics", help="JSON file mapping document id to topic label")
    common(p_ingest, providers=False)
    p_ingest.set_defaults(func=cmd_ingest)

    p_embed = sub.add_parser("embed", help="build document embeddings")
    common(p_embed)
    p_embed.set_defaults(func=cmd_embed)

    p_kg_build = sub.add_parser("build-kg", help="extract and deduplicate the knowledge graph")
    common(p_kg_build)
    p_kg_build.add_argument("--threshold-entity", type=float, default=DEFAULT_ENTITY_THRESHOLD)
    p_kg_build.add_argument("--threshold-relation", type=float, default=DEFAULT_RELATION_THRESHOLD)
    p_kg_build.set_defaults(func=cmd_build_kg)

    p_search = sub.add_parser("search", help="semantic document search")
    common(p_search)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("--k", type=int, default=5)
    p_search.set_defaults(func=cmd_search)

    p_kg = sub.add_parser("kg", help="query the knowledge graph for an entity")
    common(p_kg)
    p_kg.add_argument("--entity", required=True)
    p_kg.add_argument("--context", help="ranking context text (default: the entity name)")
    p_kg.add_argument("--k", type=int, default=5)
    p_kg.set_defaults(func=cmd_kg)

    p_task = sub.add_parser("run-task", help="run a sensemaking task over listed documents")
    common(p_task)
    p_task.add_argument("--docs", required=True, help="comma-separated document ids")
    p_task.add_argument("--kind", required=True)
    p_task.add_argument("--question")
    p_task.add_argument("--entity-types")
    p_task.add_argument("--concepts")
    p_task.add_argument("--custom-text")
    p_task.add_argument("--temperature", type=float, default=0.7)
    p_task.add_argument("--model", default="default")
    p_task.set_defaults(func=cmd_run_task)

    p_serve = sub.add_parser("serve", help="launch the HTTP service")
    common(p_serve)
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CorpusError, ProviderError, MissingArtifactError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
