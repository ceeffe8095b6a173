"""Pile lifecycle, task prompt assembly, and the workspace that owns both.

A pile is a named, ordered group of document ids plus an append-only
evidence history. Nine sensemaking tasks run over piles; each run stores
the exact prompt sent to the model so it can be shown verbatim and
reproduced later. The workspace serializes all mutations through one
writer lock and persists to a single JSON document that round-trips
byte-identically.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .corpus import CorpusIndex, Document
from .jsonutil import atomic_write_text, canonical_json
from .providers import TEMPERATURE_RANGE, GenerationProvider, GenerationRequest

logger = logging.getLogger(__name__)

TASK_KINDS = (
    "Analyze",
    "Summarize",
    "Extract",
    "Classify",
    "Generate",
    "List",
    "Explain",
    "Answer",
    "Custom",
)

TASK_STEMS: dict[str, str] = {
    "Analyze": "Analyze the documents for patterns and insights",
    "Summarize": "Summarize the main events described",
    "Extract": "Extract relevant entities (people, locations, etc.)",
    "Classify": "Classify the relevant topics discussed",
    "Generate": "Generate potential questions that the documents raise",
    "List": "List analytic tasks to perform based on the documents",
    "Explain": "Explain concepts mentioned in the documents",
    "Answer": "Answer questions using the documents",
}

PROMPT_PREAMBLE = (
    "You are an analyst working with the documents below. "
    "Read every document, then follow the instruction at the end."
)

DEFAULT_TEMPERATURE = 0.7


class PileError(ValueError):
    """Base class for pile and task failures."""


class PileNotFoundError(PileError):
    pass


class UnknownDocumentError(PileError):
    pass


class TaskParamError(PileError):
    """A task was requested without a parameter its kind requires."""


class EmptyPileError(PileError):
    """A non-Custom task was requested on a pile with no documents."""


def utc_now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# ---------------------------------------------------------------------------
# Task parameters and prompt assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TaskParams:
    """Parameters for one task run; optional fields belong to specific kinds."""

    temperature: float = DEFAULT_TEMPERATURE
    model: str = "default"
    question: str | None = None
    entity_types: tuple[str, ...] | None = None
    concepts: tuple[str, ...] | None = None
    custom_text: str | None = None

    def __post_init__(self) -> None:
        low, high = TEMPERATURE_RANGE
        if not (low <= self.temperature <= high):
            raise TaskParamError(
                f"temperature {self.temperature} outside allowed range [{low}, {high}]"
            )

    def to_record(self) -> dict:
        record: dict = {"temperature": self.temperature, "model": self.model}
        if self.question is not None:
            record["question"] = self.question
        if self.entity_types is not None:
            record["entityTypes"] = list(self.entity_types)
        if self.concepts is not None:
            record["concepts"] = list(self.concepts)
        if self.custom_text is not None:
            record["customText"] = self.custom_text
        return record

    @classmethod
    def from_record(cls, record: Mapping) -> "TaskParams":
        return cls(
            temperature=float(record.get("temperature", DEFAULT_TEMPERATURE)),
            model=str(record.get("model", "default")),
            question=record.get("question"),
            entity_types=tuple(record["entityTypes"]) if "entityTypes" in record else None,
            concepts=tuple(record["concepts"]) if "concepts" in record else None,
            custom_text=record.get("customText"),
        )


def validate_task(kind: str, params: TaskParams) -> None:
    if kind not in TASK_KINDS:
        raise TaskParamError(f"unknown task kind: {kind!r} (expected one of {TASK_KINDS})")
    if kind == "Answer" and not (params.question and params.question.strip()):
        raise TaskParamError("Answer task requires a question")
    if kind == "Custom" and not (params.custom_text and params.custom_text.strip()):
        raise TaskParamError("Custom task requires customText")


def task_instruction(kind: str, params: TaskParams) -> str:
    """The instruction block appended after the documents."""
    validate_task(kind, params)
    if kind == "Custom":
        return params.custom_text
    stem = TASK_STEMS[kind]
    if kind == "Answer":
        return f"{stem}\n\nQuestion: {params.question}"
    if kind == "Extract" and params.entity_types:
        return f"{stem}\n\nEntity types: {', '.join(params.entity_types)}"
    if kind == "Explain" and params.concepts:
        return f"{stem}\n\nConcepts: {', '.join(params.concepts)}"
    return stem


def assemble_prompt(docs: list[Document], kind: str, params: TaskParams) -> str:
    """Assemble the full task prompt for an ordered document list.

    Layout: preamble, one separator-headed block per document in order,
    then the task instruction. Byte-deterministic in its inputs. Only a
    Custom task may run over an empty document list (the caller logs the
    warning).
    """
    validate_task(kind, params)
    if not docs and kind != "Custom":
        raise EmptyPileError(f"{kind} task requires a non-empty pile")
    segments = [PROMPT_PREAMBLE]
    for doc in docs:
        segments.append(f"=== DOCUMENT: {doc.id} — {doc.title} ===\n{doc.body}")
    segments.append(task_instruction(kind, params))
    return "\n\n".join(segments) + "\n"


# ---------------------------------------------------------------------------
# Piles and evidence
# ---------------------------------------------------------------------------


@dataclass
class EvidenceRecord:
    """One task execution: the verbatim prompt, the response, annotations.

    doc_ids snapshots pile membership at run time so the prompt stays
    reproducible after the pile changes.
    """

    id: str
    task_kind: str
    params: TaskParams
    prompt: str
    response: str
    created_at: str
    doc_ids: tuple[str, ...]
    annotations: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "taskKind": self.task_kind,
            "params": self.params.to_record(),
            "prompt": self.prompt,
            "response": self.response,
            "createdAt": self.created_at,
            "docIds": list(self.doc_ids),
            "annotations": self.annotations,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "EvidenceRecord":
        return cls(
            id=str(record["id"]),
            task_kind=str(record["taskKind"]),
            params=TaskParams.from_record(record["params"]),
            prompt=str(record["prompt"]),
            response=str(record["response"]),
            created_at=str(record["createdAt"]),
            doc_ids=tuple(str(d) for d in record["docIds"]),
            annotations=dict(record.get("annotations", {})),
        )


@dataclass
class Pile:
    id: str
    name: str
    position: int
    doc_ids: list[str] = field(default_factory=list)
    evidence: list[EvidenceRecord] = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "position": self.position,
            "docIds": list(self.doc_ids),
            "evidence": [record.to_record() for record in self.evidence],
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Pile":
        return cls(
            id=str(record["id"]),
            name=str(record["name"]),
            position=int(record["position"]),
            doc_ids=[str(d) for d in record["docIds"]],
            evidence=[EvidenceRecord.from_record(r) for r in record.get("evidence", [])],
        )


# ---------------------------------------------------------------------------
# Workspace
# ---------------------------------------------------------------------------


class Workspace:
    """All piles plus counters and timestamps; single writer, many readers.

    The clock is injectable so persistence tests can pin timestamps.
    """

    def __init__(self, workspace_id: str = "w1", clock: Callable[[], str] = utc_now):
        self.lock = threading.RLock()
        self.id = workspace_id
        self.clock = clock
        self.created_at = clock()
        self.updated_at = self.created_at
        self.piles: dict[str, Pile] = {}
        self.next_pile_id = 1
        self.next_evidence_id = 1

    # -- lookups ------------------------------------------------------------

    def get_pile(self, pile_id: str) -> Pile:
        if pile_id not in self.piles:
            raise PileNotFoundError(f"unknown pile id: {pile_id!r}")
        return self.piles[pile_id]

    def ordered_piles(self) -> list[Pile]:
        return sorted(self.piles.values(), key=lambda pile: pile.position)

    def find_evidence(self, pile_id: str, evidence_id: str) -> EvidenceRecord:
        pile = self.get_pile(pile_id)
        for record in pile.evidence:
            if record.id == evidence_id:
                return record
        raise PileError(f"pile {pile_id!r} has no evidence record {evidence_id!r}")

    def touch(self) -> None:
        self.updated_at = self.clock()

    # -- pile lifecycle -----------------------------------------------------

    def create_pile(self, name: str) -> Pile:
        with self.lock:
            pile = Pile(
                id=f"p{self.next_pile_id}", name=name, position=len(self.piles)
            )
            self.next_pile_id += 1
            self.piles[pile.id] = pile
            self.touch()
            return pile

    def rename_pile(self, pile_id: str, name: str) -> Pile:
        with self.lock:
            pile = self.get_pile(pile_id)
            pile.name = name
            self.touch()
            return pile

    def duplicate_pile(self, pile_id: str) -> Pile:
        """Copy membership but not evidence: evidence cites a specific
        prompt/doc-set moment and would mis-attribute provenance if copied."""
        with self.lock:
            source = self.get_pile(pile_id)
            copy = Pile(
                id=f"p{self.next_pile_id}",
                name=f"{source.name} (copy)",
                position=len(self.piles),
                doc_ids=list(source.doc_ids),
            )
            self.next_pile_id += 1
            self.piles[copy.id] = copy
            self.touch()
            return copy

    def add_docs(self, pile_id: str, doc_ids: Iterable[str], index: CorpusIndex) -> Pile:
        with self.lock:
            pile = self.get_pile(pile_id)
            ids = list(doc_ids)
            unknown = [doc_id for doc_id in ids if doc_id not in index]
            if unknown:
                raise UnknownDocumentError(f"unknown document ids: {unknown[:5]}")
            present = set(pile.doc_ids)
            for doc_id in ids:
                if doc_id not in present:
                    pile.doc_ids.append(doc_id)
                    present.add(doc_id)
            self.touch()
            return pile

    def remove_docs(self, pile_id: str, doc_ids: Iterable[str]) -> Pile:
        with self.lock:
            pile = self.get_pile(pile_id)
            victims = set(doc_ids)
            pile.doc_ids = [doc_id for doc_id in pile.doc_ids if doc_id not in victims]
            self.touch()
            return pile

    def reorder_piles(self, ordering: list[str]) -> None:
        with self.lock:
            if sorted(ordering) != sorted(self.piles):
                raise PileError("ordering must be a permutation of existing pile ids")
            for position, pile_id in enumerate(ordering):
                self.piles[pile_id].position = position
            self.touch()

    # -- tasks ---------------------------------------------------------------

    def assemble_for_pile(self, pile_id: str, kind: str, params: TaskParams, index: CorpusIndex) -> str:
        with self.lock:
            pile = self.get_pile(pile_id)
            docs = [index.get(doc_id) for doc_id in pile.doc_ids]
        if kind == "Custom" and not docs:
            logger.warning("Custom task on empty pile %s: prompt has no documents", pile_id)
        return assemble_prompt(docs, kind, params)

    def run_task(
        self,
        pile_id: str,
        kind: str,
        params: TaskParams,
        llm: GenerationProvider,
        index: CorpusIndex,
    ) -> EvidenceRecord:
        """Assemble, call the model, append evidence.

        The provider call runs outside the writer lock; nothing is appended
        if it fails. doc_ids are snapshotted with the prompt, so a
        concurrent membership change cannot desynchronize them.
        """
        with self.lock:
            pile = self.get_pile(pile_id)
            doc_ids = tuple(pile.doc_ids)
            docs = [index.get(doc_id) for doc_id in doc_ids]
        if kind == "Custom" and not docs:
            logger.warning("Custom task on empty pile %s: prompt has no documents", pile_id)
        prompt = assemble_prompt(docs, kind, params)
        result = llm.generate(
            GenerationRequest(prompt=prompt, temperature=params.temperature, model=params.model)
        )
        with self.lock:
            record = EvidenceRecord(
                id=f"e{self.next_evidence_id}",
                task_kind=kind,
                params=params,
                prompt=prompt,
                response=result.text,
                created_at=self.clock(),
                doc_ids=doc_ids,
            )
            self.next_evidence_id += 1
            self.get_pile(pile_id).evidence.append(record)
            self.touch()
            return record

    # -- persistence ----------------------------------------------------------

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "createdAt": self.created_at,
            "updatedAt": self.updated_at,
            "nextPileId": self.next_pile_id,
            "nextEvidenceId": self.next_evidence_id,
            "piles": [pile.to_record() for pile in self.ordered_piles()],
        }

    def to_json(self) -> str:
        with self.lock:
            return canonical_json(self.to_record())

    def save(self, path: str | Path) -> None:
        atomic_write_text(Path(path), self.to_json())

    def replace_from_record(self, record: Mapping) -> None:
        with self.lock:
            self.id = str(record["id"])
            self.created_at = str(record["createdAt"])
            self.updated_at = str(record["updatedAt"])
            self.next_pile_id = int(record["nextPileId"])
            self.next_evidence_id = int(record["nextEvidenceId"])
            piles = [Pile.from_record(r) for r in record.get("piles", [])]
            self.piles = {pile.id: pile for pile in piles}
            positions = sorted(pile.position for pile in piles)
            if positions != list(range(len(piles))):
                raise PileError("pile positions must form a permutation 0..n-1")

    @classmethod
    def load(cls, path: str | Path, clock: Callable[[], str] = utc_now) -> "Workspace":
        import json

        record = json.loads(Path(path).read_text(encoding="utf-8"))
        workspace = cls(clock=clock)
        workspace.replace_from_record(record)
        return workspace
