import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { docColor } from "../src/colors.js";
import { GroundingPanel } from "../src/grounding.js";
import type { EvidenceRecord, PileRecord } from "../src/types.js";
import { StubServer } from "./stubServer.js";

const RESPONSE = "John likes Sally. Edvard Vann was investigated by Kronos police.";

// Offsets into RESPONSE, exactly as the server's extractor would emit them.
const SPANS = [
  { start: 0, end: 4, entity: "john" },
  { start: 11, end: 16, entity: "sally" },
  { start: 18, end: 29, entity: "edvard vann" },
  { start: 50, end: 63, entity: "kronos police" },
];

function makeRoot(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  return root;
}

describe("GroundingPanel", () => {
  let stub: StubServer;
  let api: ApiClient;
  let panel: GroundingPanel;
  let root: HTMLElement;
  let evidence: EvidenceRecord;
  let entityClicks: string[];
  let pileUpdates: PileRecord[];

  beforeEach(async () => {
    stub = new StubServer();
    stub.addPile({ id: "p1", name: "Leads", docIds: ["d1", "d2"] });
    stub.responseText = RESPONSE;
    api = new ApiClient("", stub.fetchImpl);
    root = makeRoot();
    entityClicks = [];
    pileUpdates = [];
    panel = new GroundingPanel(root, api, {
      onEntityClick: (entity) => {
        entityClicks.push(entity);
      },
      onPileUpdate: (pile) => {
        pileUpdates.push(pile);
      },
    });
    const payload = await api.runTask("p1", "Summarize", { temperature: 0.7, model: "default" });
    evidence = payload.evidence;
    panel.setEvidence("p1", evidence);
  });

  it("highlights exactly the server-provided offsets", async () => {
    stub.entitySpans = SPANS;
    await panel.extract();

    const marks = Array.from(root.querySelectorAll<HTMLElement>("mark.entity-span"));
    expect(marks).toHaveLength(SPANS.length);
    marks.forEach((mark, i) => {
      const span = SPANS[i];
      if (span === undefined) throw new Error("span fixture missing");
      expect(mark.textContent).toBe(RESPONSE.slice(span.start, span.end));
      expect(mark.dataset.start).toBe(String(span.start));
      expect(mark.dataset.end).toBe(String(span.end));
      expect(mark.dataset.entity).toBe(span.entity);
    });
    expect(marks.map((m) => m.textContent)).toEqual([
      "John",
      "Sally",
      "Edvard Vann",
      "Kronos police",
    ]);
    const container = root.querySelector(".grounded-response");
    expect(container?.textContent).toBe(RESPONSE);
    expect(stub.callsTo("POST", "/api/piles/p1/evidence/e1/extract")).toHaveLength(1);
  });

  it("reports when the server finds no entities", async () => {
    stub.entitySpans = [];
    await panel.extract();
    expect(root.querySelectorAll("mark.entity-span")).toHaveLength(0);
    const status = root.querySelector<HTMLElement>(".extract-status");
    expect(status?.hidden).toBe(false);
    expect(status?.textContent).toContain("No entities found");
    expect(root.querySelector(".grounded-response")?.textContent).toBe(RESPONSE);
  });

  it("sends clicked entities to the KG search callback", async () => {
    stub.entitySpans = SPANS;
    await panel.extract();
    const marks = root.querySelectorAll("mark.entity-span");
    marks[2]?.dispatchEvent(new Event("click"));
    expect(entityClicks).toEqual(["edvard vann"]);
  });

  it("dims all but the focused pair on link hover", async () => {
    stub.sentenceLinks = [
      { responseSentenceIndex: 0, docId: "d1", docSentenceIndex: 0, score: 0.91 },
      { responseSentenceIndex: 1, docId: "d3", docSentenceIndex: 0, score: 0.97 },
      { responseSentenceIndex: 2, docId: "d2", docSentenceIndex: 1, score: 0.42 },
    ];
    await panel.link();

    const rows = Array.from(root.querySelectorAll<HTMLElement>(".sentence-link"));
    expect(rows).toHaveLength(3);

    rows[1]?.dispatchEvent(new Event("mouseenter"));
    expect(rows[0]?.classList.contains("dimmed")).toBe(true);
    expect(rows[1]?.classList.contains("dimmed")).toBe(false);
    expect(rows[1]?.classList.contains("focused")).toBe(true);
    expect(rows[2]?.classList.contains("dimmed")).toBe(true);

    rows[1]?.dispatchEvent(new Event("mouseleave"));
    for (const row of rows) {
      expect(row.classList.contains("dimmed")).toBe(false);
      expect(row.classList.contains("focused")).toBe(false);
    }
  });

  it("pins focus on click until clicked again", async () => {
    stub.sentenceLinks = [
      { responseSentenceIndex: 0, docId: "d1", docSentenceIndex: 0, score: 0.91 },
      { responseSentenceIndex: 1, docId: "d2", docSentenceIndex: 1, score: 0.42 },
    ];
    await panel.link();
    const rows = Array.from(root.querySelectorAll<HTMLElement>(".sentence-link"));

    rows[0]?.dispatchEvent(new Event("click"));
    rows[0]?.dispatchEvent(new Event("mouseleave"));
    expect(rows[0]?.classList.contains("focused")).toBe(true);
    expect(rows[1]?.classList.contains("dimmed")).toBe(true);

    rows[0]?.dispatchEvent(new Event("click"));
    expect(rows[0]?.classList.contains("focused")).toBe(false);
    expect(rows[1]?.classList.contains("dimmed")).toBe(false);
  });

  it("colors link rows by their source document", async () => {
    stub.sentenceLinks = [
      { responseSentenceIndex: 0, docId: "d1", docSentenceIndex: 0, score: 0.91 },
      { responseSentenceIndex: 1, docId: "d2", docSentenceIndex: 1, score: 0.42 },
    ];
    await panel.link();
    const rows = Array.from(root.querySelectorAll<HTMLElement>(".sentence-link"));
    expect(rows[0]?.style.getPropertyValue("--doc-color")).toBe(docColor("d1"));
    expect(rows[1]?.style.getPropertyValue("--doc-color")).toBe(docColor("d2"));
    expect(rows[0]?.dataset.docId).toBe("d1");
    expect(rows[0]?.textContent).toBe("Sentence 1 matches d1 sentence 1 (0.910)");
  });

  it("passes a custom floor through to the server", async () => {
    stub.sentenceLinks = [];
    await panel.link(0.3);
    const calls = stub.callsTo("POST", "/api/piles/p1/evidence/e1/link");
    expect(calls[0]?.body).toEqual({ floor: 0.3 });
    const status = root.querySelector<HTMLElement>(".link-status");
    expect(status?.hidden).toBe(false);
    expect(status?.textContent).toContain("No sentences linked");
  });

  it("marks added and already-in-pile suggestions and updates the pile", async () => {
    stub.suggestions = [
      { docId: "d1", score: 0.88, alreadyInPile: true, added: false },
      { docId: "d3", score: 0.74, alreadyInPile: false, added: true },
    ];
    await panel.suggest();

    const chips = Array.from(root.querySelectorAll<HTMLElement>(".suggestion"));
    expect(chips).toHaveLength(2);
    expect(chips[0]?.classList.contains("already")).toBe(true);
    expect(chips[0]?.classList.contains("added")).toBe(false);
    expect(chips[1]?.classList.contains("added")).toBe(true);
    expect(root.querySelector<HTMLElement>(".suggest-status")?.hidden).toBe(true);

    expect(pileUpdates).toHaveLength(1);
    expect(pileUpdates[0]?.docIds).toEqual(["d1", "d2", "d3"]);
    expect(stub.piles.get("p1")?.docIds).toEqual(["d1", "d2", "d3"]);
  });

  it("says so when every suggestion is already in the pile", async () => {
    stub.suggestions = [
      { docId: "d1", score: 0.88, alreadyInPile: true, added: false },
      { docId: "d2", score: 0.61, alreadyInPile: true, added: false },
    ];
    await panel.suggest();
    const status = root.querySelector<HTMLElement>(".suggest-status");
    expect(status?.hidden).toBe(false);
    expect(status?.textContent).toBe("No new documents to add.");
    expect(pileUpdates[0]?.docIds).toEqual(["d1", "d2"]);
  });

  it("re-renders annotations saved on the evidence record", async () => {
    stub.entitySpans = SPANS.slice(0, 2);
    await panel.extract();

    const saved = await api.getWorkspace();
    const savedEvidence = saved.workspace.piles[0]?.evidence[0];
    if (savedEvidence === undefined) throw new Error("evidence missing from workspace");
    const fresh = new GroundingPanel(makeRoot(), api);
    fresh.setEvidence("p1", savedEvidence);
    expect(fresh.root.querySelectorAll("mark.entity-span")).toHaveLength(2);
  });

  it("renders the plain response before any grounding call", () => {
    expect(root.querySelector(".grounded-response")?.textContent).toBe(RESPONSE);
    expect(root.querySelectorAll("mark")).toHaveLength(0);
    expect(root.querySelector(".grounding-heading")?.textContent).toBe("Summarize evidence e1");
  });
});
