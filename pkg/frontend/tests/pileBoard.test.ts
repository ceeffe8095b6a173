import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { PileBoard } from "../src/pileBoard.js";
import type { PileRecord } from "../src/types.js";
import { StubServer } from "./stubServer.js";

function makeRoot(): HTMLElement {
  document.body.innerHTML = "";
  const root = document.createElement("div");
  document.body.append(root);
  return root;
}

function flush(): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, 0));
}

function dispatchDrop(target: Element, docId: string): void {
  const event = new Event("drop", { bubbles: true, cancelable: true });
  Object.defineProperty(event, "dataTransfer", {
    value: { getData: (type: string) => (type === "text/plain" ? docId : "") },
  });
  target.dispatchEvent(event);
}

function badgeText(root: HTMLElement, pileId: string): string {
  return root.querySelector(`[data-pile-id="${pileId}"] .pile-badge`)?.textContent ?? "";
}

describe("PileBoard", () => {
  let stub: StubServer;
  let board: PileBoard;
  let root: HTMLElement;

  beforeEach(async () => {
    stub = new StubServer();
    stub.addPile({ id: "p1", name: "Leads", docIds: ["d1"] });
    root = makeRoot();
    board = new PileBoard(root, new ApiClient("", stub.fetchImpl));
    await board.refresh();
  });

  it("drops a document with exactly one add-docs call and a badge increment", async () => {
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");
    expect(badgeText(root, "p1")).toBe("1");
    stub.calls = [];

    dispatchDrop(pileEl, "d2");
    expect(badgeText(root, "p1")).toBe("2");

    await board.idle();
    const addCalls = stub.callsTo("POST", "/api/piles/p1/docs");
    expect(addCalls).toHaveLength(1);
    expect(addCalls[0]?.body).toEqual({ docIds: ["d2"] });
    expect(stub.calls.filter((call) => call.method !== "GET")).toHaveLength(1);
    expect(badgeText(root, "p1")).toBe("2");
    expect(stub.piles.get("p1")?.docIds).toEqual(["d1", "d2"]);
  });

  it("shows a cue and makes no call when the document is already in the pile", async () => {
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");
    stub.calls = [];

    dispatchDrop(pileEl, "d1");
    await board.idle();
    expect(stub.calls).toHaveLength(0);
    expect(badgeText(root, "p1")).toBe("1");
    expect(pileEl.classList.contains("already-in-pile")).toBe(true);
    const note = pileEl.querySelector<HTMLElement>(".pile-note");
    expect(note?.hidden).toBe(false);
    expect(note?.textContent).toContain("already in this pile");
  });

  it("rolls the badge back and shows a toast when the add fails", async () => {
    stub.failNext("POST", "/api/piles/p1/docs", 400, "add exploded");
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");

    dispatchDrop(pileEl, "d2");
    expect(badgeText(root, "p1")).toBe("2");

    await board.idle();
    expect(badgeText(root, "p1")).toBe("1");
    expect(stub.piles.get("p1")?.docIds).toEqual(["d1"]);
    const toast = root.querySelector<HTMLElement>(".toast");
    expect(toast?.hidden).toBe(false);
    expect(toast?.textContent).toContain("add exploded");
  });

  it("queues repeated drops so each issues its own single call", async () => {
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");
    stub.calls = [];
    dispatchDrop(pileEl, "d2");
    dispatchDrop(pileEl, "d3");
    await board.idle();
    const addCalls = stub.callsTo("POST", "/api/piles/p1/docs");
    expect(addCalls.map((call) => call.body)).toEqual([{ docIds: ["d2"] }, { docIds: ["d3"] }]);
    expect(stub.piles.get("p1")?.docIds).toEqual(["d1", "d2", "d3"]);
    expect(badgeText(root, "p1")).toBe("3");
  });

  it("removes a document optimistically and reconciles", async () => {
    board.removeDoc("p1", "d1");
    expect(badgeText(root, "p1")).toBe("0");
    await board.idle();
    expect(stub.piles.get("p1")?.docIds).toEqual([]);
    expect(stub.callsTo("DELETE", "/api/piles/p1/docs")).toHaveLength(1);
  });

  it("renames a pile through the server", async () => {
    await board.rename("p1", "Suspects");
    expect(stub.piles.get("p1")?.name).toBe("Suspects");
    expect(root.querySelector('[data-pile-id="p1"] .pile-name')?.textContent).toBe("Suspects");
  });

  it("duplicates a pile and renders the copy", async () => {
    await board.duplicate("p1");
    const copies = stub.callsTo("POST", "/api/piles");
    expect(copies[0]?.body).toEqual({ duplicateOf: "p1" });
    expect(board.piles).toHaveLength(2);
    expect(root.querySelectorAll(".pile")).toHaveLength(2);
    expect(root.querySelector('[data-pile-id="p2"] .pile-name')?.textContent).toBe("Leads (copy)");
  });

  it("reorders piles by position after a move", async () => {
    stub.addPile({ id: "p2", name: "Archive", position: 1 });
    await board.refresh();
    await board.move("p2", -1);
    const reorder = stub.callsTo("POST", "/api/workspace/reorder");
    expect(reorder[0]?.body).toEqual({ ordering: ["p2", "p1"] });
    const renderedIds = Array.from(root.querySelectorAll<HTMLElement>(".pile")).map(
      (row) => row.dataset.pileId,
    );
    expect(renderedIds).toEqual(["p2", "p1"]);
  });

  it("notifies selection with the live pile record", async () => {
    const seen: (PileRecord | null)[] = [];
    const selectingBoard = new PileBoard(makeRoot(), new ApiClient("", stub.fetchImpl), {
      onSelectPile: (pile) => {
        seen.push(pile);
      },
    });
    await selectingBoard.refresh();
    selectingBoard.selectPile("p1");
    expect(seen[seen.length - 1]?.id).toBe("p1");
    const row = selectingBoard.root.querySelector('[data-pile-id="p1"]');
    expect(row?.classList.contains("selected")).toBe(true);
  });

  it("expands a pile document in place to show its source text", async () => {
    const label = root.querySelector<HTMLButtonElement>('[data-pile-id="p1"] .pile-doc-label');
    label?.dispatchEvent(new Event("click"));
    await flush();
    const text = root.querySelector(".pile-doc-text");
    expect(text?.textContent).toBe("John likes Sally. Acme Corp hired Edvard Vann last year.");
  });

  it("creates a pile with the typed name", async () => {
    const input = root.querySelector<HTMLInputElement>(".new-pile-name");
    if (input === null) throw new Error("name input missing");
    input.value = "Fresh";
    root.querySelector(".new-pile")?.dispatchEvent(new Event("click"));
    await flush();
    const create = stub.callsTo("POST", "/api/piles");
    expect(create[0]?.body).toEqual({ name: "Fresh" });
    expect(stub.piles.get("p2")?.name).toBe("Fresh");
    expect(root.querySelectorAll(".pile")).toHaveLength(2);
  });

  it("keeps the drag payload handler quiet for unrelated drops", async () => {
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");
    stub.calls = [];
    dispatchDrop(pileEl, "");
    await board.idle();
    expect(stub.calls).toHaveLength(0);
    expect(badgeText(root, "p1")).toBe("1");
  });

  it("marks the drop target while a drag hovers over it", () => {
    const pileEl = root.querySelector('[data-pile-id="p1"]');
    if (pileEl === null) throw new Error("pile row missing");
    const over = new Event("dragover", { cancelable: true });
    const preventDefault = vi.spyOn(over, "preventDefault");
    pileEl.dispatchEvent(over);
    expect(preventDefault).toHaveBeenCalled();
    expect(pileEl.classList.contains("drag-over")).toBe(true);
    pileEl.dispatchEvent(new Event("dragleave"));
    expect(pileEl.classList.contains("drag-over")).toBe(false);
  });
});
