import { beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { DocumentListPane } from "../src/documentList.js";
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

function rowIds(root: HTMLElement): string[] {
  return Array.from(root.querySelectorAll<HTMLElement>(".doc-row")).map(
    (row) => row.dataset.docId ?? "",
  );
}

describe("DocumentListPane", () => {
  let stub: StubServer;
  let pane: DocumentListPane;
  let root: HTMLElement;

  beforeEach(async () => {
    stub = new StubServer();
    root = makeRoot();
    pane = new DocumentListPane(root, new ApiClient("", stub.fetchImpl));
    await pane.refresh();
  });

  it("renders one draggable row per document in server order", () => {
    expect(rowIds(root)).toEqual(["d1", "d2", "d3"]);
    const first = root.querySelector<HTMLElement>(".doc-row");
    expect(first?.draggable).toBe(true);
    expect(first?.querySelector(".doc-title")?.textContent).toBe("Office report");
    expect(first?.querySelector(".doc-length")?.textContent).toBe("10 words");
  });

  it("delegates filtering to the server and narrows the list", async () => {
    const input = root.querySelector<HTMLInputElement>(".filter-input");
    if (input === null) throw new Error("filter input missing");
    input.value = "kronos";
    input.dispatchEvent(new Event("input"));
    await flush();
    const filterCalls = stub.calls.filter((call) => call.path.includes("filter=kronos"));
    expect(filterCalls).toHaveLength(1);
    expect(rowIds(root)).toEqual(["d3"]);

    input.value = "";
    input.dispatchEvent(new Event("input"));
    await flush();
    expect(rowIds(root)).toEqual(["d1", "d2", "d3"]);
  });

  it("renders one collapsible group per topic when grouping", async () => {
    const select = root.querySelector<HTMLSelectElement>(".group-select");
    if (select === null) throw new Error("group select missing");
    select.value = "topic";
    select.dispatchEvent(new Event("change"));
    await flush();
    const labels = Array.from(root.querySelectorAll(".doc-group-label")).map(
      (node) => node.textContent,
    );
    expect(labels).toEqual(["hiring (1)", "investigation (1)", "relations (1)"]);
    expect(root.querySelectorAll("details.doc-group")).toHaveLength(3);
    expect(rowIds(root)).toEqual(["d1", "d3", "d2"]);
  });

  it("pins the list to a single document and restores on clear", async () => {
    await pane.showOnly("d2");
    expect(rowIds(root)).toEqual(["d2"]);
    const note = root.querySelector<HTMLElement>(".pin-note");
    expect(note?.hidden).toBe(false);
    expect(note?.textContent).toContain("d2");
    const clearBtn = root.querySelector<HTMLButtonElement>(".clear-pin");
    clearBtn?.dispatchEvent(new Event("click"));
    await flush();
    expect(rowIds(root)).toEqual(["d1", "d2", "d3"]);
  });

  it("previews the full source text on hover", async () => {
    const row = root.querySelector('[data-doc-id="d1"]');
    row?.dispatchEvent(new Event("mouseenter"));
    await flush();
    expect(stub.callsTo("GET", "/api/documents/d1")).toHaveLength(1);
    expect(root.querySelector(".doc-preview-title")?.textContent).toBe("Office report");
    expect(root.querySelector(".doc-preview-body")?.textContent).toBe(
      "John likes Sally. Acme Corp hired Edvard Vann last year.",
    );
  });

  it("caches previewed bodies instead of refetching", async () => {
    const row = root.querySelector('[data-doc-id="d1"]');
    row?.dispatchEvent(new Event("mouseenter"));
    await flush();
    row?.dispatchEvent(new Event("mouseenter"));
    await flush();
    expect(stub.callsTo("GET", "/api/documents/d1")).toHaveLength(1);
  });

  it("sets the drag payload to the document id", () => {
    const row = root.querySelector('[data-doc-id="d2"]');
    const setData = vi.fn();
    const event = new Event("dragstart", { bubbles: true });
    Object.defineProperty(event, "dataTransfer", { value: { setData } });
    row?.dispatchEvent(event);
    expect(setData).toHaveBeenCalledWith("text/plain", "d2");
  });

  it("shows a banner when the server is unreachable", async () => {
    const offline = new DocumentListPane(
      makeRoot(),
      new ApiClient("", async () => {
        throw new Error("connection refused");
      }),
    );
    await offline.refresh();
    const banner = offline.root.querySelector<HTMLElement>(".banner");
    expect(banner?.hidden).toBe(false);
    expect(banner?.textContent).toContain("Server unreachable");
  });
});
