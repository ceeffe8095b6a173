import { ApiClient } from "./api.js";
import { docColor } from "./colors.js";
import { clear, el, option } from "./dom.js";
import { GROUP_KEYS } from "./types.js";
import type { DocumentMeta, DocumentsPayload } from "./types.js";

/** MIME type used to carry a document id through a drag gesture. */
export const DOC_DRAG_TYPE = "text/plain";

/**
 * Left-hand document list: filter, group, sort, and hover-to-preview. All
 * filtering, grouping, and sorting is delegated to GET /api/documents; the
 * pane only renders what the server returns. Rows are drag sources for the
 * pile board.
 */
export class DocumentListPane {
  readonly root: HTMLElement;

  private readonly api: ApiClient;
  private readonly filterInput: HTMLInputElement;
  private readonly groupSelect: HTMLSelectElement;
  private readonly sortSelect: HTMLSelectElement;
  private readonly directionSelect: HTMLSelectElement;
  private readonly banner: HTMLElement;
  private readonly pinNote: HTMLElement;
  private readonly listEl: HTMLUListElement;
  private readonly previewTitle: HTMLElement;
  private readonly previewBody: HTMLElement;
  private readonly bodies = new Map<string, string>();
  private pinnedDocId: string | null = null;

  constructor(root: HTMLElement, api: ApiClient) {
    this.root = root;
    this.api = api;
    root.classList.add("document-list");

    this.banner = el("div", "banner");
    this.banner.hidden = true;

    const controls = el("div", "list-controls");
    this.filterInput = el("input", "filter-input");
    this.filterInput.type = "search";
    this.filterInput.placeholder = "Filter documents";
    this.filterInput.addEventListener("input", () => {
      void this.refresh();
    });

    this.groupSelect = el("select", "group-select");
    this.groupSelect.append(option("", "No grouping"));
    for (const key of GROUP_KEYS) {
      this.groupSelect.append(option(key, `Group by ${key}`));
    }
    this.groupSelect.addEventListener("change", () => {
      void this.refresh();
    });

    this.sortSelect = el("select", "sort-select");
    this.sortSelect.append(option("", "No sorting"));
    for (const key of GROUP_KEYS) {
      this.sortSelect.append(option(key, `Sort by ${key}`));
    }
    this.sortSelect.addEventListener("change", () => {
      void this.refresh();
    });

    this.directionSelect = el("select", "direction-select");
    this.directionSelect.append(option("asc"), option("desc"));
    this.directionSelect.addEventListener("change", () => {
      void this.refresh();
    });

    controls.append(this.filterInput, this.groupSelect, this.sortSelect, this.directionSelect);

    this.pinNote = el("div", "pin-note");
    this.pinNote.hidden = true;

    this.listEl = el("ul", "doc-rows");

    const preview = el("div", "doc-preview");
    this.previewTitle = el("div", "doc-preview-title");
    this.previewBody = el("pre", "doc-preview-body");
    preview.append(this.previewTitle, this.previewBody);

    root.append(this.banner, controls, this.pinNote, this.listEl, preview);
  }

  async refresh(): Promise<void> {
    let payload: DocumentsPayload;
    try {
      payload = await this.api.listDocuments({
        filter: this.filterInput.value || undefined,
        groupBy: this.groupSelect.value || undefined,
        sortBy: this.sortSelect.value || undefined,
        direction: this.directionSelect.value === "desc" ? "desc" : "asc",
      });
    } catch (err) {
      this.banner.textContent = `Server unreachable: ${err instanceof Error ? err.message : String(err)}`;
      this.banner.hidden = false;
      return;
    }
    this.banner.hidden = true;
    this.render(payload);
  }

  /** Pin the list to a single document (used by KG source chips). */
  async showOnly(docId: string): Promise<void> {
    this.pinnedDocId = docId;
    await this.refresh();
  }

  async clearPin(): Promise<void> {
    this.pinnedDocId = null;
    await this.refresh();
  }

  private render(payload: DocumentsPayload): void {
    clear(this.listEl);
    const visible = (doc: DocumentMeta): boolean =>
      this.pinnedDocId === null || doc.id === this.pinnedDocId;

    if (this.pinnedDocId !== null) {
      this.pinNote.hidden = false;
      clear(this.pinNote);
      this.pinNote.append(el("span", "", `Showing only ${this.pinnedDocId} `));
      const clearBtn = el("button", "clear-pin", "show all");
      clearBtn.type = "button";
      clearBtn.addEventListener("click", () => {
        void this.clearPin();
      });
      this.pinNote.append(clearBtn);
    } else {
      this.pinNote.hidden = true;
    }

    const byId = new Map(payload.documents.map((doc) => [doc.id, doc]));
    if (payload.groups !== undefined) {
      for (const group of payload.groups) {
        const docs = group.docIds
          .map((id) => byId.get(id))
          .filter((doc): doc is DocumentMeta => doc !== undefined && visible(doc));
        if (docs.length === 0) continue;
        const details = el("details", "doc-group");
        details.open = true;
        details.append(el("summary", "doc-group-label", `${group.label} (${docs.length})`));
        const inner = el("ul", "doc-group-rows");
        for (const doc of docs) {
          inner.append(this.makeRow(doc));
        }
        details.append(inner);
        const holder = el("li", "doc-group-item");
        holder.append(details);
        this.listEl.append(holder);
      }
      return;
    }

    for (const doc of payload.documents) {
      if (!visible(doc)) continue;
      this.listEl.append(this.makeRow(doc));
    }
  }

  private makeRow(doc: DocumentMeta): HTMLLIElement {
    const row = el("li", "doc-row");
    row.dataset.docId = doc.id;
    row.draggable = true;
    row.addEventListener("dragstart", (event: DragEvent) => {
      event.dataTransfer?.setData(DOC_DRAG_TYPE, doc.id);
    });
    row.addEventListener("mouseenter", () => {
      void this.preview(doc);
    });
    row.addEventListener("click", () => {
      void this.preview(doc);
    });

    const swatch = el("span", "doc-swatch");
    swatch.style.setProperty("--doc-color", docColor(doc.id));
    const title = el("span", "doc-title", doc.title);
    const length = el("span", "doc-length", `${doc.length} words`);
    row.append(swatch, title, length);
    if (doc.topic !== undefined) {
      row.append(el("span", "doc-topic", doc.topic));
    }
    return row;
  }

  private async preview(doc: DocumentMeta): Promise<void> {
    this.previewTitle.textContent = doc.title;
    let body = this.bodies.get(doc.id);
    if (body === undefined) {
      try {
        const payload = await this.api.getDocument(doc.id);
        body = payload.document.text;
        this.bodies.set(doc.id, body);
      } catch (err) {
        this.previewBody.textContent = `Could not load document: ${
          err instanceof Error ? err.message : String(err)
        }`;
        return;
      }
    }
    this.previewBody.textContent = body;
  }
}
