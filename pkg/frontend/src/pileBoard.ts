import { ApiClient } from "./api.js";
import { docColor } from "./colors.js";
import { clear, el } from "./dom.js";
import { DOC_DRAG_TYPE } from "./documentList.js";
import type { PileRecord } from "./types.js";

export interface PileBoardOptions {
  onSelectPile?: (pile: PileRecord | null) => void;
}

/**
 * Pile workspace: ordered rows of piles driven by the server's position
 * index. Documents are dragged in from the document list; each gesture
 * issues exactly one endpoint call, applies an optimistic update, and
 * reconciles to the server's returned pile (rolling back on error).
 * Mutations are serialized per pile so gestures queue instead of racing.
 */
export class PileBoard {
  readonly root: HTMLElement;

  piles: PileRecord[] = [];

  private readonly api: ApiClient;
  private readonly opts: PileBoardOptions;
  private readonly toast: HTMLElement;
  private readonly rowsEl: HTMLElement;
  private readonly nameInput: HTMLInputElement;
  private readonly queues = new Map<string, Promise<void>>();
  private readonly expandedDocs = new Set<string>();
  private readonly bodies = new Map<string, string>();
  private selectedPileId: string | null = null;

  constructor(root: HTMLElement, api: ApiClient, opts: PileBoardOptions = {}) {
    this.root = root;
    this.api = api;
    this.opts = opts;
    root.classList.add("pile-board");

    this.toast = el("div", "toast");
    this.toast.hidden = true;

    const controls = el("div", "board-controls");
    this.nameInput = el("input", "new-pile-name");
    this.nameInput.placeholder = "Pile name";
    const createBtn = el("button", "new-pile", "New pile");
    createBtn.type = "button";
    createBtn.addEventListener("click", () => {
      void this.createPile(this.nameInput.value.trim() || undefined);
    });
    controls.append(this.nameInput, createBtn);

    this.rowsEl = el("div", "pile-rows");
    root.append(this.toast, controls, this.rowsEl);
  }

  /** Resolves once every queued mutation has settled. */
  async idle(): Promise<void> {
    await Promise.all([...this.queues.values()]);
  }

  async refresh(): Promise<void> {
    try {
      const payload = await this.api.getWorkspace();
      this.piles = payload.workspace.piles;
    } catch (err) {
      this.showToast(`Could not load workspace: ${messageOf(err)}`);
      return;
    }
    if (this.selectedPileId !== null && this.findPile(this.selectedPileId) === undefined) {
      this.selectedPileId = null;
    }
    this.render();
    this.notifySelection();
  }

  selectedPile(): PileRecord | null {
    return this.selectedPileId === null ? null : (this.findPile(this.selectedPileId) ?? null);
  }

  selectPile(pileId: string | null): void {
    this.selectedPileId = pileId;
    this.render();
    this.notifySelection();
  }

  async createPile(name?: string): Promise<void> {
    try {
      const payload = await this.api.createPile(name);
      this.piles.push(payload.pile);
      this.nameInput.value = "";
      this.clearToast();
      this.render();
    } catch (err) {
      this.showToast(`Could not create pile: ${messageOf(err)}`);
    }
  }

  async rename(pileId: string, name: string): Promise<void> {
    try {
      const payload = await this.api.renamePile(pileId, name);
      this.replacePile(payload.pile);
      this.clearToast();
    } catch (err) {
      this.showToast(`Could not rename pile: ${messageOf(err)}`);
      this.render();
    }
  }

  async duplicate(pileId: string): Promise<void> {
    try {
      const payload = await this.api.duplicatePile(pileId);
      this.piles.push(payload.pile);
      this.clearToast();
      this.render();
    } catch (err) {
      this.showToast(`Could not duplicate pile: ${messageOf(err)}`);
    }
  }

  /** Move a pile one slot up or down and persist the full ordering. */
  async move(pileId: string, delta: -1 | 1): Promise<void> {
    const ordered = this.orderedPiles().map((pile) => pile.id);
    const index = ordered.indexOf(pileId);
    const target = index + delta;
    if (index < 0 || target < 0 || target >= ordered.length) return;
    const other = ordered[target];
    if (other === undefined) return;
    ordered[target] = pileId;
    ordered[index] = other;
    try {
      const payload = await this.api.reorderPiles(ordered);
      this.piles = payload.workspace.piles;
      this.clearToast();
      this.render();
    } catch (err) {
      this.showToast(`Could not reorder piles: ${messageOf(err)}`);
    }
  }

  removeDoc(pileId: string, docId: string): void {
    const pile = this.findPile(pileId);
    if (pile === undefined || !pile.docIds.includes(docId)) return;
    pile.docIds = pile.docIds.filter((id) => id !== docId);
    this.render();
    this.enqueue(pileId, async () => {
      try {
        const payload = await this.api.removeDocs(pileId, [docId]);
        this.replacePile(payload.pile);
        this.clearToast();
      } catch (err) {
        const current = this.findPile(pileId);
        if (current !== undefined && !current.docIds.includes(docId)) {
          current.docIds = [...current.docIds, docId];
        }
        this.showToast(`Could not remove ${docId}: ${messageOf(err)}`);
        this.render();
      }
    });
  }

  /**
   * Drop gesture: ignore documents already in the pile (with a cue), and
   * otherwise issue a single add-docs call after an optimistic badge bump.
   */
  handleDrop(pileId: string, docId: string): void {
    const pile = this.findPile(pileId);
    if (pile === undefined || docId === "") return;
    if (pile.docIds.includes(docId)) {
      this.showCue(pileId, `${docId} is already in this pile`);
      return;
    }
    pile.docIds = [...pile.docIds, docId];
    this.updateBadge(pileId);
    this.enqueue(pileId, async () => {
      try {
        const payload = await this.api.addDocs(pileId, [docId]);
        this.replacePile(payload.pile);
        this.clearToast();
      } catch (err) {
        const current = this.findPile(pileId);
        if (current !== undefined) {
          current.docIds = current.docIds.filter((id) => id !== docId);
        }
        this.showToast(`Could not add ${docId}: ${messageOf(err)}`);
        this.render();
      }
    });
  }

  private orderedPiles(): PileRecord[] {
    return [...this.piles].sort((a, b) => a.position - b.position);
  }

  private findPile(pileId: string): PileRecord | undefined {
    return this.piles.find((pile) => pile.id === pileId);
  }

  /** Reconcile one pile record to server state and re-render. */
  replacePile(pile: PileRecord): void {
    const index = this.piles.findIndex((existing) => existing.id === pile.id);
    if (index >= 0) {
      this.piles[index] = pile;
    } else {
      this.piles.push(pile);
    }
    this.render();
    if (pile.id === this.selectedPileId) {
      this.notifySelection();
    }
  }

  private notifySelection(): void {
    this.opts.onSelectPile?.(this.selectedPile());
  }

  private enqueue(pileId: string, task: () => Promise<void>): void {
    const prev = this.queues.get(pileId) ?? Promise.resolve();
    const next = prev.then(task);
    this.queues.set(
      pileId,
      next.catch(() => undefined),
    );
  }

  private showToast(message: string): void {
    this.toast.textContent = message;
    this.toast.hidden = false;
  }

  private clearToast(): void {
    this.toast.textContent = "";
    this.toast.hidden = true;
  }

  private showCue(pileId: string, message: string): void {
    const row = this.rowsEl.querySelector(`[data-pile-id="${pileId}"]`);
    if (row instanceof HTMLElement) {
      row.classList.add("already-in-pile");
      const note = row.querySelector(".pile-note");
      if (note instanceof HTMLElement) {
        note.textContent = message;
        note.hidden = false;
      }
    }
  }

  private updateBadge(pileId: string): void {
    const pile = this.findPile(pileId);
    const badge = this.rowsEl.querySelector(`[data-pile-id="${pileId}"] .pile-badge`);
    if (pile !== undefined && badge instanceof HTMLElement) {
      badge.textContent = String(pile.docIds.length);
    }
  }

  render(): void {
    clear(this.rowsEl);
    for (const pile of this.orderedPiles()) {
      this.rowsEl.append(this.makePileRow(pile));
    }
  }

  private makePileRow(pile: PileRecord): HTMLElement {
    const row = el("article", "pile");
    row.dataset.pileId = pile.id;
    if (pile.id === this.selectedPileId) {
      row.classList.add("selected");
    }
    row.addEventListener("dragover", (event: DragEvent) => {
      event.preventDefault();
      row.classList.add("drag-over");
    });
    row.addEventListener("dragleave", () => {
      row.classList.remove("drag-over");
    });
    row.addEventListener("drop", (event: DragEvent) => {
      event.preventDefault();
      row.classList.remove("drag-over");
      const docId = event.dataTransfer?.getData(DOC_DRAG_TYPE) ?? "";
      this.handleDrop(pile.id, docId);
    });

    const header = el("header", "pile-header");
    const nameBtn = el("button", "pile-name", pile.name);
    nameBtn.type = "button";
    nameBtn.addEventListener("click", () => {
      this.selectPile(pile.id);
    });
    const badge = el("span", "pile-badge", String(pile.docIds.length));
    const note = el("span", "pile-note");
    note.hidden = true;

    const renameBtn = el("button", "pile-rename", "rename");
    renameBtn.type = "button";
    renameBtn.addEventListener("click", () => {
      this.openRenameEditor(header, pile);
    });
    const duplicateBtn = el("button", "pile-duplicate", "duplicate");
    duplicateBtn.type = "button";
    duplicateBtn.addEventListener("click", () => {
      void this.duplicate(pile.id);
    });
    const upBtn = el("button", "pile-up", "up");
    upBtn.type = "button";
    upBtn.addEventListener("click", () => {
      void this.move(pile.id, -1);
    });
    const downBtn = el("button", "pile-down", "down");
    downBtn.type = "button";
    downBtn.addEventListener("click", () => {
      void this.move(pile.id, 1);
    });
    header.append(nameBtn, badge, note, renameBtn, duplicateBtn, upBtn, downBtn);

    const docs = el("ul", "pile-docs");
    for (const docId of pile.docIds) {
      docs.append(this.makeDocChip(pile, docId));
    }
    row.append(header, docs);
    return row;
  }

  private makeDocChip(pile: PileRecord, docId: string): HTMLLIElement {
    const chip = el("li", "pile-doc");
    chip.dataset.docId = docId;
    const swatch = el("span", "doc-swatch");
    swatch.style.setProperty("--doc-color", docColor(docId));
    const label = el("button", "pile-doc-label", docId);
    label.type = "button";
    label.addEventListener("click", () => {
      void this.toggleExpand(pile.id, docId);
    });
    const removeBtn = el("button", "pile-doc-remove", "x");
    removeBtn.type = "button";
    removeBtn.addEventListener("click", (event) => {
      event.stopPropagation();
      this.removeDoc(pile.id, docId);
    });
    chip.append(swatch, label, removeBtn);

    if (this.expandedDocs.has(expandKey(pile.id, docId))) {
      const body = this.bodies.get(docId);
      chip.append(el("pre", "pile-doc-text", body ?? "Loading..."));
    }
    return chip;
  }

  /** Expand a pile document in place so its source text can be read. */
  private async toggleExpand(pileId: string, docId: string): Promise<void> {
    const key = expandKey(pileId, docId);
    if (this.expandedDocs.has(key)) {
      this.expandedDocs.delete(key);
      this.render();
      return;
    }
    this.expandedDocs.add(key);
    if (!this.bodies.has(docId)) {
      try {
        const payload = await this.api.getDocument(docId);
        this.bodies.set(docId, payload.document.text);
      } catch (err) {
        this.bodies.set(docId, `Could not load document: ${messageOf(err)}`);
      }
    }
    this.render();
  }

  private openRenameEditor(header: HTMLElement, pile: PileRecord): void {
    const nameBtn = header.querySelector(".pile-name");
    if (!(nameBtn instanceof HTMLElement)) return;
    const input = el("input", "pile-rename-input");
    input.value = pile.name;
    let settled = false;
    const commit = (): void => {
      if (settled) return;
      settled = true;
      const name = input.value.trim();
      if (name && name !== pile.name) {
        void this.rename(pile.id, name);
      } else {
        this.render();
      }
    };
    input.addEventListener("keydown", (event: KeyboardEvent) => {
      if (event.key === "Enter") commit();
      if (event.key === "Escape") {
        settled = true;
        this.render();
      }
    });
    input.addEventListener("blur", commit);
    nameBtn.replaceWith(input);
    input.focus();
  }
}

function expandKey(pileId: string, docId: string): string {
  return JSON.stringify([pileId, docId]);
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
