import { ApiClient } from "./api.js";
import { docColor } from "./colors.js";
import { clear, el } from "./dom.js";
import type { EntityContextPayload, RankedFact } from "./types.js";

/** Hard ceiling on rendered facts, matching the server's default fact cap. */
export const MAX_FACTS = 5;

export interface KgPanelOptions {
  onSourceChip?: (docId: string) => void;
}

/**
 * Knowledge-graph panel: free-text entity search, a fact list capped at
 * MAX_FACTS rows, per-fact source-document chips, and connected/similar
 * entity chips. Entities inside facts and chips are clickable, so the graph
 * can be traversed without typing.
 */
export class KgPanel {
  readonly root: HTMLElement;

  private readonly api: ApiClient;
  private readonly opts: KgPanelOptions;
  private readonly searchInput: HTMLInputElement;
  private readonly heading: HTMLElement;
  private readonly status: HTMLElement;
  private readonly factsEl: HTMLUListElement;
  private readonly connectedEl: HTMLElement;
  private readonly similarEl: HTMLElement;

  constructor(root: HTMLElement, api: ApiClient, opts: KgPanelOptions = {}) {
    this.root = root;
    this.api = api;
    this.opts = opts;
    root.classList.add("kg-panel");

    const controls = el("div", "kg-controls");
    this.searchInput = el("input", "kg-search");
    this.searchInput.type = "search";
    this.searchInput.placeholder = "Search entities";
    this.searchInput.addEventListener("keydown", (event: KeyboardEvent) => {
      if (event.key === "Enter") {
        void this.search(this.searchInput.value);
      }
    });
    const searchBtn = el("button", "kg-search-btn", "Search");
    searchBtn.type = "button";
    searchBtn.addEventListener("click", () => {
      void this.search(this.searchInput.value);
    });
    controls.append(this.searchInput, searchBtn);

    this.heading = el("div", "kg-heading");
    this.status = el("div", "kg-status");
    this.status.hidden = true;
    this.factsEl = el("ul", "fact-list");
    this.connectedEl = el("div", "connected-chips");
    this.similarEl = el("div", "similar-chips");

    root.append(controls, this.heading, this.status, this.factsEl, this.connectedEl, this.similarEl);
  }

  async search(name: string): Promise<void> {
    const query = name.trim();
    if (!query) {
      this.showStatus("Enter an entity name to search.");
      return;
    }
    this.searchInput.value = query;
    let facts: RankedFact[];
    let context: EntityContextPayload;
    try {
      const [factsPayload, contextPayload] = await Promise.all([
        this.api.entityFacts(query, { k: MAX_FACTS }),
        this.api.entityContext(query, MAX_FACTS, MAX_FACTS),
      ]);
      facts = factsPayload.facts;
      context = contextPayload;
    } catch (err) {
      this.showStatus(err instanceof Error ? err.message : String(err));
      return;
    }
    this.heading.textContent = query;
    this.renderFacts(query, facts);
    this.renderContext(context);
  }

  private showStatus(text: string): void {
    this.status.textContent = text;
    this.status.hidden = false;
  }

  private renderFacts(query: string, facts: RankedFact[]): void {
    clear(this.factsEl);
    // Request k=MAX_FACTS and slice again here: this panel never shows more
    // than MAX_FACTS rows no matter what the server sends back.
    const shown = facts.slice(0, MAX_FACTS);
    if (shown.length === 0) {
      this.showStatus(`No facts found for "${query}".`);
      return;
    }
    this.status.textContent = "";
    this.status.hidden = true;
    for (const fact of shown) {
      this.factsEl.append(this.makeFactRow(fact));
    }
  }

  private makeFactRow(fact: RankedFact): HTMLLIElement {
    const row = el("li", "fact");
    row.dataset.factId = fact.id;

    const subject = this.entityButton(fact.subject);
    const predicate = el("span", "fact-predicate", fact.predicate);
    const object = this.entityButton(fact.object);
    const support = el("span", "fact-support", `support ${fact.support}`);
    row.append(subject, predicate, object, support);

    const sources = el("span", "fact-sources");
    for (const docId of fact.sources) {
      const chip = el("button", "source-chip", docId);
      chip.type = "button";
      chip.dataset.docId = docId;
      chip.style.setProperty("--doc-color", docColor(docId));
      chip.addEventListener("click", () => {
        this.opts.onSourceChip?.(docId);
      });
      sources.append(chip);
    }
    row.append(sources);
    return row;
  }

  private entityButton(entity: string): HTMLButtonElement {
    const btn = el("button", "fact-entity", entity);
    btn.type = "button";
    btn.addEventListener("click", () => {
      void this.search(entity);
    });
    return btn;
  }

  private renderContext(context: EntityContextPayload): void {
    clear(this.connectedEl);
    clear(this.similarEl);
    if (context.connected.length > 0) {
      this.connectedEl.append(el("span", "chip-label", "connected:"));
      for (const item of context.connected) {
        const chip = el("button", "connected-chip", `${item.entity} (${item.degree})`);
        chip.type = "button";
        chip.addEventListener("click", () => {
          void this.search(item.entity);
        });
        this.connectedEl.append(chip);
      }
    }
    if (context.similar.length > 0) {
      this.similarEl.append(el("span", "chip-label", "similar:"));
      for (const item of context.similar) {
        const chip = el("button", "similar-chip", `${item.entity} (${item.score.toFixed(2)})`);
        chip.type = "button";
        chip.addEventListener("click", () => {
          void this.search(item.entity);
        });
        this.similarEl.append(chip);
      }
    }
  }
}
