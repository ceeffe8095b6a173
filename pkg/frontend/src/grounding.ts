import { ApiClient } from "./api.js";
import { docColor } from "./colors.js";
import { clear, el } from "./dom.js";
import type { EntitySpan, EvidenceRecord, SentenceLink, Suggestion } from "./types.js";
import type { PileRecord } from "./types.js";

export interface GroundingOptions {
  onEntityClick?: (entity: string) => void;
  onPileUpdate?: (pile: PileRecord) => void;
}

/**
 * Extract / Link / Suggest panel for one evidence record. Every span, link,
 * and suggestion rendered here is taken verbatim from the server response;
 * the client does no matching of its own. Entity highlights use the
 * server's character offsets unchanged, so the marked substrings are
 * exactly the server's matched text.
 */
export class GroundingPanel {
  readonly root: HTMLElement;

  private readonly api: ApiClient;
  private readonly opts: GroundingOptions;
  private readonly heading: HTMLElement;
  private readonly responseEl: HTMLElement;
  private readonly extractStatus: HTMLElement;
  private readonly linksEl: HTMLElement;
  private readonly linkStatus: HTMLElement;
  private readonly suggestionsEl: HTMLElement;
  private readonly suggestStatus: HTMLElement;
  private pileId: string | null = null;
  private evidence: EvidenceRecord | null = null;
  private pinnedLink: number | null = null;

  constructor(root: HTMLElement, api: ApiClient, opts: GroundingOptions = {}) {
    this.root = root;
    this.api = api;
    this.opts = opts;
    root.classList.add("grounding-panel");

    this.heading = el("div", "grounding-heading", "No evidence selected");
    this.responseEl = el("div", "grounded-response");
    this.extractStatus = el("div", "extract-status");
    this.extractStatus.hidden = true;
    this.linksEl = el("div", "sentence-links");
    this.linkStatus = el("div", "link-status");
    this.linkStatus.hidden = true;
    this.suggestionsEl = el("div", "suggestions");
    this.suggestStatus = el("div", "suggest-status");
    this.suggestStatus.hidden = true;

    root.append(
      this.heading,
      this.responseEl,
      this.extractStatus,
      this.linksEl,
      this.linkStatus,
      this.suggestionsEl,
      this.suggestStatus,
    );
  }

  /** Show an evidence record, including any annotations it already carries. */
  setEvidence(pileId: string, evidence: EvidenceRecord): void {
    this.pileId = pileId;
    this.evidence = evidence;
    this.heading.textContent = `${evidence.taskKind} evidence ${evidence.id}`;
    this.responseEl.textContent = evidence.response;
    this.extractStatus.hidden = true;
    this.pinnedLink = null;
    clear(this.linksEl);
    this.linkStatus.hidden = true;
    clear(this.suggestionsEl);
    this.suggestStatus.hidden = true;

    const saved = evidence.annotations;
    if (saved.entitySpans !== undefined) this.renderSpans(saved.entitySpans);
    if (saved.sentenceLinks !== undefined) this.renderLinks(saved.sentenceLinks);
    if (saved.suggestions !== undefined) this.renderSuggestions(saved.suggestions);
  }

  async extract(): Promise<void> {
    if (this.pileId === null || this.evidence === null) return;
    const payload = await this.api.extract(this.pileId, this.evidence.id);
    this.evidence = payload.evidence;
    this.renderSpans(payload.entitySpans);
  }

  async link(floor?: number): Promise<void> {
    if (this.pileId === null || this.evidence === null) return;
    const payload = await this.api.link(this.pileId, this.evidence.id, floor);
    this.evidence = payload.evidence;
    this.renderLinks(payload.sentenceLinks);
  }

  async suggest(k?: number): Promise<void> {
    if (this.pileId === null || this.evidence === null) return;
    const payload = await this.api.suggest(this.pileId, this.evidence.id, k);
    this.evidence = payload.evidence;
    this.renderSuggestions(payload.suggestions);
    this.opts.onPileUpdate?.(payload.pile);
  }

  /** Rebuild the response with <mark> highlights at the server's offsets. */
  private renderSpans(spans: EntitySpan[]): void {
    const evidence = this.evidence;
    if (evidence === null) return;
    const text = evidence.response;
    clear(this.responseEl);
    let cursor = 0;
    for (const span of spans) {
      if (span.start > cursor) {
        this.responseEl.append(document.createTextNode(text.slice(cursor, span.start)));
      }
      const mark = el("mark", "entity-span", text.slice(span.start, span.end));
      mark.dataset.start = String(span.start);
      mark.dataset.end = String(span.end);
      mark.dataset.entity = span.entity;
      mark.addEventListener("click", () => {
        this.opts.onEntityClick?.(span.entity);
      });
      this.responseEl.append(mark);
      cursor = span.end;
    }
    if (cursor < text.length) {
      this.responseEl.append(document.createTextNode(text.slice(cursor)));
    }
    if (spans.length === 0) {
      this.extractStatus.textContent = "No entities found in this response.";
      this.extractStatus.hidden = false;
    } else {
      this.extractStatus.textContent = "";
      this.extractStatus.hidden = true;
    }
  }

  /** One row per link, color-coded by source document. */
  private renderLinks(links: SentenceLink[]): void {
    clear(this.linksEl);
    this.pinnedLink = null;
    if (links.length === 0) {
      this.linkStatus.textContent = "No sentences linked above the similarity floor.";
      this.linkStatus.hidden = false;
      return;
    }
    this.linkStatus.textContent = "";
    this.linkStatus.hidden = true;
    links.forEach((link, index) => {
      const row = el(
        "div",
        "sentence-link",
        `Sentence ${link.responseSentenceIndex + 1} matches ${link.docId} sentence ` +
          `${link.docSentenceIndex + 1} (${link.score.toFixed(3)})`,
      );
      row.dataset.docId = link.docId;
      row.dataset.responseSentenceIndex = String(link.responseSentenceIndex);
      row.dataset.docSentenceIndex = String(link.docSentenceIndex);
      row.style.setProperty("--doc-color", docColor(link.docId));
      row.addEventListener("mouseenter", () => {
        this.focusLink(index);
      });
      row.addEventListener("mouseleave", () => {
        this.focusLink(this.pinnedLink);
      });
      row.addEventListener("click", () => {
        this.pinnedLink = this.pinnedLink === index ? null : index;
        this.focusLink(this.pinnedLink);
      });
      this.linksEl.append(row);
    });
  }

  /** Dim every link row except the focused one (null restores all). */
  private focusLink(index: number | null): void {
    const rows = Array.from(this.linksEl.children);
    rows.forEach((row, i) => {
      if (!(row instanceof HTMLElement)) return;
      row.classList.toggle("focused", index !== null && i === index);
      row.classList.toggle("dimmed", index !== null && i !== index);
    });
  }

  private renderSuggestions(suggestions: Suggestion[]): void {
    clear(this.suggestionsEl);
    let anyAdded = false;
    for (const suggestion of suggestions) {
      const chip = el(
        "span",
        "suggestion",
        `${suggestion.docId} (${suggestion.score.toFixed(3)})`,
      );
      chip.dataset.docId = suggestion.docId;
      if (suggestion.added) {
        chip.classList.add("added");
        anyAdded = true;
      }
      if (suggestion.alreadyInPile) {
        chip.classList.add("already");
      }
      this.suggestionsEl.append(chip);
    }
    if (!anyAdded) {
      this.suggestStatus.textContent = "No new documents to add.";
      this.suggestStatus.hidden = false;
    } else {
      this.suggestStatus.textContent = "";
      this.suggestStatus.hidden = true;
    }
  }
}
