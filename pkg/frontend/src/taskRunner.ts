import { ApiClient } from "./api.js";
import { clear, el, option } from "./dom.js";
import type { EvidenceRecord, MetaPayload, PileRecord, TaskParamsRecord } from "./types.js";

export type GroundAction = "extract" | "link" | "suggest";

export interface TaskRunnerOptions {
  onEvidence?: (pileId: string, evidence: EvidenceRecord) => void;
  onGround?: (action: GroundAction, pileId: string, evidence: EvidenceRecord) => void;
}

/**
 * Task editor for the selected pile: task kind selector, parameter inputs,
 * temperature slider bounded by the server-declared range, a verbatim
 * prompt preview, and the evidence history. The preview pane shows exactly
 * the prompt string returned by the server; the client never assembles
 * prompt text itself.
 */
export class TaskRunner {
  readonly root: HTMLElement;

  private readonly api: ApiClient;
  private readonly opts: TaskRunnerOptions;
  private readonly kindSelect: HTMLSelectElement;
  private readonly modelSelect: HTMLSelectElement;
  private readonly temperatureInput: HTMLInputElement;
  private readonly temperatureValue: HTMLElement;
  private readonly questionRow: HTMLElement;
  private readonly questionInput: HTMLInputElement;
  private readonly entityTypesRow: HTMLElement;
  private readonly entityTypesInput: HTMLInputElement;
  private readonly conceptsRow: HTMLElement;
  private readonly conceptsInput: HTMLInputElement;
  private readonly customTextRow: HTMLElement;
  private readonly customTextInput: HTMLTextAreaElement;
  private readonly previewBtn: HTMLButtonElement;
  private readonly previewEl: HTMLPreElement;
  private readonly previewWarning: HTMLElement;
  private readonly runBtn: HTMLButtonElement;
  private readonly message: HTMLElement;
  private readonly history: HTMLElement;
  private pile: PileRecord | null = null;

  constructor(root: HTMLElement, api: ApiClient, opts: TaskRunnerOptions = {}) {
    this.root = root;
    this.api = api;
    this.opts = opts;
    root.classList.add("task-runner");

    const controls = el("div", "task-controls");

    this.kindSelect = el("select", "kind-select");
    this.kindSelect.addEventListener("change", () => {
      this.updateParamVisibility();
      this.validate();
    });

    this.modelSelect = el("select", "model-select");
    this.modelSelect.append(option("default"));

    this.temperatureInput = el("input", "temperature");
    this.temperatureInput.type = "range";
    this.temperatureInput.step = "0.1";
    this.temperatureValue = el("span", "temperature-value");
    this.temperatureInput.addEventListener("input", () => {
      this.temperatureValue.textContent = this.temperatureInput.value;
    });

    controls.append(
      labeled("Task", this.kindSelect),
      labeled("Model", this.modelSelect),
      labeled("Temperature", this.temperatureInput),
      this.temperatureValue,
    );

    this.questionInput = el("input", "question-input");
    this.questionInput.placeholder = "Question";
    this.questionInput.addEventListener("input", () => {
      this.validate();
    });
    this.questionRow = labeled("Question", this.questionInput, "param-question");

    this.entityTypesInput = el("input", "entity-types-input");
    this.entityTypesInput.placeholder = "people, locations";
    this.entityTypesRow = labeled("Entity types", this.entityTypesInput, "param-entity-types");

    this.conceptsInput = el("input", "concepts-input");
    this.conceptsInput.placeholder = "ransom, harbor";
    this.conceptsRow = labeled("Concepts", this.conceptsInput, "param-concepts");

    this.customTextInput = el("textarea", "custom-text-input");
    this.customTextInput.placeholder = "Custom instruction";
    this.customTextInput.addEventListener("input", () => {
      this.validate();
    });
    this.customTextRow = labeled("Instruction", this.customTextInput, "param-custom-text");

    const actions = el("div", "task-actions");
    this.previewBtn = el("button", "preview-btn", "Preview prompt");
    this.previewBtn.type = "button";
    this.previewBtn.addEventListener("click", () => {
      void this.preview();
    });
    this.runBtn = el("button", "run-btn", "Run");
    this.runBtn.type = "button";
    this.runBtn.addEventListener("click", () => {
      void this.run();
    });
    actions.append(this.previewBtn, this.runBtn);

    this.message = el("div", "task-message");
    this.message.hidden = true;

    this.previewWarning = el("div", "preview-warning");
    this.previewWarning.hidden = true;
    this.previewEl = el("pre", "prompt-preview");

    this.history = el("div", "evidence-history");

    root.append(
      controls,
      this.questionRow,
      this.entityTypesRow,
      this.conceptsRow,
      this.customTextRow,
      actions,
      this.message,
      this.previewWarning,
      this.previewEl,
      this.history,
    );
    this.updateParamVisibility();
    this.validate();
  }

  /** Fill in server-declared choices: task kinds and temperature bounds. */
  populate(meta: MetaPayload): void {
    clear(this.kindSelect);
    for (const kind of meta.taskKinds) {
      this.kindSelect.append(option(kind));
    }
    this.temperatureInput.min = String(meta.temperatureRange[0]);
    this.temperatureInput.max = String(meta.temperatureRange[1]);
    this.temperatureInput.value = "0.7";
    this.temperatureValue.textContent = this.temperatureInput.value;
    this.updateParamVisibility();
    this.validate();
  }

  setPile(pile: PileRecord | null): void {
    this.pile = pile;
    this.renderHistory();
    this.validate();
  }

  currentKind(): string {
    return this.kindSelect.value;
  }

  setKind(kind: string): void {
    this.kindSelect.value = kind;
    this.updateParamVisibility();
    this.validate();
  }

  buildParams(): TaskParamsRecord {
    const kind = this.currentKind();
    const params: TaskParamsRecord = {
      temperature: Number(this.temperatureInput.value),
      model: this.modelSelect.value,
    };
    if (kind === "Answer" && this.questionInput.value.trim()) {
      params.question = this.questionInput.value;
    }
    if (kind === "Extract") {
      const types = splitList(this.entityTypesInput.value);
      if (types.length > 0) params.entityTypes = types;
    }
    if (kind === "Explain") {
      const concepts = splitList(this.conceptsInput.value);
      if (concepts.length > 0) params.concepts = concepts;
    }
    if (kind === "Custom" && this.customTextInput.value.trim()) {
      params.customText = this.customTextInput.value;
    }
    return params;
  }

  async preview(): Promise<void> {
    if (this.pile === null) {
      this.showMessage("Select a pile first.");
      return;
    }
    try {
      const payload = await this.api.previewTask(this.pile.id, this.currentKind(), this.buildParams());
      this.previewEl.textContent = payload.prompt;
      if (payload.warning !== undefined) {
        this.previewWarning.textContent = payload.warning;
        this.previewWarning.hidden = false;
      } else {
        this.previewWarning.textContent = "";
        this.previewWarning.hidden = true;
      }
    } catch (err) {
      this.showMessage(messageOf(err));
    }
  }

  async run(): Promise<void> {
    if (this.validate() !== null || this.pile === null) return;
    try {
      const payload = await this.api.runTask(this.pile.id, this.currentKind(), this.buildParams());
      this.appendEvidenceCard(payload.evidence);
      this.opts.onEvidence?.(this.pile.id, payload.evidence);
    } catch (err) {
      this.showMessage(messageOf(err));
    }
  }

  /**
   * Returns the current validation error (and mirrors it in the UI), or
   * null when the run button should be live.
   */
  validate(): string | null {
    let error: string | null = null;
    if (this.pile === null) {
      error = "Select a pile to run tasks.";
    } else if (this.currentKind() === "Answer" && !this.questionInput.value.trim()) {
      error = "Answer requires a question.";
    } else if (this.currentKind() === "Custom" && !this.customTextInput.value.trim()) {
      error = "Custom requires instruction text.";
    }
    this.runBtn.disabled = error !== null;
    if (error !== null) {
      this.message.textContent = error;
      this.message.hidden = false;
    } else {
      this.message.textContent = "";
      this.message.hidden = true;
    }
    return error;
  }

  private showMessage(text: string): void {
    this.message.textContent = text;
    this.message.hidden = false;
  }

  private updateParamVisibility(): void {
    const kind = this.currentKind();
    this.questionRow.hidden = kind !== "Answer";
    this.entityTypesRow.hidden = kind !== "Extract";
    this.conceptsRow.hidden = kind !== "Explain";
    this.customTextRow.hidden = kind !== "Custom";
  }

  private renderHistory(): void {
    clear(this.history);
    if (this.pile === null) return;
    for (const evidence of this.pile.evidence) {
      this.appendEvidenceCard(evidence);
    }
  }

  private appendEvidenceCard(evidence: EvidenceRecord): void {
    const pile = this.pile;
    if (pile === null) return;
    const card = el("article", "evidence-card");
    card.dataset.evidenceId = evidence.id;
    const header = el("header", "evidence-header");
    header.append(
      el("span", "evidence-kind", evidence.taskKind),
      el("span", "evidence-created", evidence.createdAt),
      el("span", "evidence-docs", evidence.docIds.join(", ")),
    );
    const response = el("pre", "evidence-response", evidence.response);

    const groundBtns = el("div", "evidence-actions");
    for (const action of ["extract", "link", "suggest"] as const) {
      const btn = el("button", `evidence-${action}`, action);
      btn.type = "button";
      btn.addEventListener("click", () => {
        this.opts.onGround?.(action, pile.id, evidence);
      });
      groundBtns.append(btn);
    }
    card.append(header, response, groundBtns);
    this.history.append(card);
  }
}

function labeled(text: string, control: HTMLElement, className?: string): HTMLElement {
  const row = el("label", className ?? "task-row");
  row.append(el("span", "row-label", text), control);
  return row;
}

function splitList(raw: string): string[] {
  return raw
    .split(",")
    .map((item) => item.trim())
    .filter((item) => item.length > 0);
}

function messageOf(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}
