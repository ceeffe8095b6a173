import { ApiClient } from "./api.js";
import { DocumentListPane } from "./documentList.js";
import { el } from "./dom.js";
import { GroundingPanel } from "./grounding.js";
import { KgPanel } from "./kgPanel.js";
import { PileBoard } from "./pileBoard.js";
import { TaskRunner } from "./taskRunner.js";

export interface App {
  documents: DocumentListPane;
  board: PileBoard;
  runner: TaskRunner;
  grounding: GroundingPanel;
  kg: KgPanel;
}

/**
 * Wire the five panes together. All cross-pane traffic flows through
 * callbacks: selecting a pile feeds the task runner, evidence feeds the
 * grounding panel, highlighted entities feed the KG panel, and KG source
 * chips pin the document list.
 */
export async function createApp(root: HTMLElement, api: ApiClient): Promise<App> {
  root.classList.add("docpile-app");
  const docsEl = el("section", "pane pane-documents");
  const boardEl = el("section", "pane pane-board");
  const runnerEl = el("section", "pane pane-tasks");
  const groundingEl = el("section", "pane pane-grounding");
  const kgEl = el("section", "pane pane-kg");
  root.append(docsEl, boardEl, runnerEl, groundingEl, kgEl);

  const documents = new DocumentListPane(docsEl, api);
  const kg = new KgPanel(kgEl, api, {
    onSourceChip: (docId) => {
      void documents.showOnly(docId);
    },
  });
  const grounding = new GroundingPanel(groundingEl, api, {
    onEntityClick: (entity) => {
      void kg.search(entity);
    },
    onPileUpdate: (pile) => {
      board.replacePile(pile);
    },
  });
  const board: PileBoard = new PileBoard(boardEl, api, {
    onSelectPile: (pile) => {
      runner.setPile(pile);
    },
  });
  const runner: TaskRunner = new TaskRunner(runnerEl, api, {
    onEvidence: (pileId, evidence) => {
      grounding.setEvidence(pileId, evidence);
      void board.refresh();
    },
    onGround: (action, pileId, evidence) => {
      grounding.setEvidence(pileId, evidence);
      if (action === "extract") void grounding.extract();
      if (action === "link") void grounding.link();
      if (action === "suggest") void grounding.suggest();
    },
  });

  const meta = await api.meta();
  runner.populate(meta);
  await documents.refresh();
  await board.refresh();
  return { documents, board, runner, grounding, kg };
}
